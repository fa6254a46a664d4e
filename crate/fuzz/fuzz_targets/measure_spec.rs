#![no_main]

use libfuzzer_sys::fuzz_target;
use opuc_meso::config::MeasureSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = MeasureSpec::parse(text) else { return };
    // Accepted specs serialize and parse back to themselves.
    let again = MeasureSpec::parse(&serde_json::to_string(&spec).unwrap()).expect("round trip");
    assert_eq!(spec, again);
    // Building may reject parameters but must not panic; accepted
    // sequences stay inside the disk.
    if let Ok(seq) = spec.sequence() {
        if let Ok(alphas) = seq.alphas(8) {
            assert!(alphas.iter().all(|a| a.norm() < 1.0));
        }
    }
});
