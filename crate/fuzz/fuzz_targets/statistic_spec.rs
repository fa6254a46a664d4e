#![no_main]

use libfuzzer_sys::fuzz_target;
use opuc_meso::config::StatisticSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = StatisticSpec::parse(text) else { return };
    let again = StatisticSpec::parse(&serde_json::to_string(&spec).unwrap()).expect("round trip");
    assert_eq!(spec, again);
    if let Ok(stat) = spec.build(0.5, 1.0, 64) {
        for k in 0..16 {
            let _ = stat.value(k as f64 * 0.4);
        }
    }
});
