#![no_main]

use libfuzzer_sys::fuzz_target;
use opuc_meso::config::parse_complex;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(z) = parse_complex(text) {
        assert!(z.re.is_finite() && z.im.is_finite());
        // The canonical spelling reads back to the same value.
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        let canonical = format!("{:?}{sign}{:?}i", z.re, z.im.abs());
        assert_eq!(parse_complex(&canonical).unwrap(), z);
    }
});
