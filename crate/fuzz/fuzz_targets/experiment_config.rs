#![no_main]

use libfuzzer_sys::fuzz_target;
use opuc_meso::config::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ExperimentConfig::parse(text) else { return };
    let again = ExperimentConfig::parse(&cfg.to_json()).expect("valid configs round trip");
    assert_eq!(cfg.hash(), again.hash());
});
