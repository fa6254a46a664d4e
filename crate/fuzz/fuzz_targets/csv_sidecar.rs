#![no_main]

use libfuzzer_sys::fuzz_target;
use opuc_meso::io::{read_csv, read_sidecar};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = read_csv(text) {
        assert!(table.rows.iter().all(|r| r.len() == table.header.len()));
        assert_eq!(read_csv(&table.to_csv()).expect("written tables read back"), table);
    }
    if let Ok(side) = read_sidecar(text) {
        assert_eq!(read_sidecar(&side.to_json()).expect("sidecars round trip"), side);
    }
});
