#![no_main]

use libfuzzer_sys::fuzz_target;
use routerisk_core::ingest::{parse_regional_csv, with_intercept};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ds) = parse_regional_csv(text) {
        let again = parse_regional_csv(&ds.to_csv()).expect("canonical form parses");
        assert_eq!(again, ds);
        let _ = with_intercept(&ds);
    }
});
