#![no_main]

use libfuzzer_sys::fuzz_target;
use routerisk_core::fixtures::table1;
use routerisk_core::ingest::{parse_link_records, with_intercept};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = parse_link_records(text) {
        let ds = with_intercept(&table1()).expect("bundled table");
        for r in &records {
            if let Ok(z) = r.covariate_vector(&ds) {
                assert_eq!(z.dim(), ds.dim());
            }
        }
    }
});
