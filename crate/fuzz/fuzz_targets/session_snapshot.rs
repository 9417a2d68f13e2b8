#![no_main]

use libfuzzer_sys::fuzz_target;
use routerisk_service::store::{decode_snapshot, encode_snapshot};

fuzz_target!(|data: &[u8]| {
    if let Ok(session) = decode_snapshot(data) {
        let again = decode_snapshot(encode_snapshot(&session).as_bytes()).expect("re-encoded snapshot parses");
        assert_eq!(again, session);
        let _ = session.continuations();
        let _ = session.visited_nodes();
    }
});
