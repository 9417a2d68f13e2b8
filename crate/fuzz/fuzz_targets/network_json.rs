#![no_main]

use libfuzzer_sys::fuzz_target;
use routerisk_core::netmodel::{enumerate_routes, validate_network, Network};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = Network::from_json(text) {
        let violations = validate_network(&net);
        // path counts grow factorially with density
        if violations.is_empty() && net.links.len() <= 14 {
            if let Ok(routes) = enumerate_routes(&net) {
                assert!(routes.iter().all(|r| net.is_route(r)));
            }
        }
        let _ = Network::from_json(&net.to_json()).expect("serialized network parses");
    }
});
