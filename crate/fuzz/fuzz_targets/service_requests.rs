#![no_main]

use libfuzzer_sys::fuzz_target;
use routerisk_service::{parse_body, run_plan, AdvanceRequest, AssessRequest, CreateSessionRequest, PlanRequest};

fuzz_target!(|data: &[u8]| {
    if let Ok(req) = parse_body::<AssessRequest>(data) {
        let _ = req.config.validate();
    }
    if let Ok(req) = parse_body::<PlanRequest>(data) {
        if req.network.links.len() <= 14 {
            let _ = run_plan(&req);
        }
    }
    if let Ok(req) = parse_body::<CreateSessionRequest>(data) {
        let _ = req.plan.resolve_marginals();
    }
    let _ = parse_body::<AdvanceRequest>(data);
});
