#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // Parsing must never panic, and neither may assembling a description
    // that parsed successfully.
    if let Ok(spec) = qnet::netdsl::parse_network(data) {
        let _ = qnet::netdsl::build_graph(&spec);
    }
});
