#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let _ = qnet::netdsl::parse_dmatrix(data);
});
