#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(spec) = qnet::netdsl::parse_network(data) {
        let canon = spec.to_text();
        let again = qnet::netdsl::parse_network(&canon)
            .expect("canonical form must reparse");
        assert!(spec.structurally_eq(&again), "round trip changed the description");
        assert_eq!(canon, again.to_text(), "canonical form must be a fixpoint");
    }
});
