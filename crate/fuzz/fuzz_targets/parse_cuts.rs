#![no_main]

use libfuzzer_sys::fuzz_target;
use vsparse_core::io::{cuts_to_json, parse_cuts};

fuzz_target!(|data: &str| {
    let terminals: Vec<String> = ["t0", "t1", "t2"].map(String::from).to_vec();
    if let Ok(cuts) = parse_cuts(data, "fuzz", &terminals) {
        let again = parse_cuts(&cuts_to_json(&terminals, &cuts), "round trip", &terminals)
            .expect("serialized cuts parse");
        assert_eq!(again, cuts);
    }
});
