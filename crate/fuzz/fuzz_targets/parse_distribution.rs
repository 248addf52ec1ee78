#![no_main]

use libfuzzer_sys::fuzz_target;
use vsparse_core::graph::generators;
use vsparse_core::io::{distribution_to_json, parse_distribution};

fuzz_target!(|data: &str| {
    let g = generators::cycle(4, &[0, 2]).unwrap();
    if let Ok(dist) = parse_distribution(data, "fuzz", &g) {
        let again = parse_distribution(&distribution_to_json(&g, &dist), "round trip", &g)
            .expect("serialized distribution parses");
        assert_eq!(again, dist);
    }
});
