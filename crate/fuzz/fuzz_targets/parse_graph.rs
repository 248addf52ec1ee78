#![no_main]

use libfuzzer_sys::fuzz_target;
use vsparse_core::io::{graph_to_json, parse_graph};

fuzz_target!(|data: &str| {
    if let Ok(g) = parse_graph(data, "fuzz") {
        let again = parse_graph(&graph_to_json(&g), "round trip").expect("serialized graph parses");
        assert_eq!(again, g);
    }
});
