#![no_main]

use libfuzzer_sys::fuzz_target;
use vsparse_core::graph::generators;
use vsparse_core::io::{demand_to_csv, parse_demand_csv};

fuzz_target!(|data: &str| {
    let g = generators::cycle(4, &[0, 2]).unwrap();
    if let Ok(dem) = parse_demand_csv(data, "fuzz", &g) {
        let again = parse_demand_csv(&demand_to_csv(&g, &dem), "round trip", &g)
            .expect("serialized demand parses");
        assert_eq!(again, dem);
    }
});
