#![no_main]

use libfuzzer_sys::fuzz_target;
use vsparse_core::io::{metric_to_json, parse_metric};

fuzz_target!(|data: &str| {
    if let Ok(m) = parse_metric(data, "fuzz") {
        let again =
            parse_metric(&metric_to_json(&m), "round trip").expect("serialized metric parses");
        assert_eq!(again, m);
    }
});
