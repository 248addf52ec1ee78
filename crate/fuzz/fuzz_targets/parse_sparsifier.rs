#![no_main]

use libfuzzer_sys::fuzz_target;
use vsparse_core::io::{parse_sparsifier, sparsifier_to_json};

fuzz_target!(|data: &str| {
    if let Ok((h, alpha)) = parse_sparsifier(data, "fuzz") {
        let again = parse_sparsifier(&sparsifier_to_json(&h, alpha), "round trip")
            .expect("serialized sparsifier parses");
        assert_eq!(again, (h, alpha));
    }
});
