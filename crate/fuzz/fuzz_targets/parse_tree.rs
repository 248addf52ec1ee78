#![no_main]

use libfuzzer_sys::fuzz_target;
use vsparse_core::io::{parse_tree, tree_to_json};

fuzz_target!(|data: &str| {
    if let Ok((names, tree)) = parse_tree(data, "fuzz") {
        let again =
            parse_tree(&tree_to_json(&names, &tree), "round trip").expect("serialized tree parses");
        assert_eq!(again, (names, tree));
    }
});
