#![no_main]

use libfuzzer_sys::fuzz_target;
use vsparse_cli::parse_cube_cut;

fuzz_target!(|data: &str| {
    if let Ok(cut) = parse_cube_cut(data) {
        assert_eq!(parse_cube_cut(&cut.name()).ok(), Some(cut));
    }
});
