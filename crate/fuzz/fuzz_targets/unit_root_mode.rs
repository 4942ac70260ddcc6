#![no_main]

use libfuzzer_sys::fuzz_target;
use nuar_core::parse::parse_unit_root_mode;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(mode) = parse_unit_root_mode(s) {
            assert_eq!(parse_unit_root_mode(mode.label()).unwrap(), mode);
        }
    }
});
