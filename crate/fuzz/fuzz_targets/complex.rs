#![no_main]

use libfuzzer_sys::fuzz_target;
use nuar_core::parse::parse_complex;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(z) = parse_complex(s) {
            // a parsed value must survive a round trip through its own rendering
            let back = parse_complex(&format!("{}{:+}i", z.re, z.im)).expect("rendered value parses");
            assert_eq!(back, z);
        }
    }
});
