#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = nuar_core::parse::parse_eigen_spec_json(s) {
            let _ = spec.limit_eigenvalues();
        }
    }
});
