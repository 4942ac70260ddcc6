#![no_main]

use libfuzzer_sys::fuzz_target;
use nuar_core::parse::parse_path_csv;

fuzz_target!(|data: &[u8]| {
    let Some((&first, rest)) = data.split_first() else {
        return;
    };
    let p = 1 + usize::from(first % 6);
    let Ok(s) = std::str::from_utf8(rest) else {
        return;
    };
    if let Ok(path) = parse_path_csv(s, p) {
        let again = parse_path_csv(&path.to_csv(), p).expect("written csv parses");
        assert_eq!(again.x(), path.x());
        let _ = nuar_core::estimation::ols(&path);
    }
});
