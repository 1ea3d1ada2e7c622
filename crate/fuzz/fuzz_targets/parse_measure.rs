#![no_main]

use libfuzzer_sys::fuzz_target;
use unitrans::io::{format_measure, parse_measure};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mu) = parse_measure(text) {
        assert!(mu.atoms().iter().all(|(_, w)| *w >= 0.0));
        let again = parse_measure(&format_measure(&mu)).expect("formatted output parses");
        assert_eq!(again.atoms(), mu.atoms());
    }
});
