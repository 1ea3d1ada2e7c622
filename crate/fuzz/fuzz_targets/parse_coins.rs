#![no_main]

use libfuzzer_sys::fuzz_target;
use unitrans::io::{format_coins, parse_coins};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(seq) = parse_coins(text) {
        let again = parse_coins(&format_coins(&seq)).expect("formatted output parses");
        assert!(again.iter().eq(seq.iter()));
    }
});
