#![no_main]

use libfuzzer_sys::fuzz_target;
use unitrans::io::{format_verblunsky, parse_verblunsky};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for half_line in [false, true] {
        if let Ok(seq) = parse_verblunsky(text, half_line) {
            // whatever parses must survive a round trip unchanged
            let again = parse_verblunsky(&format_verblunsky(&seq), half_line).expect("formatted output parses");
            assert!(again.iter().eq(seq.iter()));
            assert!(seq.iter().all(|(_, a)| a.norm() < 1.0));
        }
    }
});
