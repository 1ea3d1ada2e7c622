#![no_main]

use libfuzzer_sys::fuzz_target;
use num_complex::Complex64;
use unitrans::io::parse_k_table;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(k) = parse_k_table(text) {
        for j in 0..16 {
            let v = k.at(Complex64::from_polar(1.0, j as f64 * 0.4));
            assert!(v > 1.0 && v.is_finite(), "K = {v}");
        }
    }
});
