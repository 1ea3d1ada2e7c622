use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use unitrans::fibonacci::{
    beta_from_gammas, bound_at, fib_word, fibonacci_number, subshift_letter, FibonacciParams, KOfZ, Letter,
};

#[test]
fn first_words() {
    let words: Vec<String> = (0..5).map(|n| fib_word(n).unwrap().to_string()).collect();
    assert_eq!(words, ["a", "ab", "aba", "abaab", "abaababa"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_recursion(n in 1usize..24) {
        let (prev, cur, next) = (fib_word(n - 1).unwrap(), fib_word(n).unwrap(), fib_word(n + 1).unwrap());
        let mut joined = cur.symbols().to_vec();
        joined.extend_from_slice(prev.symbols());
        prop_assert_eq!(next.symbols(), &joined[..]);
        prop_assert_eq!(next.len() as u64, fibonacci_number(n + 3).unwrap());
    }

    #[test]
    fn subshift_extends_the_fixed_point(start in 0usize..5000, len in 1usize..200) {
        let word = fib_word(20).unwrap();
        for n in start..start + len {
            prop_assert_eq!(subshift_letter(n as i64), word.symbols()[n]);
        }
    }

    #[test]
    fn subshift_letter_frequency(start in -100_000i64..100_000) {
        let count = (start..start + 10_000).filter(|&n| subshift_letter(n) == Letter::A).count();
        // the frequency of a is 1/phi, with bounded discrepancy
        prop_assert!((count as f64 - 10_000.0 / unitrans::fibonacci::GOLDEN_MEAN).abs() < 3.0);
    }

    #[test]
    fn beta_is_monotone_in_the_gammas(g1 in 1e-6..5.0f64, g2 in 1e-6..50.0f64, d in 1e-6..5.0f64) {
        let b = beta_from_gammas(g1, g2);
        prop_assert!(b > 0.0);
        // below 1 exactly when gamma1 < 2 gamma2 + 1, which the pipeline's gamma1 <= 0.008 always meets
        prop_assert_eq!(b < 1.0, g1 < 2.0 * g2 + 1.0);
        prop_assert!(beta_from_gammas(g1, g2 + d) <= b);
        prop_assert!(beta_from_gammas(g1 + d, g2) >= b);
    }

    #[test]
    fn bound_rows_are_consistent(ta in -1.5..1.5f64, tb in -1.5..1.5f64, t in 0.0..TAU, k in 1.5..64.0f64) {
        let params = FibonacciParams::new(ta, tb).unwrap().with_k(KOfZ::Constant(k));
        let row = bound_at(Complex64::from_polar(1.0, t), &params).unwrap();
        prop_assert!(row.gamma1 > 0.0 && row.gamma2 > 0.0);
        prop_assert!(row.beta > 0.0 && row.beta < 1.0);
        prop_assert!((row.beta - beta_from_gammas(row.gamma1, row.gamma2)).abs() <= 1e-15);
        prop_assert!((row.gamma2 - 4.0 * k.log2()).abs() <= 1e-12);
    }
}
