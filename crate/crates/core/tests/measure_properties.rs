use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;

use unitrans::cmv::DiscreteMeasure;
use unitrans::measure::{
    alpha_derivative_probe, caratheodory_f, dyadic_quantities, fejer_integral, strichartz_average, ArcPartition,
};

fn measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((0.0..TAU, 0.01..1.0f64), 1..max_atoms)
        .prop_map(|atoms| DiscreteMeasure::new(atoms.into_iter().map(|(t, w)| (Complex64::from_polar(1.0, t), w)).collect()).unwrap())
}

fn unit() -> impl Strategy<Value = Complex64> {
    (0.0..TAU).prop_map(|t| Complex64::from_polar(1.0, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fejer_at_horizon_one_is_the_mass(mu in measure(40), z in unit()) {
        prop_assert_eq!(fejer_integral(&mu, z, 1).unwrap(), mu.total_mass());
    }

    #[test]
    fn fejer_is_nonnegative(mu in measure(40), z in unit(), k in 1u64..200) {
        prop_assert!(fejer_integral(&mu, z, k).unwrap() >= -1e-12);
    }

    #[test]
    fn strichartz_at_horizon_one(mu in measure(30), f in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 30)) {
        let f: Vec<Complex64> = f[..mu.len()].iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let direct: Complex64 = mu.atoms().iter().zip(&f).map(|(&(_, w), fm)| fm * w).sum();
        let avg = strichartz_average(&mu, &f, 1).unwrap();
        prop_assert!((avg - direct.norm_sqr()).abs() <= 1e-14 * (1.0 + avg));
    }

    #[test]
    fn caratheodory_has_positive_real_part(mu in measure(40), z in unit(), r in 0.0..0.999f64) {
        let f = caratheodory_f(&mu, z * r).unwrap();
        prop_assert!(f.re > 0.0);
        // F(0) is the total mass
        let f0 = caratheodory_f(&mu, Complex64::new(0.0, 0.0)).unwrap();
        prop_assert!((f0 - mu.total_mass()).norm() < 1e-12);
    }

    #[test]
    fn arc_masses_partition_the_measure(mu in measure(40), level in 1u32..12) {
        let part = ArcPartition::new(level).unwrap();
        let total: f64 = part.masses(&mu).values().sum();
        prop_assert!((total - mu.total_mass()).abs() < 1e-12);
        for (z, _) in mu.atoms() {
            let j = part.arc_of(*z);
            prop_assert!(j < part.arc_count());
        }
    }

    #[test]
    fn light_arcs_carry_at_most_b(mu in measure(40), level in 1u32..10, alpha in 0.05..0.95f64) {
        let mu = mu.scaled(1.0 / mu.total_mass());
        let d = dyadic_quantities(&mu, level, alpha).unwrap();
        prop_assert!(d.b >= 0.0 && d.b <= 1.0 + 1e-12);
        prop_assert!(d.light_count <= 1 << level);
        let threshold = 2f64.powf(-(level as f64) * alpha);
        let heavy: f64 = d.masses.values().filter(|&&m| m >= threshold).sum();
        prop_assert!((heavy + d.b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probe_slope_of_a_point_mass(t in 0.0..TAU, alpha in 0.1..0.9f64) {
        let z0 = Complex64::from_polar(1.0, t);
        let grid: Vec<f64> = (4..=12).map(|j| 1.0 - 2f64.powi(-j)).collect();
        let probe = alpha_derivative_probe(&DiscreteMeasure::point(z0), z0, alpha, &grid).unwrap();
        prop_assert!((probe.slope + alpha).abs() < 0.05, "alpha {alpha}: slope {}", probe.slope);
    }

    #[test]
    fn probe_slope_of_the_lebesgue_proxy(t in 0.0..TAU, alpha in 0.1..0.9f64) {
        let z0 = Complex64::from_polar(1.0, t);
        let grid: Vec<f64> = (1..=5).map(|j| 1.0 - 2f64.powi(-j)).collect();
        let probe = alpha_derivative_probe(&DiscreteMeasure::uniform(4096), z0, alpha, &grid).unwrap();
        prop_assert!(probe.warnings.is_empty());
        prop_assert!((probe.slope - (1.0 - alpha)).abs() < 0.05, "alpha {alpha}: slope {}", probe.slope);
    }
}
