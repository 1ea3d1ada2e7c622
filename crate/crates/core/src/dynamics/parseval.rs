//! Exponentially damped time sums of `a(n, k)` versus resolvent energy
//! averages on the circle of radius `e^{1/K}`.
//!
//! The trapezoidal rule on `M` nodes aliases Fourier modes `M` apart; the
//! damped coefficients decay like `e^{-k/K}`, so the relative quadrature
//! error is roughly `K e^{-M/K}`.  The default of `32 K` nodes keeps that
//! below `1e-12`.  The resolvent is computed on a finite window; its entries
//! decay like `e^{-d/(2K)}` over a distance `d`, and the window error enters
//! through a round trip to the edge, so a radius of `24 K` leaves it near
//! `e^{-24}`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::check_initial_state;
use crate::banded::BandedUnitary;
use crate::error::{Error, Result};
use crate::lattice::{LatticeVector, Window};

/// Exponential weights below this are dropped from the time sum.
const TIME_TAIL: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalOptions {
    /// Quadrature nodes; defaults to `32 K`, must be at least `4 K`.
    pub quad_nodes: Option<usize>,
    /// Resolvent window radius in units of `K`.
    pub window_factor: i64,
    /// Largest resolvent window allowed, in sites.
    pub max_window: usize,
}

impl Default for ParsevalOptions {
    fn default() -> Self {
        ParsevalOptions {
            quad_nodes: None,
            window_factor: 24,
            max_window: 1 << 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalResult {
    /// `sum_{k>=0} e^{-2k/K} a(n, k)`.
    pub lhs: f64,
    /// `e^{2/K} int |<phi_n, (U - e^{1/K + i theta})^{-1} psi>|^2 dtheta / 2pi`.
    pub rhs: f64,
    /// `|lhs - rhs| / lhs`, zero when both sides vanish.
    pub reldiff: f64,
    pub steps: usize,
    pub quad_nodes: usize,
    pub window: Window,
}

fn damped_time_sum(u: &BandedUnitary, psi: &LatticeVector, n: i64, horizon: usize) -> Result<(f64, usize)> {
    let k = horizon as f64;
    let steps = (k * (1.0 / TIME_TAIL).ln() / 2.0).ceil() as usize + 1;
    let q = (-2.0 / k).exp();
    let mut u = u.clone();
    let mut state = psi.clone();
    let mut weight = 1.0;
    let mut sum = 0.0;
    for step in 0..steps {
        if step > 0 {
            state = u.apply_growing(&state)?;
        }
        sum += weight * state.get(n).norm_sqr();
        weight *= q;
    }
    Ok((sum, steps))
}

fn resolvent_operator(
    u: &BandedUnitary,
    psi: &LatticeVector,
    n: i64,
    horizon: usize,
    opts: &ParsevalOptions,
) -> Result<BandedUnitary> {
    let supp = psi.support().unwrap_or(Window::new(n, n + 1));
    let core = supp.union(&Window::new(n, n + 1));
    match u.source() {
        Some(source) => {
            let radius = opts.window_factor.saturating_mul(horizon as i64);
            let window = core.padded(radius);
            if window.len() > opts.max_window {
                let feasible = (opts.max_window.saturating_sub(core.len()) as i64
                    / (2 * opts.window_factor.max(1)))
                .max(0) as u64;
                return Err(Error::Resource {
                    message: format!(
                        "resolvent window of {} sites exceeds the limit of {}",
                        window.len(),
                        opts.max_window
                    ),
                    feasible,
                });
            }
            BandedUnitary::from_source(source.clone(), window)
        }
        None => {
            if !u.window().contains_window(&core) {
                return Err(Error::Alignment(format!(
                    "state and site {n} not inside the operator window {:?}",
                    u.window()
                )));
            }
            Ok(u.clone())
        }
    }
}

/// Compare both sides of the damped Parseval identity for site `n`.
pub fn parseval_check(
    u: &BandedUnitary,
    psi: &LatticeVector,
    n: i64,
    horizon: usize,
    opts: &ParsevalOptions,
) -> Result<ParsevalResult> {
    if horizon == 0 {
        return Err(Error::Input("horizon K must be positive".into()));
    }
    check_initial_state(psi)?;
    let nodes = opts.quad_nodes.unwrap_or(32 * horizon);
    if nodes < 4 * horizon {
        return Err(Error::Input(format!(
            "{nodes} quadrature nodes is below the minimum 4K = {}",
            4 * horizon
        )));
    }
    let (lhs, steps) = damped_time_sum(u, psi, n, horizon)?;

    let op = resolvent_operator(u, psi, n, horizon, opts)?;
    let radius = (1.0 / horizon as f64).exp();
    let values = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / nodes as f64;
            let z = Complex64::from_polar(radius, theta);
            let x = op.solve_shifted(z, psi)?;
            Ok(x.get(n).norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    // summed sequentially so the result does not depend on the thread count
    let mean = values.iter().sum::<f64>() / nodes as f64;
    let rhs = (2.0 / horizon as f64).exp() * mean;

    let reldiff = if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / lhs.max(f64::MIN_POSITIVE)
    };
    Ok(ParsevalResult {
        lhs,
        rhs,
        reldiff,
        steps,
        quad_nodes: nodes,
        window: op.window(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmv::{build_extended_cmv, VerblunskySequence};
    use crate::banded::ZERO;

    #[test]
    fn free_cmv_origin() {
        let alphas = VerblunskySequence::constant(false, -1200..1200, ZERO).unwrap();
        let u = build_extended_cmv(&alphas, Window::new(-8, 8)).unwrap();
        let r = parseval_check(&u, &LatticeVector::delta(0), 0, 16, &ParsevalOptions::default()).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!(r.reldiff < 1e-8, "{r:?}");
    }

    #[test]
    fn random_cmv_other_site() {
        let alphas = VerblunskySequence::from_fn(false, -1200..1200, |j| {
            Complex64::from_polar(0.4 + 0.3 * ((j as f64) * 0.7).sin(), 1.3 * j as f64)
        })
        .unwrap();
        let u = build_extended_cmv(&alphas, Window::new(-8, 8)).unwrap();
        let r = parseval_check(&u, &LatticeVector::delta(1), -3, 16, &ParsevalOptions::default()).unwrap();
        assert!(r.lhs > 0.0);
        assert!(r.reldiff < 1e-8, "{r:?}");
    }

    #[test]
    fn decoupled_blocks_give_zero() {
        // two 2x2 rotation blocks on sites {0,1} and {2,3}
        let (s, c) = 0.3f64.sin_cos();
        let mut rows = vec![[ZERO; 5]; 4];
        for b in [0usize, 2] {
            rows[b][2] = Complex64::new(c, 0.0);
            rows[b][3] = Complex64::new(-s, 0.0);
            rows[b + 1][1] = Complex64::new(s, 0.0);
            rows[b + 1][2] = Complex64::new(c, 0.0);
        }
        let u = BandedUnitary::from_rows(Window::new(0, 4), rows).unwrap();
        let r = parseval_check(&u, &LatticeVector::delta(0), 3, 8, &ParsevalOptions::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.reldiff, 0.0);
    }

    #[test]
    fn too_few_nodes_rejected() {
        let alphas = VerblunskySequence::constant(false, -200..200, ZERO).unwrap();
        let u = build_extended_cmv(&alphas, Window::new(-8, 8)).unwrap();
        let opts = ParsevalOptions {
            quad_nodes: Some(10),
            ..Default::default()
        };
        assert!(matches!(
            parseval_check(&u, &LatticeVector::delta(0), 0, 4, &opts),
            Err(Error::Input(_))
        ));
    }
}
