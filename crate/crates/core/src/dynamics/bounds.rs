//! Normalized checks of the decay of `P~_in(N, K)` against the rates implied
//! by uniform Hoelder continuity of the spectral measure.
//!
//! The constants in those bounds are not explicit, so a check passes when the
//! normalized ratio stays within a factor [`SPREAD`] of its median across the
//! grid.

use super::TransportSeries;
use crate::error::{Error, Result};

/// Allowed ratio between the largest normalized value and the median.
pub const SPREAD: f64 = 10.0;

/// Anything that can report Cesaro-averaged inside probabilities.
pub trait CesaroInside {
    fn p_in_tilde(&self, radius: i64, horizon: usize) -> Result<f64>;

    /// Number of sites `n` with `|n| <= radius`.
    fn ball_size(&self, radius: i64) -> u64 {
        2 * radius.max(0) as u64 + 1
    }
}

impl CesaroInside for TransportSeries {
    fn p_in_tilde(&self, radius: i64, horizon: usize) -> Result<f64> {
        TransportSeries::p_in_tilde(self, radius, horizon)
    }

    fn ball_size(&self, radius: i64) -> u64 {
        TransportSeries::ball_size(self, radius)
    }
}

/// A synthetic profile `(N, K) -> P~_in(N, K)` on the whole line.
pub struct ProfileFn<F>(pub F);

impl<F: Fn(i64, usize) -> f64> CesaroInside for ProfileFn<F> {
    fn p_in_tilde(&self, radius: i64, horizon: usize) -> Result<f64> {
        Ok((self.0)(radius, horizon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub radius: i64,
    pub horizon: usize,
    pub p_in: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    pub rows: Vec<BoundRow>,
    pub median: f64,
    pub max: f64,
    pub consistent: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Input(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(())
}

fn check_horizons(alpha: f64, horizons: &[usize]) -> Result<()> {
    if horizons.is_empty() {
        return Err(Error::Input("empty K grid".into()));
    }
    if alpha == 1.0 && horizons.iter().any(|&k| k < 2) {
        return Err(Error::Input("the log-corrected rate needs K >= 2".into()));
    }
    if horizons.contains(&0) {
        return Err(Error::Input("K must be positive".into()));
    }
    Ok(())
}

/// `K^{-alpha}`, or `log K / K` at `alpha = 1`.
fn decay(alpha: f64, horizon: usize) -> f64 {
    let k = horizon as f64;
    if alpha == 1.0 {
        k.ln() / k
    } else {
        k.powf(-alpha)
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn verdict(ratios: &[f64]) -> (f64, f64, bool) {
    let med = median(ratios);
    let max = ratios.iter().copied().fold(0.0, f64::max);
    (med, max, max <= SPREAD * med)
}

/// Ratios `P~_in(N, K) K^alpha / N` (or `P~_in K / (N log K)` at `alpha = 1`).
pub fn pin_bound_check(
    profile: &impl CesaroInside,
    alpha: f64,
    radii: &[i64],
    horizons: &[usize],
) -> Result<BoundTable> {
    check_alpha(alpha)?;
    check_horizons(alpha, horizons)?;
    if radii.is_empty() || radii.iter().any(|&n| n < 1) {
        return Err(Error::Input("N grid must be nonempty with N >= 1".into()));
    }
    let mut rows = Vec::with_capacity(radii.len() * horizons.len());
    for &n in radii {
        for &k in horizons {
            let p_in = profile.p_in_tilde(n, k)?;
            rows.push(BoundRow {
                radius: n,
                horizon: k,
                p_in,
                ratio: p_in / (n as f64 * decay(alpha, k)),
            });
        }
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let (median, max, consistent) = verdict(&ratios);
    Ok(BoundTable {
        rows,
        median,
        max,
        consistent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RageRow {
    pub horizon: usize,
    /// `(1/K) sum_k <psi(k), P_N psi(k)>`.
    pub average: f64,
    /// `||P_N||_p K^{-alpha/p}`, log-corrected at `alpha = 1`.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RageTable {
    pub radius: i64,
    pub p: u32,
    /// `||P_N||_p = (#{|n| <= N})^{1/p}`.
    pub trace_norm: f64,
    pub rows: Vec<RageRow>,
    pub median: f64,
    pub max: f64,
    pub consistent: bool,
}

/// Time-averaged expectation of the ball projection `P_N` against its
/// trace-norm bound.
pub fn rage_check(
    profile: &impl CesaroInside,
    radius: i64,
    p: u32,
    alpha: f64,
    horizons: &[usize],
) -> Result<RageTable> {
    check_alpha(alpha)?;
    check_horizons(alpha, horizons)?;
    if p == 0 {
        return Err(Error::Input("trace-norm order p must be at least 1".into()));
    }
    if radius < 0 {
        return Err(Error::Input(format!("negative radius {radius}")));
    }
    let trace_norm = (profile.ball_size(radius) as f64).powf(1.0 / p as f64);
    let rows = horizons
        .iter()
        .map(|&k| {
            let average = profile.p_in_tilde(radius, k)?;
            let bound = trace_norm * decay(alpha, k).powf(1.0 / p as f64);
            Ok(RageRow {
                horizon: k,
                average,
                bound,
                ratio: average / bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let (median, max, consistent) = verdict(&ratios);
    Ok(RageTable {
        radius,
        p,
        trace_norm,
        rows,
        median,
        max,
        consistent,
    })
}
