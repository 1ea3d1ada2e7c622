use crate::error::{Error, Result};

/// Relative weight below which the exponential average is cut off.
pub const EXP_TAIL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMode {
    /// `(1/K) sum_{j<K} f(j)`.
    Cesaro,
    /// `(2/K) sum_{k>=0} e^{-2k/K} f(k)`, truncated where the weight drops below [`EXP_TAIL`].
    Exponential,
}

/// Number of terms the exponential average of horizon `horizon` needs.
pub fn exponential_cutoff(horizon: usize) -> usize {
    (horizon as f64 * (1.0 / EXP_TAIL).ln() / 2.0).ceil() as usize
}

pub fn time_average(f: &[f64], horizon: usize, mode: AverageMode) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::Input("horizon K must be positive".into()));
    }
    let needed = match mode {
        AverageMode::Cesaro => horizon,
        AverageMode::Exponential => exponential_cutoff(horizon),
    };
    if f.len() < needed {
        return Err(Error::Input(format!(
            "{mode:?} average at K = {horizon} needs {needed} samples, got {}",
            f.len()
        )));
    }
    Ok(match mode {
        AverageMode::Cesaro => f[..horizon].iter().sum::<f64>() / horizon as f64,
        AverageMode::Exponential => {
            let q = (-2.0 / horizon as f64).exp();
            let mut w = 1.0;
            let mut acc = 0.0;
            for &x in &f[..needed] {
                acc += w * x;
                w *= q;
            }
            2.0 * acc / horizon as f64
        }
    })
}

/// Power-law exponent estimate from a moment curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentEstimate {
    /// Least-squares slope divided by `p`, clamped to `[0, 1]`.
    pub estimate: f64,
    /// The same slope before clamping.
    pub raw: f64,
    /// Smallest two-point slope (proxy for the lim inf), clamped.
    pub lower: f64,
    /// Largest two-point slope (proxy for the lim sup), clamped.
    pub upper: f64,
}

/// Least-squares slope and intercept of `y` against `x`, with the Pearson
/// correlation.
pub fn fit_exponent(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Input(format!(
            "need at least two paired samples, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::Input("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let corr = if syy == 0.0 { 1.0 } else { sxy / (sxx * syy).sqrt() };
    Ok((slope, my - slope * mx, corr))
}

/// Fit `<|X|^p>(K) ~ K^{beta p}` on samples `(K, moment)`.
///
/// A bandwidth-two operator moves mass at most two sites per step, so moments
/// grow at most like `K^p` and every estimate is clamped to `[0, 1]`; the
/// unclamped least-squares value is kept in [`ExponentEstimate::raw`].
pub fn transport_exponent(curve: &[(f64, f64)], p: f64) -> Result<ExponentEstimate> {
    if curve.len() < 2 {
        return Err(Error::Input(format!(
            "exponent fit needs at least 2 samples, got {}",
            curve.len()
        )));
    }
    if !(p > 0.0) {
        return Err(Error::Input(format!("moment order {p} must be positive")));
    }
    let mut pts: Vec<(f64, f64)> = curve.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(bad) = pts.iter().find(|(k, m)| !(*k > 0.0) || !(*m > 0.0)) {
        return Err(Error::Input(format!("non-positive sample {bad:?}")));
    }
    let lx: Vec<f64> = pts.iter().map(|(k, _)| k.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|(_, m)| m.ln()).collect();
    let (slope, _, _) = fit_exponent(&lx, &ly)?;
    let local: Vec<f64> = lx
        .windows(2)
        .zip(ly.windows(2))
        .filter(|(x, _)| x[1] > x[0])
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]) / p)
        .collect();
    let clamp = |v: f64| v.clamp(0.0, 1.0);
    let raw = slope / p;
    let (lo, hi) = local
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    Ok(ExponentEstimate {
        estimate: clamp(raw),
        raw,
        lower: clamp(lo),
        upper: clamp(hi),
    })
}
