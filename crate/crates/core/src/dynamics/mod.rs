//! Exact time evolution `psi(k) = U^k psi` and the transport quantities built
//! from it.
//!
//! Evolution never truncates: the operator window grows ahead of the
//! wavefront, which moves at most two sites per step.  Per-step statistics
//! are reduced into a [`TransportSeries`] either from a stored
//! [`EvolutionRecord`] or on the fly, so long horizons do not have to keep
//! every state in memory.

mod average;
mod bounds;
mod parseval;

pub use average::{
    exponential_cutoff, fit_exponent, time_average, transport_exponent, AverageMode,
    ExponentEstimate,
};
pub use bounds::{
    pin_bound_check, rage_check, BoundRow, BoundTable, CesaroInside, ProfileFn, RageRow,
    RageTable,
};
pub use parseval::{parseval_check, ParsevalOptions, ParsevalResult};

use crate::banded::{BandedUnitary, BANDWIDTH};
use crate::error::{Error, Result};
use crate::lattice::{LatticeVector, Window};

/// Default cap on the memory a stored [`EvolutionRecord`] may use.
pub const DEFAULT_MEMORY_BUDGET: usize = 512 << 20;

/// Tolerance on the norm of an initial state.
pub const UNIT_TOL: f64 = 1e-12;

const BYTES_PER_ENTRY: usize = std::mem::size_of::<num_complex::Complex64>();

/// States `psi(0), ..., psi(K-1)` of an exact evolution.
#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    states: Vec<LatticeVector>,
    norms: Vec<f64>,
    domain: (Option<i64>, Option<i64>),
}

impl EvolutionRecord {
    /// Horizon `K`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> std::ops::Range<usize> {
        0..self.states.len()
    }

    pub fn state(&self, k: usize) -> &LatticeVector {
        &self.states[k]
    }

    pub fn states(&self) -> &[LatticeVector] {
        &self.states
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Index domain of the operator that produced the record.
    pub fn domain(&self) -> (Option<i64>, Option<i64>) {
        self.domain
    }

    /// `a(n, k) = |<phi_n, psi(k)>|^2` over the stored window of `psi(k)`.
    pub fn site_probabilities(&self, k: usize) -> Vec<(i64, f64)> {
        self.states[k].iter().map(|(n, c)| (n, c.norm_sqr())).collect()
    }

    /// Cesaro average `a~(n, K)` for `K <= len()`.
    pub fn cesaro_probabilities(&self, horizon: usize) -> Result<Vec<(i64, f64)>> {
        if horizon == 0 || horizon > self.len() {
            return Err(Error::Input(format!(
                "Cesaro horizon {horizon} outside 1..={}",
                self.len()
            )));
        }
        let window = self.states[..horizon]
            .iter()
            .map(|s| s.window())
            .fold(Window::new(0, 0), |a, b| a.union(&b));
        let mut acc = vec![0.0; window.len()];
        for s in &self.states[..horizon] {
            for (n, c) in s.iter() {
                acc[(n - window.lo) as usize] += c.norm_sqr();
            }
        }
        let inv = 1.0 / horizon as f64;
        Ok(window.indices().zip(acc).map(|(n, a)| (n, a * inv)).collect())
    }
}

fn check_initial_state(psi0: &LatticeVector) -> Result<()> {
    let norm = psi0.norm();
    if !((norm - 1.0).abs() <= UNIT_TOL) {
        return Err(Error::Input(format!(
            "initial state must have unit norm, got {norm}"
        )));
    }
    Ok(())
}

/// Upper estimate of the bytes needed to store `horizon` states grown from a
/// support of `initial` sites.
pub fn record_bytes(initial: usize, horizon: usize) -> usize {
    let k = horizon as u128;
    let sites = initial as u128 * k + 2 * BANDWIDTH as u128 * k * k;
    (sites * BYTES_PER_ENTRY as u128).min(usize::MAX as u128) as usize
}

/// Largest horizon whose record fits in `budget` bytes.
pub fn max_record_horizon(initial: usize, budget: usize) -> u64 {
    let (mut lo, mut hi) = (0u64, 1u64);
    while record_bytes(initial, hi as usize) <= budget {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if record_bytes(initial, mid as usize) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Evolve `psi0` for `horizon` steps under the default memory budget.
pub fn evolve(u: &mut BandedUnitary, psi0: &LatticeVector, horizon: usize) -> Result<EvolutionRecord> {
    evolve_with_budget(u, psi0, horizon, DEFAULT_MEMORY_BUDGET)
}

pub fn evolve_with_budget(
    u: &mut BandedUnitary,
    psi0: &LatticeVector,
    horizon: usize,
    budget: usize,
) -> Result<EvolutionRecord> {
    if horizon == 0 {
        return Err(Error::Input("horizon K must be positive".into()));
    }
    check_initial_state(psi0)?;
    let initial = psi0.support().map_or(1, |w| w.len());
    if record_bytes(initial, horizon) > budget {
        let feasible = max_record_horizon(initial, budget);
        return Err(Error::Resource {
            message: format!(
                "storing {horizon} states needs about {} MiB (budget {} MiB)",
                record_bytes(initial, horizon) >> 20,
                budget >> 20
            ),
            feasible,
        });
    }
    let mut states = Vec::with_capacity(horizon);
    let mut norms = Vec::with_capacity(horizon);
    let mut psi = psi0.clone();
    for k in 0..horizon {
        if k > 0 {
            psi = u.apply_growing(&psi)?;
        }
        norms.push(psi.norm());
        states.push(psi.clone());
    }
    Ok(EvolutionRecord {
        states,
        norms,
        domain: operator_domain(u),
    })
}

fn operator_domain(u: &BandedUnitary) -> (Option<i64>, Option<i64>) {
    match u.source() {
        Some(s) => s.domain(),
        None => (Some(u.window().lo), Some(u.window().hi)),
    }
}

/// Per-step transport statistics with Cesaro averages available for every
/// horizon up to the one evolved.
#[derive(Debug, Clone)]
pub struct TransportSeries {
    radii: Vec<i64>,
    p_list: Vec<f64>,
    mass: Vec<f64>,
    /// `|X|^p(k)` indexed `[k][p]`.
    moments: Vec<Vec<f64>>,
    /// `P_in(R, k)` and `P_out(R, k)` indexed `[k][R]`.
    p_in: Vec<Vec<f64>>,
    p_out: Vec<Vec<f64>>,
    cum_moments: Vec<Vec<f64>>,
    cum_in: Vec<Vec<f64>>,
    cum_out: Vec<Vec<f64>>,
    cesaro_window: Window,
    cesaro_sum: Vec<f64>,
    domain: (Option<i64>, Option<i64>),
}

/// Moments and ball probabilities of one state.
fn state_stats(psi: &LatticeVector, radii: &[i64], p_list: &[f64]) -> (f64, Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut mass = 0.0;
    let mut moments = vec![0.0; p_list.len()];
    let mut p_in = vec![0.0; radii.len()];
    let mut p_out = vec![0.0; radii.len()];
    for (n, c) in psi.iter() {
        let a = c.norm_sqr();
        if a == 0.0 {
            continue;
        }
        mass += a;
        let dist = n.unsigned_abs() as f64;
        for (m, &p) in moments.iter_mut().zip(p_list) {
            *m += (dist.powf(p) + 1.0) * a;
        }
        for (i, &r) in radii.iter().enumerate() {
            if n.abs() <= r {
                p_in[i] += a;
            } else {
                p_out[i] += a;
            }
        }
    }
    (mass, moments, p_in, p_out)
}

impl TransportSeries {
    fn empty(radii: &[i64], p_list: &[f64], domain: (Option<i64>, Option<i64>)) -> Result<Self> {
        if radii.is_empty() || p_list.is_empty() {
            return Err(Error::Input("radii and p_list must be nonempty".into()));
        }
        if let Some(r) = radii.iter().find(|&&r| r < 0) {
            return Err(Error::Input(format!("negative radius {r}")));
        }
        if let Some(p) = p_list.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
            return Err(Error::Input(format!("moment order {p} must be positive")));
        }
        Ok(TransportSeries {
            radii: radii.to_vec(),
            p_list: p_list.to_vec(),
            mass: Vec::new(),
            moments: Vec::new(),
            p_in: Vec::new(),
            p_out: Vec::new(),
            cum_moments: vec![vec![0.0; p_list.len()]],
            cum_in: vec![vec![0.0; radii.len()]],
            cum_out: vec![vec![0.0; radii.len()]],
            cesaro_window: Window::new(0, 0),
            cesaro_sum: Vec::new(),
            domain,
        })
    }

    fn push(&mut self, psi: &LatticeVector) {
        let (mass, moments, p_in, p_out) = state_stats(psi, &self.radii, &self.p_list);
        let add = |cum: &mut Vec<Vec<f64>>, step: &[f64]| {
            let last = cum.last().unwrap();
            let next = last.iter().zip(step).map(|(a, b)| a + b).collect();
            cum.push(next);
        };
        add(&mut self.cum_moments, &moments);
        add(&mut self.cum_in, &p_in);
        add(&mut self.cum_out, &p_out);
        self.mass.push(mass);
        self.moments.push(moments);
        self.p_in.push(p_in);
        self.p_out.push(p_out);

        let w = psi.window();
        if !self.cesaro_window.contains_window(&w) {
            let target = self.cesaro_window.union(&w);
            let mut grown = vec![0.0; target.len()];
            if !self.cesaro_sum.is_empty() {
                let shift = (self.cesaro_window.lo - target.lo) as usize;
                grown[shift..shift + self.cesaro_sum.len()].copy_from_slice(&self.cesaro_sum);
            }
            self.cesaro_window = target;
            self.cesaro_sum = grown;
        }
        for (n, c) in psi.iter() {
            self.cesaro_sum[(n - self.cesaro_window.lo) as usize] += c.norm_sqr();
        }
    }

    /// Evolve and reduce without storing the states.
    pub fn stream(
        u: &mut BandedUnitary,
        psi0: &LatticeVector,
        horizon: usize,
        radii: &[i64],
        p_list: &[f64],
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Input("horizon K must be positive".into()));
        }
        check_initial_state(psi0)?;
        let mut series = Self::empty(radii, p_list, operator_domain(u))?;
        let mut psi = psi0.clone();
        series.push(&psi);
        for _ in 1..horizon {
            psi = u.apply_growing(&psi)?;
            series.push(&psi);
        }
        Ok(series)
    }

    pub fn horizon(&self) -> usize {
        self.mass.len()
    }

    pub fn radii(&self) -> &[i64] {
        &self.radii
    }

    pub fn p_list(&self) -> &[f64] {
        &self.p_list
    }

    pub fn domain(&self) -> (Option<i64>, Option<i64>) {
        self.domain
    }

    /// `sum_n a(n, k)`.
    pub fn mass(&self, k: usize) -> f64 {
        self.mass[k]
    }

    fn radius_index(&self, r: i64) -> Result<usize> {
        self.radii
            .iter()
            .position(|&x| x == r)
            .ok_or_else(|| Error::Input(format!("radius {r} was not recorded")))
    }

    fn p_index(&self, p: f64) -> Result<usize> {
        self.p_list
            .iter()
            .position(|&x| x == p)
            .ok_or_else(|| Error::Input(format!("moment order {p} was not recorded")))
    }

    fn check_horizon(&self, horizon: usize) -> Result<()> {
        if horizon == 0 || horizon > self.horizon() {
            return Err(Error::Input(format!(
                "horizon {horizon} outside 1..={}",
                self.horizon()
            )));
        }
        Ok(())
    }

    /// `|X|^p(k)` at a single time.
    pub fn moment_at(&self, p: f64, k: usize) -> Result<f64> {
        Ok(self.moments[k][self.p_index(p)?])
    }

    pub fn p_in(&self, r: i64, k: usize) -> Result<f64> {
        Ok(self.p_in[k][self.radius_index(r)?])
    }

    pub fn p_out(&self, r: i64, k: usize) -> Result<f64> {
        Ok(self.p_out[k][self.radius_index(r)?])
    }

    /// `<|X|^p>(K)`.
    pub fn moment(&self, p: f64, horizon: usize) -> Result<f64> {
        self.check_horizon(horizon)?;
        Ok(self.cum_moments[horizon][self.p_index(p)?] / horizon as f64)
    }

    /// `P~_in(R, K)`.
    pub fn p_in_tilde(&self, r: i64, horizon: usize) -> Result<f64> {
        self.check_horizon(horizon)?;
        Ok(self.cum_in[horizon][self.radius_index(r)?] / horizon as f64)
    }

    /// `P~_out(R, K)`.
    pub fn p_out_tilde(&self, r: i64, horizon: usize) -> Result<f64> {
        self.check_horizon(horizon)?;
        Ok(self.cum_out[horizon][self.radius_index(r)?] / horizon as f64)
    }

    /// `a~(n, K)` at the full horizon.
    pub fn cesaro_probabilities(&self) -> Vec<(i64, f64)> {
        let inv = 1.0 / self.horizon() as f64;
        self.cesaro_window
            .indices()
            .zip(&self.cesaro_sum)
            .map(|(n, s)| (n, s * inv))
            .collect()
    }

    /// `(K, <|X|^p>(K))` for each requested horizon.
    pub fn moment_curve(&self, p: f64, horizons: &[usize]) -> Result<Vec<(f64, f64)>> {
        horizons
            .iter()
            .map(|&k| Ok((k as f64, self.moment(p, k)?)))
            .collect()
    }

    /// Number of basis indices `n` in the operator domain with `|n| <= r`.
    pub fn ball_size(&self, r: i64) -> u64 {
        let lo = self.domain.0.map_or(-r, |d| d.max(-r));
        let hi = self.domain.1.map_or(r, |d| (d - 1).min(r));
        (hi - lo + 1).max(0) as u64
    }
}

/// Reduce a stored record to a [`TransportSeries`].
pub fn transport_profile(rec: &EvolutionRecord, radii: &[i64], p_list: &[f64]) -> Result<TransportSeries> {
    if rec.is_empty() {
        return Err(Error::Input("empty evolution record".into()));
    }
    let mut series = TransportSeries::empty(radii, p_list, rec.domain)?;
    for s in &rec.states {
        series.push(s);
    }
    Ok(series)
}
