//! Transfer matrices, orthogonal polynomials on the unit circle, and the
//! interpolated local norms used to turn solution growth into continuity
//! exponents for spectral measures.
//!
//! Solutions are propagated as a mantissa vector plus an accumulated log
//! scale.  Whenever the larger entry leaves `[1/T, T]` for
//! `T =` [`RESCALE_THRESHOLD`] the vector is renormalized, so exponential
//! growth or decay off the spectrum cannot overflow or underflow; norms are
//! accumulated in log space.

use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;

use crate::cmv::{DiscreteMeasure, VerblunskySequence};
use crate::measure::caratheodory_f;
use crate::dynamics::fit_exponent;
use crate::error::{Error, Result};

/// Entry modulus that triggers renormalization of a running solution.
pub const RESCALE_THRESHOLD: f64 = 1e150;

/// Longest solution `jl_length` will build while bracketing.
pub const DEFAULT_LENGTH_BUDGET: usize = 1 << 24;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `log(e^a + e^b)` without overflow.
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// A 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix(pub [[Complex64; 2]; 2]);

impl TransferMatrix {
    pub fn identity() -> Self {
        TransferMatrix([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        TransferMatrix(out)
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn scale(&self, s: Complex64) -> TransferMatrix {
        TransferMatrix(self.0.map(|row| row.map(|x| x * s)))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// `T(z, alpha) = rho^{-1} [[z, -conj(alpha)], [-alpha z, 1]]`.
pub fn transfer_matrix(z: Complex64, alpha: Complex64) -> Result<TransferMatrix> {
    let m = alpha.norm();
    if !(m < 1.0) {
        return Err(Error::Domain(format!("|alpha| = {m} is not below 1")));
    }
    let rho = (1.0 - alpha.norm_sqr()).sqrt();
    Ok(TransferMatrix([
        [z / rho, -alpha.conj() / rho],
        [-alpha * z / rho, ONE / rho],
    ]))
}

/// A solution `(u_n, v_n) = T_n(z) (u_0, v_0)` stored as mantissas times
/// `e^{log_scale[n]}`, with log partial sums of `|u_n|^2`.
#[derive(Debug, Clone)]
pub struct Solution {
    z: Complex64,
    first: Vec<Complex64>,
    second: Vec<Complex64>,
    log_scale: Vec<f64>,
    log_prefix: Vec<f64>,
    rescales: usize,
}

impl Solution {
    pub fn new(z: Complex64, initial: [Complex64; 2]) -> Self {
        let mut s = Solution {
            z,
            first: Vec::new(),
            second: Vec::new(),
            log_scale: Vec::new(),
            log_prefix: Vec::new(),
            rescales: 0,
        };
        s.push(initial, 0.0);
        s
    }

    fn push(&mut self, v: [Complex64; 2], scale: f64) {
        let term = 2.0 * v[0].norm().ln() + 2.0 * scale;
        let prefix = match self.log_prefix.last() {
            Some(&p) => log_add_exp(p, term),
            None => term,
        };
        self.first.push(v[0]);
        self.second.push(v[1]);
        self.log_scale.push(scale);
        self.log_prefix.push(prefix);
    }

    /// Append `n -> n + 1` using coefficient `alpha_n`.
    pub fn step(&mut self, alpha: Complex64) -> Result<()> {
        let t = transfer_matrix(self.z, alpha)?;
        let last = self.first.len() - 1;
        let mut v = t.apply([self.first[last], self.second[last]]);
        let mut scale = self.log_scale[last];
        let big = v[0].norm().max(v[1].norm());
        if big > RESCALE_THRESHOLD || (big > 0.0 && big < RESCALE_THRESHOLD.recip()) {
            v = [v[0] / big, v[1] / big];
            scale += big.ln();
            self.rescales += 1;
        }
        if !(v[0].is_finite() && v[1].is_finite()) {
            return Err(Error::Numerical(format!("solution became non-finite at n = {}", last + 1)));
        }
        self.push(v, scale);
        Ok(())
    }

    /// Extend through index `n_max` with `alpha_0, alpha_1, ...` from `alphas`.
    pub fn extend_to(&mut self, alphas: &VerblunskySequence, n_max: usize) -> Result<()> {
        while self.first.len() <= n_max {
            let n = self.first.len() as i64 - 1;
            self.step(alphas.alpha(n)?)?;
        }
        Ok(())
    }

    /// Number of stored indices `0..len()`.
    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// How many times the run was renormalized.
    pub fn rescales(&self) -> usize {
        self.rescales
    }

    /// Components at `n` as `(mantissa_first, mantissa_second, log_scale)`.
    pub fn scaled(&self, n: usize) -> (Complex64, Complex64, f64) {
        (self.first[n], self.second[n], self.log_scale[n])
    }

    /// First component at `n` (may overflow to infinity off the spectrum).
    pub fn first(&self, n: usize) -> Complex64 {
        self.first[n] * self.log_scale[n].exp()
    }

    pub fn second(&self, n: usize) -> Complex64 {
        self.second[n] * self.log_scale[n].exp()
    }

    /// `log |u_n|`.
    pub fn log_abs_first(&self, n: usize) -> f64 {
        self.first[n].norm().ln() + self.log_scale[n]
    }

    /// `log ||u||_L` for the first component.
    pub fn log_norm(&self, l: f64) -> Result<f64> {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::Input(format!("L = {l} must be a nonnegative real")));
        }
        let fl = l.floor() as usize;
        let frac = l - fl as f64;
        let need = if frac > 0.0 { fl + 1 } else { fl };
        if need >= self.len() {
            return Err(Error::Input(format!(
                "local norm at L = {l} needs index {need}, solution has {} terms",
                self.len()
            )));
        }
        let mut log_sq = self.log_prefix[fl];
        if frac > 0.0 {
            log_sq = log_add_exp(log_sq, frac.ln() + 2.0 * self.log_abs_first(fl + 1));
        }
        Ok(0.5 * log_sq)
    }

    pub fn norm(&self, l: f64) -> Result<f64> {
        Ok(self.log_norm(l)?.exp())
    }
}

/// `||a||_L` with `||a||_L^2 = sum_{n <= floor L} |a_n|^2 + (L - floor L) |a_{floor L + 1}|^2`.
pub fn local_norm(a: &[Complex64], l: f64) -> Result<f64> {
    if !(l >= 0.0) || !l.is_finite() {
        return Err(Error::Input(format!("L = {l} must be a nonnegative real")));
    }
    let fl = l.floor() as usize;
    let frac = l - fl as f64;
    let need = if frac > 0.0 { fl + 1 } else { fl };
    if need >= a.len() {
        return Err(Error::Input(format!(
            "local norm at L = {l} needs index {need}, sequence has {} terms",
            a.len()
        )));
    }
    let mut sq: f64 = a[..=fl].iter().map(|x| x.norm_sqr()).sum();
    if frac > 0.0 {
        sq += frac * a[fl + 1].norm_sqr();
    }
    Ok(sq.sqrt())
}

/// OPUC of the first and second kind at `z`:
/// `(phi_n, phi*_n) = T_n (1, 1)` and `(psi_n, psi*_n) = T_n (1, -1)`.
#[derive(Debug, Clone)]
pub struct OpucPolynomials {
    pub phi: Solution,
    pub psi: Solution,
}

impl OpucPolynomials {
    pub fn new(z: Complex64) -> Self {
        OpucPolynomials {
            phi: Solution::new(z, [ONE, ONE]),
            psi: Solution::new(z, [ONE, -ONE]),
        }
    }

    pub fn extend_to(&mut self, alphas: &VerblunskySequence, n_max: usize) -> Result<()> {
        self.phi.extend_to(alphas, n_max)?;
        self.psi.extend_to(alphas, n_max)
    }

    pub fn len(&self) -> usize {
        self.phi.len().min(self.psi.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(phi_n, phi*_n, psi_n, psi*_n)`; entries may overflow off the spectrum.
    pub fn at(&self, n: usize) -> (Complex64, Complex64, Complex64, Complex64) {
        (self.phi.first(n), self.phi.second(n), self.psi.first(n), self.psi.second(n))
    }

    /// Error of `phi_n psi*_n - psi_n phi*_n = -2 z^n`, relative to the larger
    /// of `2` and the size of the two products (exact cancellation is not
    /// representable once the polynomials grow).
    pub fn wronskian_defect(&self, n: usize) -> f64 {
        let (p, ps, s) = self.phi.scaled(n);
        let (q, qs, t) = self.psi.scaled(n);
        let z = self.phi.z();
        let target = -2.0 * z.powi(n as i32) * (-(s + t)).exp();
        let lhs = p * qs - q * ps;
        let size = (p * qs).norm() + (q * ps).norm();
        (lhs - target).norm() / size.max(target.norm())
    }
}

/// Polynomials at `z` for indices `0..=n_max`.
pub fn opuc_polynomials(alphas: &VerblunskySequence, z: Complex64, n_max: usize) -> Result<OpucPolynomials> {
    check_unit(z, "z")?;
    alphas.require(0..n_max as i64)?;
    let mut p = OpucPolynomials::new(z);
    p.extend_to(alphas, n_max)?;
    Ok(p)
}

fn check_unit(z: Complex64, name: &str) -> Result<()> {
    if !((z.norm() - 1.0).abs() <= 1e-12) {
        return Err(Error::Domain(format!("{name} must lie on the unit circle, |{name}| = {}", z.norm())));
    }
    Ok(())
}

/// Solution of `(1 - r) ||phi(z)||_L ||psi(z)||_L = sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JlLength {
    pub length: f64,
    pub phi_norm: f64,
    pub psi_norm: f64,
    /// Bisection steps used.
    pub iterations: usize,
}

/// `L(r)` by bracket doubling and bisection to `|dL| <= 1e-9 L`.
pub fn jl_length(alphas: &VerblunskySequence, z: Complex64, r: f64) -> Result<JlLength> {
    jl_length_with_budget(alphas, z, r, DEFAULT_LENGTH_BUDGET)
}

pub fn jl_length_with_budget(
    alphas: &VerblunskySequence,
    z: Complex64,
    r: f64,
    budget: usize,
) -> Result<JlLength> {
    check_unit(z, "z")?;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Input(format!("r = {r} outside [0, 1)")));
    }
    let mut polys = OpucPolynomials::new(z);
    let target = SQRT_2.ln() - (1.0 - r).ln();
    let log_product = |polys: &mut OpucPolynomials, l: f64| -> Result<f64> {
        let need = l.floor() as usize + 1;
        if need >= budget {
            return Err(Error::Resource {
                message: format!("bracketing L(r) for r = {r} needs more than {budget} terms"),
                feasible: budget as u64,
            });
        }
        if need >= polys.len() {
            let n = alphas.index_range().map_or(0, |(_, hi)| hi.max(-1) + 1) as usize;
            if need > n {
                return Err(Error::Resource {
                    message: format!(
                        "bracketing L(r) for r = {r} needs alpha_0..alpha_{} but only {n} are given",
                        need - 1
                    ),
                    feasible: n as u64,
                });
            }
            polys.extend_to(alphas, need)?;
        }
        Ok(polys.phi.log_norm(l)? + polys.psi.log_norm(l)?)
    };
    // at L = 0 the product is |phi_0| |psi_0| = 1 < sqrt 2 / (1 - r)
    let at_zero = log_product(&mut polys, 0.0)?;
    if !(at_zero < target) {
        return Err(Error::Numerical(format!("invalid bracket: product at L = 0 is {}", at_zero.exp())));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while log_product(&mut polys, hi)? < target {
        lo = hi;
        hi *= 2.0;
    }
    let mut iterations = 0;
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if log_product(&mut polys, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let length = 0.5 * (lo + hi);
    log_product(&mut polys, length)?;
    Ok(JlLength {
        length,
        phi_norm: polys.phi.norm(length)?,
        psi_norm: polys.psi.norm(length)?,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JlRatioRow {
    pub r: f64,
    pub length: f64,
    /// `|F(r z)|`.
    pub f_abs: f64,
    /// `||psi||_L / ||phi||_L` at `L = L(r)`.
    pub norm_ratio: f64,
    pub ratio: f64,
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JlRatioTable {
    pub rows: Vec<JlRatioRow>,
    /// Smallest `A` with every ratio in `[1/A, A]`.
    pub a_star: f64,
    pub warnings: Vec<String>,
}

impl JlRatioTable {
    /// Whether every ratio lies in `[1/band, band]`.
    pub fn within(&self, band: f64) -> bool {
        self.a_star <= band
    }
}

/// `|F(r z)|` against the ratio of local norms at `L(r)`.
pub fn jl_ratio_check(
    alphas: &VerblunskySequence,
    mu: &DiscreteMeasure,
    z: Complex64,
    r_grid: &[f64],
) -> Result<JlRatioTable> {
    if r_grid.is_empty() {
        return Err(Error::Input("empty r grid".into()));
    }
    let floor = crate::measure::RESOLUTION_GUARD * mu.resolution();
    let mut rows = Vec::with_capacity(r_grid.len());
    let mut warnings = Vec::new();
    for &r in r_grid {
        let jl = jl_length(alphas, z, r)?;
        let f_abs = caratheodory_f(mu, z * r)?.norm();
        let norm_ratio = jl.psi_norm / jl.phi_norm;
        let resolved = 1.0 - r >= floor;
        if !resolved {
            warnings.push(format!("r = {r}: 1 - r is below the resolution guard {floor:e}"));
        }
        rows.push(JlRatioRow {
            r,
            length: jl.length,
            f_abs,
            norm_ratio,
            ratio: f_abs / norm_ratio,
            resolved,
        });
    }
    let a_star = rows
        .iter()
        .map(|row| row.ratio.max(1.0 / row.ratio))
        .fold(1.0, f64::max);
    Ok(JlRatioTable {
        rows,
        a_star,
        warnings,
    })
}

/// Local norms `||xi||_L` of one solution at the sample lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionNorms {
    pub l_samples: Vec<f64>,
    pub log_norms: Vec<f64>,
}

impl SolutionNorms {
    pub fn from_solution(sol: &Solution, l_samples: &[f64]) -> Result<Self> {
        Ok(SolutionNorms {
            l_samples: l_samples.to_vec(),
            log_norms: l_samples.iter().map(|&l| sol.log_norm(l)).collect::<Result<_>>()?,
        })
    }

    /// Synthetic norms `c L^gamma`.
    pub fn power_law(l_samples: &[f64], c: f64, gamma: f64) -> Self {
        SolutionNorms {
            l_samples: l_samples.to_vec(),
            log_norms: l_samples.iter().map(|l| c.ln() + gamma * l.ln()).collect(),
        }
    }

    pub fn norms(&self) -> Vec<f64> {
        self.log_norms.iter().map(|x| x.exp()).collect()
    }
}

fn check_samples(l_samples: &[f64]) -> Result<f64> {
    if l_samples.is_empty() || l_samples.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::Input("L samples must be nonnegative and nonempty".into()));
    }
    Ok(l_samples.iter().copied().fold(0.0, f64::max))
}

/// `(xi_n, zeta_n) = T_n(z) (xi_0, zeta_0)` with `|xi_0| = |zeta_0| = 1`,
/// sampled as `||xi||_L`.
pub fn whole_line_solution(
    alphas: &VerblunskySequence,
    z: Complex64,
    xi0: Complex64,
    zeta0: Complex64,
    l_samples: &[f64],
) -> Result<SolutionNorms> {
    check_unit(z, "z")?;
    check_unit(xi0, "xi0")?;
    check_unit(zeta0, "zeta0")?;
    let l_max = check_samples(l_samples)?;
    let mut sol = Solution::new(z, [xi0, zeta0]);
    sol.extend_to(alphas, l_max.ceil() as usize + 1)?;
    SolutionNorms::from_solution(&sol, l_samples)
}

/// Norms of `phi(z)` and `psi(z)` at the sample lengths.
pub fn opuc_norms(
    alphas: &VerblunskySequence,
    z: Complex64,
    l_samples: &[f64],
) -> Result<(SolutionNorms, SolutionNorms)> {
    let l_max = check_samples(l_samples)?;
    let p = opuc_polynomials(alphas, z, l_max.ceil() as usize + 1)?;
    Ok((
        SolutionNorms::from_solution(&p.phi, l_samples)?,
        SolutionNorms::from_solution(&p.psi, l_samples)?,
    ))
}

/// Normalized boundary conditions `(1, e^{2 pi i k / count})`, `k < count`.
pub fn boundary_conditions(count: usize) -> Vec<(Complex64, Complex64)> {
    (0..count)
        .map(|k| (ONE, Complex64::from_polar(1.0, TAU * k as f64 / count as f64)))
        .collect()
}

/// Dyadic lengths `2^lo, ..., 2^hi`.
pub fn dyadic_lengths(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|j| 2f64.powi(j)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub gamma1: f64,
    pub gamma2: f64,
    /// `2 gamma1 / (gamma1 + gamma2)`.
    pub alpha: f64,
    /// Fitted growth exponent per boundary condition.
    pub slopes: Vec<f64>,
}

/// Slopes of `log ||xi||_L` against `log L` for each boundary condition;
/// `gamma1` is the smallest, `gamma2` the largest.
pub fn power_law_fit(norms: &[SolutionNorms]) -> Result<PowerLawFit> {
    if norms.is_empty() {
        return Err(Error::Input("no boundary conditions given".into()));
    }
    let mut slopes = Vec::with_capacity(norms.len());
    for (i, s) in norms.iter().enumerate() {
        if s.l_samples.len() != s.log_norms.len() || s.l_samples.len() < 2 {
            return Err(Error::Input(format!("boundary condition {i}: need at least two samples")));
        }
        if s.l_samples.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Input(format!("boundary condition {i}: L samples must be positive")));
        }
        let mut order: Vec<usize> = (0..s.l_samples.len()).collect();
        order.sort_by(|&a, &b| s.l_samples[a].total_cmp(&s.l_samples[b]));
        for w in order.windows(2) {
            let (a, b) = (s.log_norms[w[0]], s.log_norms[w[1]]);
            if !(b >= a - 1e-12 * a.abs().max(1.0)) {
                return Err(Error::Numerical(format!(
                    "boundary condition {i}: norm decreases between L = {} and L = {}",
                    s.l_samples[w[0]], s.l_samples[w[1]]
                )));
            }
        }
        let x: Vec<f64> = s.l_samples.iter().map(|l| l.ln()).collect();
        let (slope, _, _) = fit_exponent(&x, &s.log_norms)?;
        slopes.push(slope);
    }
    let gamma1 = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let gamma2 = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(gamma1);
    if !(gamma1 + gamma2 > 0.0) {
        return Err(Error::Numerical(format!(
            "growth exponents {gamma1}, {gamma2} give no continuity exponent"
        )));
    }
    Ok(PowerLawFit {
        gamma1,
        gamma2,
        alpha: 2.0 * gamma1 / (gamma1 + gamma2),
        slopes,
    })
}
