//! The Fibonacci quantum walk: substitution words, the subshift, rotation
//! coins, the closed-form lower bound on transport exponents, and a trace-map
//! diagnostic for the associated transfer matrices.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use dashu_float::ops::EstimatedLog2;
use dashu_float::FBig;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cmv::{paraorthogonal_spectrum_szego, DiscreteMeasure, VerblunskySequence};
use crate::error::{Error, Result};
use crate::lattice::Window;
use crate::qwalk::{cgmv_gauge, Coin, CoinSequence};
use crate::subordinacy::{transfer_matrix, TransferMatrix, RESCALE_THRESHOLD};

/// Longest word `fib_word` will build.
pub const MAX_WORD_LEN: usize = 1 << 29;

/// Deepest level accepted by [`trace_map_diagnostic`].
pub const MAX_TRACE_LEVEL: usize = 25;

/// Placeholder for the `z`-dependent constant in `gamma2`.
pub const DEFAULT_K: f64 = 16.0;

pub const GOLDEN_MEAN: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
        }
    }
}

/// `s_n = S^n(a)` for the substitution `a -> ab`, `b -> a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibonacciWord {
    level: usize,
    symbols: Vec<Letter>,
}

impl FibonacciWord {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn symbols(&self) -> &[Letter] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl fmt::Display for FibonacciWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.symbols.iter().try_for_each(|l| write!(f, "{}", l.as_char()))
    }
}

/// `F_n` with `F_1 = F_2 = 1`, or `None` past `u64`.
pub fn fibonacci_number(n: usize) -> Option<u64> {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        let next = a.checked_add(b)?;
        a = b;
        b = next;
    }
    Some(a)
}

pub fn fib_word(n: usize) -> Result<FibonacciWord> {
    let len = fibonacci_number(n + 2).filter(|&l| l <= MAX_WORD_LEN as u64);
    if len.is_none() {
        let feasible = (0..).take_while(|&k| fibonacci_number(k + 2).is_some_and(|l| l <= MAX_WORD_LEN as u64)).last();
        return Err(Error::Resource {
            message: format!("s_{n} is longer than the limit of {MAX_WORD_LEN} symbols"),
            feasible: feasible.unwrap_or(0) as u64,
        });
    }
    let (mut prev, mut cur) = (vec![Letter::B], vec![Letter::A]);
    for _ in 0..n {
        let mut next = cur.clone();
        next.extend_from_slice(&prev);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(FibonacciWord {
        level: n,
        symbols: cur,
    })
}

/// `floor(m / phi)` in exact integer arithmetic, using `1/phi = (sqrt 5 - 1)/2`.
fn floor_div_golden(m: i64) -> i64 {
    let m = m as i128;
    let s = (5 * m * m) as u128;
    let r = s.isqrt() as i128;
    // sqrt(5) m is irrational for m != 0, so the floor is r or -(r + 1)
    let floor_sqrt5_m = match m.signum() {
        1 => r,
        -1 => -(r + 1),
        _ => 0,
    };
    (floor_sqrt5_m - m).div_euclid(2) as i64
}

/// Letter `n` of the two-sided rotation-coded Fibonacci word; agrees with the
/// substitution fixed point for `n >= 0`.
pub fn subshift_letter(n: i64) -> Letter {
    if floor_div_golden(n + 2) - floor_div_golden(n + 1) == 1 {
        Letter::A
    } else {
        Letter::B
    }
}

pub fn subshift_window(offset: i64, length: usize) -> Vec<Letter> {
    (0..length as i64).map(|j| subshift_letter(offset + j)).collect()
}

/// Angles and the constant entering `gamma2`.
#[derive(Clone)]
pub struct FibonacciParams {
    pub theta_a: f64,
    pub theta_b: f64,
    pub k: KOfZ,
}

/// The `z`-dependent constant of `gamma2`, supplied by the caller.
#[derive(Clone)]
pub enum KOfZ {
    Constant(f64),
    Function(Arc<dyn Fn(Complex64) -> f64 + Send + Sync>),
}

impl KOfZ {
    /// `K` interpolated linearly in `arg z` between `(angle, K)` nodes,
    /// periodically across `2 pi`.  Angles are reduced mod `2 pi` and must be
    /// distinct after reduction.
    pub fn interpolated(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Input("K table has no nodes".into()));
        }
        let mut nodes: Vec<(f64, f64)> = nodes
            .into_iter()
            .map(|(t, k)| {
                if !t.is_finite() {
                    return Err(Error::Domain(format!("angle {t} is not finite")));
                }
                if !(k > 1.0 && k.is_finite()) {
                    return Err(Error::Domain(format!("K = {k} must exceed 1")));
                }
                Ok((t.rem_euclid(TAU) + 0.0, k))
            })
            .collect::<Result<_>>()?;
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        if nodes.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Input("K table repeats an angle".into()));
        }
        Ok(KOfZ::Function(Arc::new(move |z: Complex64| {
            let t = z.arg().rem_euclid(TAU);
            let n = nodes.len();
            let j = nodes.partition_point(|node| node.0 <= t);
            let (a, b) = if j == 0 || j == n {
                (nodes[n - 1], (nodes[0].0 + TAU, nodes[0].1))
            } else {
                (nodes[j - 1], nodes[j])
            };
            let t = if t < a.0 { t + TAU } else { t };
            if b.0 == a.0 {
                return a.1;
            }
            a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
        })))
    }

    pub fn at(&self, z: Complex64) -> f64 {
        match self {
            KOfZ::Constant(k) => *k,
            KOfZ::Function(f) => f(z),
        }
    }
}

impl fmt::Debug for KOfZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KOfZ::Constant(k) => write!(f, "Constant({k})"),
            KOfZ::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl fmt::Debug for FibonacciParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FibonacciParams")
            .field("theta_a", &self.theta_a)
            .field("theta_b", &self.theta_b)
            .field("k", &self.k)
            .finish()
    }
}

impl FibonacciParams {
    /// Angles must lie in the open interval `(-pi/2, pi/2)`; `K` defaults to
    /// [`DEFAULT_K`].
    pub fn new(theta_a: f64, theta_b: f64) -> Result<Self> {
        for (name, t) in [("theta_a", theta_a), ("theta_b", theta_b)] {
            if !(t.abs() < std::f64::consts::FRAC_PI_2) {
                return Err(Error::Domain(format!("{name} = {t} outside (-pi/2, pi/2)")));
            }
        }
        Ok(FibonacciParams {
            theta_a,
            theta_b,
            k: KOfZ::Constant(DEFAULT_K),
        })
    }

    pub fn with_k(mut self, k: KOfZ) -> Self {
        self.k = k;
        self
    }

    pub fn theta(&self, letter: Letter) -> f64 {
        match letter {
            Letter::A => self.theta_a,
            Letter::B => self.theta_b,
        }
    }

    pub fn coin(&self, letter: Letter) -> Coin {
        Coin::rotation(self.theta(letter))
    }
}

/// Coins `C_{w_j}` on sites `first_site, first_site + 1, ...`.
pub fn coins_from_word(word: &[Letter], first_site: i64, params: &FibonacciParams) -> Result<CoinSequence> {
    CoinSequence::from_fn(first_site..first_site + word.len() as i64, |n| {
        params.coin(word[(n - first_site) as usize])
    })
}

/// Coins of the rotation-coded subshift element on `sites`.
pub fn fibonacci_coins(sites: std::ops::Range<i64>, params: &FibonacciParams) -> Result<CoinSequence> {
    CoinSequence::from_fn(sites, |n| params.coin(subshift_letter(n)))
}

fn check_unit(z: Complex64) -> Result<()> {
    if !((z.norm() - 1.0).abs() <= 1e-12) {
        return Err(Error::Domain(format!("z must lie on the unit circle, |z| = {}", z.norm())));
    }
    Ok(())
}

/// `I(z)`, transcribed term by term.
pub fn invariant_i(z: Complex64, params: &FibonacciParams) -> Result<f64> {
    check_unit(z)?;
    let (ta, tb) = (params.theta_a, params.theta_b);
    let (sec_a, sec_b) = (ta.cos().recip(), tb.cos().recip());
    let re = z.re;
    let re2 = (z * z).re;
    let first = re * re * (sec_a * sec_a + sec_b * sec_b);
    let second = (re2 * sec_a * sec_b - ta.tan() * tb.tan()).powi(2);
    let third = 2.0 * (re * re * sec_a * sec_a * sec_b * sec_b * (re2 - ta.sin() * tb.sin()));
    Ok(first + second - third - 1.0)
}

/// `max{2 + sqrt(8 + I), cos theta_a, cos theta_b}` for a given `I`.
pub fn constant_c_from_i(i: f64, params: &FibonacciParams) -> Result<f64> {
    if !(i >= -8.0) {
        return Err(Error::Domain(format!("I(z) = {i} is below -8, so 2 + sqrt(8 + I) is not real")));
    }
    Ok((2.0 + (8.0 + i).sqrt()).max(params.theta_a.cos()).max(params.theta_b.cos()))
}

pub fn constant_c(z: Complex64, params: &FibonacciParams) -> Result<f64> {
    constant_c_from_i(invariant_i(z, params)?, params)
}

/// `log(1 + 1/(4 C^2)) / (16 log phi)`.
pub fn gamma1_from_c(c: f64) -> f64 {
    (1.0 / (4.0 * c * c)).ln_1p() / (16.0 * GOLDEN_MEAN.ln())
}

/// `4 log2 K`, defined for `K > 1`.
pub fn gamma2_from_k(k: f64) -> Result<f64> {
    if !(k > 1.0) || !k.is_finite() {
        return Err(Error::Domain(format!("K = {k} must exceed 1")));
    }
    Ok(4.0 * k.log2())
}

/// `2 gamma1 / (gamma1 + 2 gamma2 + 1)`.
pub fn beta_from_gammas(gamma1: f64, gamma2: f64) -> f64 {
    2.0 * gamma1 / (gamma1 + 2.0 * gamma2 + 1.0)
}

pub fn gamma1(z: Complex64, params: &FibonacciParams) -> Result<f64> {
    Ok(gamma1_from_c(constant_c(z, params)?))
}

pub fn gamma2(z: Complex64, params: &FibonacciParams) -> Result<f64> {
    gamma2_from_k(params.k.at(z))
}

pub fn beta_lower_bound(z: Complex64, params: &FibonacciParams) -> Result<f64> {
    Ok(bound_at(z, params)?.beta)
}

/// Every constant of the bound at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub z: Complex64,
    pub i: f64,
    pub c: f64,
    pub gamma1: f64,
    pub k: f64,
    pub gamma2: f64,
    pub beta: f64,
}

pub fn bound_at(z: Complex64, params: &FibonacciParams) -> Result<BoundRow> {
    let i = invariant_i(z, params)?;
    let c = constant_c_from_i(i, params)?;
    let g1 = gamma1_from_c(c);
    let k = params.k.at(z);
    let g2 = gamma2_from_k(k)?;
    Ok(BoundRow {
        z,
        i,
        c,
        gamma1: g1,
        k,
        gamma2: g2,
        beta: beta_from_gammas(g1, g2),
    })
}

/// Bound on a grid of points, in input order.
pub fn bound_on_grid(grid: &[Complex64], params: &FibonacciParams) -> Result<Vec<BoundRow>> {
    grid.par_iter().map(|&z| bound_at(z, params)).collect()
}

/// Half-line Verblunsky coefficients `alpha_0 .. alpha_{count-1}` of the gauged
/// Fibonacci walk.
pub fn fibonacci_verblunsky(params: &FibonacciParams, count: usize) -> Result<VerblunskySequence> {
    let sites = count.div_ceil(2).max(1) as i64;
    let coins = fibonacci_coins(0..sites, params)?;
    let (_, two_sided) = cgmv_gauge(&coins, Window::new(0, sites))?;
    VerblunskySequence::from_fn(true, 0..count as i64, |n| {
        two_sided.get(n).expect("gauge covers every requested index")
    })
}

/// Atomic approximation of the spectrum: the paraorthogonal truncation of size
/// `n` of the gauged half-line operator, boundary phase `1`.
pub fn spectrum_approximation(params: &FibonacciParams, n: usize) -> Result<DiscreteMeasure> {
    if n < 2 {
        return Err(Error::Input(format!("truncation size {n} is below 2")));
    }
    let alphas = fibonacci_verblunsky(params, n - 1)?;
    paraorthogonal_spectrum_szego(&alphas, n, Complex64::new(1.0, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumBound {
    /// One row per atom, sorted by angle.
    pub rows: Vec<BoundRow>,
    pub max_beta: f64,
    pub argmax: Complex64,
}

/// `max beta(z)` over the atoms of [`spectrum_approximation`].
pub fn max_beta_over_spectrum(params: &FibonacciParams, n: usize) -> Result<SpectrumBound> {
    let grid: Vec<Complex64> = spectrum_approximation(params, n)?
        .sorted_by_angle()
        .into_iter()
        .map(|(theta, _)| Complex64::from_polar(1.0, theta))
        .collect();
    let rows = bound_on_grid(&grid, params)?;
    let best = rows
        .iter()
        .max_by(|a, b| a.beta.total_cmp(&b.beta))
        .ok_or_else(|| Error::Numerical("empty spectrum approximation".into()))?;
    Ok(SpectrumBound {
        max_beta: best.beta,
        argmax: best.z,
        rows,
    })
}

/// Unit-determinant transfer matrix of one letter: the two Verblunsky steps
/// `sin theta`, then `0`, scaled by `z^{-1}`.  On the unit circle this is
/// `rho^{-1} [[z, -s], [-s, conj z]]` with `s = sin theta`.
pub fn letter_block(z: Complex64, params: &FibonacciParams, letter: Letter) -> Result<TransferMatrix> {
    let even = transfer_matrix(z, Complex64::new(params.theta(letter).sin(), 0.0))?;
    let odd = transfer_matrix(z, Complex64::new(0.0, 0.0))?;
    Ok(odd.mul(&even).scale(z.inv()))
}

#[derive(Debug, Clone, Copy)]
struct Scaled {
    m: TransferMatrix,
    log_scale: f64,
}

impl Scaled {
    fn mul(&self, rhs: &Scaled) -> Scaled {
        let mut m = self.m.mul(&rhs.m);
        let mut log_scale = self.log_scale + rhs.log_scale;
        let big = m.max_abs();
        if big > RESCALE_THRESHOLD {
            m = m.scale(Complex64::new(big.recip(), 0.0));
            log_scale += big.ln();
        }
        Scaled { m, log_scale }
    }

    fn log2_norm(&self) -> f64 {
        (self.m.max_abs().ln() + self.log_scale) / std::f64::consts::LN_2
    }
}

/// Block products over `s_{-1}, s_0, ..., s_{top-1}` in double precision with
/// rescaling; `s_{j+1} = s_j s_{j-1}` and the `s_j` block acts first.
fn scaled_products(z: Complex64, params: &FibonacciParams, top: usize) -> Result<Vec<Scaled>> {
    let wrap = |m| Scaled { m, log_scale: 0.0 };
    let mut m = vec![
        wrap(letter_block(z, params, Letter::B)?),
        wrap(letter_block(z, params, Letter::A)?),
    ];
    for j in 2..=top {
        let next = m[j - 2].mul(&m[j - 1]);
        m.push(next);
    }
    Ok(m)
}

type Big = FBig;

#[derive(Clone)]
struct BigComplex {
    re: Big,
    im: Big,
}

impl BigComplex {
    fn mul(&self, rhs: &BigComplex) -> BigComplex {
        BigComplex {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    fn conj(&self) -> BigComplex {
        BigComplex {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    fn add(&self, rhs: &BigComplex) -> BigComplex {
        BigComplex {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

/// `[[u, v], [conj v, conj u]]`, the shape every letter block and every
/// product of them keeps.
#[derive(Clone)]
struct BigBlock {
    u: BigComplex,
    v: BigComplex,
}

impl BigBlock {
    fn letter(z: Complex64, s: f64, bits: usize) -> BigBlock {
        let exact = |x: f64| Big::try_from(x).expect("finite input").with_precision(bits).value();
        let (zr, zi, s) = (exact(z.re), exact(z.im), exact(s));
        // normalize z onto the circle so the determinant is 1 at this precision
        let modulus = (&zr * &zr + &zi * &zi).sqrt();
        let rho = (exact(1.0) - &s * &s).sqrt();
        let scale = &modulus * &rho;
        BigBlock {
            u: BigComplex {
                re: &zr / &scale,
                im: &zi / &scale,
            },
            v: BigComplex {
                re: -(&s / &rho),
                im: exact(0.0),
            },
        }
    }

    fn mul(&self, rhs: &BigBlock) -> BigBlock {
        BigBlock {
            u: self.u.mul(&rhs.u).add(&self.v.mul(&rhs.v.conj())),
            v: self.u.mul(&rhs.v).add(&self.v.mul(&rhs.u.conj())),
        }
    }

    fn half_trace(&self) -> Big {
        self.u.re.clone()
    }
}

/// `x` in double precision, infinite past the double range.
fn to_f64(x: &Big) -> f64 {
    match x.to_f64().value() {
        v if v.abs() < f64::MAX => v,
        v => v.signum() * f64::INFINITY,
    }
}

fn log2_abs(x: &Big) -> f64 {
    match to_f64(x) {
        v if v.is_finite() && v != 0.0 => v.abs().log2(),
        _ => x.log2_est() as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    /// `x_n = tr(M_n) / 2`; infinite when it exceeds the double range.
    pub x: f64,
    pub log2_abs_x: f64,
    /// `x_{n+1}^2 + x_n^2 + x_{n-1}^2 - 2 x_{n+1} x_n x_{n-1} - 1`.
    pub fricke: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMapTable {
    pub rows: Vec<TraceRow>,
    /// Working precision of the exact-block products.
    pub precision_bits: usize,
    /// `I(z)`, reported beside the Fricke values.
    pub invariant_i: f64,
}

impl TraceMapTable {
    /// `max |fricke_{n+1} - fricke_n|` over consecutive rows up to `n_max`.
    pub fn max_drift(&self, n_max: usize) -> f64 {
        self.rows
            .windows(2)
            .filter(|w| w[1].n <= n_max)
            .map(|w| {
                let d = (w[1].fricke - w[0].fricke).abs();
                if d.is_finite() { d } else { f64::INFINITY }
            })
            .fold(0.0, f64::max)
    }
}

/// Half traces of the normalized block products over `s_n` and the Fricke
/// quantity along the orbit, for `n = 0..=n_max`.
///
/// Off the spectrum the traces grow doubly exponentially and the Fricke sum
/// cancels to `O(1)` from terms of size `x_{n+1} x_n x_{n-1}`.  A rescaled
/// double-precision pass measures that size; the products are then redone in
/// binary floating point with enough bits to keep the cancellation exact to
/// roughly `2^-64`.
pub fn trace_map_diagnostic(z: Complex64, params: &FibonacciParams, n_max: usize) -> Result<TraceMapTable> {
    check_unit(z)?;
    if n_max > MAX_TRACE_LEVEL {
        return Err(Error::Input(format!("level {n_max} exceeds {MAX_TRACE_LEVEL}")));
    }
    // index j holds the product over s_{j-1}
    let top = n_max + 2;
    let scaled = scaled_products(z, params, top)?;
    let sizes: Vec<f64> = scaled.iter().map(|s| s.log2_norm().max(0.0)).collect();
    let needed = sizes.windows(3).map(|w| w.iter().sum::<f64>()).fold(0.0, f64::max);
    let bits = needed.ceil() as usize + 64 + 2 * top;

    let mut blocks = vec![
        BigBlock::letter(z, params.theta_b.sin(), bits),
        BigBlock::letter(z, params.theta_a.sin(), bits),
    ];
    for j in 2..=top {
        let next = blocks[j - 2].mul(&blocks[j - 1]);
        blocks.push(next);
    }
    let x: Vec<Big> = blocks.iter().map(BigBlock::half_trace).collect();
    let one = Big::ONE.with_precision(bits).value();
    let two = &one + &one;
    let rows = (0..=n_max)
        .map(|n| {
            let (xm, x0, xp) = (&x[n], &x[n + 1], &x[n + 2]);
            let fricke = xp * xp + x0 * x0 + xm * xm - &two * xp * x0 * xm - &one;
            TraceRow {
                n,
                x: to_f64(x0),
                log2_abs_x: log2_abs(x0),
                fricke: to_f64(&fricke),
            }
        })
        .collect();
    Ok(TraceMapTable {
        rows,
        precision_bits: bits,
        invariant_i: invariant_i(z, params)?,
    })
}

/// Same table from the rescaled double-precision products alone.  Accurate
/// while the traces stay moderate; off the spectrum the Fricke column loses
/// all digits.
pub fn trace_map_diagnostic_f64(z: Complex64, params: &FibonacciParams, n_max: usize) -> Result<TraceMapTable> {
    check_unit(z)?;
    if n_max > MAX_TRACE_LEVEL {
        return Err(Error::Input(format!("level {n_max} exceeds {MAX_TRACE_LEVEL}")));
    }
    let scaled = scaled_products(z, params, n_max + 2)?;
    let x: Vec<f64> = scaled
        .iter()
        .map(|s| 0.5 * s.m.trace().re * s.log_scale.exp())
        .collect();
    let rows = (0..=n_max)
        .map(|n| {
            let (xm, x0, xp) = (x[n], x[n + 1], x[n + 2]);
            TraceRow {
                n,
                x: x0,
                log2_abs_x: (0.5 * scaled[n + 1].m.trace().re).abs().log2()
                    + scaled[n + 1].log_scale / std::f64::consts::LN_2,
                fricke: xp * xp + x0 * x0 + xm * xm - 2.0 * xp * x0 * xm - 1.0,
            }
        })
        .collect();
    Ok(TraceMapTable {
        rows,
        precision_bits: 53,
        invariant_i: invariant_i(z, params)?,
    })
}
