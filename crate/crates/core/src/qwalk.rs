//! Coined quantum walks on `l^2(Z) (x) C^2` and their CMV gauge.
//!
//! The tensor basis is flattened as `|n> (x) up -> 2n` and
//! `|n> (x) down -> 2n + 1`.  In these coordinates the walk operator, in its
//! displayed (CGMV) orientation, has row `2n` with `c21_n` at column `2n-1`
//! and `c11_n` at column `2n+2`, and row `2n+1` with `c22_n` at column
//! `2n-1` and `c12_n` at column `2n+2`.  That matrix is the transpose of the
//! one obtained by reading the update rule
//!
//! ```text
//! |n> up   -> c11_n |n+1> up + c21_n |n-1> down
//! |n> down -> c12_n |n+1> up + c22_n |n-1> down
//! ```
//!
//! column by column.  Both orientations are available through
//! [`WalkConvention`]; the gauge correspondence with extended CMV matrices
//! holds for the displayed one.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::banded::{BandSource, BandedUnitary, BANDWIDTH, ZERO};
use crate::cmv::VerblunskySequence;
use crate::error::{Error, Result};
use crate::lattice::Window;

/// Unitarity tolerance for coins.
pub const COIN_TOL: f64 = 1e-12;

/// Below this modulus a diagonal coin entry counts as zero for the gauge.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// A 2x2 unitary coin `[[c11, c12], [c21, c22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coin {
    pub c11: Complex64,
    pub c12: Complex64,
    pub c21: Complex64,
    pub c22: Complex64,
}

impl Coin {
    pub fn new(c11: Complex64, c12: Complex64, c21: Complex64, c22: Complex64) -> Result<Self> {
        let coin = Coin { c11, c12, c21, c22 };
        let defect = coin.unitarity_defect();
        if !(defect <= COIN_TOL) {
            return Err(Error::Domain(format!(
                "coin is not unitary (defect {defect:e})"
            )));
        }
        Ok(coin)
    }

    pub fn identity() -> Self {
        Coin {
            c11: Complex64::new(1.0, 0.0),
            c12: ZERO,
            c21: ZERO,
            c22: Complex64::new(1.0, 0.0),
        }
    }

    /// `[[cos t, -sin t], [sin t, cos t]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Coin {
            c11: Complex64::new(c, 0.0),
            c12: Complex64::new(-s, 0.0),
            c21: Complex64::new(s, 0.0),
            c22: Complex64::new(c, 0.0),
        }
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Coin {
            c11: Complex64::new(h, 0.0),
            c12: Complex64::new(h, 0.0),
            c21: Complex64::new(h, 0.0),
            c22: Complex64::new(-h, 0.0),
        }
    }

    /// Max deviation of `C^* C` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let g11 = self.c11.norm_sqr() + self.c21.norm_sqr() - 1.0;
        let g22 = self.c12.norm_sqr() + self.c22.norm_sqr() - 1.0;
        let g12 = self.c11.conj() * self.c12 + self.c21.conj() * self.c22;
        g11.abs().max(g22.abs()).max(g12.norm())
    }
}

/// Coins indexed by lattice site.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoinSequence {
    coins: BTreeMap<i64, Coin>,
}

impl CoinSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_fn(sites: std::ops::Range<i64>, mut f: impl FnMut(i64) -> Coin) -> Result<Self> {
        let mut seq = Self::new();
        for n in sites {
            seq.insert(n, f(n))?;
        }
        Ok(seq)
    }

    /// The same rotation coin at every site of `sites`.
    pub fn rotation(sites: std::ops::Range<i64>, theta: f64) -> Self {
        CoinSequence {
            coins: sites.map(|n| (n, Coin::rotation(theta))).collect(),
        }
    }

    pub fn identity(sites: std::ops::Range<i64>) -> Self {
        CoinSequence {
            coins: sites.map(|n| (n, Coin::identity())).collect(),
        }
    }

    pub fn insert(&mut self, n: i64, coin: Coin) -> Result<()> {
        let defect = coin.unitarity_defect();
        if !(defect <= COIN_TOL) {
            return Err(Error::Domain(format!(
                "coin at site {n} is not unitary (defect {defect:e})"
            )));
        }
        self.coins.insert(n, coin);
        Ok(())
    }

    pub fn get(&self, n: i64) -> Option<&Coin> {
        self.coins.get(&n)
    }

    pub fn coin(&self, n: i64) -> Result<&Coin> {
        self.coins
            .get(&n)
            .ok_or_else(|| Error::Config(format!("missing coin at site {n}")))
    }

    pub fn len(&self) -> usize {
        self.coins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coins.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Coin)> + '_ {
        self.coins.iter().map(|(n, c)| (*n, c))
    }

    pub fn site_range(&self) -> Option<(i64, i64)> {
        Some((*self.coins.keys().next()?, *self.coins.keys().next_back()?))
    }
}

/// Orientation of the walk matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WalkConvention {
    /// The CGMV display; gauge-equivalent to an extended CMV matrix.
    #[default]
    Displayed,
    /// Columns follow the update rule (the transpose of `Displayed`).
    UpdateRule,
}

#[derive(Debug)]
struct WalkSource {
    coins: Arc<CoinSequence>,
    convention: WalkConvention,
}

impl BandSource for WalkSource {
    fn row(&self, r: i64) -> Result<[Complex64; 5]> {
        let mut row = [ZERO; 5];
        let n = r.div_euclid(2);
        let up = r.rem_euclid(2) == 0;
        let mut put = |col: i64, v: Complex64| row[(col - r + BANDWIDTH) as usize] = v;
        match (self.convention, up) {
            (WalkConvention::Displayed, true) => {
                let c = self.coins.coin(n)?;
                put(r - 1, c.c21);
                put(r + 2, c.c11);
            }
            (WalkConvention::Displayed, false) => {
                let c = self.coins.coin(n)?;
                put(r - 2, c.c22);
                put(r + 1, c.c12);
            }
            (WalkConvention::UpdateRule, true) => {
                // <n up| U |n-1 up> = c11_{n-1}, <n up| U |n-1 down> = c12_{n-1}
                let c = self.coins.coin(n - 1)?;
                put(r - 2, c.c11);
                put(r - 1, c.c12);
            }
            (WalkConvention::UpdateRule, false) => {
                // <n down| U |n+1 up> = c21_{n+1}, <n down| U |n+1 down> = c22_{n+1}
                let c = self.coins.coin(n + 1)?;
                put(r + 1, c.c21);
                put(r + 2, c.c22);
            }
        }
        Ok(row)
    }

    fn domain(&self) -> (Option<i64>, Option<i64>) {
        (None, None)
    }
}

/// Walk operator in the displayed orientation on a window of flat indices.
pub fn build_walk_operator(coins: &CoinSequence, window: Window) -> Result<BandedUnitary> {
    build_walk_operator_with(coins, window, WalkConvention::Displayed)
}

pub fn build_walk_operator_with(
    coins: &CoinSequence,
    window: Window,
    convention: WalkConvention,
) -> Result<BandedUnitary> {
    let source = WalkSource {
        coins: Arc::new(coins.clone()),
        convention,
    };
    BandedUnitary::from_source(Arc::new(source), window)
}

/// Flat index of `|n> (x) up` or `|n> (x) down`.
pub fn flat_index(site: i64, up: bool) -> i64 {
    2 * site + if up { 0 } else { 1 }
}

/// Gauge phases `lambda_k` indexed by flat basis index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaugePhases {
    lambdas: BTreeMap<i64, Complex64>,
}

impl GaugePhases {
    pub fn get(&self, k: i64) -> Option<Complex64> {
        self.lambdas.get(&k).copied()
    }

    pub fn lambda(&self, k: i64) -> Result<Complex64> {
        self.get(k)
            .ok_or_else(|| Error::Config(format!("gauge phase lambda_{k} not computed")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.lambdas.iter().map(|(k, l)| (*k, *l))
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

fn unit(z: Complex64) -> Complex64 {
    z / z.norm()
}

fn diagonal_phase(site: i64, entry: Complex64, name: &str) -> Result<Complex64> {
    let m = entry.norm();
    if m < DEGENERATE_TOL {
        return Err(Error::GaugeDegenerate {
            site,
            reason: format!("|{name}| = {m:e}"),
        });
    }
    Ok(entry / m)
}

/// CGMV gauge for the coins on `sites`: phases `lambda` with
/// `lambda_0 = lambda_{-1} = 1`, `lambda_{2n+2} = e^{-i s1_n} lambda_{2n}`,
/// `lambda_{2n+1} = e^{i s2_n} lambda_{2n-1}` (run backwards for negative
/// sites), and coefficients `alpha_{2n+1} = 0`,
/// `alpha_{2n} = (lambda_{2n} / lambda_{2n-1}) conj(c21_n)`.
///
/// The returned sequence covers indices `2 * sites.lo .. 2 * sites.hi`; phases
/// are returned for flat indices `2 * sites.lo - 1 ..= 2 * sites.hi`.
pub fn cgmv_gauge(coins: &CoinSequence, sites: Window) -> Result<(GaugePhases, VerblunskySequence)> {
    if sites.is_empty() {
        return Err(Error::Input("empty site range for the gauge".into()));
    }
    // the recursion starts at 0, so it must run through every site between 0 and the range
    let lo = sites.lo.min(0);
    let hi = sites.hi.max(1);
    let mut s1 = BTreeMap::new();
    let mut s2 = BTreeMap::new();
    for n in lo..hi {
        let c = coins.coin(n)?;
        s1.insert(n, diagonal_phase(n, c.c11, "c11")?);
        s2.insert(n, diagonal_phase(n, c.c22, "c22")?);
        if c.c21.norm() >= 1.0 - DEGENERATE_TOL {
            return Err(Error::GaugeDegenerate {
                site: n,
                reason: format!("|c21| = {} reaches the unit circle", c.c21.norm()),
            });
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let mut lambdas = BTreeMap::new();
    lambdas.insert(0, one);
    lambdas.insert(-1, one);
    let (mut even, mut odd) = (one, one);
    // renormalized at every step so the modulus does not drift along long ranges
    for n in 0..hi {
        even = unit(even * s1[&n].conj());
        lambdas.insert(2 * n + 2, even);
        odd = unit(odd * s2[&n]);
        lambdas.insert(2 * n + 1, odd);
    }
    let (mut even, mut odd) = (one, one);
    for n in (lo..0).rev() {
        even = unit(even * s1[&n]);
        lambdas.insert(2 * n, even);
        odd = unit(odd * s2[&n].conj());
        lambdas.insert(2 * n - 1, odd);
    }
    let mut alphas = VerblunskySequence::two_sided();
    for n in sites.indices() {
        let c = coins.coin(n)?;
        let ratio = unit(lambdas[&(2 * n)] * lambdas[&(2 * n - 1)].conj());
        alphas.insert(2 * n, ratio * c.c21.conj())?;
        alphas.insert(2 * n + 1, ZERO)?;
    }
    let keep = Window::new(2 * sites.lo - 1, 2 * sites.hi + 1);
    let phases = GaugePhases {
        lambdas: lambdas
            .into_iter()
            .filter(|(k, _)| keep.contains(*k))
            .collect(),
    };
    Ok((phases, alphas))
}

/// Max entrywise `|(Lambda^* U Lambda - E)_{rc}|` over the common interior.
pub fn verify_gauge_equivalence(
    walk: &BandedUnitary,
    phases: &GaugePhases,
    cmv: &BandedUnitary,
) -> Result<f64> {
    if walk.window() != cmv.window() {
        return Err(Error::Alignment(format!(
            "walk window {:?} differs from CMV window {:?}",
            walk.window(),
            cmv.window()
        )));
    }
    let interior = walk.interior().intersect(&cmv.interior());
    let mut worst: f64 = 0.0;
    for r in interior.indices() {
        let lr = phases.lambda(r)?;
        for c in (r - BANDWIDTH)..=(r + BANDWIDTH) {
            if !interior.contains(c) {
                continue;
            }
            let lc = phases.lambda(c)?;
            let gauged = lr.conj() * walk.entry(r, c) * lc;
            worst = worst.max((gauged - cmv.entry(r, c)).norm());
        }
    }
    Ok(worst)
}
