//! CMV matrices built from Verblunsky coefficients.
//!
//! Both the half-line matrix `C` and the extended matrix `E` are products
//! `L M` of 2x2 block-diagonal unitaries: `L` carries `Theta(alpha_{2j})` on
//! the index pair `(2j, 2j+1)` and `M` carries `Theta(alpha_{2j+1})` on
//! `(2j+1, 2j+2)`, where
//!
//! ```text
//! Theta(a) = [ conj(a)   rho ]      rho = (1 - |a|^2)^(1/2)
//!            [   rho     -a  ]
//! ```
//!
//! Row and column `0` of `E` carry `-conj(alpha_0) alpha_{-1}` on the main
//! diagonal.  The half-line matrix is the extended one with `alpha_{-1} = -1`,
//! which decouples `l^2(Z_+)`.

mod spectrum;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::banded::{BandSource, BandedUnitary, BANDWIDTH, ZERO};
use crate::error::{Error, Result};
use crate::lattice::Window;

pub use spectrum::{
    paraorthogonal_decomposition, paraorthogonal_spectrum, paraorthogonal_spectrum_szego,
    DiscreteMeasure, SpectralDecomposition,
};

/// Verblunsky coefficients `alpha_n` in the open unit disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerblunskySequence {
    coefficients: BTreeMap<i64, Complex64>,
    half_line: bool,
}

impl VerblunskySequence {
    pub fn new(half_line: bool) -> Self {
        VerblunskySequence {
            coefficients: BTreeMap::new(),
            half_line,
        }
    }

    pub fn half_line() -> Self {
        Self::new(true)
    }

    pub fn two_sided() -> Self {
        Self::new(false)
    }

    /// Coefficients `f(n)` for every `n` in `indices`.
    pub fn from_fn(
        half_line: bool,
        indices: std::ops::Range<i64>,
        mut f: impl FnMut(i64) -> Complex64,
    ) -> Result<Self> {
        let mut seq = Self::new(half_line);
        for n in indices {
            seq.insert(n, f(n))?;
        }
        Ok(seq)
    }

    /// Constant sequence `alpha_n = a` on `indices`.
    pub fn constant(half_line: bool, indices: std::ops::Range<i64>, a: Complex64) -> Result<Self> {
        Self::from_fn(half_line, indices, |_| a)
    }

    pub fn insert(&mut self, n: i64, alpha: Complex64) -> Result<()> {
        if self.half_line && n < 0 {
            return Err(Error::Domain(format!(
                "negative index {n} in a half-line sequence"
            )));
        }
        if !alpha.re.is_finite() || !alpha.im.is_finite() || alpha.norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "|alpha_{n}| = {} is not inside the unit disk",
                alpha.norm()
            )));
        }
        self.coefficients.insert(n, alpha);
        Ok(())
    }

    pub fn is_half_line(&self) -> bool {
        self.half_line
    }

    pub fn get(&self, n: i64) -> Option<Complex64> {
        self.coefficients.get(&n).copied()
    }

    pub fn alpha(&self, n: i64) -> Result<Complex64> {
        self.get(n)
            .ok_or_else(|| Error::Config(format!("missing Verblunsky coefficient alpha_{n}")))
    }

    /// `rho_n = (1 - |alpha_n|^2)^(1/2)`.
    pub fn rho(&self, n: i64) -> Result<f64> {
        Ok(rho_of(self.alpha(n)?))
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Smallest and largest stored index.
    pub fn index_range(&self) -> Option<(i64, i64)> {
        let lo = *self.coefficients.keys().next()?;
        let hi = *self.coefficients.keys().next_back()?;
        Some((lo, hi))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coefficients.iter().map(|(n, a)| (*n, *a))
    }

    /// Every index of `indices` is present.
    pub fn require(&self, indices: std::ops::Range<i64>) -> Result<()> {
        for n in indices {
            self.alpha(n)?;
        }
        Ok(())
    }
}

pub(crate) fn rho_of(alpha: Complex64) -> f64 {
    (1.0 - alpha.norm_sqr()).max(0.0).sqrt()
}

/// The 2x2 block `Theta(alpha)`; `|alpha| = 1` is allowed (then `rho = 0`).
pub(crate) fn theta(alpha: Complex64) -> [[Complex64; 2]; 2] {
    let rho = Complex64::new(rho_of(alpha), 0.0);
    [[alpha.conj(), rho], [rho, -alpha]]
}

/// Which coefficient enters block `k` of the factorization.
#[derive(Debug, Clone)]
enum Shape {
    /// Whole line, every coefficient taken from the sequence.
    Extended,
    /// Half line: `alpha_{-1} = -1`.
    HalfLine,
    /// Half line of size `n` with `alpha_{n-1}` replaced by a unimodular phase.
    Paraorthogonal { size: i64, phase: Complex64 },
}

/// Row generator for `C`, `E` and paraorthogonal truncations.
#[derive(Debug, Clone)]
pub struct CmvSource {
    alphas: Arc<VerblunskySequence>,
    shape: Shape,
}

impl CmvSource {
    fn coefficient(&self, k: i64) -> Result<Complex64> {
        match self.shape {
            Shape::Extended => self.alphas.alpha(k),
            Shape::HalfLine => {
                if k == -1 {
                    Ok(Complex64::new(-1.0, 0.0))
                } else if k < -1 {
                    Ok(ZERO)
                } else {
                    self.alphas.alpha(k)
                }
            }
            Shape::Paraorthogonal { size, phase } => {
                if k == -1 {
                    Ok(Complex64::new(-1.0, 0.0))
                } else if k == size - 1 {
                    Ok(phase)
                } else if k < -1 || k >= size {
                    Ok(ZERO)
                } else {
                    self.alphas.alpha(k)
                }
            }
        }
    }
}

impl BandSource for CmvSource {
    fn row(&self, r: i64) -> Result<[Complex64; 5]> {
        let mut row = [ZERO; 5];
        let l_start = r.div_euclid(2) * 2;
        let l = theta(self.coefficient(l_start)?);
        let l_row = (r - l_start) as usize;
        for s in 0..2 {
            let mid = l_start + s as i64;
            let lv = l[l_row][s];
            if lv == ZERO {
                continue;
            }
            let m_start = if mid.rem_euclid(2) == 1 { mid } else { mid - 1 };
            let m = theta(self.coefficient(m_start)?);
            let m_row = (mid - m_start) as usize;
            for t in 0..2 {
                let c = m_start + t as i64;
                row[(c - r + BANDWIDTH) as usize] += lv * m[m_row][t];
            }
        }
        Ok(row)
    }

    fn domain(&self) -> (Option<i64>, Option<i64>) {
        match self.shape {
            Shape::Extended => (None, None),
            Shape::HalfLine => (Some(0), None),
            Shape::Paraorthogonal { size, .. } => (Some(0), Some(size)),
        }
    }
}

/// Top-left `size x size` window of the half-line CMV matrix.
pub fn build_half_line_cmv(alphas: &VerblunskySequence, size: usize) -> Result<BandedUnitary> {
    if !alphas.is_half_line() {
        return Err(Error::Config(
            "half-line CMV matrix needs a half-line coefficient sequence".into(),
        ));
    }
    if size < 2 {
        return Err(Error::Input(format!("CMV window size {size} < 2")));
    }
    alphas.require(0..size as i64 + 1)?;
    let source = CmvSource {
        alphas: Arc::new(alphas.clone()),
        shape: Shape::HalfLine,
    };
    BandedUnitary::from_source(Arc::new(source), Window::new(0, size as i64))
}

/// Window of the extended CMV matrix.  The window must start at an even
/// index and have even length of at least 6.
pub fn build_extended_cmv(alphas: &VerblunskySequence, window: Window) -> Result<BandedUnitary> {
    if alphas.is_half_line() {
        return Err(Error::Config(
            "extended CMV matrix needs a two-sided coefficient sequence".into(),
        ));
    }
    if window.len() < 6 || window.lo.rem_euclid(2) != 0 || window.len() % 2 != 0 {
        return Err(Error::Alignment(format!(
            "extended CMV window {window:?} must have even start, even length and length >= 6"
        )));
    }
    alphas.require((window.lo - 1)..(window.hi + 1))?;
    let source = CmvSource {
        alphas: Arc::new(alphas.clone()),
        shape: Shape::Extended,
    };
    BandedUnitary::from_source(Arc::new(source), window)
}

/// `N x N` paraorthogonal truncation: `alpha_{N-1}` replaced by `phase`.
pub fn build_paraorthogonal(
    alphas: &VerblunskySequence,
    size: usize,
    phase: Complex64,
) -> Result<BandedUnitary> {
    if !alphas.is_half_line() {
        return Err(Error::Config(
            "paraorthogonal truncation needs a half-line coefficient sequence".into(),
        ));
    }
    if size == 0 {
        return Err(Error::Input("truncation size must be positive".into()));
    }
    if (phase.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "boundary phase has modulus {} != 1",
            phase.norm()
        )));
    }
    alphas.require(0..size as i64 - 1)?;
    let source = CmvSource {
        alphas: Arc::new(alphas.clone()),
        shape: Shape::Paraorthogonal {
            size: size as i64,
            phase,
        },
    };
    BandedUnitary::from_source(Arc::new(source), Window::new(0, size as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeVector;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_alphas(rng: &mut ChaCha8Rng, half_line: bool, range: std::ops::Range<i64>, r: f64) -> VerblunskySequence {
        VerblunskySequence::from_fn(half_line, range, |_| {
            let m = rng.random_range(0.0..r);
            Complex64::from_polar(m, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .unwrap()
    }

    /// Dense `L M` built independently from the block definition.
    fn dense_lm(alpha: impl Fn(i64) -> Complex64, lo: i64, hi: i64) -> DMatrix<Complex64> {
        let n = (hi - lo) as usize;
        let idx = |k: i64| (k - lo) as usize;
        let mut l = DMatrix::identity(n, n);
        let mut m = DMatrix::identity(n, n);
        for k in (lo - 1)..hi {
            let target = if k.rem_euclid(2) == 0 { &mut l } else { &mut m };
            if k >= lo && k + 1 < hi {
                let t = theta(alpha(k));
                target[(idx(k), idx(k))] = t[0][0];
                target[(idx(k), idx(k + 1))] = t[0][1];
                target[(idx(k + 1), idx(k))] = t[1][0];
                target[(idx(k + 1), idx(k + 1))] = t[1][1];
            }
        }
        l * m
    }

    #[test]
    fn free_half_line_pattern() {
        let alphas = VerblunskySequence::constant(true, 0..8, ZERO).unwrap();
        let u = build_half_line_cmv(&alphas, 6).unwrap();
        assert_eq!(u.entry(0, 0), ZERO);
        assert_eq!(u.entry(1, 0), c(1.0, 0.0));
        assert_eq!(u.entry(0, 1), ZERO);
        assert_eq!(u.entry(0, 2), c(1.0, 0.0));
        assert_eq!(u.entry(2, 1), ZERO);
        assert_eq!(u.entry(3, 1), c(1.0, 0.0));
    }

    #[test]
    fn half_line_entries_match_display() {
        let alphas = VerblunskySequence::constant(true, 0..8, c(0.5, 0.0)).unwrap();
        let u = build_half_line_cmv(&alphas, 6).unwrap();
        assert!((u.entry(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((u.entry(1, 0) - c(0.866_025_403_784_438_6, 0.0)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_alphas(&mut rng, true, 0..8, 0.9);
        let u = build_half_line_cmv(&a, 6).unwrap();
        let al = |n: i64| a.get(n).unwrap();
        let r = |n: i64| rho_of(al(n));
        let expect = [
            ((0, 0), al(0).conj()),
            ((0, 1), al(1).conj() * r(0)),
            ((0, 2), c(r(1) * r(0), 0.0)),
            ((1, 0), c(r(0), 0.0)),
            ((1, 1), -al(1).conj() * al(0)),
            ((1, 2), -al(0) * r(1)),
            ((2, 1), al(2).conj() * r(1)),
            ((2, 2), -al(2).conj() * al(1)),
            ((2, 3), al(3).conj() * r(2)),
            ((2, 4), c(r(3) * r(2), 0.0)),
            ((3, 1), c(r(2) * r(1), 0.0)),
            ((3, 2), -al(1) * r(2)),
            ((3, 3), -al(3).conj() * al(2)),
            ((3, 4), -al(2) * r(3)),
            ((4, 3), al(4).conj() * r(3)),
            ((4, 4), -al(4).conj() * al(3)),
        ];
        for ((i, j), v) in expect {
            assert!((u.entry(i, j) - v).norm() < 1e-15, "entry ({i},{j})");
        }
        assert_eq!(u.entry(0, 3), ZERO);
        assert_eq!(u.entry(4, 1), ZERO);
    }

    #[test]
    fn extended_entries_match_display() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_alphas(&mut rng, false, -8..8, 0.9);
        let u = build_extended_cmv(&a, Window::new(-6, 6)).unwrap();
        let al = |n: i64| a.get(n).unwrap();
        let r = |n: i64| rho_of(al(n));
        let expect = [
            ((-1, -3), c(r(-2) * r(-3), 0.0)),
            ((-1, -2), -r(-2) * al(-3)),
            ((-1, -1), -al(-1).conj() * al(-2)),
            ((-1, 0), -r(-1) * al(-2)),
            ((-2, -1), al(-1).conj() * r(-2)),
            ((-2, 0), c(r(-1) * r(-2), 0.0)),
            ((0, -1), al(0).conj() * r(-1)),
            ((0, 0), -al(0).conj() * al(-1)),
            ((0, 1), al(1).conj() * r(0)),
            ((0, 2), c(r(1) * r(0), 0.0)),
            ((1, -1), c(r(0) * r(-1), 0.0)),
            ((1, 0), -r(0) * al(-1)),
            ((1, 1), -al(1).conj() * al(0)),
            ((1, 2), -r(1) * al(0)),
            ((2, 1), al(2).conj() * r(1)),
            ((2, 2), -al(2).conj() * al(1)),
        ];
        for ((i, j), v) in expect {
            assert!((u.entry(i, j) - v).norm() < 1e-15, "entry ({i},{j})");
        }
    }

    #[test]
    fn extended_matches_dense_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_alphas(&mut rng, false, -12..12, 0.95);
        let u = build_extended_cmv(&a, Window::new(-10, 10)).unwrap();
        let dense = dense_lm(|k| a.get(k).unwrap(), -12, 12);
        // interior rows/columns are unaffected by the dense oracle's edge blocks
        for i in -8..8 {
            for j in -8..8 {
                let d = dense[((i + 12) as usize, (j + 12) as usize)];
                assert!((u.entry(i, j) - d).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn free_extended_moves_by_two() {
        let a = VerblunskySequence::constant(false, -10..10, ZERO).unwrap();
        let u = build_extended_cmv(&a, Window::new(-6, 6)).unwrap();
        let dense = u.to_dense();
        let apply_dense = |n: i64| {
            let mut v = DVector::from_element(12, ZERO);
            v[(n + 6) as usize] = c(1.0, 0.0);
            let w = &dense * v;
            (0..12).filter(|&i| w[i].norm() > 0.5).map(|i| i as i64 - 6).collect::<Vec<_>>()
        };
        assert_eq!(apply_dense(0), vec![-2]);
        assert_eq!(apply_dense(-1), vec![1]);
        let out = u.apply(&LatticeVector::delta(0)).unwrap();
        assert_eq!(out.get(-2), c(1.0, 0.0));
        assert!((out.norm() - 1.0).abs() < 1e-15);
        assert_eq!(u.apply(&LatticeVector::delta(-1)).unwrap().get(1), c(1.0, 0.0));
    }

    #[test]
    fn odd_zero_reduces_to_sparse_form() {
        let a = VerblunskySequence::from_fn(false, -10..10, |n| {
            if n.rem_euclid(2) == 1 { ZERO } else { c(0.3, 0.0) }
        })
        .unwrap();
        let u = build_extended_cmv(&a, Window::new(-6, 6)).unwrap();
        assert_eq!(u.entry(0, 0), ZERO);
        assert!((u.entry(0, -1) - c(0.3, 0.0)).norm() < 1e-15);
        assert!((u.entry(0, 2) - c(0.91f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((u.entry(1, 2) - c(-0.3, 0.0)).norm() < 1e-15);
        assert_eq!(u.entry(0, 1), ZERO);
        assert_eq!(u.entry(1, 1), ZERO);
    }

    #[test]
    fn interior_columns_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let a = random_alphas(&mut rng, false, -22..22, 0.95);
            let u = build_extended_cmv(&a, Window::new(-20, 20)).unwrap();
            assert!(u.column_orthonormality_defect(Window::new(-18, 18)) < 1e-12);
            let h = random_alphas(&mut rng, true, 0..30, 0.95);
            let u = build_half_line_cmv(&h, 24).unwrap();
            assert!(u.column_orthonormality_defect(Window::new(0, 22)) < 1e-12);
        }
    }

    #[test]
    fn errors_for_bad_inputs() {
        let mut a = VerblunskySequence::half_line();
        assert!(matches!(a.insert(0, c(1.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(a.insert(-1, ZERO), Err(Error::Domain(_))));
        let a = VerblunskySequence::constant(true, 0..4, ZERO).unwrap();
        assert!(matches!(build_half_line_cmv(&a, 6), Err(Error::Config(_))));
        let b = VerblunskySequence::constant(false, -10..10, ZERO).unwrap();
        assert!(matches!(
            build_extended_cmv(&b, Window::new(-5, 5)),
            Err(Error::Alignment(_))
        ));
        assert!(matches!(
            build_extended_cmv(&b, Window::new(-2, 2)),
            Err(Error::Alignment(_))
        ));
    }
}
