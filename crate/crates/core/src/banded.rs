//! Pentadiagonal operators on a growable lattice window.
//!
//! A [`BandedUnitary`] stores the compression of a unitary operator `U` on
//! `l^2(Z)` (or a subspace such as `l^2(Z_+)`) to a window of lattice sites.
//! Every row carries the five entries at column offsets `-2..=2`.  When the
//! operator was built from coefficient data it keeps a handle to that data and
//! can extend its window on demand, so that finitely supported states evolve
//! without any truncation error.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LatticeVector, Window};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest column offset from the diagonal.
pub const BANDWIDTH: i64 = 2;

/// Generates the rows of an operator from its defining coefficients.
pub trait BandSource: Send + Sync + fmt::Debug {
    /// Entries of row `r` at columns `r-2..=r+2`.  Columns outside
    /// [`BandSource::domain`] must be zero.
    fn row(&self, r: i64) -> Result<[Complex64; 5]>;

    /// Index range on which the operator acts; `None` on either side means
    /// unbounded in that direction.
    fn domain(&self) -> (Option<i64>, Option<i64>);
}

/// Window-restricted pentadiagonal operator.
#[derive(Clone)]
pub struct BandedUnitary {
    window: Window,
    rows: Vec<[Complex64; 5]>,
    source: Option<Arc<dyn BandSource>>,
}

impl fmt::Debug for BandedUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandedUnitary")
            .field("window", &self.window)
            .field("growable", &self.source.is_some())
            .finish()
    }
}

impl BandedUnitary {
    /// Materialize the rows of `source` over `window`.
    pub fn from_source(source: Arc<dyn BandSource>, window: Window) -> Result<Self> {
        let window = clip_to_domain(window, source.domain());
        let rows = window
            .indices()
            .map(|r| source.row(r).map(|row| mask_row(r, row, window)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BandedUnitary {
            window,
            rows,
            source: Some(source),
        })
    }

    /// Fixed operator given row by row; it cannot grow.
    pub fn from_rows(window: Window, rows: Vec<[Complex64; 5]>) -> Result<Self> {
        if rows.len() != window.len() {
            return Err(Error::Alignment(format!(
                "{} rows supplied for a window of {} sites",
                rows.len(),
                window.len()
            )));
        }
        let rows = window
            .indices()
            .zip(rows)
            .map(|(r, row)| mask_row(r, row, window))
            .collect();
        Ok(BandedUnitary {
            window,
            rows,
            source: None,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn is_growable(&self) -> bool {
        self.source.is_some()
    }

    pub fn source(&self) -> Option<&Arc<dyn BandSource>> {
        self.source.as_ref()
    }

    /// Matrix entry `<delta_row, U delta_col>`; zero outside the band or window.
    pub fn entry(&self, row: i64, col: i64) -> Complex64 {
        let d = col - row;
        if !self.window.contains(row) || !self.window.contains(col) || d.abs() > BANDWIDTH {
            return ZERO;
        }
        self.rows[(row - self.window.lo) as usize][(d + BANDWIDTH) as usize]
    }

    /// Entries along diagonal `offset` (column minus row) for every row of the window.
    pub fn diagonal(&self, offset: i64) -> Vec<Complex64> {
        assert!(offset.abs() <= BANDWIDTH, "offset {offset} outside the band");
        self.rows
            .iter()
            .map(|row| row[(offset + BANDWIDTH) as usize])
            .collect()
    }

    /// Sites whose neighbourhoods `[n-2, n+2]` lie in the window or beyond a
    /// true boundary of the operator's domain.
    pub fn interior(&self) -> Window {
        let (dlo, dhi) = self.domain();
        let lo = if dlo == Some(self.window.lo) {
            self.window.lo
        } else {
            self.window.lo + BANDWIDTH
        };
        let hi = if dhi == Some(self.window.hi) {
            self.window.hi
        } else {
            self.window.hi - BANDWIDTH
        };
        Window::new(lo, hi.max(lo))
    }

    fn domain(&self) -> (Option<i64>, Option<i64>) {
        match &self.source {
            Some(s) => s.domain(),
            None => (Some(self.window.lo), Some(self.window.hi)),
        }
    }

    /// Extend the stored window so it contains `target` (clipped to the domain).
    pub fn ensure_window(&mut self, target: Window) -> Result<()> {
        let source = match &self.source {
            Some(s) => Arc::clone(s),
            None => {
                let target = clip_to_domain(target, self.domain());
                if self.window.contains_window(&target) {
                    return Ok(());
                }
                return Err(Error::Truncation {
                    support: (target.lo, target.hi),
                    window: (self.window.lo, self.window.hi),
                });
            }
        };
        let target = clip_to_domain(self.window.union(&target), source.domain());
        if target == self.window {
            return Ok(());
        }
        let mut rows = Vec::with_capacity(target.len());
        for r in target.indices() {
            let row = if self.window.contains(r) {
                self.rows[(r - self.window.lo) as usize]
            } else {
                source.row(r)?
            };
            // Rows that used to sit on the old edge may have lost columns.
            let row = if self.window.contains(r)
                && (r - self.window.lo < BANDWIDTH || self.window.hi - 1 - r < BANDWIDTH)
            {
                source.row(r)?
            } else {
                row
            };
            rows.push(mask_row(r, row, target));
        }
        self.window = target;
        self.rows = rows;
        Ok(())
    }

    /// `U v` for `v` supported in the interior of the window.
    pub fn apply(&self, v: &LatticeVector) -> Result<LatticeVector> {
        let Some(supp) = v.support() else {
            return Ok(LatticeVector::zeros(Window::new(0, 0)));
        };
        if !self.interior().contains_window(&supp) {
            return Err(Error::Truncation {
                support: (supp.lo, supp.hi),
                window: (self.window.lo, self.window.hi),
            });
        }
        let out_window = supp.padded(BANDWIDTH).intersect(&self.window);
        let mut out = LatticeVector::zeros(out_window);
        let input = v.as_slice();
        let vlo = v.offset();
        for (i, r) in out_window.indices().enumerate() {
            let row = &self.rows[(r - self.window.lo) as usize];
            let mut acc = ZERO;
            for (d, coeff) in row.iter().enumerate() {
                let c = r + d as i64 - BANDWIDTH;
                let j = c - vlo;
                if j >= 0 && (j as usize) < input.len() {
                    acc += coeff * input[j as usize];
                }
            }
            out.as_mut_slice()[i] = acc;
        }
        Ok(out)
    }

    /// `U v`, growing the window first when `v` approaches its edge.
    pub fn apply_growing(&mut self, v: &LatticeVector) -> Result<LatticeVector> {
        if let Some(supp) = v.support() {
            if !self.interior().contains_window(&supp) {
                // grow geometrically so a long evolution refetches rows O(log K) times
                let slack = (self.window.len() as i64 / 4).max(8);
                self.ensure_window(supp.padded(2 * BANDWIDTH + slack))?;
            }
        }
        self.apply(v)
    }

    /// Dense copy of the window (rows and columns indexed from `window.lo`).
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.window.len();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for r in self.window.indices() {
            for c in (r - BANDWIDTH)..=(r + BANDWIDTH) {
                if self.window.contains(c) {
                    m[((r - self.window.lo) as usize, (c - self.window.lo) as usize)] =
                        self.entry(r, c);
                }
            }
        }
        m
    }

    /// Solve `(U_w - z) x = b` for the window compression `U_w`.
    pub fn solve_shifted(&self, z: Complex64, rhs: &LatticeVector) -> Result<LatticeVector> {
        let lu = BandLu::factor(self, z)?;
        let mut b: Vec<Complex64> = self.window.indices().map(|n| rhs.get(n)).collect();
        if let Some(supp) = rhs.support() {
            if !self.window.contains_window(&supp) {
                return Err(Error::Alignment(format!(
                    "right-hand side support {supp:?} outside window {:?}",
                    self.window
                )));
            }
        }
        lu.solve_in_place(&mut b);
        Ok(LatticeVector::from_vec(self.window.lo, b))
    }

    /// Maximum deviation from orthonormality among columns of `cols`
    /// (Gram matrix versus identity), using the stored window entries.
    pub fn column_orthonormality_defect(&self, cols: Window) -> f64 {
        let mut worst: f64 = 0.0;
        for a in cols.indices() {
            for b in a..(a + 2 * BANDWIDTH + 1).min(cols.hi) {
                let mut g = ZERO;
                for r in (b - BANDWIDTH)..=(a + BANDWIDTH) {
                    g += self.entry(r, a).conj() * self.entry(r, b);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

fn clip_to_domain(window: Window, domain: (Option<i64>, Option<i64>)) -> Window {
    let lo = domain.0.map_or(window.lo, |d| window.lo.max(d));
    let hi = domain.1.map_or(window.hi, |d| window.hi.min(d));
    Window::new(lo, hi.max(lo))
}

fn mask_row(r: i64, mut row: [Complex64; 5], window: Window) -> [Complex64; 5] {
    for (d, entry) in row.iter_mut().enumerate() {
        if !window.contains(r + d as i64 - BANDWIDTH) {
            *entry = ZERO;
        }
    }
    row
}

/// LU factorization with partial pivoting of `U_w - z` in band storage.
///
/// Row `r` holds columns `r-2..=r+4`; the two extra superdiagonals absorb fill
/// from row interchanges.
struct BandLu {
    n: usize,
    band: Vec<[Complex64; 7]>,
    multipliers: Vec<[Complex64; 2]>,
    pivots: Vec<usize>,
}

const LU_WIDTH: usize = 7;
const LU_LOWER: usize = 2;

impl BandLu {
    fn factor(op: &BandedUnitary, z: Complex64) -> Result<Self> {
        let n = op.window.len();
        let mut band = vec![[ZERO; LU_WIDTH]; n];
        for (i, row) in op.rows.iter().enumerate() {
            band[i][..5].copy_from_slice(row);
            band[i][LU_LOWER] -= z;
        }
        let mut lu = BandLu {
            n,
            band,
            multipliers: vec![[ZERO; 2]; n],
            pivots: vec![0; n],
        };
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn get(&self, r: usize, c: usize) -> Complex64 {
        let k = c as isize - r as isize + LU_LOWER as isize;
        if (0..LU_WIDTH as isize).contains(&k) {
            self.band[r][k as usize]
        } else {
            ZERO
        }
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: Complex64) {
        let k = c as isize - r as isize + LU_LOWER as isize;
        debug_assert!((0..LU_WIDTH as isize).contains(&k), "fill outside band");
        self.band[r][k as usize] = v;
    }

    fn eliminate(&mut self) -> Result<()> {
        let n = self.n;
        let scale = self
            .band
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        for j in 0..n {
            let last = (j + LU_LOWER).min(n - 1);
            let mut p = j;
            let mut best = self.get(j, j).norm();
            for r in (j + 1)..=last {
                let m = self.get(r, j).norm();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            if best <= f64::EPSILON * scale * 1e-3 {
                return Err(Error::Numerical(format!(
                    "singular pivot {best:e} in column {j} of shifted band matrix"
                )));
            }
            self.pivots[j] = p;
            let cmax = (j + 4).min(n - 1);
            if p != j {
                for c in j..=cmax {
                    let a = self.get(j, c);
                    let b = self.get(p, c);
                    self.set(j, c, b);
                    self.set(p, c, a);
                }
            }
            let pivot = self.get(j, j);
            for (slot, r) in ((j + 1)..=last).enumerate() {
                let m = self.get(r, j) / pivot;
                self.multipliers[j][slot] = m;
                self.set(r, j, ZERO);
                if m != ZERO {
                    for c in (j + 1)..=cmax {
                        let v = self.get(r, c) - m * self.get(j, c);
                        self.set(r, c, v);
                    }
                }
            }
        }
        Ok(())
    }

    fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let last = (j + LU_LOWER).min(n - 1);
            for (slot, r) in ((j + 1)..=last).enumerate() {
                let m = self.multipliers[j][slot];
                let bj = b[j];
                b[r] -= m * bj;
            }
        }
        for j in (0..n).rev() {
            let mut acc = b[j];
            for c in (j + 1)..=(j + 4).min(n - 1) {
                acc -= self.get(j, c) * b[c];
            }
            b[j] = acc / self.get(j, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct Shift;

    impl BandSource for Shift {
        fn row(&self, _r: i64) -> Result<[Complex64; 5]> {
            // (U v)_r = v_{r+2}
            Ok([ZERO, ZERO, ZERO, ZERO, Complex64::new(1.0, 0.0)])
        }
        fn domain(&self) -> (Option<i64>, Option<i64>) {
            (None, None)
        }
    }

    #[test]
    fn apply_moves_support_and_rejects_edge() {
        let u = BandedUnitary::from_source(Arc::new(Shift), Window::centered(4)).unwrap();
        let out = u.apply(&LatticeVector::delta(0)).unwrap();
        assert_eq!(out.support(), Some(Window::new(-2, -1)));
        assert!(matches!(
            u.apply(&LatticeVector::delta(-3)),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn growing_apply_extends_window() {
        let mut u = BandedUnitary::from_source(Arc::new(Shift), Window::centered(3)).unwrap();
        let mut v = LatticeVector::delta(0);
        for _ in 0..10 {
            v = u.apply_growing(&v).unwrap();
        }
        assert_eq!(v.get(-20), Complex64::new(1.0, 0.0));
        assert!(u.window().contains(-22));
    }

    #[test]
    fn fixed_operator_cannot_grow() {
        let rows = vec![[ZERO, ZERO, Complex64::new(1.0, 0.0), ZERO, ZERO]; 3];
        let mut u = BandedUnitary::from_rows(Window::new(0, 3), rows).unwrap();
        // Boundary of a finite operator is a true boundary, so edge support is fine.
        assert!(u.apply(&LatticeVector::delta(0)).is_ok());
        assert!(u.ensure_window(Window::new(-1, 3)).is_ok());
        assert_eq!(u.window(), Window::new(0, 3));
    }

    #[test]
    fn banded_solve_matches_dense() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 17;
        let rows: Vec<[Complex64; 5]> = (0..n)
            .map(|_| {
                let mut r = [ZERO; 5];
                for e in &mut r {
                    *e = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
                r
            })
            .collect();
        let u = BandedUnitary::from_rows(Window::new(0, n as i64), rows).unwrap();
        let z = Complex64::new(0.3, -0.2);
        let b = LatticeVector::from_pairs(&[(3, Complex64::new(1.0, 0.5)), (9, Complex64::new(-2.0, 0.0))]);
        let x = u.solve_shifted(z, &b).unwrap();
        let dense = u.to_dense() - DMatrix::identity(n, n) * z;
        let xv = nalgebra::DVector::from_iterator(n, (0..n as i64).map(|i| x.get(i)));
        let r = dense * xv;
        for i in 0..n {
            assert!((r[i] - b.get(i as i64)).norm() < 1e-12, "row {i}");
        }
    }
}
