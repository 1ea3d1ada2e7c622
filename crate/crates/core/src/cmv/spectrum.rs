//! Atomic spectral measures from paraorthogonal truncations.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{build_paraorthogonal, VerblunskySequence};
use crate::banded::BandedUnitary;
use crate::error::{Error, Result};
use crate::lattice::LatticeVector;

/// Tolerance for atoms to count as lying on the unit circle.
pub const CIRCLE_TOL: f64 = 1e-12;

/// Finite atomic measure `sum_j w_j delta_{z_j}` on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(Complex64, f64)>,
}

impl DiscreteMeasure {
    /// Atoms must lie on the unit circle and carry nonnegative finite weights.
    pub fn new(atoms: Vec<(Complex64, f64)>) -> Result<Self> {
        for (j, (z, w)) in atoms.iter().enumerate() {
            if !((z.norm() - 1.0).abs() <= CIRCLE_TOL) {
                return Err(Error::Domain(format!(
                    "atom {j} at {z} is off the unit circle by {:e}",
                    (z.norm() - 1.0).abs()
                )));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::Domain(format!("atom {j} has weight {w}")));
            }
        }
        Ok(DiscreteMeasure { atoms })
    }

    /// Equal weights `1/m` at the `m`-th roots of unity: the atomic stand-in
    /// for normalized Lebesgue measure.
    pub fn uniform(m: usize) -> Self {
        let w = 1.0 / m as f64;
        DiscreteMeasure {
            atoms: (0..m)
                .map(|j| (Complex64::from_polar(1.0, TAU * j as f64 / m as f64), w))
                .collect(),
        }
    }

    /// Unit point mass at `z` (normalized onto the circle).
    pub fn point(z: Complex64) -> Self {
        DiscreteMeasure {
            atoms: vec![(z / z.norm(), 1.0)],
        }
    }

    pub fn atoms(&self) -> &[(Complex64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        DiscreteMeasure {
            atoms: self.atoms.iter().map(|&(z, w)| (z, w * c)).collect(),
        }
    }

    /// `sum_j w_j z_j^k`.
    pub fn moment(&self, k: i32) -> Complex64 {
        self.atoms.iter().map(|&(z, w)| z.powi(k) * w).sum()
    }

    /// Mean spacing of atoms, `2 pi / M`: below this scale atomic artifacts dominate.
    pub fn resolution(&self) -> f64 {
        TAU / self.atoms.len().max(1) as f64
    }

    /// Atoms sorted by argument in `[0, 2 pi)`.
    pub fn sorted_by_angle(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .map(|&(z, w)| (z.arg().rem_euclid(TAU), w))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

/// Eigen-data of a finite unitary matrix: `U = V diag(z) V^*`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: DMatrix<Complex64>,
    /// Largest strictly-upper Schur entry (zero for an exactly normal matrix).
    pub nonnormality: f64,
}

impl SpectralDecomposition {
    /// Eigen-decomposition of a dense unitary via complex Schur form.
    pub fn of_unitary(u: DMatrix<Complex64>) -> Result<Self> {
        let n = u.nrows();
        let schur = nalgebra::linalg::Schur::try_new(u, 1e-15, 100_000 * n.max(1))
            .ok_or_else(|| Error::Numerical(format!("Schur iteration did not converge (n = {n})")))?;
        let (q, t) = schur.unpack();
        let mut nonnormality: f64 = 0.0;
        for j in 0..n {
            for i in 0..j {
                nonnormality = nonnormality.max(t[(i, j)].norm());
            }
        }
        if nonnormality > 1e-8 {
            return Err(Error::Numerical(format!(
                "Schur form not diagonal: largest off-diagonal entry {nonnormality:e}"
            )));
        }
        let eigenvalues = (0..n).map(|j| t[(j, j)]).collect();
        Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors: q,
            nonnormality,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Spectral measure of `psi`: weights `|<v_j, psi>|^2`.
    pub fn measure_of(&self, psi: &DVector<Complex64>) -> Result<DiscreteMeasure> {
        let coeffs = self.eigenvectors.adjoint() * psi;
        DiscreteMeasure::new(
            self.eigenvalues
                .iter()
                .zip(coeffs.iter())
                .map(|(z, c)| (z / z.norm(), c.norm_sqr()))
                .collect(),
        )
    }

    /// Spectral projection of `psi` onto eigenvalues selected by `keep`.
    pub fn project(&self, psi: &DVector<Complex64>, keep: impl Fn(Complex64) -> bool) -> DVector<Complex64> {
        let coeffs = self.eigenvectors.adjoint() * psi;
        let mut out = DVector::from_element(self.dim(), Complex64::new(0.0, 0.0));
        for (j, z) in self.eigenvalues.iter().enumerate() {
            if keep(*z) {
                out += self.eigenvectors.column(j) * coeffs[j];
            }
        }
        out
    }
}

/// Dense eigen-decomposition of the `N x N` paraorthogonal truncation.
pub fn paraorthogonal_decomposition(
    alphas: &VerblunskySequence,
    n: usize,
    boundary_phase: Complex64,
) -> Result<SpectralDecomposition> {
    let u = build_paraorthogonal(alphas, n, boundary_phase)?;
    SpectralDecomposition::of_unitary(u.to_dense())
}

/// Spectral measure of `delta_0` for the paraorthogonal truncation, from the
/// dense eigen-decomposition.
pub fn paraorthogonal_spectrum(
    alphas: &VerblunskySequence,
    n: usize,
    boundary_phase: Complex64,
) -> Result<DiscreteMeasure> {
    let dec = paraorthogonal_decomposition(alphas, n, boundary_phase)?;
    let mut e0 = DVector::from_element(n, Complex64::new(0.0, 0.0));
    e0[0] = Complex64::new(1.0, 0.0);
    dec.measure_of(&e0)
}

/// Same measure as [`paraorthogonal_spectrum`] computed without dense
/// matrices: the atoms are the zeros of `z phi_{N-1}(z) - conj(beta) phi*_{N-1}(z)`,
/// located by bisection on the continuous phase of the Blaschke product
/// `b_{N-1}(z) = z phi_{N-1} / phi*_{N-1}`, and each weight `|v_0|^2` comes
/// from inverse iteration on the banded truncation.  Costs `O(N^2)` instead
/// of `O(N^3)`.
///
/// The Christoffel form `1 / sum_{k<N} |phi_k(z_j)|^2` of the weights is not
/// used: for eigenvectors localized near index 0 the forward recursion of
/// `phi_k` amplifies rounding errors exponentially.
pub fn paraorthogonal_spectrum_szego(
    alphas: &VerblunskySequence,
    n: usize,
    boundary_phase: Complex64,
) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::Input("truncation size must be positive".into()));
    }
    if (boundary_phase.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "boundary phase has modulus {} != 1",
            boundary_phase.norm()
        )));
    }
    let coeffs: Vec<Complex64> = (0..n as i64 - 1)
        .map(|k| alphas.alpha(k))
        .collect::<Result<_>>()?;
    let u = build_paraorthogonal(alphas, n, boundary_phase)?;
    // b_0 = z; b_{k+1} = z (b_k - conj a_k) / (1 - a_k b_k)
    let lifted_phase = |theta: f64| -> f64 {
        let mut phase = theta;
        for a in &coeffs {
            let b = Complex64::from_polar(1.0, phase);
            phase = theta + phase - 2.0 * (Complex64::new(1.0, 0.0) - a * b).arg();
        }
        phase
    };
    let target0 = boundary_phase.conj().arg();
    let start = lifted_phase(0.0);
    // the lifted phase increases by exactly 2 pi n over one turn
    let first = ((start - target0) / TAU).floor() as i64 + 1;
    let mut atoms = Vec::with_capacity(n);
    for m in 0..n as i64 {
        let target = target0 + TAU * (first + m) as f64;
        let (mut lo, mut hi) = (0.0, TAU);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lifted_phase(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * PI {
                break;
            }
        }
        let theta = 0.5 * (lo + hi);
        let z = Complex64::from_polar(1.0, theta);
        atoms.push((z, eigenvector_weight(&u, z)?));
    }
    DiscreteMeasure::new(atoms)
}

/// `|v_0|^2` for the unit eigenvector `v` of `u` at the simple eigenvalue
/// `z`, by inverse iteration with the shift moved just off the circle.
fn eigenvector_weight(u: &BandedUnitary, z: Complex64) -> Result<f64> {
    let w = u.window();
    let shift = z * (1.0 + 64.0 * f64::EPSILON);
    // a start vector with no special structure, so no eigenvector is missed
    let mut v = LatticeVector::from_vec(
        w.lo,
        (0..w.len()).map(|k| Complex64::from_polar(1.0, 2.4 * k as f64)).collect(),
    );
    for _ in 0..3 {
        let x = u.solve_shifted(shift, &v)?;
        let norm = x.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical(format!("inverse iteration at {z} produced norm {norm}")));
        }
        v = x;
        v.scale(Complex64::new(1.0 / norm, 0.0));
    }
    Ok(v.get(0).norm_sqr())
}
