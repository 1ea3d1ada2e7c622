//! Finite-scale diagnostics on atomic measures on the unit circle.
//!
//! Every integral against a [`DiscreteMeasure`] is an exact finite sum, so
//! continuity properties only show up as scaling regimes down to the atomic
//! resolution `2 pi / M`.  Probes that go below that scale attach a warning
//! rather than fail.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::banded::BandedUnitary;
use crate::cmv::{DiscreteMeasure, SpectralDecomposition};
use crate::dynamics::fit_exponent;
use crate::error::{Error, Result};
use crate::lattice::LatticeVector;

/// Probes closer to the circle than this many resolution lengths are flagged.
pub const RESOLUTION_GUARD: f64 = 10.0;

/// Dyadic partition of the circle into `2^N` half-open arcs
/// `[j pi / 2^{N-1}, (j+1) pi / 2^{N-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcPartition {
    level: u32,
}

impl ArcPartition {
    pub fn new(level: u32) -> Result<Self> {
        if !(1..=40).contains(&level) {
            return Err(Error::Input(format!("dyadic level {level} outside 1..=40")));
        }
        Ok(ArcPartition { level })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn arc_count(&self) -> u64 {
        1u64 << self.level
    }

    /// Arc length `pi / 2^{N-1}`.
    pub fn width(&self) -> f64 {
        PI / (1u64 << (self.level - 1)) as f64
    }

    /// Start angle of arc `j`.
    pub fn start(&self, j: u64) -> f64 {
        j as f64 * self.width()
    }

    /// Index of the arc containing `z`.
    pub fn arc_of(&self, z: Complex64) -> u64 {
        let theta = z.arg().rem_euclid(TAU);
        let j = (theta / self.width()).floor() as u64;
        j.min(self.arc_count() - 1)
    }

    /// Mass of each arc that carries any atom, keyed by arc index.
    pub fn masses(&self, mu: &DiscreteMeasure) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for &(z, w) in mu.atoms() {
            *out.entry(self.arc_of(z)).or_insert(0.0) += w;
        }
        out
    }
}

/// `sum_j w_j |((conj(z) z_j)^K - 1) / (conj(z) z_j - 1)|`, evaluated as
/// `|sin(K t / 2) / sin(t / 2)|` with `t = arg(conj(z) z_j)` and the value `K`
/// at `t = 0`.
pub fn fejer_integral(mu: &DiscreteMeasure, z: Complex64, horizon: u64) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::Input("K must be at least 1".into()));
    }
    let k = horizon as f64;
    Ok(mu
        .atoms()
        .iter()
        .map(|&(zj, w)| {
            let t = (z.conj() * zj).arg();
            let s = (0.5 * t).sin();
            let kernel = if s == 0.0 { k } else { ((0.5 * k * t).sin() / s).abs() };
            w * kernel
        })
        .sum())
}

/// `(1/K) sum_{j<K} |sum_m w_m f_m z_m^{-j}|^2`.
pub fn strichartz_average(mu: &DiscreteMeasure, f: &[Complex64], horizon: u64) -> Result<f64> {
    if f.len() != mu.len() {
        return Err(Error::Input(format!(
            "{} weights for {} atoms",
            f.len(),
            mu.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::Input("K must be at least 1".into()));
    }
    let angles: Vec<f64> = mu.atoms().iter().map(|(z, _)| z.arg()).collect();
    let coeffs: Vec<Complex64> = mu.atoms().iter().zip(f).map(|(&(_, w), fm)| fm * w).collect();
    let mut total = 0.0;
    for j in 0..horizon {
        let s: Complex64 = coeffs
            .iter()
            .zip(&angles)
            .map(|(c, t)| c * Complex64::from_polar(1.0, -(j as f64) * t))
            .sum();
        total += s.norm_sqr();
    }
    Ok(total / horizon as f64)
}

/// Lower estimate of the best uniform Hoelder constant: the largest
/// `mu(I) / |I|^alpha` over closed arcs centred at atoms and at midpoints
/// between neighbouring atoms, with lengths from `arc_lengths`.
pub fn uah_constant(mu: &DiscreteMeasure, alpha: f64, arc_lengths: &[f64]) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Input(format!("alpha = {alpha} outside (0, 1]")));
    }
    if arc_lengths.is_empty() || arc_lengths.iter().any(|l| !(*l > 0.0 && *l <= TAU)) {
        return Err(Error::Input("arc lengths must lie in (0, 2 pi]".into()));
    }
    let sorted = mu.sorted_by_angle();
    if sorted.is_empty() {
        return Ok(0.0);
    }
    let angles: Vec<f64> = sorted.iter().map(|a| a.0).collect();
    let mut prefix = vec![0.0];
    for (_, w) in &sorted {
        prefix.push(prefix.last().unwrap() + w);
    }
    let total = *prefix.last().unwrap();
    // mass of atoms with angle in [a, b] for 0 <= a <= b <= 2 pi
    let mass_in = |a: f64, b: f64| -> f64 {
        let lo = angles.partition_point(|&t| t < a);
        let hi = angles.partition_point(|&t| t <= b);
        prefix[hi] - prefix[lo]
    };
    let arc_mass = |center: f64, len: f64| -> f64 {
        if len >= TAU {
            return total;
        }
        let a = (center - 0.5 * len).rem_euclid(TAU);
        let b = a + len;
        if b <= TAU {
            mass_in(a, b)
        } else {
            mass_in(a, TAU) + mass_in(0.0, b - TAU)
        }
    };
    let mut centers = angles.clone();
    for i in 0..angles.len() {
        let next = if i + 1 < angles.len() { angles[i + 1] } else { angles[0] + TAU };
        centers.push((0.5 * (angles[i] + next)).rem_euclid(TAU));
    }
    let mut best: f64 = 0.0;
    for &len in arc_lengths {
        let scale = len.powf(alpha);
        for &c in &centers {
            best = best.max(arc_mass(c, len) / scale);
        }
    }
    Ok(best)
}

/// `F(z) = sum_j w_j (z_j + z) / (z_j - z)` for `|z| < 1`.
pub fn caratheodory_f(mu: &DiscreteMeasure, z: Complex64) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "Caratheodory function needs |z| < 1, got |z| = {}",
            z.norm()
        )));
    }
    Ok(mu
        .atoms()
        .iter()
        .map(|&(zj, w)| (zj + z) / (zj - z) * w)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub r: f64,
    /// `(1 - r)^{1 - alpha} |F(r z0)|`.
    pub value: f64,
    /// Whether `1 - r` is at least [`RESOLUTION_GUARD`] resolution lengths.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// Slope of `log value` against `log(1 - r)`; negative slopes signal
    /// divergence of the alpha-derivative at `z0`.
    pub slope: f64,
    pub warnings: Vec<String>,
}

/// Scaling table for the rate at which `|F(r z0)|` diverges as `r -> 1`.
///
/// The slope is fitted on resolved rows when at least two exist, otherwise on
/// all rows with a warning.  For a unit atom at `z0` the table behaves like
/// `(1 - r)^{-alpha}`; for Lebesgue measure like `(1 - r)^{1 - alpha}`.
pub fn alpha_derivative_probe(
    mu: &DiscreteMeasure,
    z0: Complex64,
    alpha: f64,
    r_grid: &[f64],
) -> Result<ProbeTable> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Input(format!("alpha = {alpha} outside (0, 1)")));
    }
    if (z0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("z0 has modulus {} != 1", z0.norm())));
    }
    if r_grid.len() < 2 || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("r grid must be increasing with at least two points".into()));
    }
    if r_grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::Input("r grid must lie in (0, 1)".into()));
    }
    let floor = RESOLUTION_GUARD * mu.resolution();
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let f = caratheodory_f(mu, z0 * r)?;
        let resolved = 1.0 - r >= floor;
        if !resolved {
            warnings.push(format!(
                "r = {r}: 1 - r = {:e} is below the resolution guard {floor:e}",
                1.0 - r
            ));
        }
        rows.push(ProbeRow {
            r,
            value: (1.0 - r).powf(1.0 - alpha) * f.norm(),
            resolved,
        });
    }
    let mut fit_rows: Vec<&ProbeRow> = rows.iter().filter(|row| row.resolved).collect();
    if fit_rows.len() < 2 {
        warnings.push("fewer than two resolved rows; slope fitted on all rows".into());
        fit_rows = rows.iter().collect();
    }
    let x: Vec<f64> = fit_rows.iter().map(|row| (1.0 - row.r).ln()).collect();
    let y: Vec<f64> = fit_rows.iter().map(|row| row.value.max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, _, _) = fit_exponent(&x, &y)?;
    Ok(ProbeTable {
        rows,
        slope,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicQuantities {
    pub level: u32,
    /// Arcs with `mu(Gamma_j) < 2^{-N alpha}` (including empty arcs).
    pub light_arcs: Vec<u64>,
    /// Number of light arcs; `light_arcs` lists them only when there are at
    /// most [`LIGHT_ARC_LIST_LIMIT`].
    pub light_count: u64,
    /// `b_{N, alpha}`: total mass of the light arcs.
    pub b: f64,
    /// Masses of arcs that carry atoms.
    pub masses: BTreeMap<u64, f64>,
}

pub const LIGHT_ARC_LIST_LIMIT: u64 = 1 << 20;

pub fn dyadic_quantities(mu: &DiscreteMeasure, level: u32, alpha: f64) -> Result<DyadicQuantities> {
    let part = ArcPartition::new(level)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Input(format!("alpha = {alpha} outside (0, 1)")));
    }
    let threshold = 2f64.powf(-(level as f64) * alpha);
    let masses = part.masses(mu);
    let heavy = masses.values().filter(|&&m| m >= threshold).count() as u64;
    let light_count = part.arc_count() - heavy;
    let b = masses.values().filter(|&&m| m < threshold).sum();
    let light_arcs = if light_count <= LIGHT_ARC_LIST_LIMIT {
        (0..part.arc_count())
            .filter(|j| masses.get(j).is_none_or(|&m| m < threshold))
            .collect()
    } else {
        Vec::new()
    };
    Ok(DyadicQuantities {
        level,
        light_arcs,
        light_count,
        b,
        masses,
    })
}

/// Access to spectral projections `chi_Gamma(U) psi`.
pub trait SpectralProjector {
    /// Components of `chi_{Gamma_j}(U) psi` for each occupied arc `j` of the
    /// partition, restricted to `sites`.
    fn arc_components(
        &self,
        partition: ArcPartition,
        psi: &DVector<Complex64>,
        sites: &[usize],
    ) -> Result<BTreeMap<u64, Vec<Complex64>>>;
}

impl SpectralProjector for DiscreteMeasure {
    fn arc_components(
        &self,
        _: ArcPartition,
        _: &DVector<Complex64>,
        _: &[usize],
    ) -> Result<BTreeMap<u64, Vec<Complex64>>> {
        Err(Error::Capability(
            "an atomic measure without eigenvectors cannot form spectral projections".into(),
        ))
    }
}

impl SpectralProjector for SpectralDecomposition {
    fn arc_components(
        &self,
        partition: ArcPartition,
        psi: &DVector<Complex64>,
        sites: &[usize],
    ) -> Result<BTreeMap<u64, Vec<Complex64>>> {
        if psi.len() != self.dim() {
            return Err(Error::Alignment(format!(
                "state of length {} for a decomposition of dimension {}",
                psi.len(),
                self.dim()
            )));
        }
        let coeffs = self.eigenvectors.adjoint() * psi;
        let mut out: BTreeMap<u64, Vec<Complex64>> = BTreeMap::new();
        for (j, z) in self.eigenvalues.iter().enumerate() {
            let arc = partition.arc_of(*z);
            let slot = out
                .entry(arc)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); sites.len()]);
            for (s, &n) in slot.iter_mut().zip(sites) {
                *s += self.eigenvectors[(n, j)] * coeffs[j];
            }
        }
        Ok(out)
    }
}

/// Dyadic level `N` with `2^{N-2} <= K pi / sqrt(eps) < 2^{N-1}`.
pub fn gsb1_level(horizon: u64, eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Input(format!("epsilon = {eps} outside (0, 1)")));
    }
    if horizon == 0 {
        return Err(Error::Input("K must be at least 1".into()));
    }
    let x = horizon as f64 * PI / eps.sqrt();
    let mut n = x.log2().floor() as i64 + 1;
    // guard the floor against rounding at exact powers of two
    while 2f64.powi((n - 1) as i32) <= x {
        n += 1;
    }
    while n > 2 && 2f64.powi((n - 2) as i32) > x {
        n -= 1;
    }
    if n > 40 {
        return Err(Error::Resource {
            message: format!("dyadic level {n} too fine"),
            feasible: 0,
        });
    }
    Ok(n as u32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gsb1Result {
    /// `(1/K) sum_{n in F} sum_{l<K} |<phi_n, psi(l)>|^2`.
    pub lhs: f64,
    /// `2 eps + (8 pi / sqrt(eps)) sum_{n in F} sum_j |<phi_n, chi_{Gamma_j}(U) psi>|^2`.
    pub rhs: f64,
    pub level: u32,
}

/// Both sides of the dyadic-arc approximation inequality for a finite unitary.
///
/// The left side comes from exact banded evolution of `psi` under `u`; the
/// right side from the spectral projections of `spectral`, which must
/// describe the same matrix on the same index window.
pub fn gsb1_check(
    u: &BandedUnitary,
    spectral: &dyn SpectralProjector,
    psi: &LatticeVector,
    f_set: &[i64],
    horizon: u64,
    eps: f64,
) -> Result<Gsb1Result> {
    let level = gsb1_level(horizon, eps)?;
    let partition = ArcPartition::new(level)?;
    let window = u.window();
    if let Some(n) = f_set.iter().find(|n| !window.contains(**n)) {
        return Err(Error::Alignment(format!("site {n} outside the operator window {window:?}")));
    }
    if let Some(supp) = psi.support() {
        if !window.contains_window(&supp) {
            return Err(Error::Alignment(format!(
                "state support {supp:?} outside the operator window {window:?}"
            )));
        }
    }
    let dense_psi = DVector::from_iterator(window.len(), window.indices().map(|n| psi.get(n)));
    let sites: Vec<usize> = f_set.iter().map(|n| (n - window.lo) as usize).collect();
    let components = spectral.arc_components(partition, &dense_psi, &sites)?;
    let projected: f64 = components
        .values()
        .flat_map(|v| v.iter().map(|c| c.norm_sqr()))
        .sum();
    let rhs = 2.0 * eps + 8.0 * PI / eps.sqrt() * projected;

    let mut op = u.clone();
    let mut state = psi.clone();
    let mut sum = 0.0;
    for l in 0..horizon {
        if l > 0 {
            state = op.apply_growing(&state)?;
        }
        sum += f_set.iter().map(|&n| state.get(n).norm_sqr()).sum::<f64>();
    }
    Ok(Gsb1Result {
        lhs: sum / horizon as f64,
        rhs,
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmv::{build_paraorthogonal, paraorthogonal_decomposition, VerblunskySequence};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn partition_covers_circle() {
        let p = ArcPartition::new(3).unwrap();
        assert_eq!(p.arc_count(), 8);
        assert_eq!(p.arc_of(c(1.0, 0.0)), 0);
        assert_eq!(p.arc_of(Complex64::from_polar(1.0, -1e-9)), 7);
        assert_eq!(p.arc_of(Complex64::from_polar(1.0, PI / 4.0 + 1e-12)), 1);
        let two = ArcPartition::new(1).unwrap();
        let m = two.masses(&DiscreteMeasure::uniform(10));
        assert_eq!(m.len(), 2);
        assert!((m.values().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fejer_examples() {
        let z = Complex64::from_polar(1.0, 0.7);
        assert_eq!(fejer_integral(&DiscreteMeasure::point(z), z, 37).unwrap(), 37.0);
        let v = fejer_integral(&DiscreteMeasure::point(-z), z, 12).unwrap();
        assert!(v < 1e-12);
        let mu = DiscreteMeasure::uniform(64).scaled(0.3);
        assert_eq!(fejer_integral(&mu, z, 1).unwrap(), mu.total_mass());
    }

    #[test]
    fn fejer_matches_geometric_sum() {
        let mu = DiscreteMeasure::new(vec![
            (Complex64::from_polar(1.0, 0.3), 0.5),
            (Complex64::from_polar(1.0, 2.0), 0.25),
        ])
        .unwrap();
        let z = Complex64::from_polar(1.0, -0.4);
        let k = 9;
        let direct: f64 = mu
            .atoms()
            .iter()
            .map(|&(zj, w)| {
                let q = z.conj() * zj;
                w * ((q.powi(k) - 1.0) / (q - 1.0)).norm()
            })
            .sum();
        assert!((fejer_integral(&mu, z, k as u64).unwrap() - direct).abs() < 1e-13);
    }

    #[test]
    fn strichartz_examples() {
        let m = 32;
        let mu = DiscreteMeasure::uniform(m);
        let ones = vec![c(1.0, 0.0); m];
        for k in [1u64, 5, 32] {
            let v = strichartz_average(&mu, &ones, k).unwrap();
            assert!((v - 1.0 / k as f64).abs() < 1e-14, "K = {k}: {v}");
        }
        let pt = DiscreteMeasure::point(c(0.0, 1.0));
        assert!((strichartz_average(&pt, &[c(1.0, 0.0)], 17).unwrap() - 1.0).abs() < 1e-14);
        let f = vec![c(0.3, -0.2), c(1.0, 0.5)];
        let mu = DiscreteMeasure::new(vec![(c(1.0, 0.0), 0.4), (c(0.0, -1.0), 0.6)]).unwrap();
        let direct = (f[0] * 0.4 + f[1] * 0.6).norm_sqr();
        assert!((strichartz_average(&mu, &f, 1).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn uah_examples() {
        let pt = DiscreteMeasure::point(c(1.0, 0.0));
        let v = uah_constant(&pt, 0.5, &[0.01, 0.1]).unwrap();
        assert!((v - 0.01f64.powf(-0.5)).abs() < 1e-9);
        let m = 1024;
        let mu = DiscreteMeasure::uniform(m);
        let lens: Vec<f64> = (2..=8).map(|j| 4.0 * PI / m as f64 * j as f64).collect();
        let v = uah_constant(&mu, 1.0, &lens).unwrap();
        let target = 1.0 / TAU;
        assert!(v > target / 2.0 && v < target * 2.0, "{v}");
        let v2 = uah_constant(&mu.scaled(3.0), 1.0, &lens).unwrap();
        assert!((v2 - 3.0 * v).abs() < 1e-12);
    }

    #[test]
    fn caratheodory_examples() {
        let pt = DiscreteMeasure::point(c(1.0, 0.0));
        let r = 0.4;
        assert!((caratheodory_f(&pt, c(r, 0.0)).unwrap() - c((1.0 + r) / (1.0 - r), 0.0)).norm() < 1e-15);
        let mu = DiscreteMeasure::uniform(4096);
        assert!((caratheodory_f(&mu, c(0.5, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-3);
        assert!((caratheodory_f(&mu, c(0.0, 0.0)).unwrap().re - 1.0).abs() < 1e-13);
        assert!(matches!(caratheodory_f(&mu, c(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn probe_slopes() {
        let grid: Vec<f64> = (4..=12).map(|j| 1.0 - 2f64.powi(-j)).collect();
        let z0 = Complex64::from_polar(1.0, 1.0);
        let atom = alpha_derivative_probe(&DiscreteMeasure::point(z0), z0, 0.3, &grid).unwrap();
        assert!((atom.slope + 0.3).abs() < 0.05, "{}", atom.slope);
        let leb = DiscreteMeasure::uniform(4096);
        let grid: Vec<f64> = (1..=5).map(|j| 1.0 - 2f64.powi(-j)).collect();
        let t = alpha_derivative_probe(&leb, z0, 0.3, &grid).unwrap();
        assert!(t.warnings.is_empty());
        assert!((t.slope - 0.7).abs() < 0.05, "{}", t.slope);
        let off = alpha_derivative_probe(&DiscreteMeasure::point(-z0), z0, 0.3, &grid).unwrap();
        assert!(off.rows.windows(2).all(|w| w[1].value < w[0].value));
    }

    #[test]
    fn probe_warns_below_resolution() {
        let leb = DiscreteMeasure::uniform(1024);
        let t = alpha_derivative_probe(&leb, c(1.0, 0.0), 0.5, &[0.5, 0.9, 0.999]).unwrap();
        assert_eq!(t.warnings.len(), 1);
        assert!(!t.rows[2].resolved);
    }

    #[test]
    fn dyadic_examples() {
        let pt = DiscreteMeasure::point(c(0.0, 1.0));
        let d = dyadic_quantities(&pt, 4, 0.5).unwrap();
        assert_eq!(d.b, 0.0);
        assert_eq!(d.light_count, 15);
        assert!(!d.light_arcs.contains(&ArcPartition::new(4).unwrap().arc_of(c(0.0, 1.0))));
        // atoms at arc midpoints so rounding cannot move them across edges
        let n = 6;
        let atoms = (0..1u64 << n)
            .map(|j| (Complex64::from_polar(1.0, (j as f64 + 0.5) * PI / 32.0), 1.0 / 64.0))
            .collect();
        let mu = DiscreteMeasure::new(atoms).unwrap();
        let d = dyadic_quantities(&mu, n, 0.5).unwrap();
        assert_eq!(d.light_count, 64);
        assert!((d.b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn level_bracketing() {
        for (k, eps) in [(1u64, 0.5), (10, 0.01), (256, 0.9), (3, 0.999)] {
            let n = gsb1_level(k, eps).unwrap();
            let x = k as f64 * PI / eps.sqrt();
            assert!(2f64.powi(n as i32 - 2) <= x && x < 2f64.powi(n as i32 - 1));
        }
    }

    #[test]
    fn gsb1_small_cases() {
        let alphas = VerblunskySequence::from_fn(true, 0..40, |j| c(0.3 * (j as f64).cos(), 0.2)).unwrap();
        let u = build_paraorthogonal(&alphas, 24, c(0.0, 1.0)).unwrap();
        let dec = paraorthogonal_decomposition(&alphas, 24, c(0.0, 1.0)).unwrap();
        let psi = LatticeVector::delta(0);
        let empty = gsb1_check(&u, &dec, &psi, &[], 10, 0.25).unwrap();
        assert_eq!(empty.lhs, 0.0);
        assert_eq!(empty.rhs, 0.5);
        let r = gsb1_check(&u, &dec, &psi, &[0, 1, 2, 3], 16, 0.1).unwrap();
        assert!(r.lhs <= r.rhs);
        let mu = DiscreteMeasure::uniform(24);
        assert!(matches!(
            gsb1_check(&u, &mu, &psi, &[0], 16, 0.1),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn gsb1_eigenvector_at_k1() {
        let alphas = VerblunskySequence::from_fn(true, 0..20, |j| c(0.1 * j as f64 / 20.0, -0.3)).unwrap();
        let u = build_paraorthogonal(&alphas, 12, c(-1.0, 0.0)).unwrap();
        let dec = paraorthogonal_decomposition(&alphas, 12, c(-1.0, 0.0)).unwrap();
        let v = dec.eigenvectors.column(5).into_owned();
        let psi = LatticeVector::from_vec(0, v.iter().copied().collect());
        let all: Vec<i64> = (0..12).collect();
        let r = gsb1_check(&u, &dec, &psi, &all, 1, 0.3).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!(r.lhs <= 1.0 + 1e-12 && 1.0 <= r.rhs);
    }
}
