//! Integer windows and finitely supported vectors on the lattice `Z`.

use num_complex::Complex64;

/// Half-open interval `[lo, hi)` of lattice indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "window lower end {lo} exceeds upper end {hi}");
        Window { lo, hi }
    }

    /// Window `[-radius, radius]` (inclusive), i.e. `2 * radius + 1` sites.
    pub fn centered(radius: i64) -> Self {
        Window::new(-radius, radius + 1)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.lo && n < self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        other.is_empty() || (other.lo >= self.lo && other.hi <= self.hi)
    }

    /// Grow (positive) or shrink (negative) by `by` sites on both sides.
    pub fn padded(&self, by: i64) -> Window {
        let lo = self.lo - by;
        let hi = (self.hi + by).max(lo);
        Window { lo, hi }
    }

    pub fn union(&self, other: &Window) -> Window {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Window::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn intersect(&self, other: &Window) -> Window {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi).max(lo);
        Window { lo, hi }
    }

    pub fn indices(&self) -> std::ops::Range<i64> {
        self.lo..self.hi
    }
}

/// A complex vector on `Z` that vanishes outside a stored window.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeVector {
    offset: i64,
    data: Vec<Complex64>,
}

impl LatticeVector {
    pub fn zeros(window: Window) -> Self {
        LatticeVector {
            offset: window.lo,
            data: vec![Complex64::new(0.0, 0.0); window.len()],
        }
    }

    /// Canonical basis vector at site `n`.
    pub fn delta(n: i64) -> Self {
        LatticeVector {
            offset: n,
            data: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn from_vec(offset: i64, data: Vec<Complex64>) -> Self {
        LatticeVector { offset, data }
    }

    pub fn from_pairs(pairs: &[(i64, Complex64)]) -> Self {
        if pairs.is_empty() {
            return LatticeVector::zeros(Window::new(0, 0));
        }
        let lo = pairs.iter().map(|p| p.0).min().unwrap();
        let hi = pairs.iter().map(|p| p.0).max().unwrap() + 1;
        let mut v = LatticeVector::zeros(Window::new(lo, hi));
        for &(n, c) in pairs {
            v.data[(n - lo) as usize] += c;
        }
        v
    }

    /// Stored window (may include explicit zeros).
    pub fn window(&self) -> Window {
        Window::new(self.offset, self.offset + self.data.len() as i64)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, n: i64) -> Complex64 {
        let i = n - self.offset;
        if i < 0 || i >= self.data.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[i as usize]
        }
    }

    pub fn set(&mut self, n: i64, value: Complex64) {
        if !self.window().contains(n) {
            self.extend_to(self.window().union(&Window::new(n, n + 1)));
        }
        let i = (n - self.offset) as usize;
        self.data[i] = value;
    }

    /// Re-store the vector over a larger window (zero-filled).
    pub fn extend_to(&mut self, window: Window) {
        let current = self.window();
        let target = current.union(&window);
        if target == current {
            return;
        }
        let mut data = vec![Complex64::new(0.0, 0.0); target.len()];
        let shift = (current.lo - target.lo) as usize;
        data[shift..shift + self.data.len()].copy_from_slice(&self.data);
        self.offset = target.lo;
        self.data = data;
    }

    /// Smallest window containing every exactly nonzero entry, or `None` for the zero vector.
    pub fn support(&self) -> Option<Window> {
        let first = self.data.iter().position(|c| *c != Complex64::new(0.0, 0.0))?;
        let last = self
            .data
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .unwrap();
        Some(Window::new(
            self.offset + first as i64,
            self.offset + last as i64 + 1,
        ))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other>`, antilinear in the first slot.
    pub fn inner(&self, other: &LatticeVector) -> Complex64 {
        let w = self.window().intersect(&other.window());
        w.indices().map(|n| self.get(n).conj() * other.get(n)).sum()
    }

    pub fn scale(&mut self, s: Complex64) {
        for c in &mut self.data {
            *c *= s;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.offset + i as i64, *c))
    }

    /// Maximum entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &LatticeVector) -> f64 {
        let w = self.window().union(&other.window());
        w.indices()
            .map(|n| (self.get(n) - other.get(n)).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn support_ignores_explicit_zeros() {
        let v = LatticeVector::from_vec(-3, vec![c(0.0), c(1.0), c(0.0), c(2.0), c(0.0)]);
        assert_eq!(v.support(), Some(Window::new(-2, 1)));
        assert_eq!(LatticeVector::zeros(Window::new(0, 4)).support(), None);
    }

    #[test]
    fn set_outside_window_extends() {
        let mut v = LatticeVector::delta(0);
        v.set(-5, c(3.0));
        assert_eq!(v.window(), Window::new(-5, 1));
        assert_eq!(v.get(-5), c(3.0));
        assert_eq!(v.get(0), c(1.0));
        assert_eq!(v.get(7), c(0.0));
    }

    #[test]
    fn inner_product_is_antilinear_in_first_slot() {
        let a = LatticeVector::from_pairs(&[(0, Complex64::new(0.0, 1.0))]);
        let b = LatticeVector::from_pairs(&[(0, c(1.0)), (1, c(5.0))]);
        assert_eq!(a.inner(&b), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn window_arithmetic() {
        let w = Window::centered(3);
        assert_eq!(w.len(), 7);
        assert_eq!(w.padded(-2), Window::new(-1, 2));
        assert!(w.contains_window(&Window::new(-3, 4)));
        assert!(!w.contains_window(&Window::new(-4, 0)));
        assert_eq!(w.intersect(&Window::new(2, 10)), Window::new(2, 4));
    }
}
