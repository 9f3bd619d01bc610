//! Centered square frequency lattice and its dual physical lattice.

use crate::error::{Error, Result};

/// A square lattice of `n` x `n` frequency nodes with spacing `h`,
/// centered so that node index i carries frequency h*(i - n/2) per axis.
///
/// The dual physical domain is the torus of period 2*pi/h sampled at
/// n equispaced points per axis, also centered. dx * h * n == 2*pi holds
/// exactly in the reals and is what makes the transform pair in [`crate::fft`]
/// an exact inverse pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2 {
    n: usize,
    h: f64,
}

impl Grid2 {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidParam(format!(
                "lattice size must be even and at least 4, got {n}"
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParam(format!("lattice spacing must be positive, got {h}")));
        }
        Ok(Grid2 { n, h })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Frequency carried by index i along one axis.
    #[inline]
    pub fn freq(&self, i: usize) -> f64 {
        self.h * (i as f64 - self.n as f64 / 2.0)
    }

    /// Period of the dual physical torus.
    #[inline]
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.h
    }

    /// Physical sample spacing.
    #[inline]
    pub fn dx(&self) -> f64 {
        self.period() / self.n as f64
    }

    /// Physical coordinate of sample index m along one axis.
    #[inline]
    pub fn x(&self, m: usize) -> f64 {
        self.dx() * (m as f64 - self.n as f64 / 2.0)
    }

    /// Total node count n*n.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major flat index; axis 1 (the second frequency component) is the
    /// slow axis. data[idx(i1, i2)] holds the node (freq(i1), freq(i2)).
    #[inline]
    pub fn idx(&self, i1: usize, i2: usize) -> usize {
        i2 * self.n + i1
    }

    /// Largest |freq| representable on the lattice (at index 0).
    #[inline]
    pub fn max_freq(&self) -> f64 {
        self.h * (self.n as f64 / 2.0)
    }

    /// Same spacing, `factor` times the extent. New nodes are a superset of
    /// the old ones and the shared nodes carry identical frequencies.
    pub fn padded(&self, factor: usize) -> Result<Grid2> {
        Grid2::new(self.n * factor, self.h)
    }

    /// Offset of this grid's index 0 inside `padded(factor)`.
    pub fn pad_offset(&self, factor: usize) -> usize {
        (self.n * factor - self.n) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_frequencies_and_duality() {
        let g = Grid2::new(8, 0.25).unwrap();
        assert_eq!(g.freq(0), -1.0);
        assert_eq!(g.freq(4), 0.0);
        assert_eq!(g.freq(7), 0.75);
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((g.dx() * g.h() * g.n() as f64 - two_pi).abs() < 1e-15);
    }

    #[test]
    fn padding_preserves_node_frequencies() {
        let g = Grid2::new(16, 0.5).unwrap();
        let p = g.padded(2).unwrap();
        let off = g.pad_offset(2);
        for i in 0..g.n() {
            assert_eq!(g.freq(i), p.freq(i + off));
        }
    }

    #[test]
    fn rejects_odd_or_degenerate_grids() {
        assert!(Grid2::new(7, 1.0).is_err());
        assert!(Grid2::new(2, 1.0).is_err());
        assert!(Grid2::new(8, 0.0).is_err());
        assert!(Grid2::new(8, f64::NAN).is_err());
    }
}
