//! A scalar field stored by its lattice Fourier coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid2;

/// Relative magnitude below which a coefficient does not count as support.
pub const SUPPORT_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid2,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid2) -> Self {
        SpectralField { grid, data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Sample a frequency symbol on the lattice.
    pub fn from_symbol<F>(grid: Grid2, mut f: F) -> Self
    where
        F: FnMut(f64, f64) -> Complex64,
    {
        let n = grid.n();
        let mut data = Vec::with_capacity(grid.len());
        for i2 in 0..n {
            let xi2 = grid.freq(i2);
            for i1 in 0..n {
                data.push(f(grid.freq(i1), xi2));
            }
        }
        SpectralField { grid, data }
    }

    pub fn from_data(grid: Grid2, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a lattice of {} nodes",
                data.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> Grid2 {
        self.grid
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> Complex64 {
        self.data[self.grid.idx(i1, i2)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest |xi| carrying a coefficient above `SUPPORT_TOL` relative to the
    /// peak. Zero fields report zero support.
    pub fn support_radius(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let cut = SUPPORT_TOL * peak;
        let n = self.grid.n();
        let mut r2max = 0.0f64;
        for i2 in 0..n {
            let xi2 = self.grid.freq(i2);
            for i1 in 0..n {
                if self.data[self.grid.idx(i1, i2)].norm() > cut {
                    let xi1 = self.grid.freq(i1);
                    r2max = r2max.max(xi1 * xi1 + xi2 * xi2);
                }
            }
        }
        r2max.sqrt()
    }

    /// L2 norm of the field over the dual torus, evaluated spectrally:
    /// ||f||_2 = h/(2 pi) * sqrt(sum |fhat|^2).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        self.grid.h() / (2.0 * std::f64::consts::PI) * s.sqrt()
    }

    /// Largest deviation from conjugate symmetry fhat(-xi) == conj fhat(xi),
    /// relative to the peak coefficient. Zero for fields that are real in
    /// physical space. Indices on the unpaired boundary row/column (whose
    /// mirror frequency is not a lattice node) are skipped.
    pub fn hermitian_defect(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for i2 in 1..n {
            for i1 in 1..n {
                let a = self.data[self.grid.idx(i1, i2)];
                let b = self.data[self.grid.idx(n - i1, n - i2)];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst / peak
    }

    /// Pointwise scale by a scalar.
    pub fn scale(&mut self, c: Complex64) {
        for z in &mut self.data {
            *z *= c;
        }
    }

    /// self += c * other. Grids must match.
    pub fn axpy(&mut self, c: Complex64, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("axpy operands".into()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    /// Copy onto a `factor`-times larger lattice with the same spacing,
    /// zero elsewhere. Used for dealiasing and for physical oversampling.
    pub fn zero_pad(&self, factor: usize) -> Result<SpectralField> {
        let big = self.grid.padded(factor)?;
        let off = self.grid.pad_offset(factor);
        let mut out = SpectralField::zeros(big);
        let n = self.grid.n();
        for i2 in 0..n {
            let dst = big.idx(off, i2 + off);
            let src = self.grid.idx(0, i2);
            out.data[dst..dst + n].copy_from_slice(&self.data[src..src + n]);
        }
        Ok(out)
    }

    /// Inverse of `zero_pad`: keep the centered n x n sub-block.
    pub fn crop_to(&self, small: Grid2) -> Result<SpectralField> {
        if self.grid.n() % small.n() != 0 || self.grid.h() != small.h() {
            return Err(Error::GridMismatch("crop target is not a centered sub-lattice".into()));
        }
        let factor = self.grid.n() / small.n();
        let off = small.pad_offset(factor);
        let mut out = SpectralField::zeros(small);
        let n = small.n();
        for i2 in 0..n {
            let src = self.grid.idx(off, i2 + off);
            let dst = small.idx(0, i2);
            out.data[dst..dst + n].copy_from_slice(&self.data[src..src + n]);
        }
        Ok(out)
    }
}
