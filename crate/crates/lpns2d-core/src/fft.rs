//! Exact transform pair between the centered frequency lattice and the
//! centered physical lattice.
//!
//! With xi_k = h*(k - K/2) and x_m = dx*(m - K/2), the plane-wave kernel
//! factors as exp(2 pi i m k / K) times (-1)^(m+k) times i^K per axis. The
//! i^K factors cancel in two dimensions for any even K, so a centered
//! transform is an ordinary FFT conjugated by the parity sign. dx*h*K = 2*pi
//! makes the pair exactly inverse up to rounding.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::field::SpectralField;
use crate::grid::Grid2;

fn plan_cache() -> &'static Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached rustfft plan. `forward` means the exp(-2 pi i) kernel.
pub fn raw_plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = plan_cache().lock().unwrap();
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            planner.plan_fft(
                n,
                if forward { FftDirection::Forward } else { FftDirection::Inverse },
            )
        })
        .clone()
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    const B: usize = 64;
    for b2 in (0..n).step_by(B) {
        for b1 in (b2..n).step_by(B) {
            for i2 in b2..(b2 + B).min(n) {
                let j1 = if b1 == b2 { i2 + 1 } else { b1 };
                for i1 in j1..(b1 + B).min(n) {
                    data.swap(i2 * n + i1, i1 * n + i2);
                }
            }
        }
    }
}

/// Unscaled 2d FFT over both axes, in place.
fn fft2_inplace(data: &mut [Complex64], n: usize, forward: bool) {
    let plan = raw_plan(n, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    plan.process_with_scratch(data, &mut scratch);
    transpose_square(data, n);
    plan.process_with_scratch(data, &mut scratch);
    transpose_square(data, n);
}

#[inline]
fn parity_scale(data: &mut [Complex64], n: usize, scale: f64) {
    for i2 in 0..n {
        let row = &mut data[i2 * n..(i2 + 1) * n];
        let base = if i2 % 2 == 0 { scale } else { -scale };
        for (i1, z) in row.iter_mut().enumerate() {
            let s = if i1 % 2 == 0 { base } else { -base };
            *z *= s;
        }
    }
}

/// Physical samples f(x_m) of the trigonometric interpolant carried by the
/// lattice coefficients, in the same row-major centered layout.
pub fn to_physical(field: &SpectralField) -> Vec<Complex64> {
    let n = field.grid().n();
    let h = field.grid().h();
    let mut buf = field.data().to_vec();
    parity_scale(&mut buf, n, 1.0);
    fft2_inplace(&mut buf, n, false);
    let scale = h / (2.0 * std::f64::consts::PI);
    parity_scale(&mut buf, n, scale * scale);
    buf
}

/// Lattice coefficients from physical samples; exact inverse of
/// [`to_physical`] up to rounding.
pub fn to_spectral(grid: Grid2, phys: &[Complex64]) -> SpectralField {
    let n = grid.n();
    assert_eq!(phys.len(), grid.len(), "sample count does not match the lattice");
    let mut buf = phys.to_vec();
    parity_scale(&mut buf, n, 1.0);
    fft2_inplace(&mut buf, n, true);
    let dx = grid.dx();
    parity_scale(&mut buf, n, dx * dx);
    SpectralField::from_data(grid, buf).expect("length preserved")
}

/// L2 norm over the torus computed from physical samples; the lattice sum
/// with weight dx^2 is exact for trigonometric interpolants.
pub fn l2_norm_physical(grid: Grid2, phys: &[Complex64]) -> f64 {
    let s: f64 = phys.iter().map(|z| z.norm_sqr()).sum();
    let dx = grid.dx();
    (s * dx * dx).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roundtrip_is_exact_to_rounding() {
        let g = Grid2::new(128, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = SpectralField::from_symbol(g, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let back = to_spectral(g, &to_physical(&f));
        let worst = f
            .data()
            .iter()
            .zip(back.data())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(worst <= 1e-12, "roundtrip defect {worst}");
    }

    #[test]
    fn plancherel_matches_between_domains() {
        let g = Grid2::new(256, 0.125).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = SpectralField::from_symbol(g, |x1, x2| {
            let r = (x1 * x1 + x2 * x2).sqrt();
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                * crate::cutoff::psi_hat(r)
        });
        let spec = f.l2_norm();
        let phys = l2_norm_physical(g, &to_physical(&f));
        assert!(
            (spec - phys).abs() <= 1e-12 * spec.max(1.0),
            "Plancherel defect: spectral {spec} vs physical {phys}"
        );
    }

    #[test]
    fn gaussian_symbol_transforms_to_gaussian() {
        // fhat = exp(-|xi|^2) has inverse transform exp(-|x|^2/4)/(4 pi);
        // both tails are far below rounding on this lattice.
        let g = Grid2::new(256, 0.125).unwrap();
        let f = SpectralField::from_symbol(g, |x1, x2| {
            Complex64::new((-(x1 * x1 + x2 * x2)).exp(), 0.0)
        });
        let phys = to_physical(&f);
        for (m1, m2) in [(128usize, 128usize), (136, 120), (150, 160)] {
            let (x1, x2) = (g.x(m1), g.x(m2));
            let want = (-(x1 * x1 + x2 * x2) / 4.0).exp() / (4.0 * std::f64::consts::PI);
            let got = phys[g.idx(m1, m2)];
            assert!(
                (got.re - want).abs() <= 1e-12 && got.im.abs() <= 1e-12,
                "node ({m1},{m2}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn point_mass_gives_a_plane_wave() {
        // A single coefficient at xi0 transforms to (h/2pi)^2 exp(i x. xi0).
        let g = Grid2::new(64, 0.5).unwrap();
        let mut f = SpectralField::zeros(g);
        let (i1, i2) = (40, 27);
        let xi = (g.freq(i1), g.freq(i2));
        f.data_mut()[g.idx(i1, i2)] = Complex64::new(1.0, 0.0);
        let phys = to_physical(&f);
        let amp = (g.h() / (2.0 * std::f64::consts::PI)).powi(2);
        for (m1, m2) in [(0usize, 0usize), (31, 17), (63, 2)] {
            let want = amp * Complex64::new(0.0, g.x(m1) * xi.0 + g.x(m2) * xi.1).exp();
            let got = phys[g.idx(m1, m2)];
            assert!((got - want).norm() <= 1e-14, "plane wave mismatch at ({m1},{m2})");
        }
    }
}
