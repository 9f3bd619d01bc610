//! Frequency multipliers and the vector-calculus operators built from them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;

/// Relative mass allowed on the zero mode before inversion refuses.
pub const ORIGIN_TOL: f64 = 1e-10;

/// Multiply coefficients by a frequency symbol.
pub fn apply_multiplier<F>(f: &SpectralField, m: F) -> SpectralField
where
    F: Fn(f64, f64) -> Complex64,
{
    let grid = f.grid();
    let mut out = f.clone();
    let n = grid.n();
    for i2 in 0..n {
        let xi2 = grid.freq(i2);
        for i1 in 0..n {
            out.data_mut()[grid.idx(i1, i2)] *= m(grid.freq(i1), xi2);
        }
    }
    out
}

/// Gradient: (i xi_1 f, i xi_2 f).
pub fn gradient(f: &SpectralField) -> [SpectralField; 2] {
    [
        apply_multiplier(f, |x1, _| Complex64::new(0.0, x1)),
        apply_multiplier(f, |_, x2| Complex64::new(0.0, x2)),
    ]
}

/// Perpendicular gradient: (-i xi_2 f, i xi_1 f). Divergence free by
/// construction.
pub fn grad_perp(f: &SpectralField) -> [SpectralField; 2] {
    [
        apply_multiplier(f, |_, x2| Complex64::new(0.0, -x2)),
        apply_multiplier(f, |x1, _| Complex64::new(0.0, x1)),
    ]
}

/// Divergence of a vector field: i xi_1 v1 + i xi_2 v2.
pub fn divergence(v: [&SpectralField; 2]) -> Result<SpectralField> {
    if v[0].grid() != v[1].grid() {
        return Err(Error::GridMismatch("divergence components".into()));
    }
    let mut out = apply_multiplier(v[0], |x1, _| Complex64::new(0.0, x1));
    let d2 = apply_multiplier(v[1], |_, x2| Complex64::new(0.0, x2));
    out.axpy(Complex64::new(1.0, 0.0), &d2)?;
    Ok(out)
}

/// Row-wise divergence of a 2x2 tensor field: out_k = sum_m i xi_m T_mk.
pub fn tensor_divergence(t: [[&SpectralField; 2]; 2]) -> Result<[SpectralField; 2]> {
    Ok([divergence([t[0][0], t[1][0]])?, divergence([t[0][1], t[1][1]])?])
}

/// Leray projection onto divergence-free fields: I - xi xi^T / |xi|^2.
/// The zero mode has no meaningful direction and passes through unchanged.
pub fn helmholtz_project(v: [&SpectralField; 2]) -> Result<[SpectralField; 2]> {
    if v[0].grid() != v[1].grid() {
        return Err(Error::GridMismatch("projection components".into()));
    }
    let grid = v[0].grid();
    let n = grid.n();
    let mut out1 = v[0].clone();
    let mut out2 = v[1].clone();
    for i2 in 0..n {
        let x2 = grid.freq(i2);
        for i1 in 0..n {
            let x1 = grid.freq(i1);
            let r2 = x1 * x1 + x2 * x2;
            if r2 == 0.0 {
                continue;
            }
            let idx = grid.idx(i1, i2);
            let a = v[0].data()[idx];
            let b = v[1].data()[idx];
            let dot = (x1 * a + x2 * b) / r2;
            out1.data_mut()[idx] = a - x1 * dot;
            out2.data_mut()[idx] = b - x2 * dot;
        }
    }
    Ok([out1, out2])
}

/// Inverse of -Laplace: divide by |xi|^2 away from the origin.
///
/// Refuses when the zero mode carries more than [`ORIGIN_TOL`] of the peak
/// coefficient; a mean is not invertible and silently zeroing real content
/// would corrupt every low block downstream. The clean zero mode that
/// remains is mapped to zero.
pub fn inv_laplacian(f: &SpectralField) -> Result<SpectralField> {
    let grid = f.grid();
    let peak = f.max_abs();
    let origin = f.at(grid.n() / 2, grid.n() / 2).norm();
    if peak > 0.0 && origin > ORIGIN_TOL * peak {
        return Err(Error::ZeroMode { rel: origin / peak, tol: ORIGIN_TOL });
    }
    let mut out = apply_multiplier(f, |x1, x2| {
        let r2 = x1 * x1 + x2 * x2;
        if r2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0 / r2, 0.0)
        }
    });
    let c = grid.n() / 2;
    let idx = grid.idx(c, c);
    out.data_mut()[idx] = Complex64::new(0.0, 0.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::psi_hat;
    use crate::fft::to_physical;
    use crate::grid::Grid2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn band_limited(seed: u64, grid: Grid2) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpectralField::from_symbol(grid, |x1, x2| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                * psi_hat(x1.hypot(x2))
        })
    }

    /// Evaluate the interpolant of `f` at an arbitrary physical point.
    fn eval_at(f: &SpectralField, x1: f64, x2: f64) -> Complex64 {
        let g = f.grid();
        let mut acc = Complex64::new(0.0, 0.0);
        for i2 in 0..g.n() {
            for i1 in 0..g.n() {
                let z = f.data()[g.idx(i1, i2)];
                if z.norm() == 0.0 {
                    continue;
                }
                acc += z * Complex64::new(0.0, x1 * g.freq(i1) + x2 * g.freq(i2)).exp();
            }
        }
        acc * (g.h() / (2.0 * std::f64::consts::PI)).powi(2)
    }

    #[test]
    fn multiplier_derivative_matches_finite_differences() {
        // i xi_1 against a centered difference of the interpolant itself
        let g = Grid2::new(48, 0.125).unwrap();
        let f = band_limited(3, g);
        let df = apply_multiplier(&f, |x1, _| Complex64::new(0.0, x1));
        let step = 1e-3;
        for &(x1, x2) in &[(0.35, -1.7), (2.0, 0.4)] {
            let fd = (eval_at(&f, x1 + step, x2) - eval_at(&f, x1 - step, x2)) / (2.0 * step);
            let an = eval_at(&df, x1, x2);
            let rel = (fd - an).norm() / an.norm().max(1e-12);
            // second-order remainder (step * |xi|)^2 / 6 with |xi| <= 2
            assert!(rel <= 1e-6, "finite difference off by {rel:.2e} at ({x1},{x2})");
        }
    }

    #[test]
    fn projection_is_idempotent_and_kills_gradients() {
        let g = Grid2::new(64, 0.25).unwrap();
        for seed in 0..3 {
            let v = [band_limited(10 + seed, g), band_limited(20 + seed, g)];
            let p = helmholtz_project([&v[0], &v[1]]).unwrap();
            let pp = helmholtz_project([&p[0], &p[1]]).unwrap();
            let scale = p[0].max_abs().max(p[1].max_abs());
            for k in 0..2 {
                let worst = p[k]
                    .data()
                    .iter()
                    .zip(pp[k].data())
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
                assert!(worst <= 1e-12 * scale, "P^2 != P, defect {worst:.2e}");
            }
            // div P v = 0 away from rounding
            let d = divergence([&p[0], &p[1]]).unwrap();
            assert!(d.max_abs() <= 1e-12 * scale.max(1.0), "div P v = {:.2e}", d.max_abs());
            // P annihilates gradients
            let gr = gradient(&band_limited(33 + seed, g));
            let pg = helmholtz_project([&gr[0], &gr[1]]).unwrap();
            let gscale = gr[0].max_abs().max(gr[1].max_abs());
            assert!(pg[0].max_abs().max(pg[1].max_abs()) <= 1e-12 * gscale);
        }
    }

    #[test]
    fn grad_perp_is_divergence_free_and_real() {
        let g = Grid2::new(64, 0.25).unwrap();
        // real even symbol, so the physical field is real
        let f = SpectralField::from_symbol(g, |x1, x2| {
            Complex64::new(psi_hat(x1.hypot(x2)) * (1.0 + 0.2 * x2 * x2), 0.0)
        });
        let u = grad_perp(&f);
        let d = divergence([&u[0], &u[1]]).unwrap();
        // the two multiplication orders round differently, so not exactly 0
        let uscale = u[0].max_abs().max(u[1].max_abs());
        assert!(d.max_abs() <= 1e-14 * uscale, "div grad_perp = {:.2e}", d.max_abs());
        let phys = to_physical(&u[0]);
        let peak = phys.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let worst_im = phys.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        assert!(worst_im <= 1e-13 * peak, "physical field not real: {worst_im:.2e}");
    }

    #[test]
    fn laplacian_roundtrip_away_from_origin() {
        let g = Grid2::new(64, 0.25).unwrap();
        // band-limited field with a clean zero mode: multiply by |xi|^2 first
        let f = apply_multiplier(&band_limited(7, g), |x1, x2| {
            Complex64::new(x1 * x1 + x2 * x2, 0.0)
        });
        let inv = inv_laplacian(&f).unwrap();
        let back = apply_multiplier(&inv, |x1, x2| Complex64::new(x1 * x1 + x2 * x2, 0.0));
        let scale = f.max_abs();
        let worst = f
            .data()
            .iter()
            .zip(back.data())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(worst <= 1e-12 * scale, "(-Lap)(-Lap)^-1 defect {worst:.2e}");
    }

    #[test]
    fn inverse_laplacian_rejects_nonzero_mean() {
        let g = Grid2::new(32, 0.5).unwrap();
        let mut f = band_limited(5, g);
        let c = g.idx(16, 16);
        f.data_mut()[c] = Complex64::new(1.0, 0.0);
        match inv_laplacian(&f) {
            Err(Error::ZeroMode { rel, .. }) => assert!(rel > ORIGIN_TOL),
            other => panic!("expected the zero-mode error, got {other:?}"),
        }
    }
}
