//! Pointwise products and convolutions of lattice fields.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{to_physical, to_spectral};
use crate::field::{SpectralField, SUPPORT_TOL};

/// Source-node budget for [`windowed_convolution`].
pub const CONVOLUTION_BUDGET: u64 = 10_000_000;

/// Coefficients of the product f*g, on the shared lattice of the factors.
///
/// Both factors are zero padded to twice the extent before transforming, so
/// the circular convolution of the padded lattice agrees with the true one
/// for all output frequencies representable on the original lattice,
/// provided each factor actually fits its lattice. The result is cropped
/// back; output content beyond the original extent is cut off, which is the
/// caller's lookout (support radii add under products).
pub fn spectral_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("product factors".into()));
    }
    let mut a = to_physical(&f.zero_pad(2)?);
    {
        let b = to_physical(&g.zero_pad(2)?);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
    }
    let big = f.grid().padded(2)?;
    to_spectral(big, &a).crop_to(f.grid())
}

/// The same product coefficients at selected target nodes, by direct
/// summation over the active sources of f:
///
///   (f g)^(xi) = h^2/(2 pi)^2 * sum_eta fhat(eta) ghat(xi - eta)
///
/// Nodes of f below the support tolerance are skipped, and the remaining
/// count is checked against [`CONVOLUTION_BUDGET`]. Quadratic cost; meant
/// for narrow frequency windows and audits of [`spectral_product`], not for
/// full fields.
pub fn windowed_convolution(
    f: &SpectralField,
    g: &SpectralField,
    targets: &[(usize, usize)],
) -> Result<Vec<Complex64>> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("convolution factors".into()));
    }
    let grid = f.grid();
    let n = grid.n() as isize;
    let cut = SUPPORT_TOL * f.max_abs();
    // active sources as (i1, i2, coefficient)
    let mut active: Vec<(isize, isize, Complex64)> = Vec::new();
    for i2 in 0..grid.n() {
        for i1 in 0..grid.n() {
            let z = f.data()[grid.idx(i1, i2)];
            if z.norm() > cut {
                active.push((i1 as isize, i2 as isize, z));
            }
        }
    }
    if active.len() as u64 > CONVOLUTION_BUDGET {
        return Err(Error::ConvolutionBudget {
            nodes: active.len() as u64,
            budget: CONVOLUTION_BUDGET,
        });
    }
    let gdata = g.data();
    let scale = (grid.h() / (2.0 * std::f64::consts::PI)).powi(2);
    let out: Vec<Complex64> = targets
        .par_iter()
        .map(|&(t1, t2)| {
            let (t1, t2) = (t1 as isize, t2 as isize);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(s1, s2, fz) in &active {
                // xi - eta in index space; centering makes this k_t - k_s + n/2
                let j1 = t1 - s1 + n / 2;
                let j2 = t2 - s2 + n / 2;
                if (0..n).contains(&j1) && (0..n).contains(&j2) {
                    acc += fz * gdata[(j2 * n + j1) as usize];
                }
            }
            acc * scale
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::psi_hat;
    use crate::grid::Grid2;

    #[test]
    fn product_of_plane_waves_is_a_plane_wave() {
        // single coefficients at xi_a, xi_b multiply to (h/2pi)^2 at xi_a+xi_b
        let g = Grid2::new(64, 0.25).unwrap();
        let mut f1 = SpectralField::zeros(g);
        let mut f2 = SpectralField::zeros(g);
        f1.data_mut()[g.idx(40, 30)] = Complex64::new(1.0, 0.0);
        f2.data_mut()[g.idx(28, 37)] = Complex64::new(0.0, 2.0);
        let prod = spectral_product(&f1, &f2).unwrap();
        let amp = (g.h() / (2.0 * std::f64::consts::PI)).powi(2);
        let want = Complex64::new(0.0, 2.0 * amp);
        // indices add relative to the center at n/2 = 32
        let got = prod.at(36, 35);
        assert!((got - want).norm() < 1e-16 * amp.max(1.0), "got {got}, want {want}");
        let total: f64 = prod.data().iter().map(|z| z.norm()).sum();
        assert!((total - want.norm()).abs() < 1e-12 * want.norm(), "stray coefficients");
    }

    #[test]
    fn product_support_radii_add() {
        let g = Grid2::new(256, 1.0 / 16.0).unwrap();
        let f = SpectralField::from_symbol(g, |x1, x2| {
            Complex64::new(psi_hat(x1.hypot(x2)), 0.0)
        });
        let p = spectral_product(&f, &f).unwrap();
        let r = p.support_radius();
        assert!(r <= 4.0 + 1e-9, "support of psi^2 leaked to {r}");
        assert!(r > 3.5, "support of psi^2 ends early at {r}");
    }

    #[test]
    fn windowed_convolution_matches_fft_product() {
        let g = Grid2::new(128, 1.0 / 8.0).unwrap();
        let f = SpectralField::from_symbol(g, |x1, x2| {
            let r = x1.hypot(x2);
            Complex64::new(psi_hat(r) * (1.0 + 0.3 * x1), 0.2 * x2 * psi_hat(r))
        });
        let q = SpectralField::from_symbol(g, |x1, x2| {
            Complex64::new(psi_hat((x1 + 0.5).hypot(x2)), 0.1 * x1)
        });
        let prod = spectral_product(&f, &q).unwrap();
        let targets: Vec<(usize, usize)> =
            (40..90).step_by(7).flat_map(|i2| (40..90).step_by(5).map(move |i1| (i1, i2))).collect();
        let direct = windowed_convolution(&f, &q, &targets).unwrap();
        let scale = prod.max_abs();
        for (&(i1, i2), d) in targets.iter().zip(&direct) {
            let v = prod.at(i1, i2);
            assert!(
                (v - d).norm() <= 1e-8 * scale,
                "window vs product at ({i1},{i2}): {:?} vs {:?}",
                v,
                d
            );
        }
    }

    #[test]
    fn windowed_convolution_budget_trips() {
        // a dense 4096^2 field has ~1.6e7 active nodes, over the budget
        let g = Grid2::new(4096, 1.0 / 64.0).unwrap();
        let f = SpectralField::from_symbol(g, |_, _| Complex64::new(1.0, 0.0));
        let err = windowed_convolution(&f, &f, &[(0, 0)]).unwrap_err();
        match err {
            Error::ConvolutionBudget { nodes, budget } => {
                assert!(nodes > budget);
            }
            other => panic!("wrong error: {other}"),
        }
    }
}
