//! Radial profiles behind the quadratic interaction of the unit-scale
//! divergence-free bump.
//!
//! For u = grad_perp(psi) with psi_hat radial, every entry of the interaction
//! tensor FT(u (x) u) is a polynomial in xi with three radial coefficient
//! functions, each an annular convolution integral of the cutoff against
//! itself. Those integrals are computed once on a dense radial table and
//! interpolated; the table route is the reference the FFT route is audited
//! against, and it keeps very negative dyadic scales reachable where no
//! affordable lattice exists.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cutoff::smooth_step;
use crate::quadrature::{gauss_legendre, gl_integrate};

const TABLE_NODES: usize = 2049;
const TABLE_RMAX: f64 = 4.0;
/// Below this radius the angular integrals switch to the mean-removed form;
/// see `build_tables`.
const MEAN_REMOVAL_R: f64 = 0.25;

/// Cubic spline with the not-a-knot end condition on a uniform table.
/// Natural end conditions would cost two digits near r = 0 where the
/// profiles have genuine curvature.
#[derive(Clone, Debug)]
pub struct Spline {
    x0: f64,
    hx: f64,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at the nodes
}

impl Spline {
    pub fn new_uniform(x0: f64, hx: f64, y: Vec<f64>) -> Spline {
        let n = y.len();
        assert!(n >= 5, "spline needs at least 5 nodes");
        let h2 = hx * hx;
        // Right-hand sides of the standard tridiagonal m-system.
        let d: Vec<f64> =
            (1..n - 1).map(|i| 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / h2).collect();
        let mut m = vec![0.0; n];
        // Not-a-knot makes the first and last interior equations local:
        // substituting m0 = 2 m1 - m2 into m0 + 4 m1 + m2 = d1 leaves 6 m1 = d1.
        m[1] = d[0] / 6.0;
        m[n - 2] = d[n - 3] / 6.0;
        // Thomas elimination on the remaining interior unknowns m2..m_{n-3}.
        if n >= 6 {
            let len = n - 4; // unknowns m[2..n-2]
            let mut diag = vec![4.0; len];
            let mut rhs: Vec<f64> = (0..len).map(|k| d[k + 1]).collect();
            rhs[0] -= m[1];
            rhs[len - 1] -= m[n - 2];
            for k in 1..len {
                let w = 1.0 / diag[k - 1];
                diag[k] -= w;
                rhs[k] -= w * rhs[k - 1];
            }
            m[len + 1] = rhs[len - 1] / diag[len - 1];
            for k in (0..len - 1).rev() {
                m[k + 2] = (rhs[k] - m[k + 3]) / diag[k];
            }
        }
        m[0] = 2.0 * m[1] - m[2];
        m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
        Spline { x0, hx, y, m }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let t = (x - self.x0) / self.hx;
        let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        let a = t - i as f64;
        let b = 1.0 - a;
        let h2 = self.hx * self.hx / 6.0;
        b * self.y[i]
            + a * self.y[i + 1]
            + h2 * ((b * b * b - b) * self.m[i] + (a * a * a - a) * self.m[i + 1])
    }
}

/// The four radial coefficient tables, already divided by (2 pi)^2 so they
/// plug directly into frequency-domain formulas.
pub struct RadialProfiles {
    w: Spline,
    a: Spline,
    b1: Spline,
    b2: Spline,
    /// FT of psi^2 at the origin, i.e. ||psi||_{L^2}^2, from an independent
    /// one-dimensional rule rather than the 2d table.
    pub w0: f64,
    /// Squared homogeneous H^1 seminorm of psi.
    pub hdot1_sq: f64,
}

fn build_tables() -> RadialProfiles {
    // rho quadrature: Gauss-Legendre 96 on [0,1] and on [1,2] (the cutoff is
    // constant on the first segment and transitions on the second, so the
    // split keeps both panels analytic). Angle: 512 midpoints, spectrally
    // accurate for smooth periodic integrands.
    let (gx, gw) = gauss_legendre(96);
    let mut rho = Vec::with_capacity(192);
    let mut wrho = Vec::with_capacity(192);
    for seg in 0..2 {
        let (a, b) = (seg as f64, seg as f64 + 1.0);
        for (&x, &w) in gx.iter().zip(&gw) {
            rho.push(0.5 * (a + b) + 0.5 * (b - a) * x);
            wrho.push(0.5 * (b - a) * w);
        }
    }
    const NPHI: usize = 512;
    let dphi = 2.0 * std::f64::consts::PI / NPHI as f64;

    // Flattened per-(rho, phi) constants.
    let npairs = rho.len() * NPHI;
    let mut base = Vec::with_capacity(npairs); // w * theta(rho) * rho * dphi
    let mut rho_c = Vec::with_capacity(npairs); // rho cos(phi)
    let mut rho_sq = Vec::with_capacity(npairs);
    let mut w_e1 = Vec::with_capacity(npairs); // base * rho cos(phi)
    let mut w_ed = Vec::with_capacity(npairs); // base * rho^2 cos(2 phi)
    let mut w_e22 = Vec::with_capacity(npairs); // base * rho^2 sin^2(phi)
    let mut theta_rho = Vec::with_capacity(npairs);
    for (i, &r5) in rho.iter().enumerate() {
        let th_r = smooth_step(r5);
        for l in 0..NPHI {
            let phi = (l as f64 + 0.5) * dphi;
            let (s, c) = phi.sin_cos();
            let b = wrho[i] * th_r * r5 * dphi;
            base.push(b);
            rho_c.push(r5 * c);
            rho_sq.push(r5 * r5);
            w_e1.push(b * r5 * c);
            w_ed.push(b * r5 * r5 * (c * c - s * s));
            w_e22.push(b * r5 * r5 * s * s);
            theta_rho.push(th_r);
        }
    }

    let hx = TABLE_RMAX / (TABLE_NODES - 1) as f64;
    let rows: Vec<[f64; 4]> = (0..TABLE_NODES)
        .into_par_iter()
        .map(|node| {
            // The r = 0 node is evaluated at a tiny positive radius so the
            // divisions by r and r^2 below stay well defined; the offset is
            // far below the table resolution.
            let r = if node == 0 { 1e-6 } else { node as f64 * hx };
            let removing = r < MEAN_REMOVAL_R;
            let r2 = r * r;
            let (mut e0, mut e1, mut ed, mut e22) = (0.0f64, 0.0, 0.0, 0.0);
            for k in 0..npairs {
                let d2 = r2 + rho_sq[k] - 2.0 * r * rho_c[k];
                let th = smooth_step(d2.max(0.0).sqrt());
                e0 += base[k] * th;
                e22 += w_e22[k] * th;
                // Subtracting theta(rho) under the oscillatory weights is
                // exact (their angular means vanish) and removes the part
                // that would otherwise drown the O(r) signal at small r.
                let tho = if removing { th - theta_rho[k] } else { th };
                e1 += w_e1[k] * tho;
                ed += w_ed[k] * tho;
            }
            [e0, e1 / r, e22, ed / r2]
        })
        .collect();

    let c2pi = (2.0 * std::f64::consts::PI).powi(2);
    let take = |idx: usize| -> Vec<f64> { rows.iter().map(|r| r[idx] / c2pi).collect() };
    let w = Spline::new_uniform(0.0, hx, take(0));
    let a = Spline::new_uniform(0.0, hx, take(1));
    let b1 = Spline::new_uniform(0.0, hx, take(2));
    let b2 = Spline::new_uniform(0.0, hx, take(3));

    let (qx, qw) = gauss_legendre(512);
    let mut w0 = 0.0;
    let mut h1 = 0.0;
    for seg in 0..2 {
        let (lo, hi) = (seg as f64, seg as f64 + 1.0);
        w0 += gl_integrate(|t| smooth_step(t).powi(2) * t, lo, hi, &qx, &qw);
        h1 += gl_integrate(|t| smooth_step(t).powi(2) * t * t * t, lo, hi, &qx, &qw);
    }
    w0 /= 2.0 * std::f64::consts::PI;
    h1 /= 2.0 * std::f64::consts::PI;

    RadialProfiles { w, a, b1, b2, w0, hdot1_sq: h1 }
}

/// Process-wide tables; built on first use (a couple of seconds).
pub fn shared() -> &'static RadialProfiles {
    static TABLES: OnceLock<RadialProfiles> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

impl RadialProfiles {
    /// FT of psi^2 as a function of |xi|; supported in |xi| <= 4.
    #[inline]
    pub fn w_hat(&self, r: f64) -> f64 {
        if r >= TABLE_RMAX {
            0.0
        } else {
            self.w.eval(r)
        }
    }

    /// Entries of FT(grad_perp psi (x) grad_perp psi) at xi. Real symmetric.
    /// The (m,k) entry couples the complementary coordinates through the
    /// three radial coefficients.
    pub fn t_hat(&self, xi1: f64, xi2: f64) -> [[f64; 2]; 2] {
        let r = xi1.hypot(xi2);
        if r >= TABLE_RMAX {
            return [[0.0; 2]; 2];
        }
        let a = self.a.eval(r);
        let b1 = self.b1.eval(r);
        let b2 = self.b2.eval(r);
        let t11 = -(xi2 * a * xi2 - b1 - b2 * xi2 * xi2);
        let t12 = xi2 * a * xi1 - b2 * xi2 * xi1;
        let t22 = -(xi1 * a * xi1 - b1 - b2 * xi1 * xi1);
        [[t11, t12], [t12, t22]]
    }

    /// div of `t_hat` contracts to a radial gradient: the a and b2 parts
    /// cancel entry-wise and what is left is i b1(|xi|) xi. Exposed because
    /// the cancellation is the reason the projected remainder vanishes.
    pub fn t_div(&self, xi1: f64, xi2: f64) -> [Complex64; 2] {
        let t = self.t_hat(xi1, xi2);
        [
            Complex64::new(0.0, xi1 * t[0][0] + xi2 * t[1][0]),
            Complex64::new(0.0, xi1 * t[0][1] + xi2 * t[1][1]),
        ]
    }

    /// (-Lap)^{-1} P div of the interaction tensor of grad_perp psi.
    /// Identically zero in exact arithmetic (see `t_div`); computed honestly
    /// from the tables so that downstream consumers measure, rather than
    /// assume, the cancellation.
    pub fn r_hat(&self, xi1: f64, xi2: f64) -> [Complex64; 2] {
        let r2 = xi1 * xi1 + xi2 * xi2;
        if r2 == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let d = self.t_div(xi1, xi2);
        let dot = (xi1 * d[0] + xi2 * d[1]) / r2;
        [(d[0] - xi1 * dot) / r2, (d[1] - xi2 * dot) / r2]
    }

    /// The vector symbol of the leading term: (-Lap)^{-1} P applied to
    /// (0, i xi2 w_hat). Degree minus one near the origin.
    pub fn g_hat(&self, xi1: f64, xi2: f64) -> [Complex64; 2] {
        let w = self.w_hat(xi1.hypot(xi2));
        let m = mvec(xi1, xi2);
        [w * m[0], w * m[1]]
    }
}

/// Angular part of the leading-term symbol: (-Lap)^{-1} P (0, i xi2)^T,
/// homogeneous of degree minus one. Zero at the origin by convention.
pub fn mvec(xi1: f64, xi2: f64) -> [Complex64; 2] {
    let r2 = xi1 * xi1 + xi2 * xi2;
    if r2 == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    let r4 = r2 * r2;
    [Complex64::new(0.0, -xi1 * xi2 * xi2 / r4), Complex64::new(0.0, xi2 * xi1 * xi1 / r4)]
}

/// Physical-space radial samples of psi and psi', for direct pointwise
/// evaluation of the modulated test fields. Built by the inverse transform
/// in polar form; the angular factor (a Bessel kernel) is integrated by an
/// equispaced rule with the node count grown past the oscillation budget,
/// which is spectrally accurate for periodic integrands.
pub struct PsiRadial {
    psi: Spline,
    dpsi: Spline,
    pub rmax: f64,
}

fn build_psi_radial() -> PsiRadial {
    let rmax = 300.0;
    let n = 12001; // dr = 0.025
    let (gx, gw) = gauss_legendre(96);
    let mut rho = Vec::new();
    let mut wrho = Vec::new();
    for seg in 0..2 {
        let (a, b) = (seg as f64, seg as f64 + 1.0);
        for (&x, &w) in gx.iter().zip(&gw) {
            rho.push(0.5 * (a + b) + 0.5 * (b - a) * x);
            wrho.push(0.5 * (b - a) * w);
        }
    }
    let dr = rmax / (n - 1) as f64;
    let vals: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|node| {
            let r = node as f64 * dr;
            let mut p = 0.0;
            let mut dp = 0.0;
            for (&q, &w) in rho.iter().zip(&wrho) {
                let u = r * q;
                // angular averages of cos(u cos phi) and cos(phi) sin(u cos phi)
                let nphi = ((u.ceil() as usize) + 32).next_multiple_of(2);
                let dphi = std::f64::consts::PI / nphi as f64;
                let (mut c0, mut c1) = (0.0f64, 0.0f64);
                for l in 0..nphi {
                    let phi = (l as f64 + 0.5) * dphi;
                    let cp = phi.cos();
                    let (su, cu) = (u * cp).sin_cos();
                    c0 += cu;
                    c1 += cp * su;
                }
                // halves exploit phi -> 2 pi - phi symmetry of both kernels
                let avg0 = c0 / nphi as f64;
                let avg1 = c1 / nphi as f64;
                let th = smooth_step(q) * q * w;
                p += th * avg0;
                dp -= th * q * avg1;
            }
            (p / (2.0 * std::f64::consts::PI), dp / (2.0 * std::f64::consts::PI))
        })
        .collect();
    PsiRadial {
        psi: Spline::new_uniform(0.0, dr, vals.iter().map(|v| v.0).collect()),
        dpsi: Spline::new_uniform(0.0, dr, vals.iter().map(|v| v.1).collect()),
        rmax,
    }
}

/// Lazily built physical radial table (a few seconds; only cross-check paths
/// need it).
pub fn psi_radial() -> &'static PsiRadial {
    static TABLE: OnceLock<PsiRadial> = OnceLock::new();
    TABLE.get_or_init(build_psi_radial)
}

impl PsiRadial {
    #[inline]
    pub fn psi(&self, r: f64) -> f64 {
        if r >= self.rmax {
            0.0
        } else {
            self.psi.eval(r)
        }
    }

    /// Radial derivative psi'(|x|).
    #[inline]
    pub fn dpsi(&self, r: f64) -> f64 {
        if r >= self.rmax {
            0.0
        } else {
            self.dpsi.eval(r)
        }
    }
}
