//! Smooth radial cutoffs for the dyadic decomposition.
//!
//! Everything is driven by one C-infinity step built from the classical
//! exponential bump. All symbols in the crate are radial functions composed
//! with these, so their regularity and support facts reduce to facts proved
//! here once.

/// exp(-1/t) for t > 0, extended by zero. Smooth across t = 0.
#[inline]
fn bump_half(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: identically 1 for r <= 1, identically 0 for r >= 2,
/// strictly decreasing in between. smooth_step(1.5) == 0.5 exactly because
/// the two bump weights coincide there.
#[inline]
pub fn smooth_step(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let a = bump_half(2.0 - r);
    let b = bump_half(r - 1.0);
    a / (a + b)
}

/// Low-pass symbol at unit scale, as a function of |xi|.
#[inline]
pub fn psi_hat(r: f64) -> f64 {
    smooth_step(r)
}

/// Symbol of the j-th dyadic block, as a function of |xi|.
/// Support is exactly the closed annulus 2^(j-1) <= |xi| <= 2^(j+1).
#[inline]
pub fn lp_block_symbol(j: i32, r: f64) -> f64 {
    let s = 2f64.powi(-j);
    smooth_step(s * r) - smooth_step(2.0 * s * r)
}
