//! Dyadic frequency analysis for the two-dimensional Navier-Stokes bilinear
//! term, built around smooth Littlewood-Paley cutoffs on a periodic spectral
//! lattice.
//!
//! The crate has two layers. The lattice layer ([`grid`], [`field`], [`fft`],
//! [`product`], [`multiplier`]) works with trigonometric interpolants on a
//! centered frequency lattice and is exact for band-limited data. The symbol
//! layer ([`profiles`], [`besov`], [`bilinear`], [`cases`]) works with closed
//! form frequency symbols so that dyadic blocks at very negative scales can be
//! evaluated without ever materializing a grid large enough to hold them.

pub mod besov;
pub mod bilinear;
pub mod cases;
pub mod cutoff;
pub mod envelope;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod multiplier;
pub mod norms;
pub mod product;
pub mod profiles;
pub mod quadrature;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::Grid2;

/// Install a global thread pool sized from the `LPNS2D_THREADS` environment
/// variable. Safe to call more than once; only the first call wins. Results
/// do not depend on the thread count, only wall time does.
pub fn init_threads() {
    if let Ok(v) = std::env::var("LPNS2D_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
