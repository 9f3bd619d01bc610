//! Fixtures shared by the kernel benchmarks.

use lpns2d_core::bilinear::ModulatedProfile;
use lpns2d_core::error::Result;
use lpns2d_core::field::SpectralField;
use lpns2d_core::grid::Grid2;

/// Divergence-free single-carrier field on an n-point grid wide enough to
/// hold the carrier at 16 with margin.
pub fn carrier_field(n: usize) -> Result<[SpectralField; 2]> {
    let grid = Grid2::new(n, 0.25)?;
    ModulatedProfile::new(16.0, 1.0)?.velocity_field(grid)
}
