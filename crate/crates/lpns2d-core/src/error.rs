use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("fields live on different grids: {0}")]
    GridMismatch(String),

    /// Inverting the Laplacian requires a spectrally clean zero mode.
    #[error("zero mode carries relative mass {rel:.3e}, above the limit {tol:.1e}; inverse Laplacian undefined")]
    ZeroMode { rel: f64, tol: f64 },

    #[error("windowed convolution would visit {nodes} source nodes, over the budget of {budget}")]
    ConvolutionBudget { nodes: u64, budget: u64 },

    /// A block norm whose two refinement levels disagree far beyond the
    /// reporting tolerance is treated as not converged rather than reported.
    #[error("block norm did not settle under refinement: {coarse:.9e} vs {fine:.9e} (spread {spread:.2e}, limit {limit:.2e})")]
    NonConvergent {
        coarse: f64,
        fine: f64,
        spread: f64,
        limit: f64,
    },

    #[error("frequency ladder infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
