use thiserror::Error;

/// Failures raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("profiles live on different grids or component counts")]
    GridMismatch,

    #[error("Newton iteration did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("wave is pinned (|c| = {speed:.3e} with stalled Newton iteration)")]
    Pinned { speed: f64 },

    #[error("adjoint kernel is not simple: |mu0| = {smallest:.3e}, |mu1| = {second:.3e}")]
    DegenerateKernel { smallest: f64, second: f64 },

    #[error("singular linear system ({0})")]
    Singular(&'static str),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no corner: {0}")]
    NoCorner(String),

    #[error("window error: {0}")]
    Window(String),

    #[error("reduced iteration left the bracket [{lower:.6e}, {upper:.6e}] at l = {index}; use a smaller |c - c*|")]
    StepSize { lower: f64, upper: f64, index: i64 },

    #[error("lattice integration left the invariant region at node ({i}, {j}) with value {value:.6}")]
    Divergence { i: i64, j: i64, value: f64 },

    #[error("interface tracking failed: {0}")]
    Tracking(String),
}

pub type Result<T> = std::result::Result<T, Error>;
