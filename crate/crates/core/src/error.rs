use thiserror::Error;

/// Recoverable failures surfaced to callers and mapped to CLI exit codes.
///
/// Precondition violations that can only arise from misusing the API
/// (mismatched dimensions, out-of-range layers, times outside a curve's
/// domain) panic instead; see the individual operation docs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown algebra `{0}` (expected heisenberg(n), engel, free(r,s), or a JSON file)")]
    UnknownAlgebra(String),

    #[error("algebra table rejected: {0}")]
    InvalidAlgebra(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("window is empty")]
    EmptyWindow,

    #[error("window [{lo}, {hi}] is not contained in the curve domain [{a}, {b}]")]
    WindowOutOfDomain { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("projected increments are degenerate: best |det| = {det:e}, threshold {threshold:e}")]
    DegenerateDirections { det: f64, threshold: f64 },

    #[error("increment matrix is singular; directions do not span the horizontal layer")]
    SingularIncrements,

    #[error("bracket map from layer 1 x layer {lower} onto layer {target} is not surjective")]
    BracketMapNotSurjective { lower: usize, target: usize },

    #[error("infeasible shortening parameters: {0}")]
    InfeasibleParams(String),

    #[error("defect has unexpected mass {residual:e} below layer {layer}")]
    UnexpectedDefect { layer: usize, residual: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
