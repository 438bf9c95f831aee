//! Pinned tolerances and thresholds, collected in one place. Callers that
//! need a scalar convert with `S::of`.

/// Jacobi-identity residual allowed per unit structure-constant scale when
/// validating an algebra table.
pub const ALGEBRA_VALIDATION: f64 = 1e-12;

/// Pivot threshold (relative) in the layer-generation rank check.
pub const GENERATION_RANK: f64 = 1e-10;

/// Off-diagonal norm target for the cyclic Jacobi eigensolver.
pub const JACOBI_EIGEN: f64 = 1e-12;

/// Interval selection fails as degenerate when the best increment
/// determinant falls below this times L(I)^r.
pub const DEGENERATE_DET: f64 = 1e-12;

/// Endpoint residual (homogeneous norm) a connector must satisfy.
pub const CONNECTOR_RESIDUAL: f64 = 1e-9;

/// Mass allowed below the active layer of a pipeline defect.
pub const PIPELINE_LAYER_RESIDUAL: f64 = 1e-9;

/// Final endpoint residual (homogeneous norm) of the shortening pipeline.
pub const ENDPOINT_RESIDUAL: f64 = 1e-8;

/// Slack on | |h| - 1 | for the arclength flag.
pub const ARCLENGTH: f64 = 1e-9;

/// Relative midpoint offset tolerated when symmetric mode checks a domain.
pub const SYMMETRY: f64 = 1e-9;

/// Control residual under which a tangent line is declared detected.
pub const TANGENT_DETECTION: f64 = 1e-2;
