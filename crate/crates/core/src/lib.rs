//! Calculus on stratified nilpotent Lie groups, with a constructive
//! curve-surgery toolkit for horizontal paths.
//!
//! The crate builds up in layers:
//!
//! * [`algebra`] defines stratified Lie algebras through their structure
//!   constants, with built-in Heisenberg, Engel, and free nilpotent families,
//!   plus dilations and homogeneous norms.
//! * [`group`] exponentiates them: products via the Baker-Campbell-Hausdorff
//!   series (exact in any nilpotent algebra), inverses, conjugation,
//!   commutators, layer projections.
//! * [`curve`] lifts piecewise-constant horizontal controls to group-valued
//!   paths and supplies the operations surgery needs: restriction,
//!   concatenation, reversal, translations, and the two dilation actions.
//! * [`excess`] measures how far a stretch of curve is from a straight line
//!   and selects families of subintervals with independent directions.
//! * [`surgery`] performs the basic modifications: cutting a window down to
//!   its chord, building connectors that realize a prescribed endpoint, and
//!   inserting connector/reversed-connector devices that shift the endpoint
//!   by a controlled commutator.
//! * [`shorten`] composes these into a pipeline that strictly shortens a
//!   curve with positive excess while restoring its endpoint layer by layer,
//!   and reports every step in a ledger.
//! * [`blowup`] rescales a curve around a point and tracks excess across
//!   scales to estimate a tangent line.
//! * [`io`] reads and writes algebras and curves as JSON.
//! * [`checks`] runs seeded randomized verification of the structural
//!   identities everything above relies on.
//!
//! Scalars are generic over [`Scalar`] (implemented for `f32` and `f64`);
//! the aliases below fix `f64` for ordinary use.

pub mod algebra;
mod bch;
pub mod blowup;
pub mod checks;
pub mod curve;
pub mod error;
pub mod excess;
pub mod group;
mod hall;
pub mod io;
mod linalg;
pub mod scalar;
pub mod shorten;
pub mod surgery;
pub mod tol;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Stratified algebra over `f64`.
pub type Algebra = algebra::StratifiedAlgebra<f64>;
/// Algebra vector over `f64`.
pub type Vector = algebra::AlgebraVector<f64>;
/// Group element over `f64`.
pub type Point = group::GroupElement<f64>;
/// Horizontal path over `f64`.
pub type Curve = curve::HorizontalPath<f64>;

/// Stratified algebra over `f32`.
pub type AlgebraF32 = algebra::StratifiedAlgebra<f32>;
/// Algebra vector over `f32`.
pub type VectorF32 = algebra::AlgebraVector<f32>;
/// Group element over `f32`.
pub type PointF32 = group::GroupElement<f32>;
/// Horizontal path over `f32`.
pub type CurveF32 = curve::HorizontalPath<f32>;
