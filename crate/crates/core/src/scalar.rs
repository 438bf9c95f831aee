//! Scalar abstraction. Everything numeric in this crate is generic over a
//! floating type; `f64` is what the CLI and the acceptance tolerances assume,
//! `f32` is available for callers that want the smaller footprint.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating scalar the library is generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts a constant or tolerance. Panics only if the value is not
    /// representable, which cannot happen for the finite constants used here.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    /// Widens to f64, mostly for error reports and display.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar widens to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
