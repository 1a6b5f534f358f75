//! Floating point abstraction shared by the embedding, thesaurus and
//! recommender code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for embedding arithmetic.
///
/// Implemented for `f32` and `f64`. Files always store `f32`; in-memory
/// computation defaults to `f64` (see the aliases at the crate root).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal or computed value.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 converts to every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    fn of_f32(value: f32) -> Self {
        Self::of(value as f64)
    }

    fn as_f32(self) -> f32 {
        self.as_f64() as f32
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
