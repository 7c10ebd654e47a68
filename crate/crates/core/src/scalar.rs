//! Scalar abstraction for the numeric core.
//!
//! All linear-algebra and statistics code in this crate is generic over a
//! floating-point scalar, so the same routines run in `f32` or `f64`.
//! Concrete aliases for the common `f64` instantiation live at the crate
//! root.

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable throughout the crate.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + Sum
    + LinalgScalar
    + ScalarOperand
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Casts an `f64` constant into this scalar type.
    fn cast(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    /// Lossless widening to `f64` for reporting and file I/O.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + NumAssign
        + Sum
        + LinalgScalar
        + ScalarOperand
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}
