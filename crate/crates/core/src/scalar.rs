//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Real scalar used for masses, rates and probabilities.
///
/// Implemented for every `num_traits::Float` that can be converted from and to
/// `f64`, which in practice means `f32` and `f64`.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` constant into this scalar.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance that is never tighter than what the type can resolve.
    #[inline]
    fn tolerance(requested: f64) -> Self {
        let floor = Self::epsilon() * Self::of(16.0);
        Self::of(requested).max(floor)
    }
}

impl<T> Real for T where T: Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static {}
