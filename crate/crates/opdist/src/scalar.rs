//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numeric kernels are generic over.
///
/// Implemented by `f32` and `f64`; the pipeline instantiates everything with
/// the crate-level [`crate::Scalar`] alias.
pub trait Real: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    /// Lossless-enough conversion from `f64` literals used in defaults.
    fn from_f64_c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    fn from_usize_c(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean<F: Real>(xs: &[F]) -> F {
        xs.iter().copied().sum::<F>() / F::from_usize_c(xs.len())
    }

    #[test]
    fn generic_over_f32_and_f64() {
        assert_eq!(mean(&[1.0f32, 2.0, 3.0]), 2.0f32);
        assert_eq!(mean(&[1.0f64, 2.0, 3.0]), 2.0f64);
    }
}
