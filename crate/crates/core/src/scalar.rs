//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All linear algebra is written against [`Real`], which is implemented for
//! `f32` and `f64`. Exact closed forms (see [`crate::bounds`]) use
//! `num_rational::BigRational` instead.

use std::any::TypeId;

use nalgebra::RealField;

use crate::tolerance::Tolerances;

/// Floating-point type usable as the real part of matrix entries.
pub trait Real: RealField + Copy + Send + Sync + 'static {
    /// Lossy conversion from a literal.
    fn lit(x: f64) -> Self;

    fn as_f64(self) -> f64;

    /// Numerical tolerances appropriate for this precision.
    fn default_tolerances() -> Tolerances;

    fn is_double() -> bool {
        TypeId::of::<Self>() == TypeId::of::<f64>()
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }

    fn default_tolerances() -> Tolerances {
        Tolerances::double()
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }

    fn default_tolerances() -> Tolerances {
        Tolerances::single()
    }
}
