//! Scalar abstraction: every numerical kernel in this crate is generic over
//! the floating-point type through this single trait, so the whole engine
//! works in `f32` or `f64`. Concrete `f64` aliases live at the crate root.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable throughout the engine.
///
/// This is a closed-world alias trait: anything implementing the listed
/// numeric traits (in practice `f32` and `f64`) gets the implementation for
/// free via the blanket impl below.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64` literals/constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must convert to scalar type")
    }

    /// Conversion to `f64` for reporting and error messages.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Complex number over the generic scalar.
pub type Cplx<T> = Complex<T>;

/// Shorthand used across the crate for lifting `f64` constants.
#[inline]
pub fn sc<T: Scalar>(x: f64) -> T {
    T::of(x)
}

/// Complex zero.
#[inline]
pub fn czero<T: Scalar>() -> Cplx<T> {
    Complex::new(T::zero(), T::zero())
}

/// Complex one.
#[inline]
pub fn cone<T: Scalar>() -> Cplx<T> {
    Complex::new(T::one(), T::zero())
}

/// Purely real complex value.
#[inline]
pub fn creal<T: Scalar>(x: T) -> Cplx<T> {
    Complex::new(x, T::zero())
}

/// Purely imaginary complex value.
#[inline]
pub fn cimag<T: Scalar>(x: T) -> Cplx<T> {
    Complex::new(T::zero(), x)
}
