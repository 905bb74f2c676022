use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar used by the numerical layers (`f32` or `f64`).
pub trait Scalar:
    'static + Float + NumAssign + FromPrimitive + Default + Debug + Display + LowerExp + Send + Sync
{
    /// Converts a literal; every literal used in this crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits the scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

pub(crate) fn norm<T: Scalar>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

pub(crate) fn scale<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `|a - b| / max(|b|, floor)` over the concatenation of the given pairs.
pub fn relative_error<T: Scalar>(pairs: &[(&[T], &[T])], floor: T) -> T {
    let mut diff = T::zero();
    let mut base = T::zero();
    for (a, b) in pairs {
        diff += a.iter().zip(b.iter()).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
        base += norm_sq(b);
    }
    diff.sqrt() / base.sqrt().max(floor)
}
