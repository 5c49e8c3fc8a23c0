//! Scalar abstraction used by the protocol pipeline.
//!
//! Everything public works in `f64`. The pipeline itself is generic so it can
//! also be evaluated in double-double arithmetic ([`Dd`]), which is needed when
//! the output is a small difference of large amplifier moments (strong
//! squeezing, `k = -1`).

use std::fmt::Debug;
use std::ops::{Div, Neg, Sub};

use nalgebra::{ClosedAddAssign, ClosedMulAssign, ClosedSubAssign, DMatrix, Scalar};
use num_traits::{One, Zero};
use twofloat::TwoFloat;

/// Double-double scalar (~32 significant digits).
pub type Dd = TwoFloat;

pub trait Real:
    Scalar
    + Copy
    + Debug
    + PartialOrd
    + Zero
    + One
    + ClosedAddAssign
    + ClosedSubAssign
    + ClosedMulAssign
    + Sub<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    /// `(cosh x, sinh x)`.
    fn cosh_sinh(self) -> (Self, Self);
    /// `exp(-x)`.
    fn exp_neg(self) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_f64(num as f64) / Self::from_f64(den as f64)
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn cosh_sinh(self) -> (Self, Self) {
        (self.cosh(), self.sinh())
    }
    fn exp_neg(self) -> Self {
        (-self).exp()
    }
}

impl Real for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
    fn sqrt(self) -> Self {
        TwoFloat::sqrt(self)
    }
    fn abs(self) -> Self {
        TwoFloat::abs(&self)
    }
    fn cosh_sinh(self) -> (Self, Self) {
        // cosh - sinh must equal exp(-x) to full double-double precision, so
        // both are built from the same pair (e, 1/e).
        let e = self.exp();
        let inv = TwoFloat::from(1.0) / e;
        let half = TwoFloat::from(0.5);
        ((e + inv) * half, (e - inv) * half)
    }
    fn exp_neg(self) -> Self {
        TwoFloat::from(1.0) / self.exp()
    }
}

pub(crate) fn to_f64_matrix<T: Real>(m: &DMatrix<T>) -> DMatrix<f64> {
    m.map(|v| v.to_f64())
}

/// Max-norm of the entrywise difference.
pub(crate) fn max_abs_diff<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
}

pub(crate) fn max_abs<T: Real>(a: &DMatrix<T>) -> T {
    a.iter()
        .map(|&x| x.abs())
        .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
}
