//! The generic scalar abstraction shared by plain `f64` evaluation,
//! interval enclosure, and dual-number differentiation.

use std::ops::{Add, Mul, Neg, Sub};

use crate::interval::Interval;

/// A ring-like scalar the benchmark vector fields can be evaluated over.
///
/// `sqr` and `recip` are part of the trait so each scalar kind can use
/// its tight rule: intervals square to `[0, max]` when they straddle
/// zero, and duals apply the chain rule.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Sized
{
    fn from_f64(value: f64) -> Self;
    fn sqr(&self) -> Self;
    fn recip(&self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(value: f64) -> f64 {
        value
    }

    #[inline]
    fn sqr(&self) -> f64 {
        self * self
    }

    #[inline]
    fn recip(&self) -> f64 {
        1.0 / self
    }
}

impl Scalar for Interval {
    #[inline]
    fn from_f64(value: f64) -> Interval {
        Interval::point(value)
    }

    #[inline]
    fn sqr(&self) -> Interval {
        Interval::sqr(self)
    }

    #[inline]
    fn recip(&self) -> Interval {
        Interval::recip(self)
    }
}
