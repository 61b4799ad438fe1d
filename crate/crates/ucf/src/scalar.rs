//! Numeric abstraction shared by the floating-point model builder and the
//! exact-arithmetic polytope lab.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational type used by the polytope lab.
pub type Rat = BigRational;

/// Distance under which a float is snapped onto the nearest integer before
/// rounding or strict comparison.
pub const SNAP_TOL: f64 = 1e-9;

/// Field operations plus the rounding helpers the bound tables need.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// True when the value should be dropped from a sparse expression.
    fn is_negligible(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Snaps onto a nearby integer (identity for exact types).
    fn snap(&self) -> Self;
    fn floor_int(&self) -> i64;
    fn ceil_int(&self) -> i64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_negligible(&self) -> bool {
        self.abs() < 1e-13
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn snap(&self) -> Self {
        let r = self.round();
        if (self - r).abs() <= SNAP_TOL {
            r
        } else {
            *self
        }
    }
    fn floor_int(&self) -> i64 {
        self.snap().floor() as i64
    }
    fn ceil_int(&self) -> i64 {
        self.snap().ceil() as i64
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_negligible(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn snap(&self) -> Self {
        self.clone()
    }
    fn floor_int(&self) -> i64 {
        self.floor().to_integer().to_i64().expect("integer overflow")
    }
    fn ceil_int(&self) -> i64 {
        self.ceil().to_integer().to_i64().expect("integer overflow")
    }
}

pub fn smin<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

pub fn smax<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

/// `[x]^+`.
pub fn pos<S: Scalar>(x: S) -> S {
    smax(x, S::zero())
}

/// Strict `x < y` evaluated after snapping both sides.
pub fn strictly_less<S: Scalar>(x: &S, y: &S) -> bool {
    x.snap() < y.snap()
}

/// Exact rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact conversion of a finite float (every float is a dyadic rational).
pub fn rat_from_f64(x: f64) -> Rat {
    BigRational::from_float(x).expect("finite float")
}

pub fn rat_abs(x: &Rat) -> Rat {
    x.abs()
}
