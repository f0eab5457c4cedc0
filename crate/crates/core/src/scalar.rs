//! Numbers the bound formulas can be evaluated in.
//!
//! Every radius and local-bound formula is written once against [`Scalar`].
//! Parameter searches run it in `f64` (fast, nonrigorous); the chosen
//! parameters are then re-evaluated in [`Interval`], which is the only
//! evaluation that enters a certificate.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::interval::Interval;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// An exactly representable constant.
    fn cst(x: f64) -> Self;
    fn pi() -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn tanh(self) -> Self;
    /// `(e^x - 1)/x`, equal to 1 at 0.
    fn exprel(self) -> Self;
    /// `self^{p/q}` for nonnegative `self`.
    fn powr(self, p: i32, q: u32) -> Self;
    fn min(self, o: Self) -> Self;
    fn max(self, o: Self) -> Self;
    /// Upper end (the value itself for floats). NaN for invalid values.
    fn upper(self) -> f64;
    fn lower(self) -> f64;

    fn ratio(p: i64, q: i64) -> Self {
        Self::cst(p as f64) / Self::cst(q as f64)
    }

    fn sq(self) -> Self {
        self * self
    }

    fn valid(self) -> bool {
        let (l, u) = (self.lower(), self.upper());
        l.is_finite() && u.is_finite()
    }
}

impl Scalar for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn exprel(self) -> Self {
        if self.abs() < 1e-5 {
            1.0 + self * (0.5 + self / 6.0)
        } else {
            self.exp_m1() / self
        }
    }
    fn powr(self, p: i32, q: u32) -> Self {
        if q == 1 {
            self.powi(p)
        } else if self < 0.0 {
            f64::NAN
        } else {
            self.powf(p as f64 / q as f64)
        }
    }
    fn min(self, o: Self) -> Self {
        if self.is_nan() || o.is_nan() {
            f64::NAN
        } else {
            f64::min(self, o)
        }
    }
    fn max(self, o: Self) -> Self {
        if self.is_nan() || o.is_nan() {
            f64::NAN
        } else {
            f64::max(self, o)
        }
    }
    fn upper(self) -> f64 {
        self
    }
    fn lower(self) -> f64 {
        self
    }
}

impl Scalar for Interval {
    fn cst(x: f64) -> Self {
        Interval::point(x)
    }
    fn pi() -> Self {
        Interval::PI
    }
    fn sqrt(self) -> Self {
        Interval::sqrt(self)
    }
    fn exp(self) -> Self {
        Interval::exp(self)
    }
    fn tanh(self) -> Self {
        Interval::tanh(self)
    }
    fn exprel(self) -> Self {
        Interval::exprel(self)
    }
    fn powr(self, p: i32, q: u32) -> Self {
        self.pow_rational(p, q)
    }
    fn min(self, o: Self) -> Self {
        Interval::min(self, o)
    }
    fn max(self, o: Self) -> Self {
        Interval::max(self, o)
    }
    fn upper(self) -> f64 {
        if self.is_nai() {
            f64::NAN
        } else {
            self.hi()
        }
    }
    fn lower(self) -> f64 {
        if self.is_nai() {
            f64::NAN
        } else {
            self.lo()
        }
    }
}
