//! Outward-rounded interval arithmetic.
//!
//! Rounding strategy: endpoints are computed in round-to-nearest and then
//! post-adjusted to the adjacent float whenever the rounding error has the
//! wrong sign (see [`round`]). The hardware rounding mode is never changed, so
//! every operation is safe to call from any thread.
//!
//! Invalid results (division by an interval containing zero, square root of a
//! negative interval, ...) from the infallible operator forms produce the
//! "not an interval" value [`Interval::NAI`], which propagates through all
//! further arithmetic. Use the `try_*` methods or [`Interval::check`] to turn
//! that into an [`IntervalError`]. Endpoints may be infinite only when a
//! computation overflowed; [`Interval::is_finite`] detects that.

pub mod elementary;
pub mod linalg;
pub mod round;

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use linalg::{verified_inverse, IntervalMatrix, IntervalVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntervalError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("matrix inversion failed: residual norm {rho} is not below 1")]
    InversionFailure { rho: f64 },
    #[error("invalid endpoints [{lo}, {hi}]")]
    InvalidEndpoints { lo: f64, hi: f64 },
}

/// A closed interval `[lo, hi]` of reals with binary64 endpoints.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Enclosure of π: the nearest double is below π, so the upper end is the
/// next float.
pub const PI_LO: f64 = std::f64::consts::PI;
const PI_HI: f64 = 3.141_592_653_589_793_6;

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const NAI: Interval = Interval {
        lo: f64::NAN,
        hi: f64::NAN,
    };
    pub const PI: Interval = Interval {
        lo: PI_LO,
        hi: PI_HI,
    };

    /// Interval with the given endpoints.
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(IntervalError::InvalidEndpoints { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Interval from endpoints that are known to be ordered; swaps if needed.
    pub fn hull_of(a: f64, b: f64) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else if b < a {
            Interval { lo: b, hi: a }
        } else {
            Self::NAI
        }
    }

    /// Degenerate interval `[x, x]`; exact.
    pub const fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// `[-r, r]` for `r >= 0`.
    pub fn symmetric(r: f64) -> Self {
        let r = r.abs();
        Interval { lo: -r, hi: r }
    }

    /// Enclosure of the rational `p/q`.
    pub fn rational(p: i64, q: i64) -> Self {
        Interval::point(p as f64) / Interval::point(q as f64)
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    /// Midpoint (rounded to nearest; not an enclosure).
    pub fn mid(self) -> f64 {
        if self.lo == f64::NEG_INFINITY {
            return if self.hi == f64::INFINITY { 0.0 } else { -f64::MAX };
        }
        if self.hi == f64::INFINITY {
            return f64::MAX;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Upper bound on the radius about [`Interval::mid`].
    pub fn rad(self) -> f64 {
        let m = self.mid();
        round::sub_up(self.hi, m).max(round::sub_up(m, self.lo))
    }

    /// Upper bound on `hi - lo`.
    pub fn width(self) -> f64 {
        round::sub_up(self.hi, self.lo)
    }

    /// Largest absolute value in the interval.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value in the interval.
    pub fn mig(self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    pub fn is_nai(self) -> bool {
        self.lo.is_nan() || self.hi.is_nan()
    }

    /// Both endpoints finite (and the value is a valid interval).
    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    /// `Ok(self)` for a valid interval, a domain error for NaI.
    pub fn check(self, what: &'static str) -> Result<Self, IntervalError> {
        if self.is_nai() {
            Err(IntervalError::Domain(what))
        } else {
            Ok(self)
        }
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `other ⊆ self`.
    pub fn contains_interval(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `other ⊆ int(self)` (strict on both sides).
    pub fn interior_contains(self, other: Interval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    pub fn overlaps(self, other: Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(self, other: Interval) -> Interval {
        if self.is_nai() || other.is_nai() {
            return Self::NAI;
        }
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(self, other: Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Intersect with `[0, ∞)`. Only sound when the exact quantity is known
    /// to be nonnegative (e.g. a quadratic form of a positive definite
    /// matrix evaluated with dependency overestimation).
    pub fn clamp_nonneg(self) -> Interval {
        if self.is_nai() {
            return self;
        }
        Interval {
            lo: self.lo.max(0.0),
            hi: self.hi.max(0.0),
        }
    }

    /// Enlarge by `r >= 0` on both sides, outward rounded.
    pub fn inflate(self, r: f64) -> Interval {
        Interval {
            lo: round::sub_down(self.lo, r),
            hi: round::add_up(self.hi, r),
        }
    }

    /// Scale the interval about its midpoint by `factor >= 1`, outward.
    pub fn scale_about_mid(self, factor: f64) -> Interval {
        let m = Interval::point(self.mid());
        let r = round::mul_up(self.rad(), factor);
        m + Interval::symmetric(r)
    }

    /// The upper endpoint as a degenerate interval.
    pub fn upper(self) -> Interval {
        Interval::point(self.hi)
    }

    pub fn abs(self) -> Interval {
        if self.is_nai() {
            return self;
        }
        Interval {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    pub fn max(self, other: Interval) -> Interval {
        if self.is_nai() || other.is_nai() {
            return Self::NAI;
        }
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn min(self, other: Interval) -> Interval {
        if self.is_nai() || other.is_nai() {
            return Self::NAI;
        }
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// `x²`, tighter than `x * x` when `x` straddles zero.
    pub fn sqr(self) -> Interval {
        let a = self.abs();
        if a.is_nai() {
            return a;
        }
        Interval {
            lo: round::mul_down(a.lo, a.lo),
            hi: round::mul_up(a.hi, a.hi),
        }
    }

    /// Integer power by repeated squaring on `|x|`, with sign handling.
    pub fn powi(self, n: i32) -> Interval {
        if n == 0 {
            return Interval::ONE;
        }
        if n < 0 {
            return Interval::ONE / self.powi(-n);
        }
        if self.is_nai() {
            return self;
        }
        if n % 2 == 0 {
            return self.sqr().powi(n / 2);
        }
        // Odd powers are monotone: evaluate each endpoint as a point.
        let chain = |x: f64| {
            let p = Interval::point(x);
            (1..n).fold(p, |acc, _| acc * p)
        };
        Interval {
            lo: chain(self.lo).lo,
            hi: chain(self.hi).hi,
        }
    }

    pub fn try_div(self, other: Interval) -> Result<Interval, IntervalError> {
        (self / other).check("division by an interval containing zero")
    }

    pub fn try_sqrt(self) -> Result<Interval, IntervalError> {
        self.sqrt().check("square root of a negative interval")
    }

    pub fn try_log(self) -> Result<Interval, IntervalError> {
        self.log().check("logarithm of a nonpositive interval")
    }

    pub fn try_pow_rational(self, p: i32, q: u32) -> Result<Interval, IntervalError> {
        self.pow_rational(p, q)
            .check("rational power outside its domain")
    }

    /// `√x`; NaI if `x` has a negative part.
    pub fn sqrt(self) -> Interval {
        if self.is_nai() || self.lo < 0.0 {
            return Self::NAI;
        }
        Interval {
            lo: round::sqrt_down(self.lo),
            hi: round::sqrt_up(self.hi),
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Default for Interval {
    fn default() -> Self {
        Interval::ZERO
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, o: Interval) -> Interval {
        if self.is_nai() || o.is_nai() {
            return Interval::NAI;
        }
        Interval {
            lo: round::add_down(self.lo, o.lo),
            hi: round::add_up(self.hi, o.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, o: Interval) -> Interval {
        if self.is_nai() || o.is_nai() {
            return Interval::NAI;
        }
        Interval {
            lo: round::sub_down(self.lo, o.hi),
            hi: round::sub_up(self.hi, o.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, o: Interval) -> Interval {
        if self.is_nai() || o.is_nai() {
            return Interval::NAI;
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        // Sign-case split keeps the common positive cases to two products.
        if a >= 0.0 && c >= 0.0 {
            return Interval {
                lo: round::mul_down(a, c),
                hi: round::mul_up(b, d),
            };
        }
        if b <= 0.0 && d <= 0.0 {
            return Interval {
                lo: round::mul_down(b, d),
                hi: round::mul_up(a, c),
            };
        }
        let lo = round::mul_down(a, c)
            .min(round::mul_down(a, d))
            .min(round::mul_down(b, c))
            .min(round::mul_down(b, d));
        let hi = round::mul_up(a, c)
            .max(round::mul_up(a, d))
            .max(round::mul_up(b, c))
            .max(round::mul_up(b, d));
        if lo.is_nan() || hi.is_nan() {
            return Interval::NAI;
        }
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    /// NaI when the divisor contains zero.
    #[inline]
    fn div(self, o: Interval) -> Interval {
        if self.is_nai() || o.is_nai() || o.contains(0.0) {
            return Interval::NAI;
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let lo = round::div_down(a, c)
            .min(round::div_down(a, d))
            .min(round::div_down(b, c))
            .min(round::div_down(b, d));
        let hi = round::div_up(a, c)
            .max(round::div_up(a, d))
            .max(round::div_up(b, c))
            .max(round::div_up(b, d));
        if lo.is_nan() || hi.is_nan() {
            return Interval::NAI;
        }
        Interval { lo, hi }
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Interval {
            type Output = Interval;
            #[inline]
            fn $m(self, o: f64) -> Interval { $tr::$m(self, Interval::point(o)) }
        }
        impl $tr<Interval> for f64 {
            type Output = Interval;
            #[inline]
            fn $m(self, o: Interval) -> Interval { $tr::$m(Interval::point(self), o) }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign for Interval {
    fn add_assign(&mut self, o: Interval) {
        *self = *self + o;
    }
}

impl SubAssign for Interval {
    fn sub_assign(&mut self, o: Interval) {
        *self = *self - o;
    }
}

impl MulAssign for Interval {
    fn mul_assign(&mut self, o: Interval) {
        *self = *self * o;
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

/// Endpoints serialize as shortest round-trip decimals; non-finite
/// endpoints (overflow results) as the strings "inf"/"-inf".
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Endpoint {
    Num(f64),
    Text(String),
}

fn encode(x: f64) -> Endpoint {
    if x.is_finite() {
        Endpoint::Num(x)
    } else if x == f64::INFINITY {
        Endpoint::Text("inf".into())
    } else if x == f64::NEG_INFINITY {
        Endpoint::Text("-inf".into())
    } else {
        Endpoint::Text("nan".into())
    }
}

fn decode(e: Endpoint) -> Result<f64, String> {
    match e {
        Endpoint::Num(x) => Ok(x),
        Endpoint::Text(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(format!("bad interval endpoint {other:?}")),
        },
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (encode(self.lo), encode(self.hi)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (lo, hi) = <(Endpoint, Endpoint)>::deserialize(d)?;
        let lo = decode(lo).map_err(serde::de::Error::custom)?;
        let hi = decode(hi).map_err(serde::de::Error::custom)?;
        if lo.is_nan() && hi.is_nan() {
            return Ok(Interval::NAI);
        }
        Interval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}
