//! Directed rounding on top of round-to-nearest.
//!
//! Every primitive computes the round-to-nearest result and then recovers the
//! sign of the rounding error with an error-free transformation (TwoSum or a
//! fused multiply-add residual). The endpoint is moved to the adjacent float
//! only when the rounded value lies on the wrong side of the exact result, so
//! exact operations stay exact. No hardware rounding mode is ever touched,
//! which keeps every function thread-safe.
//!
//! Where the residual is not exact (results in the subnormal range, where the
//! product or quotient may have lost bits below the FMA's reach), the
//! fallback is one unconditional ulp step outward.

/// Below this magnitude the FMA residual of a product or quotient is not
/// guaranteed exact, so we widen unconditionally.
const TINY: f64 = 1.0e-290;

#[inline]
fn down_from(x: f64, err_sign: f64) -> f64 {
    if err_sign < 0.0 {
        x.next_down()
    } else {
        x
    }
}

#[inline]
fn up_from(x: f64, err_sign: f64) -> f64 {
    if err_sign > 0.0 {
        x.next_up()
    } else {
        x
    }
}

/// Error term of `a + b` relative to its rounded sum `s` (Knuth's TwoSum).
#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if a.is_finite() && b.is_finite() && s > 0.0 {
            f64::MAX
        } else {
            s
        };
    }
    down_from(s, two_sum_err(a, b, s))
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if a.is_finite() && b.is_finite() && s < 0.0 {
            -f64::MAX
        } else {
            s
        };
    }
    up_from(s, two_sum_err(a, b, s))
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        return if a.is_finite() && b.is_finite() && p > 0.0 {
            f64::MAX
        } else {
            p
        };
    }
    if p.abs() < TINY {
        return p.next_down();
    }
    down_from(p, a.mul_add(b, -p))
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        return if a.is_finite() && b.is_finite() && p < 0.0 {
            -f64::MAX
        } else {
            p
        };
    }
    if p.abs() < TINY {
        return p.next_up();
    }
    up_from(p, a.mul_add(b, -p))
}

/// Sign of `a/b - q` given the rounded quotient `q`, or `None` if the
/// residual cannot be trusted.
#[inline]
fn div_err_sign(a: f64, b: f64, q: f64) -> Option<f64> {
    if q.abs() < TINY || a.abs() < TINY || !b.is_finite() {
        return None;
    }
    let r = (-q).mul_add(b, a);
    Some(if b > 0.0 { r } else { -r })
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_infinite() {
        return if a.is_finite() && b != 0.0 && q > 0.0 {
            f64::MAX
        } else {
            q
        };
    }
    match div_err_sign(a, b, q) {
        Some(e) => down_from(q, e),
        None => q.next_down(),
    }
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_infinite() {
        return if a.is_finite() && b != 0.0 && q < 0.0 {
            -f64::MAX
        } else {
            q
        };
    }
    match div_err_sign(a, b, q) {
        Some(e) => up_from(q, e),
        None => q.next_up(),
    }
}

/// Square root rounded down; `a` must be nonnegative.
#[inline]
pub fn sqrt_down(a: f64) -> f64 {
    let s = a.sqrt();
    if s == 0.0 || s.is_infinite() {
        return s;
    }
    if a < TINY {
        return s.next_down().max(0.0);
    }
    down_from(s, (-s).mul_add(s, a))
}

/// Square root rounded up; `a` must be nonnegative.
#[inline]
pub fn sqrt_up(a: f64) -> f64 {
    let s = a.sqrt();
    if s == 0.0 || s.is_infinite() {
        return s;
    }
    if a < TINY {
        return s.next_up();
    }
    up_from(s, (-s).mul_add(s, a))
}
