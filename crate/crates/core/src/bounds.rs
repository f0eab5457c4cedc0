//! Scalar inequality machinery shared by the global and local estimates.
//!
//! * [`solve_dominant_root`]: the unique positive root of
//!   `x = d₀ + Σ d_k x^{p_k}` with `0 < p_k < 1`, as a verified bracket.
//! * [`wang_bound`]: combines `g' + C v ≤ B` (with `0 ≤ g ≤ A`) and
//!   `v' ≤ D + E v` into an asymptotic bound `v + S g ≤ F`.
//! * [`linear_ode_bound`] and [`riccati_tanh_bound`]: solutions of the
//!   comparison equations `z' = -a z + b` and `z' = -C z² + D`.
//!
//! The `*_value` functions are the same formulas written against
//! [`Scalar`], so parameter searches can run them in `f64`.

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalError};
use crate::scalar::Scalar;

/// `coeff · x^{p/q}` with `0 < p/q < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coeff: Interval,
    pub p: i32,
    pub q: u32,
}

impl PowerTerm {
    pub fn new(coeff: Interval, p: i32, q: u32) -> Self {
        PowerTerm { coeff, p, q }
    }
}

/// `x = d₀ + Σ_k d_k x^{p_k}`.
///
/// Zero coefficients are admitted (a vanishing forcing produces them); the
/// root is then 0 when every coefficient vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct RootEquation {
    d0: Interval,
    terms: Vec<PowerTerm>,
}

impl RootEquation {
    pub fn new(d0: Interval, terms: Vec<PowerTerm>) -> Result<Self> {
        if d0.is_nai() || d0.lo() < 0.0 || !d0.is_finite() {
            return Err(Error::RootFailure(format!("constant term {d0} is not a finite nonnegative interval")));
        }
        for t in &terms {
            if t.coeff.is_nai() || t.coeff.lo() < 0.0 || !t.coeff.is_finite() {
                return Err(Error::RootFailure(format!("coefficient {} is not a finite nonnegative interval", t.coeff)));
            }
            if t.p <= 0 || t.p as i64 >= t.q as i64 {
                return Err(Error::RootFailure(format!("exponent {}/{} is not in (0, 1)", t.p, t.q)));
            }
        }
        Ok(RootEquation { d0, terms })
    }

    pub fn d0(&self) -> Interval {
        self.d0
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    /// `h(x)` in interval arithmetic, for `x ≥ 0`.
    pub fn eval(&self, x: Interval) -> Interval {
        self.terms
            .iter()
            .fold(self.d0, |acc, t| acc + t.coeff * x.pow_rational(t.p, t.q))
    }

    /// `h(x) - x` in floats with the chosen coefficient endpoints.
    fn excess(&self, x: f64, upper: bool) -> f64 {
        let pick = |i: Interval| if upper { i.hi() } else { i.lo() };
        let h: f64 = self
            .terms
            .iter()
            .map(|t| pick(t.coeff) * x.powf(t.p as f64 / t.q as f64))
            .sum::<f64>()
            + pick(self.d0);
        h - x
    }

    fn is_trivial(&self, upper: bool) -> bool {
        let pick = |i: Interval| if upper { i.hi() } else { i.lo() };
        pick(self.d0) == 0.0 && self.terms.iter().all(|t| pick(t.coeff) == 0.0)
    }

    /// Float approximation of the positive root for one coefficient choice.
    fn locate(&self, upper: bool) -> Result<f64> {
        if self.is_trivial(upper) {
            return Ok(0.0);
        }
        let mut hi = 1.0f64.max(2.0 * self.excess(0.0, upper));
        let mut n = 0;
        while self.excess(hi, upper) >= 0.0 {
            hi *= 2.0;
            n += 1;
            if n > 2000 || !hi.is_finite() {
                return Err(Error::RootFailure("no upper bracket".into()));
            }
        }
        // h(0) = d₀; with d₀ = 0 walk down until the power terms dominate.
        let mut lo = 0.0;
        if self.excess(0.0, upper) <= 0.0 {
            lo = hi;
            let mut n = 0;
            while self.excess(lo, upper) <= 0.0 {
                lo *= 0.5;
                n += 1;
                if n > 2000 || lo == 0.0 {
                    return Err(Error::RootFailure("no lower bracket".into()));
                }
            }
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.excess(mid, upper) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

const BRACKET_STEPS: [f64; 11] = [0.0, 4.0e-16, 2.0e-15, 1.0e-14, 1.0e-13, 1.0e-12, 1.0e-11, 1.0e-10, 1.0e-8, 1.0e-6, 1.0e-4];

/// Verified bracket `[lo, hi]` of the positive root of `x = h(x)`.
///
/// The bracket is certified in interval arithmetic: `h(hi) ≤ hi` and
/// `h(lo) ≥ lo`. Since `h(x) < x` exactly above the root, `hi` is a valid
/// upper bound even when it overshoots the root slightly.
pub fn solve_dominant_root(eq: &RootEquation) -> Result<Interval> {
    let r_up = eq.locate(true)?;
    let r_lo = eq.locate(false)?;
    let hi = if r_up == 0.0 {
        (eq.eval(Interval::ZERO).hi() <= 0.0).then_some(0.0)
    } else {
        BRACKET_STEPS.iter().find_map(|&d| {
            let x = r_up * (1.0 + d) + d * f64::MIN_POSITIVE;
            (eq.eval(Interval::point(x)).hi() <= x).then_some(x)
        })
    };
    let lo = if r_lo == 0.0 {
        Some(0.0)
    } else {
        BRACKET_STEPS.iter().find_map(|&d| {
            let x = r_lo * (1.0 - d);
            (eq.eval(Interval::point(x)).lo() >= x).then_some(x)
        })
    };
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo <= hi => Ok(Interval::hull_of(lo, hi)),
        (Some(_), Some(hi)) => Ok(Interval::hull_of(0.0, hi)),
        _ => Err(Error::RootFailure(format!("bracket of root near {r_up} not verified"))),
    }
}

/// Constants of the two differential inequalities
/// `g' + C v ≤ B`, `0 ≤ g ≤ A` and `v' ≤ D + E v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WangParams {
    pub a: Interval,
    pub b: Interval,
    pub c: Interval,
    pub d: Interval,
    pub e: Interval,
}

impl WangParams {
    pub fn new(a: Interval, b: Interval, c: Interval, d: Interval, e: Interval) -> Result<Self> {
        if [a, b, c, d, e].iter().any(|x| x.is_nai() || !x.is_finite()) {
            return Err(Error::NoBound("non-finite parameter"));
        }
        if a.lo() < 0.0 {
            return Err(Error::NoBound("A must be nonnegative"));
        }
        if c.lo() <= 0.0 {
            return Err(Error::NoBound("C must be positive"));
        }
        Ok(WangParams { a, b, c, d, e })
    }
}

/// `v + S g ≤ F` asymptotically; the decay rate toward it is `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WangBound {
    pub f: Interval,
    pub s: Interval,
    pub lambda: f64,
}

/// Float closed form `(F, S)` with the optimal rate, or `None` when no case
/// applies. Used by parameter searches; certified values come from
/// [`wang_bound`].
pub fn wang_closed_form(a: f64, b: f64, c: f64, d: f64, e: f64) -> Option<(f64, f64)> {
    let x = c * d + b * e;
    if x <= 0.0 || (a > 0.0 && (x / a).sqrt() <= -e) {
        return (e < 0.0).then(|| (-d / e, 0.0));
    }
    if a <= 0.0 {
        return None;
    }
    let lam = (x / a).sqrt();
    Some(((e * a + b + 2.0 * (a * x).sqrt()) / c, (e + lam) / c))
}

/// Certified combination of the two inequalities.
///
/// The case and the rate `λ` are chosen in floats; the bound
/// `F = D/λ + ((E+λ)/C)(A + B/λ)`, `S = (E+λ)/C` is valid for every `λ > 0`
/// with `λ + E ≥ 0`, so only that side condition is enforced rigorously.
pub fn wang_bound(p: &WangParams) -> Result<WangBound> {
    let (a, b, c, d, e) = (p.a.mid(), p.b.mid(), p.c.mid(), p.d.mid(), p.e.mid());
    let x = c * d + b * e;
    let second = x > 0.0 && (a == 0.0 || (x / a).sqrt() > -e);
    let lam = if second {
        if p.a.hi() == 0.0 {
            return Err(Error::NoBound("A vanishes in the coupled case"));
        }
        (x / a).sqrt().max(-p.e.lo())
    } else {
        if p.e.hi() >= 0.0 {
            return Err(Error::NoBound("E is not negative and CD + BE is not positive"));
        }
        -p.e.lo()
    };
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::NoBound("no admissible rate"));
    }
    let l = Interval::point(lam);
    let s = ((p.e + l) / p.c).clamp_nonneg();
    let f = p.d / l + s * (p.a + p.b / l);
    if !f.is_finite() {
        return Err(Error::NoBound("bound is not finite"));
    }
    Ok(WangBound { f, s, lambda: lam })
}

/// Bound at the end of the window and its supremum over the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonBound {
    pub end: Interval,
    pub sup: Interval,
}

/// `z₀ e^{-at} + (b/a)(1 - e^{-at})`, written as `z₀ e^{-at} + b t φ(-at)`
/// with `φ(y) = (e^y - 1)/y` so that `a ≤ 0` needs no special case.
pub fn linear_ode_value<S: Scalar>(a: S, b: S, z0: S, t: S) -> S {
    let y = -(a * t);
    z0 * y.exp() + b * t * y.exprel()
}

/// Solution of `z' = -C z² + D`, `z(0) = z₀`, as
/// `q + q(1-τ)(z₀-q)/(z₀τ+q)` with `q = √(D/C)`, `τ = tanh(√(CD) t)`.
pub fn riccati_value<S: Scalar>(c: S, d: S, z0: S, t: S) -> S {
    if d.upper() == 0.0 {
        return z0 / (S::cst(1.0) + c * z0 * t);
    }
    let q = (d / c).sqrt();
    let tau = ((c * d).sqrt() * t).tanh();
    q + q * (S::cst(1.0) - tau) * (z0 - q) / (z0 * tau + q)
}

fn domain(what: &'static str) -> Error {
    Error::Interval(IntervalError::Domain(what))
}

/// Upper bound for `z' ≤ -a z + b`, `z(0) ≤ z₀`, at time `t`.
///
/// The solution decreases in `a` and increases in `b` and `z₀`, so the
/// formula is evaluated at `a.lo`, `b.hi`, `z₀.hi`. It is monotone in time,
/// hence the window supremum is `max(z₀, z(t))`.
pub fn linear_ode_bound(a: Interval, b: Interval, z0: Interval, t: Interval) -> Result<ComparisonBound> {
    if b.is_nai() || b.lo() < 0.0 {
        return Err(domain("source must be nonnegative"));
    }
    if z0.is_nai() || z0.lo() < 0.0 || t.is_nai() || t.lo() < 0.0 || a.is_nai() {
        return Err(domain("initial value and time must be nonnegative"));
    }
    let end = linear_ode_value(Interval::point(a.lo()), b.upper(), z0.upper(), t).clamp_nonneg();
    let sup = end.max(z0.upper());
    Ok(ComparisonBound { end, sup })
}

/// Upper bound for `z' ≤ -C z² + D`, `z(0) ≤ z₀`, at time `t`.
///
/// Evaluated at `C.lo`, `D.hi`, `z₀.hi`. The window supremum is
/// `max(z₀, √(D/C))`.
pub fn riccati_tanh_bound(c: Interval, d: Interval, z0: Interval, t: Interval) -> Result<ComparisonBound> {
    if c.is_nai() || c.lo() <= 0.0 {
        return Err(domain("C must be positive"));
    }
    if d.is_nai() || d.lo() < 0.0 || z0.is_nai() || z0.lo() < 0.0 || t.is_nai() || t.lo() < 0.0 {
        return Err(domain("D, initial value and time must be nonnegative"));
    }
    let (c, d, z0) = (Interval::point(c.lo()), d.upper(), z0.upper());
    let end = riccati_value(c, d, z0, t).clamp_nonneg();
    let sup = end.max(z0).max((d / c).sqrt());
    Ok(ComparisonBound { end, sup })
}
