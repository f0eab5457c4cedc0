//! Elementary functions on intervals.
//!
//! Each function has a point kernel returning an enclosure of `f(x)` for a
//! single float `x`: argument reduction with split constants, a truncated
//! Taylor series evaluated in interval arithmetic, and an explicit interval
//! for the truncation remainder. Interval versions combine kernel values at
//! the endpoints (all functions here are monotone except sin/cos, whose
//! interior extrema are detected against the π enclosure).

use std::sync::OnceLock;

use super::Interval;

// ln 2 = LN2_HI + LN2_LO + δ with 0 < δ < ulp(LN2_LO). LN2_HI has 21
// trailing zero bits, so n·LN2_HI is exact for |n| < 2^21.
const LN2_HI: f64 = f64::from_bits(0x3FE6_2E42_FEE0_0000);
const LN2_LO: f64 = f64::from_bits(0x3DEA_39EF_3579_3C76);

// π/2 = P1 + P2 + P3 + P3T + δ with 0 < δ < 1e-48. P1 and P2 carry at most
// 33 significant bits, so n·P1 and n·P2 are exact for |n| < 2^20.
const PIO2_1: f64 = f64::from_bits(0x3FF9_21FB_5440_0000);
const PIO2_2: f64 = f64::from_bits(0x3DD0_B461_1A60_0000);
const PIO2_3: f64 = f64::from_bits(0x3BA3_198A_2E00_0000);
const PIO2_3T: f64 = f64::from_bits(0x397B_839A_2520_49C1);

/// Beyond this magnitude sin/cos return [-1, 1] instead of reducing.
const TRIG_REDUCE_LIMIT: f64 = 1.0e6;

fn ln2_lo() -> Interval {
    Interval::hull_of(LN2_LO, LN2_LO.next_up())
}

/// Enclosure of ln 2.
pub fn ln2() -> Interval {
    Interval::point(LN2_HI) + ln2_lo()
}

fn pio2_tail() -> Interval {
    Interval::point(PIO2_3) + Interval::point(PIO2_3T) + Interval::hull_of(0.0, 1.0e-48)
}

/// `1/k!` for `k = 0..=N`, as enclosures.
fn inv_factorials() -> &'static [Interval] {
    static TABLE: OnceLock<Vec<Interval>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v = Vec::with_capacity(32);
        let mut c = Interval::ONE;
        v.push(c);
        for k in 1..32 {
            c = c / Interval::point(k as f64);
            v.push(c);
        }
        v
    })
}

/// `2^n` as an exact interval (or a rounded one when out of the normal range).
fn pow2(n: i32) -> Interval {
    if (-1022..=1023).contains(&n) {
        Interval::point(f64::from_bits(((n + 1023) as u64) << 52))
    } else if n > 1023 {
        pow2(1023) * pow2(n - 1023)
    } else {
        pow2(-1022) * pow2(n + 1022)
    }
}

/// `Σ_{k≤N} r^k/k!` plus the Lagrange remainder, for `|r| ≤ 0.5`.
fn exp_series(r: Interval) -> Interval {
    const N: usize = 18;
    let c = inv_factorials();
    let mut p = c[N];
    for k in (0..N).rev() {
        p = p * r + c[k];
    }
    // |r|^{N+1}/(N+1)! · e^{|r|}, with e^{0.5} < 1.65.
    let m = Interval::point(r.mag());
    let rem = (m.powi(N as i32 + 1) * c[N + 1] * 1.65).hi();
    p + Interval::symmetric(rem)
}

fn exp_point(x: f64) -> Interval {
    if x.is_nan() {
        return Interval::NAI;
    }
    if x == 0.0 {
        return Interval::ONE;
    }
    if x > 709.79 {
        return Interval::hull_of(f64::MAX, f64::INFINITY);
    }
    if x < -745.2 {
        return Interval::hull_of(0.0, f64::from_bits(1));
    }
    let n = (x / std::f64::consts::LN_2).round();
    let ni = Interval::point(n);
    let r = Interval::point(x) - ni * LN2_HI - ni * ln2_lo();
    let e = exp_series(r) * pow2(n as i32);
    e.clamp_nonneg()
}

/// `(e^y - 1)/y = Σ_j y^j/(j+1)!` for `|y| ≤ 1`.
fn exprel_series(y: Interval) -> Interval {
    const J: usize = 20;
    let c = inv_factorials();
    let mut p = c[J + 1];
    for j in (0..J).rev() {
        p = p * y + c[j + 1];
    }
    let m = Interval::point(y.mag());
    let tail = (m.powi(J as i32 + 1) * c[J + 2] * 2.72).hi();
    p + Interval::symmetric(tail)
}

/// `e^y - 1` for `|y| ≤ 1`, accurate in relative terms near zero.
fn expm1_small(y: Interval) -> Interval {
    y * exprel_series(y)
}

fn exprel_point(x: f64) -> Interval {
    if x.is_nan() {
        return Interval::NAI;
    }
    if x.abs() <= 1.0 {
        return exprel_series(Interval::point(x));
    }
    (exp_point(x) - Interval::ONE) / Interval::point(x)
}

/// Splits `x > 0` as `m·2^e` with `m ∈ [√½, √2)`.
fn split_mantissa(x: f64) -> (f64, i32) {
    let (x, bias) = if x < f64::MIN_POSITIVE {
        (x * 2f64.powi(54), -54)
    } else {
        (x, 0)
    };
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32 - 1022;
    let mut m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    let mut e = exp + bias;
    if m < std::f64::consts::FRAC_1_SQRT_2 {
        m *= 2.0;
        e -= 1;
    }
    (m, e)
}

fn log_point(x: f64) -> Interval {
    if x.is_nan() || x <= 0.0 {
        return Interval::NAI;
    }
    if x == 1.0 {
        return Interval::ZERO;
    }
    if x == f64::INFINITY {
        return Interval::hull_of(709.0, f64::INFINITY);
    }
    const K: usize = 16;
    let (m, e) = split_mantissa(x);
    let mi = Interval::point(m);
    let s = (mi - 1.0) / (mi + 1.0);
    let t = s.sqr();
    // log m = 2 atanh s = 2 Σ_j s^{2j+1}/(2j+1)
    let mut p = Interval::ONE / Interval::point((2 * K + 1) as f64);
    for j in (0..K).rev() {
        p = p * t + Interval::ONE / Interval::point((2 * j + 1) as f64);
    }
    let sm = Interval::point(s.mag());
    // 2|s|^{2K+3} / ((2K+3)(1 - s²)) with |s| ≤ 0.1716 so 1 - s² > 0.97.
    let tail = (sm.powi(2 * K as i32 + 3) * 2.0 / ((2 * K + 3) as f64 * 0.97)).hi();
    let lm = s * p * 2.0 + Interval::symmetric(tail);
    if e == 0 {
        lm
    } else {
        let ei = Interval::point(e as f64);
        lm + ei * LN2_HI + ei * ln2_lo()
    }
}

fn sin_series(r: Interval) -> Interval {
    const J: usize = 12;
    let c = inv_factorials();
    let t = r.sqr();
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut p = c[2 * J + 1] * sign(J);
    for j in (0..J).rev() {
        p = p * t + c[2 * j + 1] * sign(j);
    }
    let m = Interval::point(r.mag());
    let tail = (m.powi(2 * J as i32 + 3) * c[2 * J + 3]).hi();
    r * p + Interval::symmetric(tail)
}

fn cos_series(r: Interval) -> Interval {
    const J: usize = 12;
    let c = inv_factorials();
    let t = r.sqr();
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut p = c[2 * J] * sign(J);
    for j in (0..J).rev() {
        p = p * t + c[2 * j] * sign(j);
    }
    let m = Interval::point(r.mag());
    let tail = (m.powi(2 * J as i32 + 2) * c[2 * J + 2]).hi();
    p + Interval::symmetric(tail)
}

/// Reduces `x` by multiples of π/2: returns `(quadrant mod 4, r)`.
fn reduce_pio2(x: f64) -> (i64, Interval) {
    let n = (x * std::f64::consts::FRAC_2_PI).round();
    let ni = Interval::point(n);
    let r = Interval::point(x) - ni * PIO2_1 - ni * PIO2_2 - ni * pio2_tail();
    ((n as i64).rem_euclid(4), r)
}

fn unit_clamp(v: Interval) -> Interval {
    v.intersect(Interval::hull_of(-1.0, 1.0))
        .unwrap_or(Interval::hull_of(-1.0, 1.0))
}

fn sin_point(x: f64) -> Interval {
    if !x.is_finite() || x.abs() > TRIG_REDUCE_LIMIT {
        return Interval::hull_of(-1.0, 1.0);
    }
    let (q, r) = reduce_pio2(x);
    let v = match q {
        0 => sin_series(r),
        1 => cos_series(r),
        2 => -sin_series(r),
        _ => -cos_series(r),
    };
    unit_clamp(v)
}

fn cos_point(x: f64) -> Interval {
    if !x.is_finite() || x.abs() > TRIG_REDUCE_LIMIT {
        return Interval::hull_of(-1.0, 1.0);
    }
    let (q, r) = reduce_pio2(x);
    let v = match q {
        0 => cos_series(r),
        1 => -sin_series(r),
        2 => -cos_series(r),
        _ => sin_series(r),
    };
    unit_clamp(v)
}

/// Whether `x` may contain a point `π·(offset + 2j)` for some integer `j`.
fn may_contain_phase(x: Interval, offset: f64) -> bool {
    let two_pi = 2.0 * std::f64::consts::PI;
    let j0 = (x.lo() / two_pi).floor() as i64 - 1;
    let j1 = (x.hi() / two_pi).ceil() as i64 + 1;
    (j0..=j1).any(|j| {
        let c = Interval::PI * Interval::point(offset + 2.0 * j as f64);
        c.overlaps(x)
    })
}

fn tanh_point(x: f64) -> Interval {
    if x.is_nan() {
        return Interval::NAI;
    }
    if x == 0.0 {
        return Interval::ZERO;
    }
    if x < 0.0 {
        return -tanh_point(-x);
    }
    if x > 40.0 {
        return Interval::hull_of(1.0f64.next_down(), 1.0);
    }
    let y = -2.0 * x;
    let u = if x <= 0.5 {
        expm1_small(Interval::point(y))
    } else {
        exp_point(y) - 1.0
    };
    // tanh x = -u/(2+u), decreasing in u.
    let f = |v: f64| {
        let v = Interval::point(v);
        -v / (v + 2.0)
    };
    let lo = f(u.hi()).lo().max(0.0);
    let hi = f(u.lo()).hi().min(1.0);
    Interval::hull_of(lo, hi)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Interval {
    pub fn exp(self) -> Interval {
        if self.is_nai() {
            return self;
        }
        Interval::hull_of(exp_point(self.lo).lo(), exp_point(self.hi).hi())
    }

    /// `(e^x - 1)/x`, continuous at 0 with value 1. Increasing in `x`.
    pub fn exprel(self) -> Interval {
        if self.is_nai() {
            return self;
        }
        Interval::hull_of(exprel_point(self.lo).lo(), exprel_point(self.hi).hi())
    }

    /// Natural logarithm; NaI unless `lo > 0`.
    pub fn log(self) -> Interval {
        if self.is_nai() || self.lo <= 0.0 {
            return Interval::NAI;
        }
        Interval::hull_of(log_point(self.lo).lo(), log_point(self.hi).hi())
    }

    pub fn tanh(self) -> Interval {
        if self.is_nai() {
            return self;
        }
        Interval::hull_of(tanh_point(self.lo).lo(), tanh_point(self.hi).hi())
    }

    pub fn sin(self) -> Interval {
        if self.is_nai() {
            return self;
        }
        if !self.is_finite() || self.width() >= 6.3 {
            return Interval::hull_of(-1.0, 1.0);
        }
        let v = sin_point(self.lo).hull(sin_point(self.hi));
        let hi = if may_contain_phase(self, 0.5) { 1.0 } else { v.hi() };
        let lo = if may_contain_phase(self, -0.5) { -1.0 } else { v.lo() };
        Interval::hull_of(lo, hi)
    }

    pub fn cos(self) -> Interval {
        if self.is_nai() {
            return self;
        }
        if !self.is_finite() || self.width() >= 6.3 {
            return Interval::hull_of(-1.0, 1.0);
        }
        let v = cos_point(self.lo).hull(cos_point(self.hi));
        let hi = if may_contain_phase(self, 0.0) { 1.0 } else { v.hi() };
        let lo = if may_contain_phase(self, 1.0) { -1.0 } else { v.lo() };
        Interval::hull_of(lo, hi)
    }

    /// `x^{p/q}` for `x ≥ 0` (any sign when `q = 1`); NaI outside the domain.
    pub fn pow_rational(self, p: i32, q: u32) -> Interval {
        if self.is_nai() || q == 0 {
            return Interval::NAI;
        }
        let g = gcd(p.unsigned_abs(), q).max(1);
        let (p, q) = (p / g as i32, q / g);
        if q == 1 {
            return self.powi(p);
        }
        if self.lo < 0.0 {
            return Interval::NAI;
        }
        if p == 0 {
            return Interval::ONE;
        }
        if (p, q) == (1, 2) {
            return self.sqrt();
        }
        if (p, q) == (-1, 2) {
            return Interval::ONE / self.sqrt();
        }
        let expo = Interval::point(p as f64) / Interval::point(q as f64);
        let at = |x: f64| -> Interval {
            if x == 0.0 {
                if p > 0 {
                    Interval::ZERO
                } else {
                    Interval::NAI
                }
            } else if x == f64::INFINITY {
                Interval::hull_of(f64::MAX, f64::INFINITY)
            } else {
                (log_point(x) * expo).exp()
            }
        };
        let (a, b) = (at(self.lo), at(self.hi));
        if a.is_nai() || b.is_nai() {
            return Interval::NAI;
        }
        if p > 0 {
            Interval::hull_of(a.lo(), b.hi())
        } else {
            Interval::hull_of(b.lo(), a.hi())
        }
    }
}
