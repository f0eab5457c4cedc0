//! Per-step a priori bounds on `‖∂ⁿu‖`, n = 0..4.
//!
//! Over a window `[t_i, t_{i+1}]` each norm satisfies a scalar differential
//! inequality whose coefficients depend on the window suprema of the lower
//! norms. Two comparison forms occur: linear `z' ≤ -a z + b` and Riccati
//! `z' ≤ -C z² + D`. For every order all methods are evaluated and the
//! smallest certified endpoint wins.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bounds::{linear_ode_bound, linear_ode_value, riccati_tanh_bound, riccati_value, ComparisonBound};
use crate::error::{Error, Result};
use crate::fem::Mesh;
use crate::forcing::{Forcing, NormMode};
use crate::grid::{minimize_separable, ParamGrid, Space};
use crate::interval::Interval;
use crate::radii::{h1_source, h2_source_frac, h2_source_poly, h3_source_frac, h3_source_poly, h4_source};
use crate::scalar::Scalar;

/// Bounds over one time window `[t_i, t_{i+1}]`.
///
/// `m[j]` bounds `‖∂ʲu(t)‖` for every `t` in the window, `r[j]` at the window
/// end. Both are norm-level (not squared) and `r[j] ≤ m[j]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepBounds {
    pub m: [Interval; 5],
    pub r: [Interval; 5],
    pub window: Interval,
}

impl StepBounds {
    /// Bounds that hold at a single instant: window and endpoint coincide.
    pub fn at_instant(radii: [Interval; 5], t: Interval) -> Self {
        StepBounds {
            m: radii,
            r: radii,
            window: t,
        }
    }
}

/// Norm-level window supremum and endpoint of one order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalBound {
    pub sup: Interval,
    pub end: Interval,
    pub method: &'static str,
}

impl LocalBound {
    fn from_squared(c: ComparisonBound, method: &'static str) -> Self {
        LocalBound {
            sup: c.sup.clamp_nonneg().sqrt(),
            end: c.end.clamp_nonneg().sqrt(),
            method,
        }
    }

    fn cap(self, r: Option<Interval>) -> Self {
        match r {
            Some(r) => {
                let r = r.upper();
                LocalBound {
                    sup: self.sup.min(r),
                    end: self.end.min(r),
                    method: self.method,
                }
            }
            None => self,
        }
    }
}

/// Parameter search settings for the local bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalOptions {
    pub grid: ParamGrid,
    /// Search parameters anew every step. When off, the parameters found at
    /// the first step are reused.
    pub reoptimize: bool,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions {
            grid: ParamGrid {
                resolution: 24,
                resolution_3d: 12,
                zoom_levels: 2,
                zoom_points: 5,
                zoom_shrink: 4.0,
                unbounded_max: 2.0,
            },
            reoptimize: true,
        }
    }
}

/// Parameters chosen per method label, for reuse across steps.
#[derive(Debug, Clone, Default)]
pub struct ParamCache(HashMap<&'static str, Vec<f64>>);

#[derive(Debug, Clone, Copy)]
enum Comparison<S> {
    Linear { a: S, b: S },
    Riccati { c: S, d: S },
}

/// One differential inequality for `z = ‖∂ʲu‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    H1Tanh,
    H2ExpPoly,
    H2ExpFrac,
    H2Growth,
    H2TanhPoly,
    H2TanhFrac,
    H3ExpFrac,
    H3ExpPoly,
    H3TanhFrac,
    H3TanhPoly,
    H4Exp,
    H4Tanh,
}

/// Window suprema `m[j]` of the lower norms and the forcing norm of the
/// order at hand.
#[derive(Debug, Clone, Copy)]
struct Ctx<S> {
    m: [S; 4],
    f: S,
}

impl Method {
    fn label(self) -> &'static str {
        use Method::*;
        match self {
            H1Tanh => "h1_tanh",
            H2ExpPoly => "h2_exp_poly",
            H2ExpFrac => "h2_exp_frac",
            H2Growth => "h2_growth",
            H2TanhPoly => "h2_tanh_poly",
            H2TanhFrac => "h2_tanh_frac",
            H3ExpFrac => "h3_exp_frac",
            H3ExpPoly => "h3_exp_poly",
            H3TanhFrac => "h3_tanh_frac",
            H3TanhPoly => "h3_tanh_poly",
            H4Exp => "h4_exp",
            H4Tanh => "h4_tanh",
        }
    }

    fn space(self) -> Space {
        match self {
            Method::H4Exp | Method::H4Tanh => Space::simplex(3),
            _ => Space::simplex(2),
        }
    }

    fn comparison<S: Scalar>(self, x: &Ctx<S>, p: &[S]) -> Comparison<S> {
        use Method::*;
        let pi2 = S::pi().sq();
        let two = S::cst(2.0);
        let [m1, m2, m3, m4] = x.m;
        let (a, b) = (p[0], p[1]);
        let rest = two - a - b;
        match self {
            H1Tanh => Comparison::Riccati {
                c: rest / m1.sq(),
                d: x.f.sq() / a + h1_source(m1, b),
            },
            H2ExpPoly => Comparison::Linear {
                a: pi2 * rest,
                b: h2_source_poly(m1, m2, b) + x.f.sq() / a,
            },
            H2ExpFrac => Comparison::Linear {
                a: pi2 * rest,
                b: h2_source_frac(m2, b) + x.f.sq() / a,
            },
            H2Growth => Comparison::Linear {
                a: pi2 * rest - S::cst(25.0) * m1 * m2 / b,
                b: x.f.sq() / a,
            },
            H2TanhPoly => Comparison::Riccati {
                c: rest / m2.sq(),
                d: h2_source_poly(m1, m2, b) + x.f.sq() / a,
            },
            H2TanhFrac => Comparison::Riccati {
                c: rest / m2.sq(),
                d: h2_source_frac(m2, b) + x.f.sq() / a,
            },
            H3ExpFrac => Comparison::Linear {
                a: pi2 * rest,
                b: h3_source_frac(m2, m3, a) + x.f.sq() / b,
            },
            H3ExpPoly => Comparison::Linear {
                a: pi2 * rest,
                b: h3_source_poly(m1, m2, m3, a) + x.f.sq() / b,
            },
            H3TanhFrac => Comparison::Riccati {
                c: rest / m3.sq(),
                d: h3_source_frac(m2, m3, a) + x.f.sq() / b,
            },
            H3TanhPoly => Comparison::Riccati {
                c: rest / m3.sq(),
                d: h3_source_poly(m1, m2, m3, a) + x.f.sq() / b,
            },
            H4Exp | H4Tanh => {
                let g = p[2];
                let d = h4_source(m1, m2, m3, m4, x.f, a, b, g);
                if self == H4Exp {
                    Comparison::Linear { a: pi2 * (rest - g), b: d }
                } else {
                    Comparison::Riccati { c: (rest - g) / m4.sq(), d }
                }
            }
        }
    }
}

fn end_value(c: Comparison<f64>, z0: f64, t: f64) -> f64 {
    let v = match c {
        Comparison::Linear { a, b } if b >= 0.0 => linear_ode_value(a, b, z0, t),
        Comparison::Riccati { c, d } if c > 0.0 && d >= 0.0 => riccati_value(c, d, z0, t),
        _ => f64::NAN,
    };
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

fn certify(c: Comparison<Interval>, z0: Interval, t: Interval) -> Result<ComparisonBound> {
    match c {
        Comparison::Linear { a, b } => linear_ode_bound(a, b, z0, t),
        Comparison::Riccati { c, d } => riccati_tanh_bound(c, d, z0, t),
    }
}

fn points(p: &[f64]) -> Vec<Interval> {
    p.iter().map(|&v| Interval::point(v)).collect()
}

/// Runs one method: parameter search in floats (or cache lookup), then
/// certification in intervals. `z0` is the squared initial norm.
fn run_method(
    method: Method,
    x: &Ctx<Interval>,
    z0: Interval,
    step: Interval,
    opts: &LocalOptions,
    cache: &mut ParamCache,
) -> Option<LocalBound> {
    let params = match cache.0.get(method.label()) {
        Some(p) if !opts.reoptimize => p.clone(),
        _ => {
            let xf = Ctx {
                m: x.m.map(|v| v.hi()),
                f: x.f.hi(),
            };
            let (z0f, tf) = (z0.hi(), step.hi());
            let found = minimize_separable(
                &opts.grid,
                method.space(),
                Space::EMPTY,
                |p| end_value(method.comparison(&xf, p), z0f, tf),
                |_| (),
                |v, _| *v,
            )?;
            cache.0.insert(method.label(), found.p1.clone());
            found.p1
        }
    };
    let c = method.comparison(x, &points(&params));
    certify(c, z0, step).ok().map(|b| LocalBound::from_squared(b, method.label()))
}

fn best(cands: impl IntoIterator<Item = Option<LocalBound>>) -> Result<LocalBound> {
    cands
        .into_iter()
        .flatten()
        .filter(|b| b.end.is_finite() && b.sup.is_finite())
        .min_by(|a, b| a.end.hi().total_cmp(&b.end.hi()).then(a.sup.hi().total_cmp(&b.sup.hi())))
        .ok_or(Error::NoBound("no local bound method succeeded"))
}

fn run_all(
    methods: &[Method],
    x: &Ctx<Interval>,
    r_in: Interval,
    step: Interval,
    opts: &LocalOptions,
    cache: &mut ParamCache,
) -> Vec<Option<LocalBound>> {
    let z0 = r_in.upper().clamp_nonneg().sqr();
    methods.iter().map(|&m| run_method(m, x, z0, step, opts, cache)).collect()
}

fn ctx(m: &[Interval], f: Interval) -> Ctx<Interval> {
    let mut out = [Interval::ZERO; 4];
    for (d, s) in out.iter_mut().zip(m) {
        *d = s.upper().clamp_nonneg();
    }
    Ctx {
        m: out,
        f: f.upper().clamp_nonneg(),
    }
}

/// `‖u‖` from `z' ≤ -π² z + ‖f‖`, applied directly to the norm.
pub fn local_l2(f_norm: Interval, r1_in: Interval, step: Interval) -> Result<LocalBound> {
    let c = linear_ode_bound(Interval::PI.sqr(), f_norm.upper(), r1_in.upper().clamp_nonneg(), step)?;
    Ok(LocalBound {
        sup: c.sup,
        end: c.end,
        method: "l2_exp",
    })
}

/// Root in `(0, 1)` of `α + c α^{1/4} - 1 = 0`.
fn h1_alpha(c: f64) -> f64 {
    let g = |a: f64| a + c * a.powf(0.25) - 1.0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exponential form for `‖u_x‖²` with the closed-form constants:
/// rate `π²(2-α-β)`, source `‖f‖²/α + 7⁷M₁¹⁰/(2¹⁶β⁷)`, where `α` solves
/// `α + (M₁⁵/‖f‖)^{1/4} α^{1/4} = 1` and `β = 7/4 - 7α/4`.
fn h1_exp(f: Interval, m1: Interval, z0: Interval, step: Interval) -> Option<LocalBound> {
    let (ff, mf) = (f.hi(), m1.hi());
    let pi2 = Interval::PI.sqr();
    let (alpha, forcing) = if ff == 0.0 {
        // no forcing term to absorb: α → 0
        (Interval::ZERO, Interval::ZERO)
    } else {
        let c = (mf.powi(5) / ff).powf(0.25);
        let a = h1_alpha(c).clamp(1e-12, 1.0 - 1e-9);
        let a = Interval::point(a);
        (a, f.sqr() / a)
    };
    let beta = Interval::rational(7, 4) * (Interval::ONE - alpha);
    let rate = pi2 * (Interval::point(2.0) - alpha - beta);
    let source = forcing + h1_source(m1, beta);
    linear_ode_bound(rate, source, z0, step)
        .ok()
        .map(|b| LocalBound::from_squared(b, "h1_exp"))
}

/// `‖u_x‖` given the window supremum `m1` of `‖u‖`.
pub fn local_h1(
    f_norm: Interval,
    m1: Interval,
    r2_in: Interval,
    step: Interval,
    opts: &LocalOptions,
    cache: &mut ParamCache,
) -> Result<LocalBound> {
    let x = ctx(&[m1], f_norm);
    let z0 = r2_in.upper().clamp_nonneg().sqr();
    let mut c = run_all(&[Method::H1Tanh], &x, r2_in, step, opts, cache);
    c.push(h1_exp(x.f, x.m[0], z0, step));
    best(c)
}

/// `‖u_xx‖` given window suprema `m = [M₁, M₂]` and `f_norm ≥ ‖f_x‖`.
pub fn local_h2(
    f_norm: Interval,
    m: [Interval; 2],
    r3_in: Interval,
    step: Interval,
    opts: &LocalOptions,
    cache: &mut ParamCache,
) -> Result<LocalBound> {
    use Method::*;
    let x = ctx(&m, f_norm);
    best(run_all(
        &[H2ExpPoly, H2ExpFrac, H2Growth, H2TanhPoly, H2TanhFrac],
        &x,
        r3_in,
        step,
        opts,
        cache,
    ))
}

/// `‖u_xxx‖` given `m = [M₁, M₂, M₃]` and `f_norm ≥ ‖f_xx‖`.
pub fn local_h3(
    f_norm: Interval,
    m: [Interval; 3],
    r4_in: Interval,
    step: Interval,
    opts: &LocalOptions,
    cache: &mut ParamCache,
) -> Result<LocalBound> {
    use Method::*;
    let x = ctx(&m, f_norm);
    best(run_all(&[H3ExpFrac, H3ExpPoly, H3TanhFrac, H3TanhPoly], &x, r4_in, step, opts, cache))
}

/// `‖u_xxxx‖` given `m = [M₁..M₄]` and `f_norm ≥ ‖f_xxx‖`.
pub fn local_h4(
    f_norm: Interval,
    m: [Interval; 4],
    r5_in: Interval,
    step: Interval,
    opts: &LocalOptions,
    cache: &mut ParamCache,
) -> Result<LocalBound> {
    let x = ctx(&m, f_norm);
    best(run_all(&[Method::H4Exp, Method::H4Tanh], &x, r5_in, step, opts, cache))
}

/// All five orders over `window`, starting from norm bounds `r_in` at
/// its left end. `cap` holds bounds known for the whole window (global
/// radii when the initial data lies in the trapping set).
pub fn step_bounds(
    f: &Forcing,
    mode: NormMode,
    window: Interval,
    r_in: [Interval; 5],
    cap: Option<[Interval; 5]>,
    opts: &LocalOptions,
    cache: &mut ParamCache,
) -> Result<StepBounds> {
    let step = Interval::point(window.hi()) - Interval::point(window.lo());
    let step = step.upper().clamp_nonneg();
    let fw = |j: u32| f.norm_bound(j, Some(window), mode);
    let capj = |j: usize| cap.map(|c| c[j]);

    let b1 = local_l2(fw(0), r_in[0], step)?.cap(capj(0));
    let b2 = local_h1(fw(0), b1.sup, r_in[1], step, opts, cache)?.cap(capj(1));
    let b3 = local_h2(fw(1), [b1.sup, b2.sup], r_in[2], step, opts, cache)?.cap(capj(2));
    let b4 = local_h3(fw(2), [b1.sup, b2.sup, b3.sup], r_in[3], step, opts, cache)?.cap(capj(3));
    let b5 = local_h4(fw(3), [b1.sup, b2.sup, b3.sup, b4.sup], r_in[4], step, opts, cache)?.cap(capj(4));
    let all = [b1, b2, b3, b4, b5];
    Ok(StepBounds {
        m: all.map(|b| b.sup),
        r: all.map(|b| b.end.min(b.sup)),
        window,
    })
}

/// `h²N₃/π² + s₀` and `hN₃/π + s₁`: the `L²` and `H¹` norms of a function
/// whose FEM part has norms at most `s₀`, `s₁` and whose second derivative
/// is bounded by `N₃`.
fn split_bounds(n3: Interval, h: Interval, sup: (Interval, Interval)) -> (Interval, Interval) {
    let pi = Interval::PI;
    let n3 = n3.upper().clamp_nonneg();
    (h.sqr() * n3 / pi.sqr() + sup.0.upper(), h * n3 / pi + sup.1.upper())
}

/// Tightens `‖u‖` and `‖u_x‖` using the FEM coefficient sets.
///
/// `end_box` encloses the nodal coefficients `α` at the window end;
/// `window_box`, if given, encloses them over the whole window. Suprema of
/// `‖Σα_m v^m‖` are taken over the box hull.
pub fn refine(bounds: StepBounds, end_box: &[Interval], window_box: Option<&[Interval]>, mesh: &Mesh) -> StepBounds {
    let h = mesh.h();
    let mut out = bounds;
    let (e1, e2) = split_bounds(bounds.r[2], h, crate::fem::fem_norms(end_box, mesh));
    out.r[0] = bounds.r[0].min(e1);
    out.r[1] = bounds.r[1].min(e2);
    if let Some(w) = window_box {
        let (w1, w2) = split_bounds(bounds.m[2], h, crate::fem::fem_norms(w, mesh));
        out.m[0] = bounds.m[0].min(w1);
        out.m[1] = bounds.m[1].min(w2);
    }
    for j in 0..2 {
        out.r[j] = out.r[j].min(out.m[j]);
    }
    out
}
