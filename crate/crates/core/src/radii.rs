//! Global trapping radii: every solution eventually satisfies
//! `‖∂ʲu(t)‖ ≤ R_{j+1}`, j = 0..4, and never leaves that set again.
//!
//! Each radius is the minimum over several independent methods. Root
//! methods solve `x = d₀ + Σ d_k x^{p_k}` for a bound `X` on a time integral
//! and report `min(X/π, √(X·R_prev))`. Wang methods combine two differential
//! inequalities with constants `(A, B, C, D, E)` depending on free
//! parameters, searched by [`crate::grid`] and certified once in interval
//! arithmetic; they report `√F` for the set `‖∂ʲu‖² + S‖∂ʲ⁻¹u‖² ≤ F`.

use serde::Serialize;

use crate::bounds::{solve_dominant_root, wang_bound, wang_closed_form, PowerTerm, RootEquation, WangParams};
use crate::error::{Error, Result};
use crate::forcing::{Forcing, NormMode};
use crate::grid::{minimize_separable, ParamGrid, Space};
use crate::interval::Interval;
use crate::scalar::Scalar;

/// `sup_t ‖∂ʲf(t)‖` for j = 0..4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForcingNorms(pub [Interval; 5]);

impl ForcingNorms {
    pub fn of(f: &Forcing, mode: NormMode) -> Self {
        ForcingNorms(std::array::from_fn(|j| f.norm_bound(j as u32, None, mode)))
    }
}

/// How one method fared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub label: &'static str,
    /// `None` when the method yields no finite bound for these inputs.
    pub radius: Option<Interval>,
    pub s: Interval,
    /// Free parameters at which the bound was certified.
    pub params: Vec<f64>,
    /// Constants and rate of a Wang-type method, so the bound
    /// `F = D/λ + ((E+λ)/C)(A + B/λ) ≥ radius²` can be rechecked.
    pub wang: Option<WangCertificate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WangCertificate {
    pub a: Interval,
    pub b: Interval,
    pub c: Interval,
    pub d: Interval,
    pub e: Interval,
    pub lambda: f64,
}

/// Radius of one order with every method tried.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusResult {
    pub radius: Interval,
    pub s: Interval,
    pub method: &'static str,
    pub methods: Vec<MethodOutcome>,
}

impl RadiusResult {
    fn pick(methods: Vec<MethodOutcome>) -> Result<Self> {
        let best = methods
            .iter()
            .filter_map(|m| m.radius.map(|r| (r, m)))
            .min_by(|a, b| a.0.hi().total_cmp(&b.0.hi()))
            .ok_or(Error::NoBound("no radius method succeeded"))?;
        Ok(RadiusResult {
            radius: best.0,
            s: best.1.s,
            method: best.1.label,
            methods: methods.clone(),
        })
    }

    /// Outcome of a method by label.
    pub fn method(&self, label: &str) -> Option<&MethodOutcome> {
        self.methods.iter().find(|m| m.label == label)
    }
}

/// All five radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrappingRadii {
    pub norms: ForcingNorms,
    pub r: [Interval; 5],
    pub s: [Interval; 5],
    pub method_used: [&'static str; 5],
    pub details: Vec<RadiusResult>,
}

impl TrappingRadii {
    /// Upper ends as degenerate intervals.
    pub fn upper(&self) -> [Interval; 5] {
        self.r.map(|r| r.upper())
    }
}

/// `R₁ = sup ‖f‖ / π²`.
pub fn radius_r1(norms: &ForcingNorms) -> Interval {
    norms.0[0] / Interval::PI.sqr()
}

/// Inputs of the formulas: forcing norms `f[j]` and radii `r[j]` (R_{j+1}).
#[derive(Debug, Clone, Copy)]
struct Inputs<S> {
    f: [S; 5],
    r: [S; 5],
}

impl Inputs<Interval> {
    fn new(norms: &ForcingNorms, radii: &[Interval]) -> Self {
        let mut r = [Interval::ZERO; 5];
        for (dst, src) in r.iter_mut().zip(radii) {
            *dst = src.upper();
        }
        Inputs {
            f: norms.0.map(|x| x.upper()),
            r,
        }
    }

    fn floats(&self) -> Inputs<f64> {
        Inputs {
            f: self.f.map(|x| x.hi()),
            r: self.r.map(|x| x.hi()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wang {
    H1,
    H2Poly,
    H2Frac,
    H2Growth,
    H3PolyPoly,
    H3PolyFrac,
    H3FracPoly,
    H3FracFrac,
    H4Direct,
    H4Poly,
    H4Frac,
}

impl Wang {
    fn label(self) -> &'static str {
        match self {
            Wang::H1 => "wang",
            Wang::H2Poly => "wang_poly",
            Wang::H2Frac => "wang_frac",
            Wang::H2Growth => "wang_growth",
            Wang::H3PolyPoly => "wang_poly_poly",
            Wang::H3PolyFrac => "wang_poly_frac",
            Wang::H3FracPoly => "wang_frac_poly",
            Wang::H3FracFrac => "wang_frac_frac",
            Wang::H4Direct => "wang_direct",
            Wang::H4Poly => "wang_poly",
            Wang::H4Frac => "wang_frac",
        }
    }

    fn spaces(self, grid: &ParamGrid) -> (Space, Space) {
        match self {
            Wang::H1 => (Space::EMPTY, Space::simplex(2)),
            Wang::H4Direct => (
                Space::simplex(1),
                Space::LogBox {
                    dims: 2,
                    lo: 1e-3,
                    hi: grid.unbounded_max.max(2e-3),
                },
            ),
            Wang::H4Poly | Wang::H4Frac => (Space::simplex(2), Space::simplex(3)),
            _ => (Space::simplex(2), Space::simplex(2)),
        }
    }

    /// `A`: bound on the integrated quantity (the previous radius squared).
    fn a<S: Scalar>(self, x: &Inputs<S>) -> S {
        let j = match self {
            Wang::H1 => 0,
            Wang::H2Poly | Wang::H2Frac | Wang::H2Growth => 1,
            Wang::H3PolyPoly | Wang::H3PolyFrac | Wang::H3FracPoly | Wang::H3FracFrac => 2,
            Wang::H4Direct | Wang::H4Poly | Wang::H4Frac => 3,
        };
        x.r[j].sq()
    }

    fn bc<S: Scalar>(self, x: &Inputs<S>, p: &[S]) -> (S, S) {
        let (f0, f1_sq, f2_sq) = (x.f[0], x.f[1].sq(), x.f[2].sq());
        let [r1, r2, r3, r4, _] = x.r;
        let two = S::cst(2.0);
        match self {
            Wang::H1 => (two * f0 * r1, two),
            Wang::H2Poly | Wang::H2Frac | Wang::H2Growth => {
                let (g, d) = (p[0], p[1]);
                (f0.sq() / g + h1_source(r1, d), two - g - d)
            }
            Wang::H3PolyPoly | Wang::H3PolyFrac => {
                let (g, d) = (p[0], p[1]);
                (h2_source_poly(r1, r2, d) + f1_sq / g, two - g - d)
            }
            Wang::H3FracPoly | Wang::H3FracFrac => {
                let (g, d) = (p[0], p[1]);
                (h2_source_frac(r2, d) + f1_sq / g, two - g - d)
            }
            Wang::H4Direct => {
                let a = p[0];
                let b = S::cst(7.0) * S::cst(2.0).sqrt() * (r2 * r3).sqrt() * r4.sq() + f2_sq / a;
                (b, two - a)
            }
            Wang::H4Poly => {
                let (d, e) = (p[0], p[1]);
                (h3_source_poly(r1, r2, r3, d) + f2_sq / e, two - e - d)
            }
            Wang::H4Frac => {
                let (d, e) = (p[0], p[1]);
                (h3_source_frac(r2, r3, d) + f2_sq / e, two - e - d)
            }
        }
    }

    fn de<S: Scalar>(self, x: &Inputs<S>, p: &[S]) -> (S, S) {
        let [f0, f1, f2, f3, f4] = x.f;
        let [r1, r2, r3, r4, _] = x.r;
        let two = S::cst(2.0);
        let pi2 = S::pi().sq();
        match self {
            Wang::H1 => {
                let (a, b) = (p[0], p[1]);
                (f0.sq() / a + h1_source(r1, b), -(two - a - b) * pi2)
            }
            Wang::H2Poly => {
                let (a, b) = (p[0], p[1]);
                (h2_source_poly(r1, r2, b) + f1.sq() / a, -(two - a - b) * pi2)
            }
            Wang::H2Frac => {
                let (a, b) = (p[0], p[1]);
                (h2_source_frac(r2, b) + f1.sq() / a, -(two - a - b) * pi2)
            }
            Wang::H2Growth => {
                let (a, b) = (p[0], p[1]);
                (f1.sq() / a, S::cst(25.0) * r1 * r2 / b - pi2 * (two - a - b))
            }
            Wang::H3PolyPoly | Wang::H3FracPoly => {
                let (a, b) = (p[0], p[1]);
                (h3_source_frac(r2, r3, a) + f2.sq() / b, -pi2 * (two - a - b))
            }
            Wang::H3PolyFrac | Wang::H3FracFrac => {
                let (a, b) = (p[0], p[1]);
                (h3_source_poly(r1, r2, r3, a) + f2.sq() / b, -pi2 * (two - a - b))
            }
            Wang::H4Direct => {
                let (b, g) = (p[0], p[1]);
                let d = S::cst(100.0) * r3 * r4.powr(3, 1) / g + f4.sq() / b;
                let e = b + g + S::cst(9.0) * S::cst(2.0).sqrt() * (r2 * r3).sqrt() - two * pi2;
                (d, e)
            }
            Wang::H4Poly | Wang::H4Frac => {
                let (a, b, g) = (p[0], p[1], p[2]);
                (h4_source(r1, r2, r3, r4, f3, a, b, g), (a + b + g - two) * pi2)
            }
        }
    }
}

/// `7⁷ R₁¹⁰ / (2¹⁶ β⁷)`: the Young bound on the cubic term of the `u_x`
/// energy equation.
pub(crate) fn h1_source<S: Scalar>(r1: S, beta: S) -> S {
    S::ratio(823_543, 65_536) * r1.powr(10, 1) / beta.powr(7, 1)
}

/// `(5⁴3³/2⁴) R₂⁴ R₁² / β³`.
pub(crate) fn h2_source_poly<S: Scalar>(r1: S, r2: S, beta: S) -> S {
    S::ratio(16_875, 16) * r2.powr(4, 1) * r1.sq() / beta.powr(3, 1)
}

/// `(3·5^{13/3}/2^{28/3}) R₂^{14/3} / β^{5/3}`.
pub(crate) fn h2_source_frac<S: Scalar>(r2: S, beta: S) -> S {
    S::cst(3.0) * S::cst(5.0).powr(13, 3) / S::cst(2.0).powr(28, 3) * r2.powr(14, 3) / beta.powr(5, 3)
}

/// `(3·7^{8/3}5^{5/3}/2⁸) R₂^{8/3} R₃² / α^{5/3}`.
pub(crate) fn h3_source_frac<S: Scalar>(r2: S, r3: S, alpha: S) -> S {
    S::cst(3.0) * S::cst(7.0).powr(8, 3) * S::cst(5.0).powr(5, 3) / S::cst(256.0) * r2.powr(8, 3) * r3.sq()
        / alpha.powr(5, 3)
}

/// `(7⁴3³/2⁴) R₁² R₂² R₃² / α³`.
pub(crate) fn h3_source_poly<S: Scalar>(r1: S, r2: S, r3: S, alpha: S) -> S {
    S::ratio(64_827, 16) * (r1 * r2 * r3).sq() / alpha.powr(3, 1)
}

/// `‖f_xxx‖²/α + 200 R₂R₃R₄²/β + (3³11⁴/2⁴) R₁²R₂²R₄²/γ³`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn h4_source<S: Scalar>(r1: S, r2: S, r3: S, r4: S, f3: S, a: S, b: S, g: S) -> S {
    f3.sq() / a + S::cst(200.0) * r2 * r3 * r4.sq() / b + S::ratio(395_307, 16) * (r1 * r2 * r4).sq() / g.powr(3, 1)
}

fn wang_method(w: Wang, x: &Inputs<Interval>, grid: &ParamGrid) -> MethodOutcome {
    let xf = x.floats();
    let a = w.a(&xf);
    let (s1, s2) = w.spaces(grid);
    let found = minimize_separable(
        grid,
        s1,
        s2,
        |p| w.bc(&xf, p),
        |q| w.de(&xf, q),
        |&(b, c), &(d, e)| wang_closed_form(a, b, c, d, e).map_or(f64::INFINITY, |r| r.0),
    );
    let failed = |params| MethodOutcome {
        label: w.label(),
        radius: None,
        s: Interval::ZERO,
        params,
        wang: None,
    };
    let Some(m) = found else {
        return failed(Vec::new());
    };
    let pt = |v: &[f64]| v.iter().map(|&t| Interval::point(t)).collect::<Vec<_>>();
    let (b, c) = w.bc(x, &pt(&m.p1));
    let (d, e) = w.de(x, &pt(&m.p2));
    let params: Vec<f64> = m.p1.iter().chain(&m.p2).copied().collect();
    let a = w.a(x);
    let certified = WangParams::new(a, b, c, d, e).and_then(|p| wang_bound(&p));
    match certified {
        Ok(wb) => MethodOutcome {
            label: w.label(),
            radius: Some(wb.f.clamp_nonneg().sqrt()),
            s: wb.s,
            params,
            wang: Some(WangCertificate {
                a,
                b,
                c,
                d,
                e,
                lambda: wb.lambda,
            }),
        },
        Err(_) => failed(params),
    }
}

/// Root method: `X` solves `x = d₀ + Σ d_k x^{p_k}`, radius `min(X/π, √(X·prev))`.
fn root_method(label: &'static str, d0: Interval, terms: Vec<PowerTerm>, prev: Interval) -> MethodOutcome {
    let radius = RootEquation::new(d0, terms)
        .and_then(|eq| solve_dominant_root(&eq))
        .ok()
        .map(|x| {
            let x = x.upper();
            (x / Interval::PI).min((x * prev.upper()).sqrt())
        });
    MethodOutcome {
        label,
        radius,
        s: Interval::ZERO,
        params: Vec::new(),
        wang: None,
    }
}

fn sqrt2() -> Interval {
    Interval::point(2.0).sqrt()
}

/// `R₂`: bound on `‖u_x‖`.
pub fn radius_r2(norms: &ForcingNorms, r1: Interval, grid: &ParamGrid) -> Result<RadiusResult> {
    let x = Inputs::new(norms, &[r1]);
    let root = root_method("root", x.f[0], vec![PowerTerm::new(x.r[0].pow_rational(5, 4), 3, 4)], x.r[0]);
    RadiusResult::pick(vec![root, wang_method(Wang::H1, &x, grid)])
}

/// `R₃`: bound on `‖u_xx‖`.
pub fn radius_r3(norms: &ForcingNorms, r: [Interval; 2], grid: &ParamGrid) -> Result<RadiusResult> {
    let x = Inputs::new(norms, &r);
    let [r1, r2, ..] = x.r;
    let mut methods = vec![
        root_method("root_1/2", x.f[1], vec![PowerTerm::new(Interval::point(5.0) * r1.sqrt() * r2, 1, 2)], r2),
        root_method(
            "root_1/4",
            x.f[1],
            vec![PowerTerm::new(Interval::point(5.0) * sqrt2() / 4.0 * r2.pow_rational(7, 4), 1, 4)],
            r2,
        ),
    ];
    for w in [Wang::H2Poly, Wang::H2Frac, Wang::H2Growth] {
        methods.push(wang_method(w, &x, grid));
    }
    RadiusResult::pick(methods)
}

/// `R₄`: bound on `‖u_xxx‖`.
pub fn radius_r4(norms: &ForcingNorms, r: [Interval; 3], grid: &ParamGrid) -> Result<RadiusResult> {
    let x = Inputs::new(norms, &r);
    let [r1, r2, r3, ..] = x.r;
    let mut methods = vec![
        root_method(
            "root_1/4",
            x.f[2],
            vec![PowerTerm::new(Interval::point(3.5) * r2 * r3.pow_rational(3, 4), 1, 4)],
            r3,
        ),
        root_method("root_1/2", x.f[2], vec![PowerTerm::new(Interval::point(7.0) * (r1 * r2 * r3).sqrt(), 1, 2)], r3),
    ];
    for w in [Wang::H3PolyPoly, Wang::H3PolyFrac, Wang::H3FracPoly, Wang::H3FracFrac] {
        methods.push(wang_method(w, &x, grid));
    }
    RadiusResult::pick(methods)
}

/// `R₅`: bound on `‖u_xxxx‖`.
pub fn radius_r5(norms: &ForcingNorms, r: [Interval; 4], grid: &ParamGrid) -> Result<RadiusResult> {
    let x = Inputs::new(norms, &r);
    let [r1, r2, r3, r4, _] = x.r;
    let d0 = x.f[3] + Interval::point(10.0) * sqrt2() * (r2 * r3).sqrt() * r4;
    let root = root_method(
        "root",
        d0,
        vec![PowerTerm::new(Interval::point(11.0) * (r1 * r2 * r4).sqrt(), 1, 2)],
        r4,
    );
    let mut methods = vec![root];
    for w in [Wang::H4Direct, Wang::H4Poly, Wang::H4Frac] {
        methods.push(wang_method(w, &x, grid));
    }
    RadiusResult::pick(methods)
}

/// All radii for the forcing.
pub fn trapping_radii(f: &Forcing, mode: NormMode, grid: &ParamGrid) -> Result<TrappingRadii> {
    let norms = ForcingNorms::of(f, mode);
    radii_from_norms(&norms, grid)
}

pub fn radii_from_norms(norms: &ForcingNorms, grid: &ParamGrid) -> Result<TrappingRadii> {
    let r1 = radius_r1(norms);
    let d1 = RadiusResult {
        radius: r1,
        s: Interval::ZERO,
        method: "energy",
        methods: vec![MethodOutcome {
            label: "energy",
            radius: Some(r1),
            s: Interval::ZERO,
            params: Vec::new(),
            wang: None,
        }],
    };
    let d2 = radius_r2(norms, r1, grid)?;
    let d3 = radius_r3(norms, [r1, d2.radius], grid)?;
    let d4 = radius_r4(norms, [r1, d2.radius, d3.radius], grid)?;
    let d5 = radius_r5(norms, [r1, d2.radius, d3.radius, d4.radius], grid)?;
    let details = vec![d1, d2, d3, d4, d5];
    Ok(TrappingRadii {
        norms: *norms,
        r: std::array::from_fn(|j| details[j].radius),
        s: std::array::from_fn(|j| details[j].s),
        method_used: std::array::from_fn(|j| details[j].method),
        details,
    })
}
