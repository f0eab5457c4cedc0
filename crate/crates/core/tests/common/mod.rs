#![allow(dead_code)]

use femcert::bounds::{PowerTerm, RootEquation};
use femcert::forcing::{Forcing, ForcingTerm, Temporal};
use femcert::radii::{MethodOutcome, TrappingRadii};
use femcert::Interval;

pub fn pt(x: f64) -> Interval {
    Interval::point(x)
}

/// `8 (sin 3πx + sin 4πx)(1 + sin 2πt)`.
pub fn two_mode_forcing() -> Forcing {
    let s = Temporal {
        c0: pt(1.0),
        c1: pt(1.0),
        phase: pt(0.0),
    };
    Forcing::new(
        pt(1.0),
        vec![
            ForcingTerm { amplitude: pt(8.0), spatial_mode: 3, temporal: s },
            ForcingTerm { amplitude: pt(8.0), spatial_mode: 4, temporal: s },
        ],
    )
}

/// `a sin(πx) sin(2πt)`.
pub fn single_mode_forcing(a: f64) -> Forcing {
    let s = Temporal {
        c0: pt(0.0),
        c1: pt(1.0),
        phase: pt(0.0),
    };
    Forcing::new(pt(1.0), vec![ForcingTerm { amplitude: pt(a), spatial_mode: 1, temporal: s }])
}

/// Target radii for the two-mode forcing.
pub const TARGET_RADII: [f64; 5] = [2.29264, 13.9504, 135.816, 1946.47, 130542.0];

/// Classical RK4 on `y' = f(t, y)` with `n` equal steps.
pub fn rk4(f: impl Fn(f64, &[f64]) -> Vec<f64>, y0: &[f64], t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let h = (t1 - t0) / n as f64;
    let mut y = y0.to_vec();
    let axpy = |y: &[f64], k: &[f64], s: f64| y.iter().zip(k).map(|(a, b)| a + s * b).collect::<Vec<_>>();
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &axpy(&y, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &axpy(&y, &k2, h / 2.0));
        let k4 = f(t + h, &axpy(&y, &k3, h));
        for j in 0..y.len() {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

/// Scalar RK4 with step doubling, keeping the local error below `tol`.
/// Returns the value at `t1` and the largest value seen on the way.
pub fn adaptive_rk(f: impl Fn(f64) -> f64, z0: f64, t1: f64, tol: f64) -> (f64, f64) {
    let step = |z: f64, h: f64| {
        let k1 = f(z);
        let k2 = f(z + h / 2.0 * k1);
        let k3 = f(z + h / 2.0 * k2);
        let k4 = f(z + h * k3);
        z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let (mut t, mut z, mut h, mut peak) = (0.0, z0, t1 / 64.0, z0);
    while t < t1 {
        h = h.min(t1 - t);
        let full = step(z, h);
        let half = step(step(z, h / 2.0), h / 2.0);
        if (full - half).abs() <= tol * (1.0 + half.abs()) || h < 1e-12 {
            t += h;
            z = half + (half - full) / 15.0;
            peak = peak.max(z);
            h *= 1.5;
        } else {
            h /= 2.0;
        }
    }
    (z, peak)
}

/// Root of a continuous `g` with `g(lo) > 0 > g(hi)` by plain bisection.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Root equation of each root method, written out independently of the
/// library, together with the radius it feeds (`prev`).
pub fn root_equation(order: usize, label: &str, f: &[Interval; 5], r: &[Interval; 5]) -> (RootEquation, Interval) {
    let s2 = pt(2.0).sqrt();
    let (d0, coeff, p, q, prev) = match (order, label) {
        (1, "root") => (f[0], r[0].pow_rational(5, 4), 3, 4, r[0]),
        (2, "root_1/2") => (f[1], pt(5.0) * r[0].sqrt() * r[1], 1, 2, r[1]),
        (2, "root_1/4") => (f[1], pt(5.0) * s2 / pt(4.0) * r[1].pow_rational(7, 4), 1, 4, r[1]),
        (3, "root_1/4") => (f[2], pt(3.5) * r[1] * r[2].pow_rational(3, 4), 1, 4, r[2]),
        (3, "root_1/2") => (f[2], pt(7.0) * (r[0] * r[1] * r[2]).sqrt(), 1, 2, r[2]),
        (4, "root") => (
            f[3] + pt(10.0) * s2 * (r[1] * r[2]).sqrt() * r[3],
            pt(11.0) * (r[0] * r[1] * r[3]).sqrt(),
            1,
            2,
            r[3],
        ),
        other => panic!("unknown root method {other:?}"),
    };
    (RootEquation::new(d0, vec![PowerTerm::new(coeff, p, q)]).unwrap(), prev)
}

/// A radius `ρ` of a root method is valid iff the root `X` satisfies
/// `X ≤ max(πρ, ρ²/prev)`; above the root `h(x) < x`, so it suffices that
/// `h(x) ≤ x` at that point.
pub fn root_certificate_holds(eq: &RootEquation, prev: Interval, rho: f64) -> bool {
    let rho = pt(rho);
    let x = (Interval::PI * rho).max(if prev.lo() > 0.0 { rho.sqr() / prev } else { Interval::ZERO });
    let x = pt(x.lo());
    eq.eval(x).hi() <= x.lo()
}

/// `ρ² ≥ D/λ + ((E+λ)/C)(A + B/λ)` with `λ + E ≥ 0`.
pub fn wang_certificate_holds(m: &MethodOutcome, rho: f64) -> bool {
    let w = m.wang.expect("Wang methods carry their constants");
    let l = pt(w.lambda);
    let f = w.d / l + ((w.e + l) / w.c) * (w.a + w.b / l);
    w.lambda > 0.0 && w.lambda >= -w.e.lo() && pt(rho).sqr().hi() >= f.hi()
}

/// Every method radius that was returned, rechecked from its own
/// equation; returns the failures.
pub fn certificate_failures(r: &TrappingRadii) -> Vec<String> {
    let mut bad = Vec::new();
    let upper = r.r.map(|x| x.upper());
    let norms = r.norms.0.map(|x| x.upper());
    for (j, d) in r.details.iter().enumerate().skip(1) {
        for m in d.methods.iter() {
            let Some(rad) = m.radius else { continue };
            if d.radius.hi() > rad.hi() {
                bad.push(format!("R{} = {} above {} = {rad}", j + 1, d.radius, m.label));
            }
            let ok = if m.label.starts_with("root") {
                let (eq, prev) = root_equation(j, m.label, &norms, &upper);
                root_certificate_holds(&eq, prev, rad.hi())
            } else {
                wang_certificate_holds(m, rad.hi())
            };
            if !ok {
                bad.push(format!("R{} via {} = {rad} fails its certificate", j + 1, m.label));
            }
        }
    }
    let r1 = norms[0] / Interval::PI.sqr();
    if r.r[0].hi() < r1.hi() {
        bad.push(format!("R1 = {} below ‖f‖/π²", r.r[0]));
    }
    bad
}

pub fn check_certificates(r: &TrappingRadii) {
    let bad = certificate_failures(r);
    assert!(bad.is_empty(), "{bad:?}");
}
