//! First-order rough enclosure.
//!
//! A box `W` is accepted when the bounds it implies for every solution that
//! stays in `W` over the step land strictly inside `W`. Coordinates with
//! `A_ll < 0` use the damped bound `x₀ + [0, 1 - e^{-λh}]·(N(W)/λ - x₀)`,
//! where `N` collects everything but `-λβ_l`; any other coordinate uses
//! `x₀ + [0, h]·F(W)`. A solution leaving `W` would have
//! to cross its boundary while still obeying both, which is impossible.

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};

use super::{bilinear, quadratic, BurgersField, DissipativeBounds, InclusionProblem, LohnerSet};

/// Validated enclosure and the point about which it was linearised.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    pub w: IntervalVector,
    /// `c₂`, the tail part of the linearisation point.
    pub c2: Vec<f64>,
    pub attempts: usize,
    pub(crate) lin: Linearization,
}

const INITIAL_INFLATION: f64 = 1.5;
const RETRIES: usize = 5;

/// Mean-value form of the nonlinear term about a point `c`:
/// `P N(Bβ) ∈ P N(Bc) + J(β - c) + P N(B(β - c))` with `J = P DN(Bc) B`.
///
/// Evaluating `P N(BW)` directly sums `|P||DN||B|` over a dense basis and
/// overestimates the coupling by orders of magnitude; the point matrix `J`
/// keeps the cancellations.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub c: Vec<f64>,
    bc: IntervalVector,
    pnc: IntervalVector,
    jn: IntervalMatrix,
}

impl Linearization {
    pub fn at(field: &BurgersField, c: &[f64]) -> Self {
        let bc = field.b.matvec(&IntervalVector::from_points(c));
        let two = Interval::point(2.0);
        let n = field.dim();
        let cols: Vec<IntervalVector> = (0..n)
            .map(|j| bilinear(&bc, &field.b.column(j), field.k).scale(two))
            .collect();
        let dn_b = IntervalMatrix::from_fn(n, n, |i, j| cols[j][i]);
        Linearization {
            pnc: field.p.matvec(&quadratic(&bc, field.k)),
            jn: field.p.matmul(&dn_b),
            bc,
            c: c.to_vec(),
        }
    }

    /// Range of `P N(Bβ)` over `w`.
    fn nonlinear_range(&self, field: &BurgersField, w: &IntervalVector) -> IntervalVector {
        let d = w.sub(&IntervalVector::from_points(&self.c));
        self.pnc
            .add(&self.jn.matvec(&d))
            .add(&field.p.matvec(&quadratic(&field.b.matvec(&d), field.k)))
    }
}

/// Leading field pieces with the tail frozen at `c₂`.
pub(crate) struct Split {
    /// `B₂c₂`.
    pub ac: IntervalVector,
    /// `A₁₂c₂`.
    pub cst: IntervalVector,
    /// Range of `f₁(β₁, β₂) - f₁(β₁, c₂)` over `W`.
    pub delta: IntervalVector,
}

fn sub_vec(v: &IntervalVector, r0: usize, r1: usize) -> IntervalVector {
    IntervalVector::new(v.as_slice()[r0..r1].to_vec())
}

/// With `x = B₁β₁ + B₂c₂` and `y = B₂(β₂ - c₂)`:
/// `N(x + y) - N(x) = 2Q(Bc, y) + 2Q(B₁(β₁ - c₁), y) + N(y)`, and
/// `P₁·2Q(Bc, y)` is the tail block of `J` applied to `β₂ - c₂`.
pub(crate) fn split(field: &BurgersField, lin: &Linearization, w: &IntervalVector) -> Split {
    let (n, l) = (field.dim(), field.leading);
    let c1 = IntervalVector::from_points(&lin.c[..l]);
    let c2 = IntervalVector::from_points(&lin.c[l..]);
    let a12 = field.a.block(0, l, l, n);
    let b1 = field.b.block(0, n, 0, l);
    let b2 = field.b.block(0, n, l, n);
    let p1 = field.p.block(0, l, 0, n);
    let dw1 = sub_vec(w, 0, l).sub(&c1);
    let dw2 = sub_vec(w, l, n).sub(&c2);
    let y = b2.matvec(&dw2);
    let second = bilinear(&b1.matvec(&dw1), &y, field.k)
        .scale(Interval::point(2.0))
        .add(&quadratic(&y, field.k));
    Split {
        ac: b2.matvec(&c2),
        cst: a12.matvec(&c2),
        delta: a12
            .matvec(&dw2)
            .add(&lin.jn.block(0, l, l, n).matvec(&dw2))
            .add(&p1.matvec(&second)),
    }
}

/// For each coordinate, the range over `W` of everything in the field
/// except `-λ_l β_l`, where `λ_l = -sup A_ll` when that is positive and
/// `λ_l = 0` otherwise.
fn sources(prob: &InclusionProblem, lin: &Linearization, w: &IntervalVector, window: Interval) -> Vec<Interval> {
    let field = prob.field;
    let n = field.dim();
    let nl = lin.nonlinear_range(field, w);
    let forcing = field.forcing_range(window);
    (0..n)
        .map(|l| {
            let row = field.a.row(l);
            let off: Interval = (0..n).filter(|&j| j != l).map(|j| row[j] * w[j]).sum();
            let lambda = Interval::point(rate(row[l]));
            off + (row[l] + lambda) * w[l] + nl[l] + forcing[l] + prob.g(l)
        })
        .collect()
}

fn rate(a_ll: Interval) -> f64 {
    if a_ll.hi() < 0.0 {
        -a_ll.hi()
    } else {
        0.0
    }
}

/// `N_l ⊇ Σ_{j≠l} A_lj W_j + (A_ll + λ_l)W_l + (PN(BW))_l + (PF)_l + G_l`
/// for each tail coordinate, with `λ_l = inf |A_ll|`.
pub(crate) fn tail_sources(prob: &InclusionProblem, enc: &Enclosure, window: Interval) -> DissipativeBounds {
    let l0 = prob.field.leading;
    DissipativeBounds {
        n: sources(prob, &enc.lin, &enc.w, window)[l0..].to_vec(),
    }
}

/// Damped bound over `[0, h]`: `x₀ + [0, 1 - e^{-λh}]·(N/λ - x₀)`, endpoint-wise.
fn damped_range(a_ll: Interval, n: Interval, x0: Interval, step: Interval) -> Interval {
    let lambda = Interval::point(-a_ll.hi());
    let theta = Interval::ONE - (-(lambda * step)).exp();
    let theta = Interval::hull_of(0.0, theta.hi());
    let lo = Interval::point(x0.lo()) + theta * (Interval::point(n.lo()) / lambda - Interval::point(x0.lo()));
    let hi = Interval::point(x0.hi()) + theta * (Interval::point(n.hi()) / lambda - Interval::point(x0.hi()));
    Interval::hull_of(lo.lo().min(x0.lo()), hi.hi().max(x0.hi()))
}

/// The bounds implied for solutions starting in `x0` that stay in `w`.
pub fn enclosure_image(
    prob: &InclusionProblem,
    x0: &IntervalVector,
    w: &IntervalVector,
    lin: &Linearization,
    window: Interval,
    step: Interval,
) -> IntervalVector {
    let field = prob.field;
    let span = Interval::hull_of(0.0, step.hi());
    sources(prob, lin, w, window)
        .into_iter()
        .enumerate()
        .map(|(l, src)| {
            let a = field.a[(l, l)];
            if a.hi() < 0.0 {
                damped_range(a, src, x0[l], step)
            } else {
                x0[l] + span * (src + a * w[l])
            }
        })
        .collect()
}

/// `x₀` widened on each side by `factor` times the excursion of `img`
/// beyond it, plus a margin of `factor`% of the joint width (coordinates
/// that did not move still need room once their neighbours widen) and a
/// tiny absolute margin so containment can be strict.
fn expand(x0: &IntervalVector, img: &IntervalVector, factor: f64) -> IntervalVector {
    x0.iter()
        .zip(img.iter())
        .map(|(x, y)| {
            let margin = 0.01 * factor * x.hull(*y).width() + 1e-14 * x.mag().max(1.0);
            let lo = x.lo() - factor * (x.lo() - y.lo()).max(0.0) - margin;
            let hi = x.hi() + factor * (y.hi() - x.hi()).max(0.0) + margin;
            Interval::hull_of(lo, hi)
        })
        .collect()
}

/// Box containing every solution of the inclusion over the step, for
/// initial data in `lead × tail`.
///
/// The candidate is the initial hull plus 1.5 times the first-order
/// increment on each side. A failed check doubles the factor and pushes
/// the candidate out by that factor times the amount the failed image
/// sticks out of it, up to five retries. Only increments are inflated:
/// scaling the whole hull would widen the leading coordinates far beyond
/// their motion over one step, and inflating the full increment from the
/// initial hull on every retry feeds back through the quadratic term.
pub fn rough_enclosure(
    prob: &InclusionProblem,
    lead: &LohnerSet,
    tail: &IntervalVector,
    window: Interval,
    step: Interval,
) -> Result<Enclosure> {
    let mut x0 = lead.hull().into_vec();
    x0.extend(tail.iter().copied());
    let x0 = IntervalVector::new(x0);
    let lin = Linearization::at(prob.field, &x0.mid());
    let c2 = lin.c[prob.field.leading..].to_vec();

    let mut factor = INITIAL_INFLATION;
    let first = enclosure_image(prob, &x0, &x0, &lin, window, step);
    let mut cand = expand(&x0, &first, factor);
    for attempt in 1..=RETRIES + 1 {
        if !cand.is_finite() {
            break;
        }
        let img = enclosure_image(prob, &x0, &cand, &lin, window, step);
        if cand.interior_contains(&img) {
            return Ok(Enclosure {
                w: img,
                c2,
                attempts: attempt,
                lin,
            });
        }
        factor *= 2.0;
        cand = expand(&cand, &img, factor);
    }
    Err(Error::EnclosureFailure { attempts: RETRIES + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::ResidualWidths;
    use crate::forcing::Forcing;
    
    fn scalar_field(a: f64) -> BurgersField {
        BurgersField::from_parts(
            IntervalMatrix::from_points(1, 1, &[a]),
            IntervalMatrix::from_points(1, 1, &[1.0]),
            IntervalMatrix::zeros(1, 1),
            Vec::new(),
            Forcing::zero(),
            2,
            1,
        )
        .unwrap()
    }

    fn widths(eps: &[f64]) -> ResidualWidths {
        let v: IntervalVector = eps.iter().map(|&e| Interval::point(e)).collect();
        ResidualWidths {
            eps: v.clone(),
            nonforcing: v,
        }
    }

    #[test]
    fn zero_field_gives_initial_hull() {
        let field = scalar_field(0.0);
        let w = widths(&[0.0]);
        let prob = InclusionProblem { field: &field, widths: &w };
        let x0 = IntervalVector::new(vec![Interval::hull_of(-0.5, 1.0)]);
        let enc = rough_enclosure(&prob, &LohnerSet::from_box(&x0), &IntervalVector::zeros(0), Interval::ZERO, Interval::point(0.1))
            .unwrap();
        assert!(enc.w[0].contains_interval(x0[0]));
        assert!(enc.w[0].width() - x0[0].width() < 1e-12);
    }

    #[test]
    fn hand_checked_scalar_box_validates() {
        // β' ∈ -β + [-0.1, 0.1], β₀ = 0, h = 0.1, W = [-0.02, 0.02]
        let field = scalar_field(-1.0);
        let w = widths(&[0.1]);
        let prob = InclusionProblem { field: &field, widths: &w };
        let x0 = IntervalVector::zeros(1);
        let cand = IntervalVector::new(vec![Interval::hull_of(-0.02, 0.02)]);
        let lin = Linearization::at(&field, &[0.0]);
        let img = enclosure_image(&prob, &x0, &cand, &lin, Interval::ZERO, Interval::point(0.1));
        assert!(cand.interior_contains(&img), "{img:?}");
        // any larger box validates too
        let big = IntervalVector::new(vec![Interval::hull_of(-0.05, 0.05)]);
        let img = enclosure_image(&prob, &x0, &big, &lin, Interval::ZERO, Interval::point(0.1));
        assert!(big.interior_contains(&img));
    }

    #[test]
    fn damped_range_contains_trajectories() {
        let a = Interval::point(-50.0);
        let n = Interval::hull_of(-1.0, 3.0);
        let x0 = Interval::hull_of(0.2, 0.4);
        let r = damped_range(a, n, x0, Interval::point(0.01));
        for &x in &[0.2, 0.4] {
            for &nn in &[-1.0, 3.0] {
                for i in 0..=10 {
                    let t = 0.001 * i as f64;
                    let e = (-50.0 * t).exp();
                    let v = x * e + nn / 50.0 * (1.0 - e);
                    assert!(r.contains(v), "{r:?} {v}");
                }
            }
        }
    }
}
