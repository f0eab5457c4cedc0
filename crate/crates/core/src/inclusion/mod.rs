//! One time step of the differential inclusion
//!
//! ```text
//! β' ∈ Aβ + P N(Bβ) + P F(t) + G,    P = B⁻¹M⁻¹,    G = Π_l [-ε_l, ε_l]
//! ```
//!
//! The first `leading` coordinates (the slow modes) are carried as a Lohner
//! set and advanced by a Taylor method applied to one selection of the
//! inclusion. The inclusion correction then widens the result so that it
//! covers every selection. Each remaining coordinate is a single interval,
//! advanced by the closed-form bound for a strongly damped scalar inclusion.

mod correction;
mod dissipative;
mod enclosure;
mod taylor;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fem::{DiagonalBasis, Mesh, ResidualWidths};
use crate::forcing::Forcing;
use crate::interval::{Interval, IntervalMatrix, IntervalVector};

pub use correction::{correction_matrix, inclusion_correction, integral_bound, lognorm_bound};
pub use dissipative::{dissipative_step, DissipativeBounds};
pub use enclosure::{enclosure_image, rough_enclosure, Enclosure, Linearization};
pub use taylor::{taylor_lohner_step, LeadingOde};

/// `{center + basis·r + q : r ∈ coeff, q ∈ remainder}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LohnerSet {
    pub center: Vec<f64>,
    pub basis: DMatrix<f64>,
    pub coeff: IntervalVector,
    pub remainder: IntervalVector,
}

impl LohnerSet {
    /// The box itself, with the identity basis.
    pub fn from_box(b: &IntervalVector) -> Self {
        let center = b.mid();
        let coeff = b.iter().zip(&center).map(|(&x, &c)| x - Interval::point(c)).collect();
        LohnerSet {
            basis: DMatrix::identity(b.len(), b.len()),
            coeff,
            remainder: IntervalVector::zeros(b.len()),
            center,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Interval hull.
    pub fn hull(&self) -> IntervalVector {
        let b = IntervalMatrix::from_dmatrix(&self.basis);
        IntervalVector::from_points(&self.center)
            .add(&b.matvec(&self.coeff))
            .add(&self.remainder)
    }
}

/// Leading Lohner set and one interval per tail coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionSet {
    pub lead: LohnerSet,
    pub tail: IntervalVector,
}

impl InclusionSet {
    pub fn from_box(b: &IntervalVector, leading: usize) -> Self {
        let v = b.as_slice();
        InclusionSet {
            lead: LohnerSet::from_box(&IntervalVector::new(v[..leading].to_vec())),
            tail: IntervalVector::new(v[leading..].to_vec()),
        }
    }

    pub fn leading(&self) -> usize {
        self.lead.dim()
    }

    /// Box hull in `β` coordinates.
    pub fn hull(&self) -> IntervalVector {
        let mut v = self.lead.hull().into_vec();
        v.extend(self.tail.iter().copied());
        IntervalVector::new(v)
    }
}

/// `Q(x, y)` with `Q(α, α) = N(α)`:
/// `Q_m = k[½(x_m(y_{m-1}-y_{m+1}) + y_m(x_{m-1}-x_{m+1})) + x_{m-1}y_{m-1} - x_{m+1}y_{m+1}]`.
pub(crate) fn bilinear(x: &IntervalVector, y: &IntervalVector, k: usize) -> IntervalVector {
    let n = x.len();
    let at = |v: &IntervalVector, i: isize| {
        if i < 0 || i as usize >= n {
            Interval::ZERO
        } else {
            v[i as usize]
        }
    };
    let kk = Interval::point(k as f64);
    (0..n as isize)
        .map(|m| {
            let (xl, xc, xr) = (at(x, m - 1), at(x, m), at(x, m + 1));
            let (yl, yc, yr) = (at(y, m - 1), at(y, m), at(y, m + 1));
            kk * ((xc * (yl - yr) + yc * (xl - xr)) * 0.5 + xl * yl - xr * yr)
        })
        .collect()
}

/// `N(α) = Q(α, α)` written so each entry depends on its neighbours once
/// (tighter than `bilinear(α, α)`).
pub(crate) fn quadratic(x: &IntervalVector, k: usize) -> IntervalVector {
    let n = x.len();
    let at = |i: isize| {
        if i < 0 || i as usize >= n {
            Interval::ZERO
        } else {
            x[i as usize]
        }
    };
    let kk = Interval::point(k as f64);
    (0..n as isize)
        .map(|m| {
            let (l, c, r) = (at(m - 1), at(m), at(m + 1));
            kk * (c * (l - r) + l.sqr() - r.sqr())
        })
        .collect()
}

/// Triad coefficients of the quadratic term among the leading modes.
fn lead_tensor(b: &IntervalMatrix, p: &IntervalMatrix, k: usize, leading: usize) -> Vec<IntervalMatrix> {
    let n = b.rows();
    let p1 = p.block(0, leading, 0, n);
    let cols: Vec<IntervalVector> = (0..leading).map(|j| b.column(j)).collect();
    let mut out = vec![IntervalMatrix::zeros(leading, leading); leading];
    for l in 0..leading {
        for j in l..leading {
            let v = p1.matvec(&bilinear(&cols[l], &cols[j], k));
            for (i, t) in out.iter_mut().enumerate() {
                t[(l, j)] = v[i];
                t[(j, l)] = v[i];
            }
        }
    }
    out
}

/// The right-hand side in diagonal coordinates, with everything needed to
/// split it into leading and tail parts.
#[derive(Debug, Clone)]
pub struct BurgersField {
    a: IntervalMatrix,
    b: IntervalMatrix,
    p: IntervalMatrix,
    /// `P·(6/h)(a_j sin(k_jπx), v^m)`: the forcing is `Σ_j loads[j] s_j(t)`.
    loads: Vec<IntervalVector>,
    forcing: Forcing,
    k: usize,
    leading: usize,
    a_mid: DMatrix<f64>,
    b_mid: DMatrix<f64>,
    p_mid: DMatrix<f64>,
    /// `tensor[i][(l, j)] = (P₁ Q(B e_l, B e_j))_i` over leading `i, l, j`.
    tensor: Vec<IntervalMatrix>,
}

impl BurgersField {
    pub fn new(basis: &DiagonalBasis, mesh: &Mesh, forcing: &Forcing, leading: usize) -> Result<Self> {
        let six_over_h = Interval::point(6.0 * mesh.k() as f64);
        let loads = (0..forcing.terms().len())
            .map(|j| {
                basis
                    .binv_minv()
                    .matvec(&forcing.term_load(j, mesh.k(), mesh.h()).scale(six_over_h))
            })
            .collect();
        Self::from_parts(
            basis.a().clone(),
            basis.b_interval().clone(),
            basis.binv_minv().clone(),
            loads,
            forcing.clone(),
            mesh.k(),
            leading,
        )
    }

    /// Field `Aβ + P Q(Bβ, Bβ) + Σ_j loads[j] s_j(t)` with the quadratic
    /// form of a mesh with `k` cells. Tail diagonal entries must be negative.
    pub fn from_parts(
        a: IntervalMatrix,
        b: IntervalMatrix,
        p: IntervalMatrix,
        loads: Vec<IntervalVector>,
        forcing: Forcing,
        k: usize,
        leading: usize,
    ) -> Result<Self> {
        let n = a.rows();
        if leading > n {
            return Err(Error::Config(format!("leading_count {leading} exceeds dimension {n}")));
        }
        if let Some(l) = (leading..n).find(|&l| a[(l, l)].hi() >= 0.0) {
            return Err(Error::Config(format!("tail coordinate {l} is not dissipative: A_ll = {}", a[(l, l)])));
        }
        let tensor = lead_tensor(&b, &p, k, leading);
        Ok(BurgersField {
            tensor,
            a_mid: a.mid(),
            b_mid: b.mid(),
            p_mid: p.mid(),
            a,
            b,
            p,
            loads,
            forcing,
            k,
            leading,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn leading(&self) -> usize {
        self.leading
    }

    pub fn a(&self) -> &IntervalMatrix {
        &self.a
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    /// Range of `P F(t)` over the window.
    pub fn forcing_range(&self, window: Interval) -> IntervalVector {
        let mut out = IntervalVector::zeros(self.dim());
        for (j, load) in self.loads.iter().enumerate() {
            out = out.add(&load.scale(self.forcing.temporal_range(j, Some(window))));
        }
        out
    }

    /// Enclosure of the field over a box of `β` and a time window.
    pub fn eval(&self, beta: &IntervalVector, window: Interval) -> IntervalVector {
        let alpha = self.b.matvec(beta);
        self.a
            .matvec(beta)
            .add(&self.p.matvec(&quadratic(&alpha, self.k)))
            .add(&self.forcing_range(window))
    }

    /// Float field, for reference integration only.
    pub fn eval_f64(&self, beta: &[f64], t: f64) -> Vec<f64> {
        let bv = nalgebra::DVector::from_column_slice(beta);
        let alpha = &self.b_mid * &bv;
        let n = crate::fem::nonlinear_term_f64(alpha.as_slice(), self.k);
        let mut out = &self.a_mid * &bv + &self.p_mid * nalgebra::DVector::from_vec(n);
        for (j, load) in self.loads.iter().enumerate() {
            let s = self.forcing.temporal_value(j, t);
            for (o, l) in out.iter_mut().zip(load.iter()) {
                *o += l.mid() * s;
            }
        }
        out.as_slice().to_vec()
    }
}

/// Field and residual widths for one step.
#[derive(Debug, Clone, Copy)]
pub struct InclusionProblem<'a> {
    pub field: &'a BurgersField,
    pub widths: &'a ResidualWidths,
}

impl InclusionProblem<'_> {
    /// `[-ε_l, ε_l]` for coordinate `l`.
    fn g(&self, l: usize) -> Interval {
        Interval::symmetric(self.widths.eps[l].hi())
    }
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub set: InclusionSet,
    /// Box containing every solution over the whole step.
    pub enclosure: IntervalVector,
    /// Candidates tried before the enclosure validated.
    pub attempts: usize,
    /// Inclusion correction added to the leading coordinates.
    pub correction: Vec<f64>,
}

/// Advances every solution starting in `set` at time `t0` by `step`.
pub fn inclusion_step(
    prob: &InclusionProblem,
    set: &InclusionSet,
    t0: Interval,
    step: Interval,
    order: usize,
) -> Result<StepOutput> {
    let field = prob.field;
    let lead_n = field.leading;
    let window = Interval::hull_of(t0.lo(), (t0 + step).hi());
    let enc = rough_enclosure(prob, &set.lead, &set.tail, window, step)?;
    let ode = LeadingOde::new(field, &enc);
    let w1 = IntervalVector::new(enc.w.as_slice()[..lead_n].to_vec());
    let mut lead = taylor_lohner_step(&ode, &set.lead, &w1, t0, step, order)?;
    let c: Vec<f64> = (0..lead_n)
        .map(|l| crate::interval::round::add_up(prob.widths.eps[l].hi(), ode.perturbation_radius(l)))
        .collect();
    let d = inclusion_correction(&ode, &w1, &c, step)?;
    lead.remainder = lead
        .remainder
        .iter()
        .zip(&d)
        .map(|(&q, &dj)| q + Interval::symmetric(dj))
        .collect();
    let sources = enclosure::tail_sources(prob, &enc, window);
    let tail = (lead_n..field.dim())
        .map(|l| dissipative_step(field.a[(l, l)], sources.n[l - lead_n], set.tail[l - lead_n], step))
        .collect::<Result<IntervalVector>>()?;
    let out = InclusionSet { lead, tail };
    if !out.hull().is_finite() {
        return Err(Error::StepFailure {
            step: 0,
            reason: "set is no longer finite".into(),
        });
    }
    Ok(StepOutput {
        set: out,
        enclosure: enc.w,
        attempts: enc.attempts,
        correction: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_matches_quadratic() {
        let x: IntervalVector = [0.3, -1.2, 0.7, 2.0].iter().map(|&v| Interval::point(v)).collect();
        let q = quadratic(&x, 5);
        let b = bilinear(&x, &x, 5);
        for i in 0..4 {
            assert!((q[i].mid() - b[i].mid()).abs() < 1e-13);
        }
        let f = crate::fem::nonlinear_term_f64(&x.mid(), 5);
        for i in 0..4 {
            assert!(q[i].contains(f[i]));
        }
    }

    #[test]
    fn bilinear_polarisation() {
        // N(x + y) = N(x) + 2Q(x, y) + N(y)
        let x: IntervalVector = [0.3, -1.2, 0.7].iter().map(|&v| Interval::point(v)).collect();
        let y: IntervalVector = [1.1, 0.4, -0.5].iter().map(|&v| Interval::point(v)).collect();
        let lhs = quadratic(&x.add(&y), 4);
        let rhs = quadratic(&x, 4)
            .add(&bilinear(&x, &y, 4).scale(Interval::point(2.0)))
            .add(&quadratic(&y, 4));
        for i in 0..3 {
            assert!((lhs[i].mid() - rhs[i].mid()).abs() < 1e-12);
        }
    }
}
