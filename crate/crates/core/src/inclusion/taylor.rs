//! Taylor–Lohner step for the leading coordinates.
//!
//! With the tail frozen at `c₂`, the leading ODE is quadratic in `y = β₁`:
//! `y' = Ly + c + T(y, y) + Σ_j ℓ_j s_j(t)`, where `T` holds the triad
//! coefficients `P₁Q(Be_l, Be_j)` among leading modes and `L` includes the
//! linear coupling through `B₂c₂`. Taylor coefficients follow exactly from
//! the Cauchy product `N_{[k]} = Σ_{i+j=k} T(y_{[i]}, y_{[j]})`, and the same
//! recurrence differentiated in the initial value gives the Jacobian of the
//! Taylor map. Working with `T` instead of nodal values keeps interval
//! evaluation over a set from coupling modes that do not interact.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::interval::{verified_inverse, Interval, IntervalMatrix, IntervalVector};

use super::enclosure::{split, Enclosure};
use super::{bilinear, quadratic, LohnerSet};
use super::BurgersField;

/// Zero selection of the leading inclusion, with the tail frozen at `c₂`
/// and the centre `μ` of the tail-coupling range moved into the constant.
#[derive(Debug, Clone)]
pub struct LeadingOde<'a> {
    lin: IntervalMatrix,
    cst: IntervalVector,
    tensor: Vec<IntervalMatrix>,
    loads: Vec<IntervalVector>,
    forcing: &'a Forcing,
    /// `rad(Δ)`: what the frozen tail and `μ` leave unaccounted for.
    radius: Vec<f64>,
}

impl<'a> LeadingOde<'a> {
    pub fn new(field: &'a BurgersField, enc: &Enclosure) -> Self {
        let (n, l) = (field.dim(), field.leading);
        let s = split(field, &enc.lin, &enc.w);
        let mu: Vec<f64> = s.delta.iter().map(|d| d.mid()).collect();
        let radius = s
            .delta
            .iter()
            .zip(&mu)
            .map(|(d, &m)| (*d - Interval::point(m)).mag())
            .collect();
        let p1 = field.p.block(0, l, 0, n);
        let two = Interval::point(2.0);
        let coupling: Vec<IntervalVector> = (0..l)
            .map(|j| p1.matvec(&bilinear(&s.ac, &field.b.column(j), field.k).scale(two)))
            .collect();
        let lin = field
            .a
            .block(0, l, 0, l)
            .add(&IntervalMatrix::from_fn(l, l, |i, j| coupling[j][i]));
        let cst = s
            .cst
            .add(&p1.matvec(&quadratic(&s.ac, field.k)))
            .add(&IntervalVector::from_points(&mu));
        LeadingOde {
            lin,
            cst,
            tensor: field.tensor.clone(),
            loads: field
                .loads
                .iter()
                .map(|v| IntervalVector::new(v.as_slice()[..l].to_vec()))
                .collect(),
            forcing: &field.forcing,
            radius,
        }
    }

    /// `y' = lin·y + cst + T(y, y) + Σ_j loads[j] s_j(t)` with
    /// `T(x, y)_i = Σ_{l,j} tensor[i][(l, j)] x_l y_j`; each `tensor[i]`
    /// must be symmetric.
    pub fn from_parts(
        lin: IntervalMatrix,
        cst: IntervalVector,
        tensor: Vec<IntervalMatrix>,
        loads: Vec<IntervalVector>,
        forcing: &'a Forcing,
    ) -> Self {
        let l = lin.rows();
        LeadingOde {
            lin,
            cst,
            tensor,
            loads,
            forcing,
            radius: vec![0.0; l],
        }
    }

    pub fn dim(&self) -> usize {
        self.lin.rows()
    }

    /// Upper bound on the half-width of the tail coupling in coordinate `l`.
    pub fn perturbation_radius(&self, l: usize) -> f64 {
        self.radius[l]
    }

    /// `T(x, y)`.
    fn bilin(&self, x: &IntervalVector, y: &IntervalVector) -> IntervalVector {
        self.tensor.iter().map(|t| t.matvec(y).dot(x)).collect()
    }

    /// `T(y, y)`, squaring diagonal terms for a tighter range.
    fn quad(&self, y: &IntervalVector) -> IntervalVector {
        let n = y.len();
        self.tensor
            .iter()
            .map(|t| {
                let mut acc = Interval::ZERO;
                for l in 0..n {
                    acc += t[(l, l)] * y[l].sqr();
                    for j in l + 1..n {
                        acc += Interval::point(2.0) * t[(l, j)] * (y[l] * y[j]);
                    }
                }
                acc
            })
            .collect()
    }

    /// `2T(x, M_{·c})` column by column.
    fn dt_times(&self, x: &IntervalVector, m: &IntervalMatrix) -> IntervalMatrix {
        let two = Interval::point(2.0);
        let cols: Vec<IntervalVector> = (0..m.cols())
            .map(|c| self.bilin(x, &m.column(c)).scale(two))
            .collect();
        IntervalMatrix::from_fn(self.dim(), m.cols(), |i, j| cols[j][i])
    }

    /// Float right-hand side, for reference integration in tests.
    pub fn eval_f64(&self, y: &[f64], t: f64) -> Vec<f64> {
        let yv = IntervalVector::from_points(y);
        let mut out = self
            .lin
            .matvec(&yv)
            .add(&IntervalVector::from_points(&self.cst.mid()))
            .add(&self.quad(&yv))
            .mid();
        for (j, load) in self.loads.iter().enumerate() {
            let s = self.forcing.temporal_value(j, t);
            for (o, l) in out.iter_mut().zip(load.iter()) {
                *o += l.mid() * s;
            }
        }
        out
    }

    /// `∂g/∂y = lin + 2T(y, ·)` over `y ∈ w1`.
    pub(crate) fn jacobian(&self, w1: &IntervalVector) -> IntervalMatrix {
        self.lin.add(&self.dt_times(w1, &IntervalMatrix::identity(self.dim())))
    }

    fn forcing_series(&self, t: Interval, order: usize) -> Vec<IntervalVector> {
        let mut out = vec![IntervalVector::zeros(self.dim()); order + 1];
        for (j, load) in self.loads.iter().enumerate() {
            let s = self.forcing.temporal_taylor(j, t, order);
            for (o, sj) in out.iter_mut().zip(s) {
                *o = o.add(&load.scale(sj));
            }
        }
        out
    }

    /// Normalised Taylor coefficients `y_{[0..=order]}` about `y₀` at `t`.
    /// With `var`, also `∂y_{[i]}/∂y₀`.
    fn series(
        &self,
        y0: &IntervalVector,
        t: Interval,
        order: usize,
        var: bool,
    ) -> (Vec<IntervalVector>, Vec<IntervalMatrix>) {
        let l = self.dim();
        let hs = self.forcing_series(t, order.saturating_sub(1));
        let mut y = vec![y0.clone()];
        let mut v = Vec::new();
        if var {
            v.push(IntervalMatrix::identity(l));
        }
        let two = Interval::point(2.0);
        for k in 0..order {
            // N_{[k]} by the Cauchy product, using symmetry of T
            let mut nk = IntervalVector::zeros(l);
            for i in 0..=k / 2 {
                let j = k - i;
                let term = if i == j {
                    self.quad(&y[i])
                } else {
                    self.bilin(&y[i], &y[j]).scale(two)
                };
                nk = nk.add(&term);
            }
            let mut rhs = self.lin.matvec(&y[k]).add(&nk).add(&hs[k]);
            if k == 0 {
                rhs = rhs.add(&self.cst);
            }
            let inv = Interval::ONE / Interval::point((k + 1) as f64);
            y.push(rhs.scale(inv));

            if var {
                // ∂N_{[k]} = Σ_{i+j=k} 2T(y_{[i]}, ∂y_{[j]})
                let mut dn = IntervalMatrix::zeros(l, l);
                for i in 0..=k {
                    dn = dn.add(&self.dt_times(&y[i], &v[k - i]));
                }
                v.push(self.lin.matmul(&v[k]).add(&dn).scale(inv));
            }
        }
        (y, v)
    }
}

fn horner_vec(c: &[IntervalVector], h: Interval) -> IntervalVector {
    let mut acc = c.last().unwrap().clone();
    for ci in c.iter().rev().skip(1) {
        acc = acc.scale(h).add(ci);
    }
    acc
}

fn horner_mat(c: &[IntervalMatrix], h: Interval) -> IntervalMatrix {
    let mut acc = c.last().unwrap().clone();
    for ci in c.iter().rev().skip(1) {
        acc = acc.scale(h).add(ci);
    }
    acc
}

/// Columns ordered by decreasing `‖col_j‖·rad(r_j)`, then QR: the
/// orthogonal factor is the new basis.
fn lohner_basis(jb: &DMatrix<f64>, r: &IntervalVector) -> DMatrix<f64> {
    let n = jb.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    let weight: Vec<f64> = (0..n).map(|j| jb.column(j).norm() * r[j].rad().max(1e-300)).collect();
    order.sort_by(|&a, &b| weight[b].total_cmp(&weight[a]));
    let mut perm = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        perm.set_column(dst, &jb.column(src));
    }
    perm.qr().q()
}

/// One Taylor step of the leading ODE for every initial value in `set`.
///
/// `w1` must contain every solution over the step (rough enclosure of the
/// leading inclusion). With `T` the degree-`order` Taylor map,
/// `φ(x) ∈ T(x̄) + DT(X)(x - x̄) + h^{order+1} y_{[order+1]}(W)`.
pub fn taylor_lohner_step(
    ode: &LeadingOde,
    set: &LohnerSet,
    w1: &IntervalVector,
    t0: Interval,
    step: Interval,
    order: usize,
) -> Result<LohnerSet> {
    let fail = |reason: &str| Error::StepFailure {
        step: 0,
        reason: reason.to_string(),
    };
    if order == 0 {
        return Err(fail("Taylor order must be positive"));
    }
    let window = Interval::hull_of(t0.lo(), (t0 + step).hi());
    let xbar = IntervalVector::from_points(&set.center);
    let (ybar, _) = ode.series(&xbar, t0, order, false);
    let (yw, _) = ode.series(w1, window, order + 1, false);
    let rem = yw[order + 1].scale(step.powi(order as i32 + 1));
    let (_, v) = ode.series(&set.hull(), t0, order, true);

    let y0 = horner_vec(&ybar, step).add(&rem);
    let dt = horner_mat(&v, step);
    let jb = dt.matmul(&IntervalMatrix::from_dmatrix(&set.basis));
    let center = y0.mid();
    let q = lohner_basis(&jb.mid(), &set.coeff);
    let qinv = verified_inverse(&IntervalMatrix::from_dmatrix(&q)).map_err(|e| fail(&e.to_string()))?;
    let shift = y0.sub(&IntervalVector::from_points(&center)).add(&dt.matvec(&set.remainder));
    let coeff = qinv.matmul(&jb).matvec(&set.coeff).add(&qinv.matvec(&shift));
    if !coeff.is_finite() {
        return Err(fail("Lohner coefficients are not finite"));
    }
    Ok(LohnerSet {
        remainder: IntervalVector::zeros(center.len()),
        center,
        basis: q,
        coeff,
    })
}
