//! Widening that turns the zero-selection ODE result into an enclosure of
//! every solution of the inclusion.
//!
//! If `x' = g(x) + δ(t)` with `|δ_j| ≤ C_j` and `y' = g(y)` start together,
//! and both stay in `W`, then `|x - y|' ≤ J|x - y| + C` componentwise, where
//! `J_ii = sup ∂g_i/∂x_i` and `J_ij = sup |∂g_i/∂x_j|` over `W`. Since `J`
//! is Metzler, `|x(h) - y(h)| ≤ ∫₀ʰ e^{Jτ}C dτ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::interval::{round, Interval, IntervalMatrix, IntervalVector};

use super::LeadingOde;

const SERIES_TERMS: usize = 12;

/// `J` over `w1`, rounded up.
pub fn correction_matrix(ode: &LeadingOde, w1: &IntervalVector) -> DMatrix<f64> {
    let jac = ode.jacobian(w1);
    let n = jac.rows();
    DMatrix::from_fn(n, n, |i, j| if i == j { jac[(i, j)].hi() } else { jac[(i, j)].mag() })
}

/// `|∫₀ʰ e^{Jτ}C dτ|` from `Σ_{m≤12} J^m h^{m+1}/(m+1)! C` plus the bound
/// `‖C‖ h a¹³/(14!(1 - a/15))`, `a = ‖J‖∞h`, on the rest of the series.
pub fn integral_bound(j: &DMatrix<f64>, c: &[f64], step: Interval) -> Result<Vec<f64>> {
    let n = c.len();
    let jm = IntervalMatrix::from_dmatrix(j);
    let h = step.upper();
    let mut term = IntervalVector::from_points(c).scale(h);
    let mut sum = term.clone();
    for m in 1..=SERIES_TERMS {
        term = jm.matvec(&term).scale(h / Interval::point((m + 1) as f64));
        sum = sum.add(&term);
    }
    let a = (Interval::point(jm.norm_inf()) * h).hi();
    if !(a < (SERIES_TERMS + 3) as f64) {
        return Err(Error::StepFailure {
            step: 0,
            reason: format!("correction series does not converge: ‖J‖h = {a}"),
        });
    }
    let c_norm = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut fact = Interval::ONE;
    for i in 2..=SERIES_TERMS + 2 {
        fact = fact * Interval::point(i as f64);
    }
    let a_iv = Interval::point(a);
    let tail = Interval::point(c_norm) * h * a_iv.powi((SERIES_TERMS + 1) as i32)
        / (fact * (Interval::ONE - a_iv / Interval::point((SERIES_TERMS + 3) as f64)));
    let tail = tail.hi();
    Ok((0..n).map(|i| round::add_up(sum[i].mag(), tail)).collect())
}

/// `‖C‖∞ (e^{μh} - 1)/μ` in every component, with the log-norm
/// `μ = max_i (J_ii + Σ_{j≠i} J_ij)` bounding `‖e^{Jτ}‖∞ ≤ e^{μτ}`.
/// Cruder than the series but valid for any `‖J‖h`.
pub fn lognorm_bound(j: &DMatrix<f64>, c: &[f64], step: Interval) -> Vec<f64> {
    let n = c.len();
    let mu = (0..n)
        .map(|i| (0..n).fold(Interval::ZERO, |acc, k| acc + Interval::point(j[(i, k)])).hi())
        .fold(f64::NEG_INFINITY, f64::max);
    let h = step.upper();
    let y = Interval::point(mu) * h;
    // (e^{μh} - 1)/μ = h·exprel(μh)
    let growth = if y.hi() <= 700.0 { (h * y.exprel()).hi() } else { f64::INFINITY };
    let c_norm = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let d = (Interval::point(c_norm) * Interval::point(growth)).hi();
    vec![d; n]
}

/// `d` for the leading coordinates, given the enclosure `w1` and widths `c`:
/// the componentwise smaller of the series and log-norm bounds. Only fails
/// when neither is finite.
pub fn inclusion_correction(ode: &LeadingOde, w1: &IntervalVector, c: &[f64], step: Interval) -> Result<Vec<f64>> {
    if c.iter().all(|&x| x == 0.0) {
        return Ok(vec![0.0; c.len()]);
    }
    let j = correction_matrix(ode, w1);
    let coarse = lognorm_bound(&j, c, step);
    let d = match integral_bound(&j, c, step) {
        Ok(series) => series.iter().zip(&coarse).map(|(a, b)| a.min(*b)).collect(),
        Err(_) if coarse.iter().all(|x| x.is_finite()) => coarse,
        Err(e) => return Err(e),
    };
    Ok(d)
}
