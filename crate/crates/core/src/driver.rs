//! One forcing period of the validated integration, the periodic orbit
//! containment check, and the nonrigorous reference integrator.
//!
//! Each step: local norm bounds over the window, residual widths, one
//! inclusion step, then tightening of the `L²`/`H¹` bounds from the new
//! coefficient sets.

use std::time::Instant;

use serde::Serialize;

use crate::config::{InitialSet, PeriodicCheck, RunConfig};
use crate::error::{Error, Result};
use crate::fem::{assemble, diagonalize, galerkin_error_bounds, residual_widths, DiagonalBasis, Mesh};
use crate::forcing::Forcing;
use crate::inclusion::{inclusion_step, BurgersField, InclusionProblem, InclusionSet};
use crate::interval::{Interval, IntervalVector};
use crate::local::{refine, step_bounds, ParamCache, StepBounds};
use crate::radii::{trapping_radii, TrappingRadii};

/// Everything fixed for a run: mesh, basis, field and forcing.
#[derive(Debug, Clone)]
pub struct Setup {
    pub forcing: Forcing,
    pub mesh: Mesh,
    pub basis: DiagonalBasis,
    pub field: BurgersField,
}

impl Setup {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let forcing = cfg.forcing.build()?;
        let mesh = Mesh::new(cfg.k)?;
        let (m, k) = assemble(&mesh);
        let basis = diagonalize(&mesh, &m, &k)?;
        let field = BurgersField::new(&basis, &mesh, &forcing, cfg.leading_count)?;
        Ok(Setup {
            forcing,
            mesh,
            basis,
            field,
        })
    }
}

/// Nonrigorous FEM solver for `M α' = Sα + N(α) + F(t)` with classical RK4.
#[derive(Debug, Clone)]
pub struct ReferenceSolver {
    k: usize,
    loads: Vec<Vec<f64>>,
    forcing: Forcing,
    /// Drop `N(α)` (for testing against the linear theory).
    pub nonlinear: bool,
}

impl ReferenceSolver {
    pub fn new(forcing: &Forcing, k: usize) -> Self {
        let h = Interval::point(1.0 / k as f64);
        let loads = (0..forcing.terms().len())
            .map(|j| forcing.term_load(j, k, h).iter().map(|x| 6.0 * k as f64 * x.mid()).collect())
            .collect();
        ReferenceSolver {
            k,
            loads,
            forcing: forcing.clone(),
            nonlinear: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.k - 1
    }

    /// `α' = M⁻¹(Sα + N(α) + F(t))`.
    pub fn rhs(&self, a: &[f64], t: f64) -> Vec<f64> {
        let n = a.len();
        let c = 6.0 * (self.k * self.k) as f64;
        let at = |i: isize| if i < 0 || i as usize >= n { 0.0 } else { a[i as usize] };
        let nl = if self.nonlinear {
            crate::fem::nonlinear_term_f64(a, self.k)
        } else {
            vec![0.0; n]
        };
        let mut r: Vec<f64> = (0..n as isize)
            .map(|m| c * (at(m - 1) - 2.0 * at(m) + at(m + 1)) + nl[m as usize])
            .collect();
        for (j, load) in self.loads.iter().enumerate() {
            let s = self.forcing.temporal_value(j, t);
            for (ri, l) in r.iter_mut().zip(load) {
                *ri += l * s;
            }
        }
        thomas_141(&mut r);
        r
    }

    /// One RK4 step.
    fn rk4(&self, a: &[f64], t: f64, dt: f64) -> Vec<f64> {
        let axpy = |x: &[f64], s: f64, y: &[f64]| x.iter().zip(y).map(|(a, b)| a + s * b).collect::<Vec<_>>();
        let k1 = self.rhs(a, t);
        let k2 = self.rhs(&axpy(a, dt / 2.0, &k1), t + dt / 2.0);
        let k3 = self.rhs(&axpy(a, dt / 2.0, &k2), t + dt / 2.0);
        let k4 = self.rhs(&axpy(a, dt, &k3), t + dt);
        (0..a.len())
            .map(|i| a[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }

    /// `α` at `t0 + i·duration/samples` for `i = 0..=samples`. Substeps keep
    /// `dt·12k² ≤ 1`, well inside the RK4 stability region.
    pub fn trajectory(&self, alpha0: &[f64], t0: f64, duration: f64, samples: usize) -> Vec<Vec<f64>> {
        let stiff = 12.0 * (self.k * self.k) as f64;
        let interval = duration / samples as f64;
        let sub = ((interval * stiff).ceil() as usize).max(1);
        let dt = interval / sub as f64;
        let mut out = vec![alpha0.to_vec()];
        let mut a = alpha0.to_vec();
        for i in 0..samples {
            let ts = t0 + i as f64 * interval;
            for s in 0..sub {
                a = self.rk4(&a, ts + s as f64 * dt, dt);
            }
            out.push(a.clone());
        }
        out
    }
}

/// Solves `tridiag(1, 4, 1) x = r` in place.
fn thomas_141(r: &mut [f64]) {
    let n = r.len();
    if n == 0 {
        return;
    }
    let mut c = vec![0.0; n];
    let mut d = 4.0;
    c[0] = 1.0 / d;
    r[0] /= d;
    for i in 1..n {
        d = 4.0 - c[i - 1];
        c[i] = 1.0 / d;
        r[i] = (r[i] - r[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        r[i] -= c[i] * r[i + 1];
    }
}

/// Reference trajectory over one period after the warm-up.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceRun {
    pub times: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

/// Runs from `α = 0` for `warmup_periods` periods, then records one period
/// at the step times.
pub fn reference_solve(cfg: &RunConfig, setup: &Setup) -> ReferenceRun {
    let warmup = match cfg.initial {
        InitialSet::Reference { warmup_periods, .. } => warmup_periods,
        _ => 6,
    };
    let solver = ReferenceSolver::new(&setup.forcing, cfg.k);
    let period = setup.forcing.period().mid();
    let start = solver.trajectory(&vec![0.0; solver.dim()], 0.0, warmup as f64 * period, warmup.max(1));
    let alpha = solver.trajectory(start.last().unwrap(), 0.0, period, cfg.steps_per_period);
    let n = cfg.steps_per_period;
    ReferenceRun {
        times: (0..=n).map(|i| period * i as f64 / n as f64).collect(),
        beta: alpha.iter().map(|a| setup.basis.to_beta_f64(a)).collect(),
        alpha,
    }
}

/// `P⁰` in eigen-coordinates.
pub fn initial_box(cfg: &RunConfig, setup: &Setup) -> IntervalVector {
    match &cfg.initial {
        InitialSet::Reference {
            relative,
            absolute,
            tail_absolute,
            ..
        } => {
            let beta = &reference_solve(&RunConfig { steps_per_period: 1, ..cfg.clone() }, setup).beta[0];
            beta.iter()
                .enumerate()
                .map(|(l, &b)| {
                    let pad = relative * b.abs() + if l < cfg.leading_count { *absolute } else { *tail_absolute };
                    Interval::hull_of(b - pad, b + pad)
                })
                .collect()
        }
        InitialSet::BetaBox(b) => b.iter().map(|&[lo, hi]| Interval::hull_of(lo, hi)).collect(),
        InitialSet::AlphaBox(b) => {
            let a: IntervalVector = b.iter().map(|&[lo, hi]| Interval::hull_of(lo, hi)).collect();
            setup.basis.to_beta(&a)
        }
    }
}

/// One row of the per-step trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub t: Interval,
    pub bounds: StepBounds,
    /// `‖Q_k u‖_{H¹₀}` and `‖Q_k u‖_{L²}` at the step end.
    pub qk_h1: Interval,
    pub qk_l2: Interval,
    pub eps_max: f64,
    pub nonforcing_max: f64,
    /// Hull of the leading coordinates at the step end.
    pub leading: IntervalVector,
    pub tail_width_max: f64,
    pub enclosure_attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Verdict {
    PeriodicVerified,
    NotVerified { reason: String },
    Failed { step: usize, reason: String },
}

/// Result of integrating one period.
#[derive(Debug, Clone)]
pub struct PeriodRun {
    pub initial: IntervalVector,
    pub trace: Vec<TraceRow>,
    /// `None` if a step failed.
    pub last: Option<InclusionSet>,
    /// `β` hull after every completed step.
    pub hulls: Vec<IntervalVector>,
    pub final_radii: [Interval; 5],
    pub failure: Option<(usize, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub config: RunConfig,
    pub radii: Option<TrappingRadii>,
    pub initial: IntervalVector,
    pub final_set: Option<IntervalVector>,
    pub trace: Vec<TraceRow>,
    pub verdict: Verdict,
    /// Wall-clock seconds; the only field that differs between identical runs.
    pub elapsed_seconds: f64,
}

/// The global radii when the run uses the trapping set, else `None`.
pub fn run_radii(cfg: &RunConfig, setup: &Setup) -> Result<Option<TrappingRadii>> {
    match cfg.periodic_check {
        PeriodicCheck::TrappingRadii => trapping_radii(&setup.forcing, cfg.norm_mode, &cfg.radii_grid).map(Some),
        PeriodicCheck::ExplicitRadii(_) => Ok(None),
    }
}

/// Integrates one period from `initial` (eigen-coordinates).
pub fn integrate_period(
    cfg: &RunConfig,
    setup: &Setup,
    radii: Option<&TrappingRadii>,
    initial: &IntervalVector,
) -> Result<PeriodRun> {
    let leading = cfg.leading_count;
    let n = cfg.steps_per_period;
    let period = setup.forcing.period();
    let dt = period / Interval::point(n as f64);
    let (r0, cap) = match (&cfg.periodic_check, radii) {
        (PeriodicCheck::TrappingRadii, Some(r)) => (r.upper(), Some(r.upper())),
        (PeriodicCheck::TrappingRadii, None) => {
            return Err(Error::Config("trapping radii are required for this check".into()))
        }
        (PeriodicCheck::ExplicitRadii(r), _) => (r.map(Interval::point), None),
    };
    if initial.len() != setup.basis.dim() {
        return Err(Error::Config("initial box has the wrong dimension".into()));
    }

    let mut set = InclusionSet::from_box(initial, leading);
    let alpha0 = setup.basis.to_alpha(initial);
    let mut r_in = refine(StepBounds::at_instant(r0, Interval::ZERO), alpha0.as_slice(), None, &setup.mesh).r;
    let mut cache = ParamCache::default();
    let mut trace = Vec::with_capacity(n);
    let mut hulls = Vec::with_capacity(n);
    let mut failure = None;

    for i in 0..n {
        let t0 = dt * Interval::point(i as f64);
        let t1 = dt * Interval::point((i + 1) as f64);
        let window = Interval::hull_of(t0.lo(), t1.hi());
        let mut step = || -> Result<(InclusionSet, TraceRow)> {
            let sb = step_bounds(&setup.forcing, cfg.norm_mode, window, r_in, cap, &cfg.local, &mut cache)?;
            let widths = residual_widths(&sb, &setup.basis, &setup.forcing, &setup.mesh, cfg.norm_mode);
            let prob = InclusionProblem {
                field: &setup.field,
                widths: &widths,
            };
            let out = inclusion_step(&prob, &set, t0, dt, cfg.taylor_order)?;
            let hull = out.set.hull();
            let end_alpha = setup.basis.to_alpha(&hull);
            let win_alpha = setup.basis.to_alpha(&out.enclosure);
            let sb = refine(sb, end_alpha.as_slice(), Some(win_alpha.as_slice()), &setup.mesh);
            let (qk_h1, qk_l2) = galerkin_error_bounds(sb.r[2], setup.mesh.h());
            let tail_width_max = out.set.tail.iter().map(|x| x.width()).fold(0.0, f64::max);
            let row = TraceRow {
                step: i,
                t: t1,
                bounds: sb,
                qk_h1,
                qk_l2,
                eps_max: widths.max(),
                nonforcing_max: widths.nonforcing.iter().map(|e| e.hi()).fold(0.0, f64::max),
                leading: IntervalVector::new(hull.as_slice()[..leading].to_vec()),
                tail_width_max,
                enclosure_attempts: out.attempts,
            };
            Ok((out.set, row))
        };
        match step() {
            Ok((next, row)) => {
                r_in = row.bounds.r;
                hulls.push(next.hull());
                trace.push(row);
                set = next;
            }
            Err(e) => {
                let reason = match e {
                    Error::StepFailure { reason, .. } => reason,
                    other => other.to_string(),
                };
                failure = Some((i, reason));
                break;
            }
        }
    }
    Ok(PeriodRun {
        initial: initial.clone(),
        trace,
        last: if failure.is_none() { Some(set) } else { None },
        hulls,
        final_radii: r_in,
        failure,
    })
}

/// `Pⁿ ⊂ P⁰` on box hulls: leading hull and tail intervals inside the
/// initial box (closed containment, which is all the fixed point argument
/// needs), plus the radius check when radii were given explicitly.
pub fn containment_verdict(cfg: &RunConfig, run: &PeriodRun) -> Verdict {
    if let Some((step, reason)) = &run.failure {
        return Verdict::Failed {
            step: *step,
            reason: reason.clone(),
        };
    }
    let last = run.last.as_ref().expect("a completed run has a final set");
    let hull = last.hull();
    let outside: Vec<usize> = (0..hull.len())
        .filter(|&l| !run.initial[l].contains_interval(hull[l]))
        .collect();
    if !outside.is_empty() {
        return Verdict::NotVerified {
            reason: format!("final set leaves the initial box in coordinates {outside:?}"),
        };
    }
    if let PeriodicCheck::ExplicitRadii(r) = &cfg.periodic_check {
        let bad: Vec<usize> = (0..5).filter(|&j| !(run.final_radii[j].hi() <= r[j])).collect();
        if !bad.is_empty() {
            return Verdict::NotVerified {
                reason: format!("final radii exceed the initial ones for orders {bad:?}"),
            };
        }
    }
    Verdict::PeriodicVerified
}

/// Full pipeline: radii, initial box, one period, containment check.
pub fn verify_periodic(cfg: &RunConfig) -> Result<Certificate> {
    let start = Instant::now();
    let setup = Setup::new(cfg)?;
    let radii = run_radii(cfg, &setup)?;
    let initial = initial_box(cfg, &setup);
    let run = integrate_period(cfg, &setup, radii.as_ref(), &initial)?;
    let verdict = containment_verdict(cfg, &run);
    Ok(Certificate {
        config: cfg.clone(),
        radii,
        initial,
        final_set: run.last.as_ref().map(|s| s.hull()),
        trace: run.trace,
        verdict,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
