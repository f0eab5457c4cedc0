//! One-step and few-step soundness of the inclusion integrator, checked
//! against nonrigorous RK4 solutions of random selections.

mod common;

use common::*;
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

use femcert::config::RunConfig;
use femcert::driver::{initial_box, run_radii, Setup};
use femcert::fem::{residual_widths, ResidualWidths};
use femcert::forcing::Forcing;
use femcert::inclusion::{
    dissipative_step, inclusion_correction, inclusion_step, BurgersField, InclusionProblem, InclusionSet, LeadingOde,
    LohnerSet,
};
use femcert::local::{step_bounds, ParamCache};
use femcert::{Interval, IntervalMatrix, IntervalVector};

/// `p` lies in the Lohner set up to the interval image of the remainder in
/// its own coordinates, which is much tighter than the box hull.
fn in_lohner(set: &LohnerSet, p: &[f64]) -> bool {
    let inv = set.basis.clone().try_inverse().expect("Lohner basis is invertible");
    let n = set.dim();
    let d: Vec<f64> = (0..n).map(|i| p[i] - set.center[i]).collect();
    let rem = IntervalMatrix::from_dmatrix(&inv).matvec(&set.remainder);
    (0..n).all(|i| {
        let r: f64 = (0..n).map(|j| inv[(i, j)] * d[j]).sum();
        let allowed = set.coeff[i] + rem[i];
        let slack = 1e-10 * (1.0 + r.abs());
        allowed.lo() - slack <= r && r <= allowed.hi() + slack
    })
}

fn in_box(b: &IntervalVector, p: &[f64]) -> Option<usize> {
    (0..p.len()).find(|&i| !(b[i].lo() - 1e-10 * (1.0 + p[i].abs()) <= p[i] && p[i] <= b[i].hi() + 1e-10 * (1.0 + p[i].abs())))
}

struct Scenario {
    cfg: RunConfig,
    setup: Setup,
    initial: IntervalVector,
}

fn scenario(k: usize, steps: usize, leading: usize) -> Scenario {
    let cfg = RunConfig {
        k,
        steps_per_period: steps,
        leading_count: leading,
        ..Default::default()
    };
    let setup = Setup::new(&cfg).unwrap();
    let initial = initial_box(&cfg, &setup);
    Scenario { cfg, setup, initial }
}

/// Integrates `β' = f(β, t) + g` over `[t0, t0 + h]` with `g` piecewise
/// constant on `pieces` subintervals, checking the path against `enc`.
#[allow(clippy::too_many_arguments)]
fn follow(
    field: &BurgersField,
    beta: &[f64],
    t0: f64,
    h: f64,
    eps: &[f64],
    pieces: usize,
    rng: &mut StdRng,
    enc: &IntervalVector,
) -> Vec<f64> {
    let mut y = beta.to_vec();
    let dt = h / pieces as f64;
    for p in 0..pieces {
        let g: Vec<f64> = eps.iter().map(|&e| rng.gen_range(-1.0..=1.0) * e).collect();
        let t = t0 + p as f64 * dt;
        y = rk4(
            |s, b| field.eval_f64(b, s).iter().zip(&g).map(|(a, c)| a + c).collect(),
            &y,
            t,
            t + dt,
            8,
        );
        if let Some(i) = in_box(enc, &y) {
            panic!("path left the rough enclosure in coordinate {i}: {} not in {}", y[i], enc[i]);
        }
    }
    y
}

fn widths_for(sc: &Scenario, window: Interval, r_in: [Interval; 5], cache: &mut ParamCache) -> (ResidualWidths, [Interval; 5]) {
    let radii = run_radii(&sc.cfg, &sc.setup).unwrap().unwrap();
    let sb = step_bounds(
        &sc.setup.forcing,
        sc.cfg.norm_mode,
        window,
        r_in,
        Some(radii.upper()),
        &sc.cfg.local,
        cache,
    )
    .unwrap();
    (residual_widths(&sb, &sc.setup.basis, &sc.setup.forcing, &sc.setup.mesh, sc.cfg.norm_mode), sb.r)
}

/// 50 random initial points in `P⁰` under random measurable selections of
/// `G` stay in every certified set over eight steps.
#[test]
fn random_selections_stay_in_certified_sets() {
    let sc = scenario(16, 256, 5);
    let mut rng = StdRng::seed_from_u64(7);
    let n = sc.setup.basis.dim();
    let h = 1.0 / 256.0;
    let radii = run_radii(&sc.cfg, &sc.setup).unwrap().unwrap();
    let mut r_in = radii.upper();
    let mut cache = ParamCache::default();
    let mut set = InclusionSet::from_box(&sc.initial, 5);
    let mut points: Vec<Vec<f64>> = (0..50)
        .map(|_| sc.initial.iter().map(|x| rng.gen_range(x.lo()..=x.hi())).collect())
        .collect();
    for i in 0..8 {
        let t0 = i as f64 * h;
        let window = Interval::hull_of(t0, t0 + h);
        let (w, r) = widths_for(&sc, window, r_in, &mut cache);
        r_in = r;
        let prob = InclusionProblem { field: &sc.setup.field, widths: &w };
        let out = inclusion_step(&prob, &set, pt(t0), pt(h), sc.cfg.taylor_order).unwrap();
        let eps: Vec<f64> = w.eps.iter().map(|e| e.hi()).collect();
        let hull = out.set.hull();
        for p in points.iter_mut() {
            *p = follow(&sc.setup.field, p, t0, h, &eps, 4, &mut rng, &out.enclosure);
            if let Some(j) = in_box(&hull, p) {
                panic!("step {i}: coordinate {j} = {} outside {}", p[j], hull[j]);
            }
            assert!(in_lohner(&out.set.lead, &p[..5]), "step {i}: leading part outside the Lohner set");
        }
        assert_eq!(hull.len(), n);
        set = out.set;
    }
}

/// With zero widths the step encloses the flow of the ODE itself; 100
/// random starts land in the Lohner set.
#[test]
fn taylor_step_contains_ode_solutions() {
    let sc = scenario(8, 128, 3);
    let mut rng = StdRng::seed_from_u64(11);
    let h = 1.0 / 128.0;
    let zero = ResidualWidths::zero(sc.setup.basis.dim());
    let prob = InclusionProblem { field: &sc.setup.field, widths: &zero };
    let small: IntervalVector = sc.initial.iter().map(|x| Interval::symmetric(0.05 * x.rad()) + pt(x.mid())).collect();
    let set = InclusionSet::from_box(&small, 3);
    let out = inclusion_step(&prob, &set, pt(0.0), pt(h), 4).unwrap();
    for _ in 0..100 {
        let p: Vec<f64> = small.iter().map(|x| rng.gen_range(x.lo()..=x.hi())).collect();
        let y = rk4(|s, b| sc.setup.field.eval_f64(b, s), &p, 0.0, h, 64);
        assert!(in_lohner(&out.set.lead, &y[..3]));
        assert_eq!(in_box(&out.set.hull(), &y), None);
    }
}

/// A two-dimensional quadratic leading system with random coefficients.
fn toy_ode<'a>(forcing: &'a Forcing, seed: &[f64]) -> LeadingOde<'a> {
    let lin = IntervalMatrix::from_points(2, 2, &[-3.0 + seed[0], seed[1], seed[2], -8.0 + seed[3]]);
    let cst = IntervalVector::from_points(&[seed[4], seed[5]]);
    let tensor = vec![
        IntervalMatrix::from_points(2, 2, &[seed[6], 0.0, 0.0, seed[7]]),
        IntervalMatrix::from_points(2, 2, &[0.0, seed[8], seed[9], 0.0]),
    ];
    LeadingOde::from_parts(lin, cst, tensor, Vec::new(), forcing)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dissipative_width_shrinks_with_rate(l1 in 1.0..100.0f64, dl in 0.1..100.0f64, nw in 0.0..10.0f64, xw in 0.0..1.0f64, h in 1e-3..0.5f64) {
        let n = Interval::hull_of(-nw, nw);
        let x0 = Interval::hull_of(-xw, xw);
        let slow = dissipative_step(pt(-l1), n, x0, pt(h)).unwrap();
        let fast = dissipative_step(pt(-(l1 + dl)), n, x0, pt(h)).unwrap();
        prop_assert!(fast.width() <= slow.width() * (1.0 + 1e-12));
    }

    #[test]
    fn correction_grows_with_the_enclosure(
        seed in proptest::collection::vec(-1.0..1.0f64, 10),
        c in proptest::collection::vec(0.0..2.0f64, 2),
        w in 0.0..1.0f64, grow in 0.0..1.0f64, h in 1e-3..0.05f64,
    ) {
        let forcing = Forcing::zero();
        let ode = toy_ode(&forcing, &seed);
        let small = IntervalVector::new(vec![Interval::symmetric(w); 2]);
        let large = IntervalVector::new(vec![Interval::symmetric(w + grow); 2]);
        let ds = inclusion_correction(&ode, &small, &c, pt(h)).unwrap();
        let dl = inclusion_correction(&ode, &large, &c, pt(h)).unwrap();
        for i in 0..2 {
            prop_assert!(dl[i] >= ds[i] * (1.0 - 1e-12), "{:?} vs {:?}", ds, dl);
        }
    }
}
