mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;

use femcert::driver::ReferenceSolver;
use femcert::fem::{fem_norms, Mesh};
use femcert::forcing::NormMode;
use femcert::local::{refine, step_bounds, LocalOptions, ParamCache, StepBounds};
use femcert::Interval;

/// `‖∂ⁿu‖` for n = 0..4 of the function with nodal values `alpha`,
/// from difference quotients of its odd periodic extension (the solution
/// and its even derivatives vanish on the boundary).
fn discrete_norms(alpha: &[f64]) -> [f64; 5] {
    let k = alpha.len() + 1;
    let h = 1.0 / k as f64;
    let node = |i: i64| -> f64 {
        let m = i.rem_euclid(2 * k as i64);
        if m == 0 || m == k as i64 {
            0.0
        } else if m < k as i64 {
            alpha[m as usize - 1]
        } else {
            -alpha[(2 * k as i64 - m) as usize - 1]
        }
    };
    let mut out = [0.0; 5];
    let mesh = Mesh::new(k).unwrap();
    let iv: Vec<Interval> = alpha.iter().map(|&a| pt(a)).collect();
    let (l2, h1) = fem_norms(&iv, &mesh);
    out[0] = l2.mid();
    out[1] = h1.mid();
    // Centred differences of order 2..4 at the nodes.
    let d2 = |i: i64| (node(i + 1) - 2.0 * node(i) + node(i - 1)) / (h * h);
    let d3 = |i: i64| (node(i + 2) - 2.0 * node(i + 1) + 2.0 * node(i - 1) - node(i - 2)) / (2.0 * h * h * h);
    let d4 = |i: i64| {
        (node(i + 2) - 4.0 * node(i + 1) + 6.0 * node(i) - 4.0 * node(i - 1) + node(i - 2)) / (h * h * h * h)
    };
    let norm = |d: &dyn Fn(i64) -> f64| ((0..k as i64).map(|i| d(i).powi(2)).sum::<f64>() * h).sqrt();
    out[2] = norm(&d2);
    out[3] = norm(&d3);
    out[4] = norm(&d4);
    out
}

/// Step bounds chained over 64 steps from 1.1 times the measured norms of
/// a point on the attractor dominate the measured norms along the way.
#[test]
fn local_bounds_dominate_reference_norms() {
    let k = 16;
    let steps = 64;
    let forcing = single_mode_forcing(12.0);
    let solver = ReferenceSolver::new(&forcing, k);
    let warm = solver.trajectory(&vec![0.0; k - 1], 0.0, 4.0, 4);
    let mut alpha = warm.last().unwrap().clone();
    let n0 = discrete_norms(&alpha);
    let mut r_in = n0.map(|x| pt(1.1 * x + 1e-3));
    let opts = LocalOptions::default();
    let mut cache = ParamCache::default();
    let dt = 1.0 / steps as f64;
    for i in 0..steps {
        let window = Interval::hull_of(i as f64 * dt, (i + 1) as f64 * dt);
        let sb = step_bounds(&forcing, NormMode::Triangle, window, r_in, None, &opts, &mut cache).unwrap();
        let samples = solver.trajectory(&alpha, i as f64 * dt, dt, 8);
        for s in &samples {
            let n = discrete_norms(s);
            for j in 0..5 {
                assert!(n[j] <= sb.m[j].hi(), "step {i}: ‖∂^{j}u‖ = {} > M = {}", n[j], sb.m[j]);
            }
        }
        alpha = samples.last().unwrap().clone();
        let n = discrete_norms(&alpha);
        for j in 0..5 {
            assert!(n[j] <= sb.r[j].hi(), "step {i}: ‖∂^{j}u‖ = {} > R = {}", n[j], sb.r[j]);
        }
        r_in = sb.r;
    }
}

#[test]
fn discrete_norms_of_a_sine() {
    let k = 64;
    let alpha: Vec<f64> = (1..k).map(|m| (PI * m as f64 / k as f64).sin()).collect();
    let n = discrete_norms(&alpha);
    for (j, x) in n.iter().enumerate() {
        let exact = PI.powi(j as i32) / 2f64.sqrt();
        assert!((x - exact).abs() < 2e-3 * exact, "order {j}: {x} vs {exact}");
    }
}

fn radii() -> impl Strategy<Value = [f64; 5]> {
    [0.0..5.0f64, 0.0..30.0, 0.0..300.0, 0.0..3e3, 0.0..3e5]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn zero_step_contains_the_inputs(r in radii(), t in 0.0..1.0f64, a in 0.0..20.0f64) {
        let r_in = r.map(pt);
        let sb = step_bounds(&single_mode_forcing(a), NormMode::Triangle, pt(t), r_in, None,
            &LocalOptions::default(), &mut ParamCache::default()).unwrap();
        for j in 0..5 {
            prop_assert!(sb.r[j].hi() >= r[j] && sb.m[j].hi() >= r[j], "order {j}: {:?}", sb);
        }
    }

    #[test]
    fn window_bound_dominates_endpoint(r in radii(), t in 0.0..1.0f64, h in 1e-4..0.1f64, a in 0.0..20.0f64) {
        let sb = step_bounds(&single_mode_forcing(a), NormMode::Triangle, Interval::hull_of(t, t + h), r.map(pt), None,
            &LocalOptions::default(), &mut ParamCache::default()).unwrap();
        for j in 0..5 {
            prop_assert!(sb.m[j].hi() >= sb.r[j].hi());
        }
    }

    #[test]
    fn refine_never_loosens_and_is_idempotent(
        r in radii(), alpha in proptest::collection::vec(-2.0..2.0f64, 15), w in 0.0..0.5f64,
    ) {
        let mesh = Mesh::new(16).unwrap();
        let bounds = StepBounds { m: r.map(|x| pt(1.5 * x)), r: r.map(pt), window: Interval::hull_of(0.0, 0.01) };
        let end: Vec<Interval> = alpha.iter().map(|&a| Interval::hull_of(a - w, a + w)).collect();
        let win: Vec<Interval> = end.iter().map(|x| x.inflate(w)).collect();
        let once = refine(bounds, &end, Some(&win), &mesh);
        for j in 0..5 {
            prop_assert!(once.r[j].hi() <= bounds.r[j].hi() && once.m[j].hi() <= bounds.m[j].hi());
        }
        let twice = refine(once, &end, Some(&win), &mesh);
        prop_assert_eq!(twice, once);
    }
}
