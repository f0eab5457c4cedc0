//! Float grid search for the free constants of the bound formulas.
//!
//! Any admissible parameter gives a sound bound, so the search is
//! nonrigorous; the winning point is re-evaluated in interval arithmetic by
//! the caller.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Resolution and refinement of the parameter search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamGrid {
    /// Points per parameter for one- and two-parameter groups.
    pub resolution: usize,
    /// Points per parameter for three-parameter groups (kept lower so a
    /// group stays near a few thousand points).
    pub resolution_3d: usize,
    /// Local refinement passes around the best coarse point.
    pub zoom_levels: usize,
    /// Points per parameter in each refinement pass.
    pub zoom_points: usize,
    /// Shrink factor of the refinement window between passes.
    pub zoom_shrink: f64,
    /// Upper end of the coarse search for parameters that are only
    /// required to be positive. Refinement may step past it.
    pub unbounded_max: f64,
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid {
            resolution: 64,
            resolution_3d: 24,
            zoom_levels: 3,
            zoom_points: 9,
            zoom_shrink: 4.0,
            unbounded_max: 2.0,
        }
    }
}

impl ParamGrid {
    /// Coarse grid only.
    pub fn coarse(resolution: usize) -> Self {
        ParamGrid {
            resolution,
            resolution_3d: resolution.min(24),
            zoom_levels: 0,
            ..Default::default()
        }
    }
}

/// Admissible region of one group of parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Space {
    /// `x_i > 0`, `Σ x_i < total`.
    Simplex { dims: usize, total: f64 },
    /// `x_i > 0` with no coupling; searched on a geometric grid in
    /// `[lo, hi]`.
    LogBox { dims: usize, lo: f64, hi: f64 },
}

impl Space {
    pub const EMPTY: Space = Space::Simplex { dims: 0, total: 1.0 };

    pub fn simplex(dims: usize) -> Space {
        Space::Simplex { dims, total: 2.0 }
    }

    pub fn dims(&self) -> usize {
        match *self {
            Space::Simplex { dims, .. } | Space::LogBox { dims, .. } => dims,
        }
    }

    fn resolution(&self, g: &ParamGrid) -> usize {
        if self.dims() >= 3 {
            g.resolution_3d
        } else {
            g.resolution
        }
        .max(1)
    }

    /// Grid spacing in search coordinates (linear for simplices, log for boxes).
    fn spacing(&self, g: &ParamGrid) -> f64 {
        let n = self.resolution(g) as f64;
        match *self {
            Space::Simplex { total, .. } => total / (n + 1.0),
            Space::LogBox { lo, hi, .. } => (hi / lo).ln() / (n - 1.0).max(1.0),
        }
    }

    fn to_coord(&self, x: f64) -> f64 {
        match self {
            Space::Simplex { .. } => x,
            Space::LogBox { .. } => x.ln(),
        }
    }

    fn from_coord(&self, u: f64) -> f64 {
        match self {
            Space::Simplex { .. } => u,
            Space::LogBox { .. } => u.exp(),
        }
    }

    pub fn feasible(&self, x: &[f64]) -> bool {
        if x.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return false;
        }
        match *self {
            Space::Simplex { total, .. } => x.iter().sum::<f64>() < total,
            Space::LogBox { .. } => true,
        }
    }

    /// All coarse grid points.
    pub fn points(&self, g: &ParamGrid) -> Vec<Vec<f64>> {
        let d = self.dims();
        let n = self.resolution(g);
        let mut out = Vec::new();
        let mut idx = vec![1usize; d];
        if d == 0 {
            return vec![Vec::new()];
        }
        loop {
            let keep = match self {
                // Σ i·total/(n+1) < total  ⇔  Σ i < n + 1.
                Space::Simplex { .. } => idx.iter().sum::<usize>() < n + 1,
                Space::LogBox { .. } => true,
            };
            if keep {
                out.push(idx.iter().map(|&i| self.coord_point(i, g)).collect());
            }
            let mut pos = 0;
            loop {
                if pos == d {
                    return out;
                }
                idx[pos] += 1;
                if idx[pos] <= n {
                    break;
                }
                idx[pos] = 1;
                pos += 1;
            }
        }
    }

    fn coord_point(&self, i: usize, g: &ParamGrid) -> f64 {
        match *self {
            Space::Simplex { total, .. } => i as f64 * total / (self.resolution(g) as f64 + 1.0),
            Space::LogBox { lo, .. } => (lo.ln() + (i - 1) as f64 * self.spacing(g)).exp(),
        }
    }
}

/// Best point found and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub value: f64,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `obj(pre1(p1), pre2(p2))` over `p1 ∈ s1`, `p2 ∈ s2`.
///
/// The split lets each group's expensive part be evaluated once per coarse
/// point. Returns `None` when no grid point gives a finite value.
pub fn minimize_separable<P, Q>(
    g: &ParamGrid,
    s1: Space,
    s2: Space,
    pre1: impl Fn(&[f64]) -> P + Sync,
    pre2: impl Fn(&[f64]) -> Q + Sync,
    obj: impl Fn(&P, &Q) -> f64 + Sync,
) -> Option<Minimum>
where
    P: Send + Sync,
    Q: Send + Sync,
{
    let pts1 = s1.points(g);
    let pts2 = s2.points(g);
    let v1: Vec<P> = pts1.par_iter().map(|p| pre1(p)).collect();
    let v2: Vec<Q> = pts2.par_iter().map(|p| pre2(p)).collect();
    let (i, j, value) = (0..pts1.len())
        .into_par_iter()
        .map(|i| {
            let (j, v) = v2
                .iter()
                .enumerate()
                .map(|(j, q)| (j, finite_or_inf(obj(&v1[i], q))))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            (i, j, v)
        })
        .reduce(|| (0, 0, f64::INFINITY), |a, b| if b.2 < a.2 || (b.2 == a.2 && (b.0, b.1) < (a.0, a.1)) { b } else { a });
    if !value.is_finite() {
        return None;
    }
    let mut best = Minimum {
        p1: pts1[i].clone(),
        p2: pts2[j].clone(),
        value,
    };

    let (d1, d2) = (s1.dims(), s2.dims());
    let d = d1 + d2;
    if d == 0 || g.zoom_levels == 0 || g.zoom_points < 2 {
        return Some(best);
    }
    let space_of = |k: usize| if k < d1 { s1 } else { s2 };
    let mut width: Vec<f64> = (0..d).map(|k| space_of(k).spacing(g)).collect();
    let np = g.zoom_points;
    let combos = np.pow(d as u32);
    for _ in 0..g.zoom_levels {
        let centre: Vec<f64> = best
            .p1
            .iter()
            .chain(best.p2.iter())
            .enumerate()
            .map(|(k, &x)| space_of(k).to_coord(x))
            .collect();
        let cand = (0..combos)
            .into_par_iter()
            .filter_map(|mut c| {
                let mut x = Vec::with_capacity(d);
                for k in 0..d {
                    let t = (c % np) as f64 / (np - 1) as f64 * 2.0 - 1.0;
                    c /= np;
                    x.push(space_of(k).from_coord(centre[k] + t * width[k]));
                }
                let (p1, p2) = x.split_at(d1);
                if !(s1.feasible(p1) && s2.feasible(p2)) {
                    return None;
                }
                let v = finite_or_inf(obj(&pre1(p1), &pre2(p2)));
                Some((v, x))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((v, x)) = cand {
            if v < best.value {
                best = Minimum {
                    p1: x[..d1].to_vec(),
                    p2: x[d1..].to_vec(),
                    value: v,
                };
            }
        }
        for w in &mut width {
            *w /= g.zoom_shrink;
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_points_are_strictly_admissible() {
        let g = ParamGrid::coarse(10);
        let pts = Space::simplex(2).points(&g);
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|p| p[0] > 0.0 && p[1] > 0.0 && p[0] + p[1] < 2.0));
        // pairs (i, j) with i + j ≤ 10
        assert_eq!(pts.len(), 45);
        let three = Space::simplex(3).points(&g);
        assert!(three.iter().all(|p| p.iter().sum::<f64>() < 2.0));
    }

    #[test]
    fn empty_space_has_one_point() {
        assert_eq!(Space::EMPTY.points(&ParamGrid::default()), vec![Vec::<f64>::new()]);
    }

    #[test]
    fn logbox_endpoints() {
        let s = Space::LogBox { dims: 1, lo: 1e-2, hi: 1e2 };
        let pts = s.points(&ParamGrid::coarse(5));
        assert!((pts[0][0] - 1e-2).abs() < 1e-15);
        assert!((pts[4][0] - 1e2).abs() < 1e-10);
    }

    #[test]
    fn zoom_finds_interior_minimum() {
        // (x - 0.3)² + (y - 0.71)² over the simplex.
        let m = minimize_separable(
            &ParamGrid::default(),
            Space::simplex(1),
            Space::Simplex { dims: 1, total: 2.0 },
            |p| (p[0] - 0.3).powi(2),
            |q| (q[0] - 0.71).powi(2),
            |a, b| a + b,
        )
        .unwrap();
        assert!(m.value < 1e-6, "{m:?}");
    }

    #[test]
    fn infeasible_objective_gives_none() {
        let m = minimize_separable(&ParamGrid::coarse(4), Space::simplex(1), Space::EMPTY, |_| (), |_| (), |_, _| f64::NAN);
        assert!(m.is_none());
    }
}
