//! Separable trigonometric forcings
//! `f(x, t) = Σ_j a_j sin(k_j π x) s_j(t)`, `s_j(t) = c₀ + c₁ sin(2π(t + φ)/T)`.
//!
//! Every spatial derivative is again a finite sine/cosine sum, so all the
//! `L²` norms the estimates need are available in closed form.

use serde::{Deserialize, Serialize};

use crate::interval::{Interval, IntervalVector};

/// How norms of multi-term forcings are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// Sum of per-term norms.
    #[default]
    Triangle,
    /// Square root of the sum of squares over distinct spatial modes.
    Orthogonal,
}

/// `c₀ + c₁ sin(2π(t + φ)/T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Temporal {
    pub c0: Interval,
    pub c1: Interval,
    pub phase: Interval,
}

impl Temporal {
    pub const ONE: Temporal = Temporal {
        c0: Interval::ONE,
        c1: Interval::ZERO,
        phase: Interval::ZERO,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingTerm {
    pub amplitude: Interval,
    pub spatial_mode: u32,
    pub temporal: Temporal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    period: Interval,
    terms: Vec<ForcingTerm>,
}

impl Forcing {
    /// Panics if the period is not positive or a spatial mode is zero.
    pub fn new(period: Interval, terms: Vec<ForcingTerm>) -> Self {
        assert!(period.lo() > 0.0, "forcing period must be positive");
        assert!(terms.iter().all(|t| t.spatial_mode >= 1), "spatial modes start at 1");
        Forcing { period, terms }
    }

    pub fn zero() -> Self {
        Forcing::new(Interval::ONE, Vec::new())
    }

    pub fn period(&self) -> Interval {
        self.period
    }

    pub fn terms(&self) -> &[ForcingTerm] {
        &self.terms
    }

    fn omega(&self) -> Interval {
        Interval::point(2.0) * Interval::PI / self.period
    }

    /// Range of `s_j` over the window (`None` means all times).
    pub fn temporal_range(&self, j: usize, window: Option<Interval>) -> Interval {
        let s = self.terms[j].temporal;
        let sine = match window {
            None => Interval::hull_of(-1.0, 1.0),
            Some(w) => (self.omega() * (w + s.phase)).sin(),
        };
        s.c0 + s.c1 * sine
    }

    /// `sup |s_j|` over the window.
    pub fn temporal_sup(&self, j: usize, window: Option<Interval>) -> Interval {
        Interval::point(self.temporal_range(j, window).mag()).max(Interval::ZERO)
    }

    /// Upper bound for `sup_t ‖∂ₓⁿ f(·, t)‖_{L²(0,1)}` over the window.
    pub fn norm_bound(&self, order: u32, window: Option<Interval>, mode: NormMode) -> Interval {
        // ‖∂ⁿ sin(kπx)‖ = (kπ)ⁿ/√2 for every n, since sine and cosine have
        // the same norm on (0, 1).
        let inv_sqrt2 = Interval::ONE / Interval::point(2.0).sqrt();
        let weight = |j: usize| {
            let t = &self.terms[j];
            t.amplitude.abs() * self.temporal_sup(j, window)
        };
        let mode_factor = |k: u32| (Interval::point(k as f64) * Interval::PI).powi(order as i32) * inv_sqrt2;
        match mode {
            NormMode::Triangle => (0..self.terms.len())
                .map(|j| weight(j) * mode_factor(self.terms[j].spatial_mode))
                .fold(Interval::ZERO, |a, b| a + b),
            NormMode::Orthogonal => {
                let mut modes: Vec<u32> = self.terms.iter().map(|t| t.spatial_mode).collect();
                modes.sort_unstable();
                modes.dedup();
                modes
                    .into_iter()
                    .map(|k| {
                        let w = (0..self.terms.len())
                            .filter(|&j| self.terms[j].spatial_mode == k)
                            .map(weight)
                            .fold(Interval::ZERO, |a, b| a + b);
                        (w * mode_factor(k)).sqr()
                    })
                    .fold(Interval::ZERO, |a, b| a + b)
                    .sqrt()
            }
        }
    }

    /// `∫₀¹ v^m(x) sin(kπx) dx = 4 sin²(kπh/2)/(k²π²h) · sin(kπmh)` for the hat
    /// function `v^m` centred at `mh`.
    pub fn hat_pairing(spatial_mode: u32, m: usize, h: Interval) -> Interval {
        let kpi = Interval::point(spatial_mode as f64) * Interval::PI;
        let half = (kpi * h * 0.5).sin();
        let node = (kpi * h * Interval::point(m as f64)).sin();
        Interval::point(4.0) * half.sqr() / (kpi.sqr() * h) * node
    }

    /// Range of `(f(t), v^m)` over the window.
    pub fn project_node(&self, window: Option<Interval>, m: usize, h: Interval) -> Interval {
        (0..self.terms.len())
            .map(|j| {
                let t = &self.terms[j];
                t.amplitude * Self::hat_pairing(t.spatial_mode, m, h) * self.temporal_range(j, window)
            })
            .fold(Interval::ZERO, |a, b| a + b)
    }

    /// `(a_j sin(k_j πx), v^m)` for `m = 1..k-1`: the spatial load of term `j`.
    pub fn term_load(&self, j: usize, k: usize, h: Interval) -> IntervalVector {
        let t = &self.terms[j];
        (1..k)
            .map(|m| t.amplitude * Self::hat_pairing(t.spatial_mode, m, h))
            .collect()
    }

    /// Bound on `sup |(Q_k f(t), w)|` over the window for `‖w‖_{L²} ≤ w_norm`:
    /// `(h²/π²) sup ‖f_xx‖ ‖w‖`.
    pub fn qk_pairing_bound(&self, window: Option<Interval>, w_norm: Interval, h: Interval, mode: NormMode) -> Interval {
        h.sqr() / Interval::PI.sqr() * self.norm_bound(2, window, mode) * w_norm.upper()
    }

    /// Taylor coefficients `s_{[i]}`, `i = 0..=order`, of `s_j` about every
    /// time in `t`: `c₀δ_{i0} + c₁ ωⁱ sin(ω(t + φ) + iπ/2)/i!`.
    pub fn temporal_taylor(&self, j: usize, t: Interval, order: usize) -> Vec<Interval> {
        let s = self.terms[j].temporal;
        let omega = self.omega();
        let theta = omega * (t + s.phase);
        let mut out = Vec::with_capacity(order + 1);
        let mut scale = s.c1;
        for i in 0..=order {
            if i > 0 {
                scale = scale * omega / Interval::point(i as f64);
            }
            // sin(θ + iπ/2) cycles through sin, cos, -sin, -cos.
            let trig = match i % 4 {
                0 => theta.sin(),
                1 => theta.cos(),
                2 => -theta.sin(),
                _ => -theta.cos(),
            };
            let mut c = scale * trig;
            if i == 0 {
                c = c + s.c0;
            }
            out.push(c);
        }
        out
    }

    /// Float value of `s_j(t)`, for nonrigorous reference runs.
    pub fn temporal_value(&self, j: usize, t: f64) -> f64 {
        let s = self.terms[j].temporal;
        let omega = 2.0 * std::f64::consts::PI / self.period.mid();
        s.c0.mid() + s.c1.mid() * (omega * (t + s.phase.mid())).sin()
    }
}
