//! Run configuration as read from JSON. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::{Forcing, ForcingTerm, NormMode, Temporal};
use crate::grid::ParamGrid;
use crate::interval::Interval;
use crate::local::LocalOptions;

/// One term `amplitude · sin(spatial_mode·πx) · (c0 + c1 sin(2π(t + phase)/period))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub amplitude: f64,
    pub spatial_mode: u32,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub c1: f64,
    /// In the same units as the period.
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    #[serde(default = "one")]
    pub period: f64,
    pub terms: Vec<TermConfig>,
}

fn one() -> f64 {
    1.0
}

impl ForcingConfig {
    /// `8(sin 3πx + sin 4πx)(1 + sin 2πt)`.
    pub fn two_mode() -> Self {
        let term = |m| TermConfig {
            amplitude: 8.0,
            spatial_mode: m,
            c0: 1.0,
            c1: 1.0,
            phase: 0.0,
        };
        ForcingConfig {
            period: 1.0,
            terms: vec![term(3), term(4)],
        }
    }

    /// `12 sin(πx) sin(2πt)`.
    pub fn single_mode() -> Self {
        ForcingConfig {
            period: 1.0,
            terms: vec![TermConfig {
                amplitude: 12.0,
                spatial_mode: 1,
                c0: 0.0,
                c1: 1.0,
                phase: 0.0,
            }],
        }
    }

    pub fn build(&self) -> Result<Forcing> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::Config(format!("forcing period must be positive, got {}", self.period)));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.spatial_mode == 0 {
                return Err(Error::Config("spatial_mode starts at 1".into()));
            }
            if ![t.amplitude, t.c0, t.c1, t.phase].iter().all(|x| x.is_finite()) {
                return Err(Error::Config("forcing coefficients must be finite".into()));
            }
            terms.push(ForcingTerm {
                amplitude: Interval::point(t.amplitude),
                spatial_mode: t.spatial_mode,
                temporal: Temporal {
                    c0: Interval::point(t.c0),
                    c1: Interval::point(t.c1),
                    phase: Interval::point(t.phase),
                },
            });
        }
        Ok(Forcing::new(Interval::point(self.period), terms))
    }
}

/// How the initial set `P⁰` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSet {
    /// Box around the reference solution after `warmup_periods` periods
    /// started from zero: `β_l ± (relative·|β_l| + absolute)` on leading
    /// coordinates and `β_l ± (relative·|β_l| + tail_absolute)` on the tail.
    Reference {
        warmup_periods: usize,
        relative: f64,
        absolute: f64,
        tail_absolute: f64,
    },
    /// Explicit box in eigen-coordinates `β`, one `[lo, hi]` per coordinate.
    BetaBox(Vec<[f64; 2]>),
    /// Explicit box in nodal coordinates `α`.
    AlphaBox(Vec<[f64; 2]>),
}

impl Default for InitialSet {
    fn default() -> Self {
        InitialSet::Reference {
            warmup_periods: 6,
            relative: 0.1,
            absolute: 0.05,
            tail_absolute: 5e-3,
        }
    }
}

/// Which hypotheses of the fixed point argument are checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PeriodicCheck {
    /// Initial norms are the global trapping radii; only `Pⁿ ⊂ P⁰` is checked.
    #[default]
    TrappingRadii,
    /// Initial norms are the given radii, which the final radii must not
    /// exceed, and no global cap is applied.
    ExplicitRadii([f64; 5]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub forcing: ForcingConfig,
    /// Number of mesh intervals.
    pub k: usize,
    pub steps_per_period: usize,
    pub leading_count: usize,
    pub taylor_order: usize,
    pub norm_mode: NormMode,
    /// Search for the global radii.
    pub radii_grid: ParamGrid,
    /// Search for the per-step bounds.
    pub local: LocalOptions,
    pub initial: InitialSet,
    pub periodic_check: PeriodicCheck,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            forcing: ForcingConfig::single_mode(),
            k: 32,
            steps_per_period: 512,
            leading_count: 8,
            taylor_order: 4,
            norm_mode: NormMode::Triangle,
            radii_grid: ParamGrid::default(),
            local: LocalOptions::default(),
            initial: InitialSet::default(),
            periodic_check: PeriodicCheck::default(),
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.forcing.build()?;
        if self.k < 3 {
            return bad(format!("k must be at least 3, got {}", self.k));
        }
        if self.steps_per_period == 0 {
            return bad("steps_per_period must be positive".into());
        }
        if self.leading_count == 0 || self.leading_count >= self.k - 1 {
            return bad(format!(
                "leading_count must lie in 1..{}, got {}",
                self.k - 1,
                self.leading_count
            ));
        }
        if self.taylor_order == 0 {
            return bad("taylor_order must be positive".into());
        }
        let n = self.k - 1;
        match &self.initial {
            InitialSet::Reference {
                relative,
                absolute,
                tail_absolute,
                ..
            } => {
                if ![*relative, *absolute, *tail_absolute].iter().all(|x| *x >= 0.0 && x.is_finite()) {
                    return bad("initial box inflation must be finite and nonnegative".into());
                }
            }
            InitialSet::BetaBox(b) | InitialSet::AlphaBox(b) => {
                if b.len() != n {
                    return bad(format!("initial box needs {n} entries, got {}", b.len()));
                }
                if b.iter().any(|[lo, hi]| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
                    return bad("initial box entries must be finite with lo ≤ hi".into());
                }
            }
        }
        if let PeriodicCheck::ExplicitRadii(r) = &self.periodic_check {
            if r.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return bad("explicit radii must be finite and nonnegative".into());
            }
        }
        Ok(())
    }
}
