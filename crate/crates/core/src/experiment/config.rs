//! Experiment configuration: per-experiment defaults overridden by a JSON
//! file whose unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bases::BasisKind;
use crate::control::{DEFAULT_FOURIER_TERMS, DEFAULT_G_OVER_H, ISING_SEGMENT, MULTILEVEL_SEGMENT};
use crate::error::{Error, Result};

/// Base seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_200_105;

/// Largest multilevel / Haar dimension run without `large`.
pub const DESK_MAX_DIM: usize = 16;
/// Largest Ising chain run without `large`.
pub const DESK_MAX_SPINS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    HaarScaling,
    TimeTraceMultilevel,
    TimeTraceIsing,
    DistributionCheck,
    ControllabilityCheck,
    ReconstructDemo,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::HaarScaling => "haar_scaling",
            ExperimentKind::TimeTraceMultilevel => "time_trace_multilevel",
            ExperimentKind::TimeTraceIsing => "time_trace_ising",
            ExperimentKind::DistributionCheck => "distribution_check",
            ExperimentKind::ControllabilityCheck => "controllability_check",
            ExperimentKind::ReconstructDemo => "reconstruct_demo",
        }
    }

    pub fn is_time_trace(self) -> bool {
        matches!(self, ExperimentKind::TimeTraceMultilevel | ExperimentKind::TimeTraceIsing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    PiecewiseConstant,
    TruncatedFourier,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::PiecewiseConstant => "piecewise",
            FieldKind::TruncatedFourier => "fourier",
        }
    }
}

/// How the `d² − 1` unitaries of one time-trace realization are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryMode {
    /// Independent field realizations, each evolved to the sample time.
    Independent,
    /// One field; `Uₙ = U(n t / (d² − 1))`.
    Trajectory,
}

impl UnitaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitaryMode::Independent => "independent",
            UnitaryMode::Trajectory => "trajectory",
        }
    }
}

/// Sample grid: explicit times, `n_times` equally spaced points on
/// `(0, t_max]`, or `n_times` log-spaced points on `[t_min, t_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Explicit(Vec<f64>),
    Uniform { t_max: f64, n_times: usize },
    Geometric { t_min: f64, t_max: f64, n_times: usize },
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        match self {
            TimeGrid::Explicit(t) => t.clone(),
            TimeGrid::Uniform { t_max, n_times } => (1..=*n_times)
                .map(|k| t_max * k as f64 / *n_times as f64)
                .collect(),
            TimeGrid::Geometric { t_min, t_max, n_times } => {
                if *n_times == 1 {
                    return vec![*t_max];
                }
                let ratio = (t_max / t_min).ln() / (*n_times - 1) as f64;
                (0..*n_times)
                    .map(|k| if k + 1 == *n_times { *t_max } else { t_min * (ratio * k as f64).exp() })
                    .collect()
            }
        }
    }
}

/// A complete, validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Multilevel / Haar dimensions, or the dimension used by the check.
    pub dims: Vec<usize>,
    /// Ising chain lengths.
    pub spins: Vec<usize>,
    pub bases: Vec<BasisKind>,
    pub h: f64,
    pub g: f64,
    /// Segment length `Δt` of piecewise fields, in units of `1/h`.
    pub segment: f64,
    pub field: FieldKind,
    pub fourier_terms: usize,
    /// Frequency cutoff `Ω`; defaults to `g`.
    pub cutoff: f64,
    pub grid: TimeGrid,
    pub n_realizations: usize,
    pub noise_sigmas: Vec<f64>,
    pub n_samples: usize,
    pub alpha: f64,
    pub max_depth: Option<usize>,
    pub mode: UnitaryMode,
    pub seed: u64,
    pub large: bool,
    pub out_dir: Option<PathBuf>,
}

/// JSON overrides; every key is optional and unknown keys are errors.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Overrides {
    experiment: Option<ExperimentKind>,
    dims: Option<Vec<usize>>,
    spins: Option<Vec<usize>>,
    bases: Option<Vec<BasisKind>>,
    h: Option<f64>,
    g: Option<f64>,
    segment: Option<f64>,
    field: Option<FieldKind>,
    fourier_terms: Option<usize>,
    cutoff: Option<f64>,
    times: Option<Vec<f64>>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    n_times: Option<usize>,
    n_realizations: Option<usize>,
    noise_sigmas: Option<Vec<f64>>,
    n_samples: Option<usize>,
    alpha: Option<f64>,
    max_depth: Option<usize>,
    mode: Option<UnitaryMode>,
    seed: Option<u64>,
    large: Option<bool>,
    out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for `kind`, mirroring the desk-scale reproduction.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let h = 1.0;
        let g = DEFAULT_G_OVER_H * h;
        let mut cfg = Self {
            experiment: kind,
            dims: Vec::new(),
            spins: Vec::new(),
            bases: vec![BasisKind::GellMann, BasisKind::PauliProduct],
            h,
            g,
            segment: MULTILEVEL_SEGMENT / h,
            field: FieldKind::PiecewiseConstant,
            fourier_terms: DEFAULT_FOURIER_TERMS,
            cutoff: g,
            grid: TimeGrid::Uniform { t_max: 100.0, n_times: 200 },
            n_realizations: 100,
            noise_sigmas: Vec::new(),
            n_samples: 10_000,
            alpha: 0.01,
            max_depth: None,
            mode: UnitaryMode::Independent,
            seed: DEFAULT_SEED,
            large: false,
            out_dir: None,
        };
        match kind {
            ExperimentKind::HaarScaling => {
                cfg.dims = vec![2, 4, 8, 16];
                cfg.n_realizations = 1000;
            }
            ExperimentKind::TimeTraceMultilevel => {
                cfg.dims = vec![4, 8];
                cfg.grid = TimeGrid::Geometric { t_min: 0.2, t_max: 30.0, n_times: 80 };
            }
            ExperimentKind::TimeTraceIsing => {
                cfg.spins = vec![2, 3];
                cfg.segment = ISING_SEGMENT / h;
                cfg.grid = TimeGrid::Geometric { t_min: 0.5, t_max: 50.0, n_times: 30 };
            }
            ExperimentKind::DistributionCheck => {
                cfg.dims = vec![32];
                cfg.spins = vec![2, 3];
            }
            ExperimentKind::ControllabilityCheck => {
                cfg.dims = vec![2, 3, 4, 5, 6];
                cfg.spins = vec![2, 3];
            }
            ExperimentKind::ReconstructDemo => {
                cfg.dims = vec![4];
                cfg.n_realizations = 200;
                cfg.noise_sigmas = vec![0.0, 1e-4, 2e-4, 1e-3, 2e-3, 1e-2];
            }
        }
        cfg
    }

    /// Applies a JSON document on top of the defaults of `kind`.
    ///
    /// A time-trace file may switch between the multilevel and Ising
    /// experiments; any other `experiment` value must match `kind`.
    pub fn from_json(kind: ExperimentKind, text: &str) -> Result<Self> {
        let o: Overrides = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        let kind = match o.experiment {
            None => kind,
            Some(k) if k == kind || (k.is_time_trace() && kind.is_time_trace()) => k,
            Some(k) => {
                return Err(Error::InvalidParameter(format!(
                    "config is for experiment {}, not {}",
                    k.as_str(),
                    kind.as_str()
                )))
            }
        };
        let mut cfg = Self::defaults(kind);
        let g_given = o.g.is_some();
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = o.$field { cfg.$field = v; } )* };
        }
        take!(dims, spins, bases, h, g, segment, field, fourier_terms, cutoff, n_realizations);
        take!(noise_sigmas, n_samples, alpha, mode, seed, large);
        if o.max_depth.is_some() {
            cfg.max_depth = o.max_depth;
        }
        if o.out_dir.is_some() {
            cfg.out_dir = o.out_dir;
        }
        if o.cutoff.is_none() && g_given {
            cfg.cutoff = cfg.g;
        }
        let (t0, n0) = match cfg.grid {
            TimeGrid::Uniform { t_max, n_times } | TimeGrid::Geometric { t_max, n_times, .. } => (t_max, n_times),
            TimeGrid::Explicit(ref t) => (t.last().copied().unwrap_or(1.0), t.len()),
        };
        match (o.times, o.t_min, o.t_max, o.n_times) {
            (Some(t), None, None, None) => cfg.grid = TimeGrid::Explicit(t),
            (Some(_), ..) => {
                return Err(Error::InvalidParameter(
                    "config: give either `times` or `t_min`/`t_max`/`n_times`, not both".into(),
                ))
            }
            (None, Some(t_min), t_max, n_times) => {
                cfg.grid = TimeGrid::Geometric {
                    t_min,
                    t_max: t_max.unwrap_or(t0),
                    n_times: n_times.unwrap_or(n0),
                }
            }
            (None, None, t_max, n_times) => {
                if t_max.is_some() || n_times.is_some() {
                    cfg.grid = TimeGrid::Uniform {
                        t_max: t_max.unwrap_or(t0),
                        n_times: n_times.unwrap_or(n0),
                    };
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks parameter ranges and the desk-scale caps.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        for (name, v) in [("h", self.h), ("g", self.g), ("segment", self.segment), ("cutoff", self.cutoff)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.n_realizations == 0 {
            return bad("n_realizations must be at least 1".into());
        }
        if self.fourier_terms == 0 {
            return bad("fourier_terms must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let Some(s) = self.noise_sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return bad(format!("noise levels must be non-negative, got {s}"));
        }
        let times = self.grid.times();
        if times.is_empty() {
            return bad("sample grid is empty".into());
        }
        if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("sample grid must be positive and strictly increasing".into());
        }
        if let Some(d) = self.dims.iter().find(|d| **d < 2) {
            return bad(format!("dimensions must be at least 2, got {d}"));
        }
        if let Some(n) = self.spins.iter().find(|n| **n < 1) {
            return bad(format!("spin counts must be at least 1, got {n}"));
        }
        if self.experiment == ExperimentKind::TimeTraceIsing || self.experiment == ExperimentKind::ControllabilityCheck {
            if let Some(n) = self.spins.iter().find(|n| **n < 2 || **n > 8) {
                return bad(format!("Ising chains need 2..=8 spins, got {n}"));
            }
        }
        if self.experiment == ExperimentKind::DistributionCheck {
            if let Some(n) = self.spins.iter().find(|n| **n > 8) {
                return bad(format!("at most 8 spins supported, got {n}"));
            }
        }
        if !self.large {
            let dim_cap = match self.experiment {
                // Only one row of a unitary enters each sample here.
                ExperimentKind::DistributionCheck => 64,
                _ => DESK_MAX_DIM,
            };
            if let Some(d) = self.dims.iter().find(|d| **d > dim_cap) {
                return bad(format!("dimension {d} exceeds the desk-scale cap {dim_cap}; pass --large"));
            }
            if self.experiment != ExperimentKind::DistributionCheck {
                if let Some(n) = self.spins.iter().find(|n| **n > DESK_MAX_SPINS) {
                    return bad(format!(
                        "{n} spins exceed the desk-scale cap {DESK_MAX_SPINS}; pass --large"
                    ));
                }
            }
        }
        if self.experiment == ExperimentKind::HaarScaling && self.bases.is_empty() {
            return bad("at least one basis kind is required".into());
        }
        Ok(())
    }
}
