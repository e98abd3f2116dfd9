//! Seeded Monte-Carlo ensembles of `ln κ`.
//!
//! Every trial draws from its own counter-derived stream and results are
//! collected in trial order, so the output does not depend on the number of
//! worker threads.

use rayon::prelude::*;

use crate::bases::{BasisKind, OperatorBasis};
use crate::control::{
    ising_system, multilevel_system, propagate_with, sample_fourier_field, sample_piecewise_field,
    ControlField, ControlSystem, HOLD_STEP_FRACTION,
};
use crate::distributions::expected_logkappa_haar;
use crate::error::{Error, Result};
use crate::haar::{sample_haar, RngSeed};
use crate::numerics::ComplexMatrix;
use crate::tomography::{
    condition_number, first_level_projector, first_spin_sigma_z, tomography_row, TomographyMatrix,
    TomographyRow,
};

use super::config::{ExperimentConfig, ExperimentKind, FieldKind, UnitaryMode};

// Stream tags separating the experiments drawn from one base seed.
const TAG_HAAR: u64 = 1;
const TAG_TRACE: u64 = 2;

/// Mean and spread of `ln κ` over the finite trials of one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogKappaStats {
    pub mean: f64,
    pub std_error: f64,
    /// `ln E[κ]`, computed in log space.
    pub log_mean_kappa: f64,
    pub finite: usize,
    pub excluded_infinite: usize,
}

impl LogKappaStats {
    /// Aggregates in the given order; infinite values are excluded and counted.
    pub fn from_log_kappas(values: &[f64]) -> Self {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let n = finite.len();
        let excluded_infinite = values.len() - n;
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                log_mean_kappa: f64::NAN,
                finite: 0,
                excluded_infinite,
            };
        }
        let mean = finite.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        let top = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_mean_kappa =
            top + (finite.iter().map(|v| (v - top).exp()).sum::<f64>() / n as f64).ln();
        Self {
            mean,
            std_error,
            log_mean_kappa,
            finite: n,
            excluded_infinite,
        }
    }
}

/// Observable and basis paired with each basis kind: `|1⟩⟨1|` for the
/// Gell-Mann basis, `σᶻ` on the first spin for Pauli products.
pub fn measurement_setup(kind: BasisKind, d: usize) -> Result<(ComplexMatrix, OperatorBasis)> {
    let basis = OperatorBasis::for_dimension(kind, d)?;
    let observable = match kind {
        BasisKind::GellMann => first_level_projector(d),
        BasisKind::PauliProduct => first_spin_sigma_z(d.trailing_zeros() as usize),
    };
    Ok((observable, basis))
}

/// One row of the Haar-scaling table.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarScalingRow {
    pub basis: BasisKind,
    pub d: usize,
    pub trials: usize,
    pub stats: LogKappaStats,
    pub prediction: f64,
}

impl HaarScalingRow {
    pub fn deviation(&self) -> f64 {
        self.stats.mean - self.prediction
    }
}

/// `ln κ` for `trials` Haar ensembles of `d² − 1` unitaries.
pub fn haar_log_kappas(kind: BasisKind, d: usize, trials: usize, seed: RngSeed) -> Result<Vec<f64>> {
    let (observable, basis) = measurement_setup(kind, d)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed.child(trial).rng();
            let rows = (0..basis.len())
                .map(|_| Ok(tomography_row(&observable, &basis, &sample_haar(d, &mut rng)?)))
                .collect::<Result<Vec<TomographyRow>>>()?;
            Ok(condition_number(&TomographyMatrix::from_rows(&rows)?).ln())
        })
        .collect()
}

fn basis_tag(kind: BasisKind) -> u64 {
    match kind {
        BasisKind::GellMann => 0,
        BasisKind::PauliProduct => 1,
    }
}

/// Mean `ln κ` of Haar ensembles against `ln(d² − 1) + 1.537`, for every
/// configured basis and dimension. Pauli products are skipped for
/// dimensions that are not powers of two.
pub fn run_haar_scaling(cfg: &ExperimentConfig) -> Result<Vec<HaarScalingRow>> {
    cfg.validate()?;
    let base = RngSeed::new(cfg.seed, 0).child(TAG_HAAR);
    let mut rows = Vec::new();
    for &kind in &cfg.bases {
        for &d in &cfg.dims {
            if kind == BasisKind::PauliProduct && !d.is_power_of_two() {
                continue;
            }
            let seed = base.child(basis_tag(kind)).child(d as u64);
            let values = haar_log_kappas(kind, d, cfg.n_realizations, seed)?;
            rows.push(HaarScalingRow {
                basis: kind,
                d,
                trials: cfg.n_realizations,
                stats: LogKappaStats::from_log_kappas(&values),
                prediction: expected_logkappa_haar(d)?,
            });
        }
    }
    Ok(rows)
}

/// A controlled system together with its measurement setup.
#[derive(Debug, Clone)]
pub struct TraceSystem {
    pub label: &'static str,
    /// Chain length for Ising systems, level count otherwise.
    pub size: usize,
    pub system: ControlSystem,
    pub observable: ComplexMatrix,
    pub basis: OperatorBasis,
}

impl TraceSystem {
    pub fn multilevel(d: usize, h: f64, g: f64) -> Result<Self> {
        let (observable, basis) = measurement_setup(BasisKind::GellMann, d)?;
        Ok(Self {
            label: "multilevel",
            size: d,
            system: multilevel_system(d, h, g)?,
            observable,
            basis,
        })
    }

    pub fn ising(n_spins: usize, h: f64, g: f64) -> Result<Self> {
        let d = 1usize << n_spins;
        let (observable, basis) = measurement_setup(BasisKind::PauliProduct, d)?;
        Ok(Self {
            label: "ising",
            size: n_spins,
            system: ising_system(n_spins, h, g)?,
            observable,
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }
}

/// Field and sampling parameters shared by every realization of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub segment: f64,
    pub fourier_terms: usize,
    pub cutoff: f64,
}

impl FieldSpec {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            kind: cfg.field,
            segment: cfg.segment,
            fourier_terms: cfg.fourier_terms,
            cutoff: cfg.cutoff,
        }
    }

    fn sample<R: rand::Rng + ?Sized>(&self, t_max: f64, rng: &mut R) -> Result<ControlField> {
        match self.kind {
            FieldKind::PiecewiseConstant => {
                let n = (t_max / self.segment).ceil() as usize + 1;
                sample_piecewise_field(n, self.segment, rng)
            }
            FieldKind::TruncatedFourier => sample_fourier_field(self.fourier_terms, self.cutoff, rng),
        }
    }

    /// Zero-order-hold step for continuous fields, `Δt/10`.
    fn hold_step(&self) -> Option<f64> {
        match self.kind {
            FieldKind::PiecewiseConstant => None,
            FieldKind::TruncatedFourier => Some(HOLD_STEP_FRACTION * self.segment),
        }
    }
}

/// Ensemble statistics of `ln κ(t)` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub system: &'static str,
    pub size: usize,
    pub dim: usize,
    pub mode: UnitaryMode,
    pub field: FieldKind,
    pub times: Vec<f64>,
    pub mean_logkappa: Vec<f64>,
    pub std_error: Vec<f64>,
    pub log_mean_kappa: Vec<f64>,
    pub excluded_infinite: Vec<usize>,
    pub trial_seeds: Vec<RngSeed>,
    pub prediction: f64,
}

impl EnsembleResult {
    fn from_trials(
        sys: &TraceSystem,
        mode: UnitaryMode,
        field: FieldKind,
        times: &[f64],
        trials: &[Vec<f64>],
        trial_seeds: Vec<RngSeed>,
    ) -> Result<Self> {
        let mut out = Self {
            system: sys.label,
            size: sys.size,
            dim: sys.dim(),
            mode,
            field,
            times: times.to_vec(),
            mean_logkappa: Vec::with_capacity(times.len()),
            std_error: Vec::with_capacity(times.len()),
            log_mean_kappa: Vec::with_capacity(times.len()),
            excluded_infinite: Vec::with_capacity(times.len()),
            trial_seeds,
            prediction: expected_logkappa_haar(sys.dim())?,
        };
        let mut column = vec![0.0; trials.len()];
        for k in 0..times.len() {
            column.iter_mut().zip(trials).for_each(|(c, t)| *c = t[k]);
            let s = LogKappaStats::from_log_kappas(&column);
            out.mean_logkappa.push(s.mean);
            out.std_error.push(s.std_error);
            out.log_mean_kappa.push(s.log_mean_kappa);
            out.excluded_infinite.push(s.excluded_infinite);
        }
        Ok(out)
    }

    /// Last time point with at least one finite trial.
    pub fn terminal(&self) -> Option<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.mean_logkappa)
            .rev()
            .find(|(_, m)| m.is_finite())
            .map(|(t, m)| (*t, *m))
    }
}

/// `ln κ(t)` of one realization: `d² − 1` independent fields, each evolved
/// to every sample time.
fn independent_trial(
    sys: &TraceSystem,
    spec: &FieldSpec,
    times: &[f64],
    seed: RngSeed,
) -> Result<Vec<f64>> {
    let d2 = sys.basis.len();
    let t_max = *times.last().expect("non-empty grid");
    let mut rng = seed.rng();
    let mut rows: Vec<Vec<TomographyRow>> = vec![Vec::with_capacity(d2); times.len()];
    for _ in 0..d2 {
        let field = spec.sample(t_max, &mut rng)?;
        propagate_with(&sys.system, &field, times, spec.hold_step(), |k, _, u| {
            rows[k].push(tomography_row(&sys.observable, &sys.basis, u));
        })?;
    }
    rows.iter()
        .map(|r| Ok(condition_number(&TomographyMatrix::from_rows(r)?).ln()))
        .collect()
}

/// `ln κ(t)` of one realization in trajectory mode: a single field, with
/// `Uₙ = U(n t / (d² − 1))` for `n = 1, …, d² − 1`.
fn trajectory_trial(
    sys: &TraceSystem,
    spec: &FieldSpec,
    times: &[f64],
    seed: RngSeed,
) -> Result<Vec<f64>> {
    let d2 = sys.basis.len();
    let t_max = *times.last().expect("non-empty grid");
    let mut rng = seed.rng();
    let field = spec.sample(t_max, &mut rng)?;
    // (sample time, grid index, row index), propagated in time order.
    let mut samples: Vec<(f64, usize, usize)> = times
        .iter()
        .enumerate()
        .flat_map(|(k, &t)| (1..=d2).map(move |n| (t * n as f64 / d2 as f64, k, n - 1)))
        .collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut unique: Vec<f64> = samples.iter().map(|s| s.0).collect();
    unique.dedup();
    let mut rows: Vec<Vec<Option<TomographyRow>>> = vec![vec![None; d2]; times.len()];
    let mut cursor = 0;
    propagate_with(&sys.system, &field, &unique, spec.hold_step(), |_, t, u| {
        let row = tomography_row(&sys.observable, &sys.basis, u);
        while cursor < samples.len() && samples[cursor].0 == t {
            let (_, k, n) = samples[cursor];
            rows[k][n] = Some(row.clone());
            cursor += 1;
        }
    })?;
    rows.into_iter()
        .map(|r| {
            let r: Vec<TomographyRow> = r.into_iter().map(|x| x.expect("every row visited")).collect();
            Ok(condition_number(&TomographyMatrix::from_rows(&r)?).ln())
        })
        .collect()
}

/// Time trace of `ln κ` for one system.
pub fn time_trace(
    sys: &TraceSystem,
    spec: &FieldSpec,
    mode: UnitaryMode,
    times: &[f64],
    realizations: usize,
    seed: RngSeed,
) -> Result<EnsembleResult> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("sample grid is empty".into()));
    }
    if realizations == 0 {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    let seeds: Vec<RngSeed> = (0..realizations as u64).map(|r| seed.child(r)).collect();
    let trials = seeds
        .par_iter()
        .map(|&s| match mode {
            UnitaryMode::Independent => independent_trial(sys, spec, times, s),
            UnitaryMode::Trajectory => trajectory_trial(sys, spec, times, s),
        })
        .collect::<Result<Vec<_>>>()?;
    EnsembleResult::from_trials(sys, mode, spec.kind, times, &trials, seeds)
}

/// Runs the configured time trace for every dimension (multilevel) or chain
/// length (Ising).
pub fn run_time_trace(cfg: &ExperimentConfig) -> Result<Vec<EnsembleResult>> {
    cfg.validate()?;
    let spec = FieldSpec::from_config(cfg);
    let times = cfg.grid.times();
    let base = RngSeed::new(cfg.seed, 0).child(TAG_TRACE);
    let systems: Vec<TraceSystem> = match cfg.experiment {
        ExperimentKind::TimeTraceMultilevel => cfg
            .dims
            .iter()
            .map(|&d| TraceSystem::multilevel(d, cfg.h, cfg.g))
            .collect::<Result<_>>()?,
        ExperimentKind::TimeTraceIsing => cfg
            .spins
            .iter()
            .map(|&n| TraceSystem::ising(n, cfg.h, cfg.g))
            .collect::<Result<_>>()?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "{} is not a time-trace experiment",
                other.as_str()
            )))
        }
    };
    systems
        .iter()
        .map(|sys| {
            let tag = match cfg.experiment {
                ExperimentKind::TimeTraceIsing => 1,
                _ => 0,
            };
            let seed = base.child(tag).child(sys.size as u64);
            time_trace(sys, &spec, cfg.mode, &times, cfg.n_realizations, seed)
        })
        .collect()
}
