//! Control systems `H(t) = H₀ + f(t) H_c`, random control fields and
//! propagation of `U̇ = −i H(t) U`.
//!
//! Piecewise-constant fields are propagated exactly, one Hermitian
//! exponential per segment. Truncated-Fourier fields are held constant over
//! steps of a caller-supplied length (zero-order hold, sampled at the left
//! end of each step) and then treated the same way.

use std::f64::consts::TAU;

use rand::Rng;

use crate::bases::pauli;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig_unchecked, ComplexMatrix, NumericPolicy, RealVector, C64};

/// Ratio `g/h` used by all time-trace experiments.
pub const DEFAULT_G_OVER_H: f64 = 10.0;
/// Segment length `hΔt` for the multilevel system.
pub const MULTILEVEL_SEGMENT: f64 = 0.1;
/// Segment length `hΔt` for the Ising chain.
pub const ISING_SEGMENT: f64 = 0.01;
/// Number of terms in a truncated-Fourier field.
pub const DEFAULT_FOURIER_TERMS: usize = 20;
/// Zero-order-hold step for Fourier fields, as a fraction of the segment length.
pub const HOLD_STEP_FRACTION: f64 = 0.1;

/// Boundaries closer than this fraction of a segment are treated as equal.
const SNAP_FRACTION: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ControlSystem {
    drift: ComplexMatrix,
    control: ComplexMatrix,
}

impl ControlSystem {
    pub fn new(drift: ComplexMatrix, control: ComplexMatrix) -> Result<Self> {
        let tol = NumericPolicy::DEFAULT.hermitian_tol;
        for m in [&drift, &control] {
            if !m.is_square() {
                return Err(Error::NotSquare {
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
            let deviation = m.hermitian_deviation();
            if deviation > tol {
                return Err(Error::NotHermitian { deviation });
            }
        }
        if drift.rows() != control.rows() {
            return Err(Error::DimensionMismatch(format!(
                "drift is {}x{}, control is {}x{}",
                drift.rows(),
                drift.cols(),
                control.rows(),
                control.cols()
            )));
        }
        Ok(Self { drift, control })
    }

    pub fn drift(&self) -> &ComplexMatrix {
        &self.drift
    }

    pub fn control(&self) -> &ComplexMatrix {
        &self.control
    }

    pub fn dim(&self) -> usize {
        self.drift.rows()
    }

    /// `H₀ + f H_c`.
    pub fn hamiltonian(&self, f: f64) -> ComplexMatrix {
        &self.drift + &self.control.scale(f)
    }
}

/// Chain of `d` levels with hopping `h` between neighbours, controlled by an
/// energy shift `g` of the first level.
pub fn multilevel_system(d: usize, h: f64, g: f64) -> Result<ControlSystem> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "multilevel system needs d >= 2, got {d}"
        )));
    }
    if !(h > 0.0) || !g.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need h > 0 and finite g, got h = {h}, g = {g}"
        )));
    }
    let drift = ComplexMatrix::from_fn(d, d, |i, j| {
        if i.abs_diff(j) == 1 {
            C64::new(h, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let control = ComplexMatrix::unit(d, 0, 0).scale(g);
    ControlSystem::new(drift, control)
}

/// `op` acting on spin `site` (zero-based, spin 0 is the leftmost tensor factor).
pub fn single_site(op: &ComplexMatrix, site: usize, n_spins: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    (0..n_spins)
        .map(|s| if s == site { op } else { &id })
        .skip(1)
        .fold(if site == 0 { op.clone() } else { id.clone() }, |acc, m| {
            acc.kron(m)
        })
}

/// Ising chain with a transverse field in the x-z plane, controlled through
/// `σˣ` on the first spin.
pub fn ising_system(n_spins: usize, h: f64, g: f64) -> Result<ControlSystem> {
    if !(2..=8).contains(&n_spins) {
        return Err(Error::InvalidDimension(format!(
            "Ising chain needs 2 <= N <= 8 spins, got {n_spins}"
        )));
    }
    if !(h > 0.0) || !g.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need h > 0 and finite g, got h = {h}, g = {g}"
        )));
    }
    let (sx, sz) = (pauli(1), pauli(3));
    let d = 1 << n_spins;
    let mut drift = ComplexMatrix::zeros(d, d);
    for n in 0..n_spins - 1 {
        let zz = &single_site(&sz, n, n_spins) * &single_site(&sz, n + 1, n_spins);
        drift = &drift + &zz;
    }
    for n in 0..n_spins {
        drift = &drift + &single_site(&sx, n, n_spins);
        drift = &drift + &single_site(&sz, n, n_spins);
    }
    let control = single_site(&sx, 0, n_spins).scale(g);
    ControlSystem::new(drift.scale(h), control)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseField {
    values: Vec<f64>,
    segment: f64,
}

impl PiecewiseField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn segment(&self) -> f64 {
        self.segment
    }

    pub fn duration(&self) -> f64 {
        self.values.len() as f64 * self.segment
    }
}

/// `f(t) = Σ F_k cos(ω_k t + φ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    amplitudes: Vec<f64>,
    frequencies: Vec<f64>,
    phases: Vec<f64>,
    cutoff: f64,
}

impl FourierField {
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.frequencies)
            .zip(&self.phases)
            .map(|((a, w), p)| a * (w * t + p).cos())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlField {
    PiecewiseConstant(PiecewiseField),
    TruncatedFourier(FourierField),
}

impl ControlField {
    pub fn piecewise(values: Vec<f64>, segment: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("field needs at least one segment".into()));
        }
        if !(segment > 0.0 && segment.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "segment length must be positive, got {segment}"
            )));
        }
        if let Some(v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "segment value {v} outside [-1, 1]"
            )));
        }
        Ok(Self::PiecewiseConstant(PiecewiseField { values, segment }))
    }

    pub fn fourier(
        amplitudes: Vec<f64>,
        frequencies: Vec<f64>,
        phases: Vec<f64>,
        cutoff: f64,
    ) -> Result<Self> {
        let k = amplitudes.len();
        if k == 0 || frequencies.len() != k || phases.len() != k {
            return Err(Error::InvalidParameter(format!(
                "Fourier field needs K >= 1 matching terms, got {}/{}/{}",
                k,
                frequencies.len(),
                phases.len()
            )));
        }
        let total: f64 = amplitudes.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Fourier amplitudes sum to {total}, expected 1"
            )));
        }
        if frequencies.iter().any(|w| !(0.0..=cutoff).contains(w)) {
            return Err(Error::InvalidParameter(format!(
                "frequencies must lie in [0, {cutoff}]"
            )));
        }
        if phases.iter().any(|p| !(0.0..TAU).contains(p)) {
            return Err(Error::InvalidParameter("phases must lie in [0, 2π)".into()));
        }
        Ok(Self::TruncatedFourier(FourierField {
            amplitudes,
            frequencies,
            phases,
            cutoff,
        }))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            ControlField::PiecewiseConstant(p) => {
                let idx = ((t / p.segment).floor().max(0.0) as usize).min(p.values.len() - 1);
                p.values[idx]
            }
            ControlField::TruncatedFourier(f) => f.value(t),
        }
    }

    /// Latest time the field is defined for, `None` if unbounded.
    pub fn support(&self) -> Option<f64> {
        match self {
            ControlField::PiecewiseConstant(p) => Some(p.duration()),
            ControlField::TruncatedFourier(_) => None,
        }
    }
}

/// I.i.d. `Uniform[−1, 1]` segment values.
pub fn sample_piecewise_field<R: Rng + ?Sized>(
    n_segments: usize,
    segment: f64,
    rng: &mut R,
) -> Result<ControlField> {
    if n_segments == 0 {
        return Err(Error::InvalidParameter("need at least one segment".into()));
    }
    let values = (0..n_segments).map(|_| rng.random_range(-1.0..=1.0)).collect();
    ControlField::piecewise(values, segment)
}

/// Random truncated-Fourier field: amplitudes uniform then normalised to sum
/// one, frequencies uniform on `[0, Ω]`, phases uniform on `[0, 2π)`.
pub fn sample_fourier_field<R: Rng + ?Sized>(
    terms: usize,
    cutoff: f64,
    rng: &mut R,
) -> Result<ControlField> {
    if terms == 0 {
        return Err(Error::InvalidParameter("need K >= 1 Fourier terms".into()));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "frequency cutoff must be positive, got {cutoff}"
        )));
    }
    // Uniform on (0, 1] so the normalisation never divides by zero.
    let raw: Vec<f64> = (0..terms).map(|_| 1.0 - rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let mut amplitudes: Vec<f64> = raw.iter().map(|a| a / total).collect();
    // Push the rounding residue into the largest term.
    let residue = 1.0 - amplitudes.iter().sum::<f64>();
    let largest = (0..terms)
        .max_by(|&a, &b| amplitudes[a].total_cmp(&amplitudes[b]))
        .unwrap_or(0);
    amplitudes[largest] += residue;
    let frequencies = (0..terms).map(|_| rng.random_range(0.0..=cutoff)).collect();
    let phases = (0..terms).map(|_| rng.random_range(0.0..TAU)).collect();
    ControlField::fourier(amplitudes, frequencies, phases, cutoff)
}

/// Unitaries at the requested sample times.
#[derive(Debug, Clone)]
pub struct PropagatorTrace {
    pub times: Vec<f64>,
    pub unitaries: Vec<ComplexMatrix>,
}

/// Eigen-decomposition of one segment Hamiltonian, reused when a sample time
/// splits the segment.
struct SegmentGenerator {
    values: RealVector,
    vectors: ComplexMatrix,
}

impl SegmentGenerator {
    fn new(h: &ComplexMatrix) -> Self {
        let (values, vectors) = hermitian_eig_unchecked(h);
        Self { values, vectors }
    }

    fn exp(&self, duration: f64) -> ComplexMatrix {
        let n = self.vectors.rows();
        let v = self.vectors.inner();
        let mut scaled = v.clone();
        for (c, &lambda) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lambda * duration);
            for r in 0..n {
                scaled[(r, c)] *= phase;
            }
        }
        ComplexMatrix::from_inner(scaled * v.adjoint())
    }
}

fn validate_times(times: &[f64], limit: Option<f64>, step: f64) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::TimeOutOfRange {
                time: t,
                limit: limit.unwrap_or(f64::INFINITY),
            });
        }
        if t <= prev {
            return Err(Error::InvalidParameter(format!(
                "sample times must be strictly increasing ({prev} then {t})"
            )));
        }
        if let Some(limit) = limit {
            if t > limit + SNAP_FRACTION * step {
                return Err(Error::TimeOutOfRange { time: t, limit });
            }
        }
        prev = t;
    }
    Ok(())
}

/// Propagates the system under `field` and calls `visit(k, t_k, U(t_k))` for
/// every sample time in order.
///
/// `hold_step` is the zero-order-hold step and is required for
/// truncated-Fourier fields; it is ignored for piecewise fields.
pub fn propagate_with<F>(
    system: &ControlSystem,
    field: &ControlField,
    sample_times: &[f64],
    hold_step: Option<f64>,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, f64, &ComplexMatrix),
{
    let (step, limit) = match field {
        ControlField::PiecewiseConstant(p) => (p.segment, Some(p.duration())),
        ControlField::TruncatedFourier(_) => {
            let step = hold_step.ok_or_else(|| {
                Error::InvalidParameter("Fourier fields need a hold step".into())
            })?;
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "hold step must be positive, got {step}"
                )));
            }
            (step, None)
        }
    };
    validate_times(sample_times, limit, step)?;

    let segment_value = |s: usize| match field {
        ControlField::PiecewiseConstant(p) => p.values[s.min(p.values.len() - 1)],
        ControlField::TruncatedFourier(f) => f.value(s as f64 * step),
    };
    let snap = SNAP_FRACTION * step;

    let d = system.dim();
    let mut u = ComplexMatrix::identity(d);
    // Position: segment index plus time already spent inside it.
    let mut segment = 0usize;
    let mut offset = 0.0f64;
    let mut generator: Option<SegmentGenerator> = None;

    for (k, &t) in sample_times.iter().enumerate() {
        loop {
            let now = segment as f64 * step + offset;
            if t - now <= snap {
                break;
            }
            let end = (segment + 1) as f64 * step;
            let gen = generator
                .get_or_insert_with(|| SegmentGenerator::new(&system.hamiltonian(segment_value(segment))));
            if t >= end - snap {
                u = &gen.exp(step - offset) * &u;
                segment += 1;
                offset = 0.0;
                generator = None;
            } else {
                u = &gen.exp(t - now) * &u;
                offset = t - segment as f64 * step;
            }
        }
        visit(k, t, &u);
    }
    Ok(())
}

/// Propagator at each sample time; see [`propagate_with`].
pub fn propagate(
    system: &ControlSystem,
    field: &ControlField,
    sample_times: &[f64],
    hold_step: Option<f64>,
) -> Result<PropagatorTrace> {
    let mut unitaries = Vec::with_capacity(sample_times.len());
    propagate_with(system, field, sample_times, hold_step, |_, _, u| {
        unitaries.push(u.clone())
    })?;
    Ok(PropagatorTrace {
        times: sample_times.to_vec(),
        unitaries,
    })
}
