//! Distribution, controllability and reconstruction checks.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bases::{bloch_to_density, density_to_bloch, min_eigenvalue, BasisKind, OperatorBasis};
use crate::control::{ising_system, multilevel_system};
use crate::distributions::{ks, ks_statistic, DensitySpec};
use crate::error::{Error, Result};
use crate::haar::{sample_haar, RngSeed};
use crate::lie::{default_max_depth, lie_closure_dimension};
use crate::numerics::{ComplexMatrix, RealVector, C64};
use crate::tomography::{
    add_measurement_noise, assemble_a, condition_number, measurement_vector, reconstruct,
    TomographySystem,
};

use super::config::{ExperimentConfig, ExperimentKind};
use super::ensemble::measurement_setup;

const TAG_DIST: u64 = 3;
const TAG_RECON: u64 = 4;

/// One goodness-of-fit test.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionCheckRow {
    pub test: String,
    pub reference: String,
    pub n_samples: usize,
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    /// Whether a correct implementation should pass (false for negative
    /// controls).
    pub expect_pass: bool,
}

impl DistributionCheckRow {
    pub fn pass(&self) -> bool {
        self.statistic <= self.critical_value
    }

    pub fn as_expected(&self) -> bool {
        self.pass() == self.expect_pass
    }
}

/// `Tr(M U B U^†)` for a single basis element.
fn entry(observable: &ComplexMatrix, basis: &OperatorBasis, m: usize, u: &ComplexMatrix) -> f64 {
    let w = &(&u.adjoint() * observable) * u;
    basis.sparse_elements()[m]
        .iter()
        .map(|&(p, q, b)| w.get(q, p) * b)
        .sum::<C64>()
        .re
}

/// Index of the `n`-th diagonal Gell-Mann element (`1 ≤ n < d`).
pub fn gellmann_diagonal_index(d: usize, n: usize) -> usize {
    d * (d - 1) + n - 1
}

/// Index of `σᶻ ⊗ 1 ⊗ … ⊗ 1` in the Pauli-product basis.
pub fn pauli_first_z_index(n_spins: usize) -> usize {
    3 * (1usize << (2 * (n_spins - 1))) - 1
}

/// `samples` draws of `scale · 𝒜ₙₘ` for the entry `m` and Haar `U`.
pub fn haar_entry_samples(
    kind: BasisKind,
    d: usize,
    m: usize,
    scale: f64,
    samples: usize,
    seed: RngSeed,
) -> Result<RealVector> {
    let (observable, basis) = measurement_setup(kind, d)?;
    if m >= basis.len() {
        return Err(Error::InvalidParameter(format!(
            "basis index {m} out of range for d = {d}"
        )));
    }
    let values = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let u = sample_haar(d, &mut seed.child(i).rng())?;
            Ok(scale * entry(&observable, &basis, m, &u))
        })
        .collect::<Result<Vec<f64>>>()?;
    RealVector::new(values)
}

fn ks_row(test: String, samples: &RealVector, spec: DensitySpec, alpha: f64, expect_pass: bool) -> Result<DistributionCheckRow> {
    let statistic = ks_statistic(samples, &spec)?;
    Ok(DistributionCheckRow {
        test,
        reference: spec.name(),
        n_samples: samples.len(),
        statistic,
        critical_value: ks::ks_critical_value(samples.len(), alpha),
        p_value: ks::kolmogorov_pvalue(statistic, samples.len()),
        expect_pass,
    })
}

/// Orders of `ν_n` checked at dimension `d`.
fn case1_orders(d: usize) -> Vec<usize> {
    let mut orders = vec![1];
    if d > 4 {
        orders.push(4);
    }
    orders
}

/// KS tests of Haar tomography-matrix entries against the reference
/// densities, followed by a negative control.
///
/// Case 1 (Gell-Mann basis, `M = |1⟩⟨1|`): `ν_n = d · 𝒜` for the `n`-th
/// diagonal element. Case 2 (Pauli basis, `M = σᶻ₁`): `ν = √d · 𝒜` for the
/// `σᶻ₁` entry.
pub fn run_distribution_check(cfg: &ExperimentConfig) -> Result<Vec<DistributionCheckRow>> {
    cfg.validate()?;
    let base = RngSeed::new(cfg.seed, 0).child(TAG_DIST);
    let n = cfg.n_samples;
    let mut rows = Vec::new();
    for &d in &cfg.dims {
        for order in case1_orders(d) {
            let seed = base.child(1).child(d as u64).child(order as u64);
            let m = gellmann_diagonal_index(d, order);
            let s = haar_entry_samples(BasisKind::GellMann, d, m, d as f64, n, seed)?;
            let test = format!("case1 d={d} n={order}");
            rows.push(ks_row(test, &s, DensitySpec::Case1Nu(order as u64), cfg.alpha, true)?);
        }
    }
    for &n_spins in &cfg.spins {
        let d = 1usize << n_spins;
        let seed = base.child(2).child(n_spins as u64);
        let m = pauli_first_z_index(n_spins);
        let s = haar_entry_samples(BasisKind::PauliProduct, d, m, (d as f64).sqrt(), n, seed)?;
        let test = format!("case2 N={n_spins}");
        rows.push(ks_row(test, &s, DensitySpec::Case2Bessel(n_spins as u32), cfg.alpha, true)?);
    }
    if let Some(&n_spins) = cfg.spins.iter().max() {
        // Unit-variance uniform noise must be rejected.
        let mut rng = base.child(3).rng();
        let half_width = 3f64.sqrt();
        let noise: Vec<f64> = (0..n).map(|_| rng.random_range(-half_width..half_width)).collect();
        let s = RealVector::new(noise)?;
        let test = "uniform noise (negative control)".to_string();
        rows.push(ks_row(test, &s, DensitySpec::Case2Bessel(n_spins as u32), cfg.alpha, false)?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlCheckRow {
    pub system: &'static str,
    pub size: usize,
    pub dim: usize,
    pub dimension: usize,
    pub generators_used: usize,
    pub converged: bool,
}

impl ControlCheckRow {
    pub fn target(&self) -> usize {
        self.dim * self.dim - 1
    }

    pub fn full(&self) -> bool {
        self.dimension == self.target()
    }
}

/// Lie-closure dimension of every configured multilevel and Ising system.
pub fn run_control_check(cfg: &ExperimentConfig) -> Result<Vec<ControlCheckRow>> {
    cfg.validate()?;
    let mut systems = Vec::new();
    for &d in &cfg.dims {
        systems.push(("multilevel", d, multilevel_system(d, cfg.h, cfg.g)?));
    }
    for &n in &cfg.spins {
        systems.push(("ising", n, ising_system(n, cfg.h, cfg.g)?));
    }
    Ok(systems
        .into_iter()
        .map(|(system, size, sys)| {
            let dim = sys.dim();
            let r = lie_closure_dimension(&sys, cfg.max_depth.unwrap_or_else(|| default_max_depth(dim)));
            ControlCheckRow {
                system,
                size,
                dim,
                dimension: r.dimension,
                generators_used: r.generators_used,
                converged: r.converged,
            }
        })
        .collect())
}

/// One noisy reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionTrial {
    pub sigma: f64,
    pub trial: usize,
    pub kappa: f64,
    /// `‖x̂ − x‖ / ‖x‖`.
    pub rel_error: f64,
    /// `‖ε‖ / ‖y‖`.
    pub rel_noise: f64,
}

impl ReconstructionTrial {
    /// `κ ‖ε‖ / ‖y‖`, the worst-case relative error.
    pub fn bound(&self) -> f64 {
        self.kappa * self.rel_noise
    }

    pub fn within_bound(&self) -> bool {
        self.rel_error <= self.bound() * (1.0 + 1e-9) + 1e-12
    }
}

/// Random state: a uniformly oriented Bloch vector scaled by a uniform
/// fraction of the largest length that keeps `ρ` positive.
pub fn random_bloch_state<R: Rng + ?Sized>(basis: &OperatorBasis, rng: &mut R) -> Result<RealVector> {
    let mut dir: Vec<f64> = (0..basis.len()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    dir.iter_mut().for_each(|v| *v /= norm);
    let at = |r: f64| -> Result<f64> {
        let x = RealVector::new(dir.iter().map(|v| v * r).collect())?;
        min_eigenvalue(&bloch_to_density(&x, basis)?)
    };
    // Pure states sit at radius √((d−1)/d) < 1, so r = 1 is outside.
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = lo * rng.random::<f64>();
    RealVector::new(dir.into_iter().map(|v| v * r).collect())
}

/// Reconstruction from noisy records for every noise level and trial.
/// Trials at different noise levels use independent draws.
pub fn run_reconstruct_demo(cfg: &ExperimentConfig) -> Result<Vec<ReconstructionTrial>> {
    cfg.validate()?;
    if cfg.experiment != ExperimentKind::ReconstructDemo {
        return Err(Error::InvalidParameter("not a reconstruction config".into()));
    }
    let base = RngSeed::new(cfg.seed, 0).child(TAG_RECON);
    let mut out = Vec::new();
    for &d in &cfg.dims {
        let (observable, basis) = measurement_setup(BasisKind::GellMann, d)?;
        for (si, &sigma) in cfg.noise_sigmas.iter().enumerate() {
            let seed = base.child(d as u64).child(si as u64);
            let trials = (0..cfg.n_realizations)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = seed.child(trial as u64).rng();
                    let sys = TomographySystem::haar(observable.clone(), basis.clone(), &mut rng)?;
                    let a = assemble_a(&sys)?;
                    let x = random_bloch_state(&basis, &mut rng)?;
                    let rho = bloch_to_density(&x, &basis)?;
                    let x = density_to_bloch(&rho, &basis)?;
                    let y = measurement_vector(&sys, &rho)?;
                    let noisy = add_measurement_noise(&y, sigma, &mut rng)?;
                    let x_hat = reconstruct(&a, &noisy)?;
                    Ok(ReconstructionTrial {
                        sigma,
                        trial,
                        kappa: condition_number(&a),
                        rel_error: x_hat.distance(&x) / x.norm(),
                        rel_noise: noisy.distance(&y) / y.norm(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.extend(trials);
        }
    }
    Ok(out)
}

/// Median relative error of the trials at noise level `sigma`.
pub fn median_rel_error(trials: &[ReconstructionTrial], sigma: f64) -> Option<f64> {
    let mut v: Vec<f64> = trials.iter().filter(|t| t.sigma == sigma).map(|t| t.rel_error).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
