//! Tomography matrix `𝒜ₙₘ = Tr(M Uₙ Bₘ Uₙ^†)`, measurement records,
//! reconstruction and condition numbers.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::bases::{check_density, OperatorBasis};
use crate::error::{Error, Result};
use crate::haar::sample_haar;
use crate::numerics::{
    real_svd_values, solve_real, ComplexMatrix, NumericPolicy, RealVector, C64,
};

/// Observable, basis and the `d² − 1` unitaries that rotate the observable.
#[derive(Debug, Clone)]
pub struct TomographySystem {
    observable: ComplexMatrix,
    basis: OperatorBasis,
    unitaries: Vec<ComplexMatrix>,
}

impl TomographySystem {
    pub fn new(
        observable: ComplexMatrix,
        basis: OperatorBasis,
        unitaries: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let d = basis.dim();
        check_observable(&observable, d)?;
        if unitaries.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "need {} unitaries, got {}",
                basis.len(),
                unitaries.len()
            )));
        }
        if let Some(u) = unitaries.iter().find(|u| u.rows() != d || u.cols() != d) {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, basis dimension is {d}",
                u.rows(),
                u.cols()
            )));
        }
        Ok(Self {
            observable,
            basis,
            unitaries,
        })
    }

    /// System whose unitaries are independent Haar draws.
    pub fn haar<R: Rng + ?Sized>(
        observable: ComplexMatrix,
        basis: OperatorBasis,
        rng: &mut R,
    ) -> Result<Self> {
        let d = basis.dim();
        let unitaries = (0..basis.len())
            .map(|_| sample_haar(d, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(observable, basis, unitaries)
    }

    pub fn observable(&self) -> &ComplexMatrix {
        &self.observable
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

fn check_observable(observable: &ComplexMatrix, d: usize) -> Result<()> {
    if observable.rows() != d || observable.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "observable is {}x{}, basis dimension is {d}",
            observable.rows(),
            observable.cols()
        )));
    }
    let deviation = observable.hermitian_deviation();
    if deviation > NumericPolicy::DEFAULT.hermitian_tol {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// `|1><1|` in dimension `d`.
pub fn first_level_projector(d: usize) -> ComplexMatrix {
    ComplexMatrix::unit(d, 0, 0)
}

/// `σᶻ` on the first of `n_spins` spins.
pub fn first_spin_sigma_z(n_spins: usize) -> ComplexMatrix {
    crate::control::single_site(&crate::bases::pauli(3), 0, n_spins)
}

/// Real tomography matrix together with the largest imaginary part dropped
/// while assembling it.
#[derive(Debug, Clone)]
pub struct TomographyMatrix {
    data: DMatrix<f64>,
    imag_residue: f64,
}

impl TomographyMatrix {
    pub fn from_real(data: DMatrix<f64>) -> Self {
        Self {
            data,
            imag_residue: 0.0,
        }
    }

    /// Assembles the matrix from rows computed elsewhere (one per unitary).
    pub fn from_rows(rows: &[TomographyRow]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.values.len() != n) {
            return Err(Error::DimensionMismatch(
                "tomography rows must form a non-empty square matrix".into(),
            ));
        }
        let imag_residue = rows.iter().map(|r| r.imag_residue).fold(0.0, f64::max);
        if imag_residue > NumericPolicy::DEFAULT.imag_residue_tol {
            return Err(Error::NotReal {
                residue: imag_residue,
            });
        }
        Ok(Self {
            data: DMatrix::from_fn(n, n, |i, j| rows[i].values[j]),
            imag_residue,
        })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn size(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.data[(n, m)]
    }

    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    pub fn apply(&self, x: &RealVector) -> Result<RealVector> {
        if x.len() != self.data.ncols() {
            return Err(Error::LengthMismatch {
                expected: self.data.ncols(),
                got: x.len(),
            });
        }
        let v = &self.data * nalgebra::DVector::from_column_slice(x.as_slice());
        RealVector::new(v.iter().copied().collect())
    }
}

/// One row of `𝒜`, i.e. `Tr(M U Bₘ U^†)` for all `m` with a single `U`.
#[derive(Debug, Clone)]
pub struct TomographyRow {
    pub values: Vec<f64>,
    pub imag_residue: f64,
}

/// `U^† M U`, the observable rotated back by `U`.
fn rotated_observable(observable: &ComplexMatrix, unitary: &ComplexMatrix) -> ComplexMatrix {
    &(&unitary.adjoint() * observable) * unitary
}

/// Row of the tomography matrix for one unitary:
/// `Tr(M U Bₘ U^†) = Tr(W Bₘ)` with `W = U^† M U`.
pub fn tomography_row(
    observable: &ComplexMatrix,
    basis: &OperatorBasis,
    unitary: &ComplexMatrix,
) -> TomographyRow {
    let w = rotated_observable(observable, unitary);
    let mut imag_residue = 0.0f64;
    let values = basis
        .sparse_elements()
        .iter()
        .map(|entries| {
            let z: C64 = entries.iter().map(|&(p, q, b)| w.get(q, p) * b).sum();
            imag_residue = imag_residue.max(z.im.abs());
            z.re
        })
        .collect();
    TomographyRow {
        values,
        imag_residue,
    }
}

/// `𝒜ₙₘ = Re Tr(M Uₙ Bₘ Uₙ^†)`; row `n` uses `Uₙ`, column `m` uses `Bₘ`.
pub fn assemble_a(sys: &TomographySystem) -> Result<TomographyMatrix> {
    let rows: Vec<TomographyRow> = sys
        .unitaries
        .iter()
        .map(|u| tomography_row(&sys.observable, &sys.basis, u))
        .collect();
    TomographyMatrix::from_rows(&rows)
}

/// `yₙ = Tr(M Uₙ ρ Uₙ^†) − Tr(M)/d`.
pub fn measurement_vector(sys: &TomographySystem, rho: &ComplexMatrix) -> Result<RealVector> {
    let d = sys.dim();
    check_density(rho, d)?;
    let offset = sys.observable.trace().re / d as f64;
    let y = sys
        .unitaries
        .iter()
        .map(|u| rotated_observable(&sys.observable, u).trace_product(rho).re - offset)
        .collect();
    RealVector::new(y)
}

/// Adds i.i.d. `N(0, σ²)` noise to every component.
pub fn add_measurement_noise<R: Rng + ?Sized>(
    y: &RealVector,
    sigma: f64,
    rng: &mut R,
) -> Result<RealVector> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(y.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    RealVector::new(y.iter().map(|v| v + normal.sample(rng)).collect())
}

/// Bloch vector `x̂ = 𝒜⁻¹ y`.
pub fn reconstruct(a: &TomographyMatrix, y: &RealVector) -> Result<RealVector> {
    solve_real(&a.data, y)
}

/// `κ = s_max / s_min`, or `+∞` when `𝒜` is numerically rank deficient
/// (`s_min ≤ n · ε · s_max`).
pub fn condition_number(a: &TomographyMatrix) -> f64 {
    kappa_from_singular_values(real_svd_values(&a.data).as_slice())
}

/// Condition number of any real matrix, with the same `+∞` convention.
pub fn condition_number_of(a: &DMatrix<f64>) -> f64 {
    kappa_from_singular_values(real_svd_values(a).as_slice())
}

fn kappa_from_singular_values(s: &[f64]) -> f64 {
    let (Some(&s_max), Some(&s_min)) = (s.first(), s.last()) else {
        return f64::INFINITY;
    };
    let resolvable = s.len() as f64 * f64::EPSILON * s_max;
    if s_max == 0.0 || s_min <= resolvable {
        f64::INFINITY
    } else {
        s_max / s_min
    }
}

/// Natural logarithm of [`condition_number`]; `+∞` propagates.
pub fn log_kappa(a: &TomographyMatrix) -> f64 {
    condition_number(a).ln()
}
