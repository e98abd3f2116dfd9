//! Dense complex linear algebra used by every other module.
//!
//! [`ComplexMatrix`] is a thin newtype over a `nalgebra` matrix of
//! `Complex64`. The decompositions come from `nalgebra`; this module adds the
//! conventions the rest of the crate relies on (ascending eigenvalues,
//! descending singular values, a positive-real `R` diagonal for QR) and the
//! tolerance checks.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Absolute tolerances shared by all numerical checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Entrywise bound on `|A - A^dagger|` for a matrix to count as Hermitian.
    pub hermitian_tol: f64,
    /// Entrywise bound on `|U^dagger U - 1|`.
    pub unitary_tol: f64,
    /// `s_min / s_max` below which a linear system is rejected as singular.
    pub singular_ratio: f64,
    /// Largest imaginary part that may be dropped when a result is real by construction.
    pub imag_residue_tol: f64,
    /// Tolerance on Hermiticity and unit trace of density matrices.
    pub density_tol: f64,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        hermitian_tol: 1e-12,
        unitary_tol: 1e-10,
        singular_ratio: 1e-13,
        imag_residue_tol: 1e-10,
        density_tol: 1e-10,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!("{rows}x{cols} matrix")));
        }
        if entries.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_real_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// The outer product `|i><j|` in dimension `d` (zero-based indices).
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(d, d);
        m.0[(i, j)] = ONE;
        m
    }

    pub fn from_inner(inner: DMatrix<C64>) -> Self {
        Self(inner)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    pub fn entries_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * C64::new(factor, 0.0))
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let n = self.rows();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// Largest entrywise modulus of `self − self^dagger`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Largest entrywise modulus of `U^dagger U − 1`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = self.0.adjoint() * &self.0;
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.0.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm, i.e. the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        svd_values(self).as_slice().first().copied().unwrap_or(0.0)
    }

    /// Real part of every entry, assuming the caller has checked [`Self::max_imag`].
    pub fn real_part(&self) -> DMatrix<f64> {
        self.0.map(|z| z.re)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let x = DVector::from_column_slice(v);
        (&self.0 * x).iter().copied().collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{}) ", self.rows(), self.cols())?;
        f.debug_list().entries(self.entries_row_major()).finish()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Vector of finite real numbers (Bloch vectors, measurement records).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if let Some(bad) = components.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "vector component {bad} is not finite"
            )));
        }
        Ok(Self(components))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn from_vec_unchecked(v: Vec<f64>) -> Self {
        debug_assert!(v.iter().all(|x| x.is_finite()));
        Self(v)
    }
}

impl Index<usize> for RealVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_square(a: &ComplexMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

fn check_hermitian(a: &ComplexMatrix, tol: f64) -> Result<()> {
    check_square(a)?;
    let deviation = a.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The columns of the returned matrix are the matching orthonormal
/// eigenvectors, so `A = V diag(λ) V^dagger`.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<(RealVector, ComplexMatrix)> {
    check_hermitian(a, NumericPolicy::DEFAULT.hermitian_tol)?;
    Ok(hermitian_eig_unchecked(a))
}

pub(crate) fn hermitian_eig_unchecked(a: &ComplexMatrix) -> (RealVector, ComplexMatrix) {
    let n = a.rows();
    // Symmetrise so that rounding noise below the tolerance does not leak
    // into the decomposition.
    let sym = (&a.0 + a.0.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (RealVector::from_vec_unchecked(values), ComplexMatrix(vectors))
}

/// Singular values in descending order.
pub fn svd_values(a: &ComplexMatrix) -> RealVector {
    let svd = nalgebra::SVD::new(a.0.clone(), false, false);
    sorted_descending(svd.singular_values.iter().copied().collect())
}

/// Singular values of a real matrix in descending order.
pub fn real_svd_values(a: &DMatrix<f64>) -> RealVector {
    let svd = nalgebra::SVD::new(a.clone(), false, false);
    sorted_descending(svd.singular_values.iter().copied().collect())
}

fn sorted_descending(mut v: Vec<f64>) -> RealVector {
    v.sort_by(|a, b| b.total_cmp(a));
    RealVector::from_vec_unchecked(v)
}

/// `exp(−iHt)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    check_hermitian(h, NumericPolicy::DEFAULT.hermitian_tol)?;
    Ok(expm_i_hermitian_unchecked(h, t))
}

pub(crate) fn expm_i_hermitian_unchecked(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eig_unchecked(h);
    let n = h.rows();
    let v = &vectors.0;
    let mut scaled = v.clone();
    for (c, &lambda) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lambda * t);
        for r in 0..n {
            scaled[(r, c)] *= phase;
        }
    }
    ComplexMatrix(scaled * v.adjoint())
}

/// Solves the real square system `A x = y`, where `A` is stored complex but
/// must have negligible imaginary parts.
pub fn solve_linear(a: &ComplexMatrix, y: &RealVector) -> Result<RealVector> {
    check_square(a)?;
    let residue = a.max_imag();
    if residue > NumericPolicy::DEFAULT.imag_residue_tol {
        return Err(Error::NotReal { residue });
    }
    solve_real(&a.real_part(), y)
}

/// Solves a real square system through the SVD, rejecting it when
/// `s_min < singular_ratio · s_max`.
pub fn solve_real(a: &DMatrix<f64>, y: &RealVector) -> Result<RealVector> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if y.len() != a.nrows() {
        return Err(Error::LengthMismatch {
            expected: a.nrows(),
            got: y.len(),
        });
    }
    let svd = nalgebra::SVD::new(a.clone(), true, true);
    let s = &svd.singular_values;
    let s_max = s.max();
    let s_min = s.min();
    let ratio = if s_max > 0.0 { s_min / s_max } else { 0.0 };
    if ratio < NumericPolicy::DEFAULT.singular_ratio {
        return Err(Error::Singular { ratio });
    }
    let b = DVector::from_column_slice(y.as_slice());
    let x = svd
        .solve(&b, 0.0)
        .map_err(|_| Error::Singular { ratio })?;
    RealVector::new(x.iter().copied().collect())
}

/// The `Q` factor of `G = QR` with the phases of `R`'s diagonal absorbed into
/// `Q`, so that `R` has a positive real diagonal.
pub fn qr_unitary(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_square(g)?;
    let n = g.rows();
    let qr = g.0.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    let scale = (0..n).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    for i in 0..n {
        let rii = r[(i, i)];
        let modulus = rii.norm();
        if modulus == 0.0 || modulus < NumericPolicy::DEFAULT.singular_ratio * scale {
            return Err(Error::Singular {
                ratio: if scale > 0.0 { modulus / scale } else { 0.0 },
            });
        }
        let phase = rii / modulus;
        for row in 0..n {
            q[(row, i)] *= phase;
        }
    }
    Ok(ComplexMatrix(q))
}
