//! Orthonormal bases of traceless Hermitian matrices and the conversion
//! between density matrices and generalized Bloch vectors,
//! `ρ = 1/d + Σ xₙ Bₙ` with `xₙ = Tr(Bₙ ρ)`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, NumericPolicy, RealVector, C64, I, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    GellMann,
    PauliProduct,
}

impl BasisKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisKind::GellMann => "gell-mann",
            BasisKind::PauliProduct => "pauli",
        }
    }
}

/// Ordered list of the `d² − 1` basis matrices.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    kind: BasisKind,
    elements: Vec<ComplexMatrix>,
    sparse: Vec<Vec<SparseEntry>>,
}

/// Nonzero entry `(row, col, value)` of a basis matrix.
pub type SparseEntry = (usize, usize, C64);

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Nonzero entries of every element, in element order.
    pub fn sparse_elements(&self) -> &[Vec<SparseEntry>] {
        &self.sparse
    }

    fn from_elements(dim: usize, kind: BasisKind, elements: Vec<ComplexMatrix>) -> Self {
        let sparse = elements
            .iter()
            .map(|m| {
                let mut entries = Vec::new();
                for i in 0..dim {
                    for j in 0..dim {
                        let v = m.get(i, j);
                        if v.norm() > 0.0 {
                            entries.push((i, j, v));
                        }
                    }
                }
                entries
            })
            .collect();
        Self {
            dim,
            kind,
            elements,
            sparse,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Basis of the given kind for Hilbert-space dimension `d`.
    pub fn for_dimension(kind: BasisKind, d: usize) -> Result<Self> {
        match kind {
            BasisKind::GellMann => gellmann_basis(d),
            BasisKind::PauliProduct => {
                if d < 2 || !d.is_power_of_two() {
                    return Err(Error::InvalidDimension(format!(
                        "Pauli product basis needs d = 2^N with N >= 1, got d = {d}"
                    )));
                }
                pauli_basis(d.trailing_zeros() as usize)
            }
        }
    }

    /// Gram matrix `Tr(Bₙ Bₘ)`, row-major.
    pub fn gram(&self) -> Vec<Vec<C64>> {
        self.elements
            .iter()
            .map(|a| self.elements.iter().map(|b| a.trace_product(b)).collect())
            .collect()
    }
}

/// Generalized Gell-Mann basis: symmetric `(j,k)` pairs in lexicographic
/// order, then the antisymmetric ones, then the diagonal matrices.
pub fn gellmann_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "Gell-Mann basis needs d >= 2, got {d}"
        )));
    }
    let mut elements = Vec::with_capacity(d * d - 1);
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (j + 1..d).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d, d);
        m.set(j, k, C64::new(FRAC_1_SQRT_2, 0.0));
        m.set(k, j, C64::new(FRAC_1_SQRT_2, 0.0));
        elements.push(m);
    }
    // (i/√2)(|k><j| − |j><k|)
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d, d);
        m.set(k, j, I * FRAC_1_SQRT_2);
        m.set(j, k, -I * FRAC_1_SQRT_2);
        elements.push(m);
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let diag: Vec<f64> = (0..d)
            .map(|n| match n.cmp(&l) {
                std::cmp::Ordering::Less => norm,
                std::cmp::Ordering::Equal => -(l as f64) * norm,
                std::cmp::Ordering::Greater => 0.0,
            })
            .collect();
        elements.push(ComplexMatrix::from_real_diagonal(&diag));
    }
    Ok(OperatorBasis::from_elements(d, BasisKind::GellMann, elements))
}

/// Single-qubit Pauli matrices indexed `0 = 1, 1 = x, 2 = y, 3 = z`.
pub fn pauli(index: usize) -> ComplexMatrix {
    let e = |a: C64, b: C64, c: C64, d: C64| {
        ComplexMatrix::from_row_major(2, 2, vec![a, b, c, d]).expect("2x2")
    };
    let z = C64::new(0.0, 0.0);
    match index {
        0 => ComplexMatrix::identity(2),
        1 => e(z, ONE, ONE, z),
        2 => e(z, -I, I, z),
        3 => e(ONE, z, z, -ONE),
        _ => panic!("Pauli index {index} out of range"),
    }
}

/// Tensor-product Pauli basis for `n_spins` qubits, scaled by `2^{-N/2}`.
///
/// Element order is base-4 counting over `(k₁, …, k_N)` with `k₁` the most
/// significant digit and the all-identity tuple skipped.
pub fn pauli_basis(n_spins: usize) -> Result<OperatorBasis> {
    if n_spins == 0 {
        return Err(Error::InvalidDimension(
            "Pauli product basis needs at least one spin".into(),
        ));
    }
    if n_spins > 8 {
        return Err(Error::InvalidDimension(format!(
            "{n_spins} spins exceed the supported maximum of 8"
        )));
    }
    let d = 1usize << n_spins;
    let norm = (d as f64).sqrt().recip();
    let paulis: Vec<ComplexMatrix> = (0..4).map(pauli).collect();
    let elements = (1..d * d)
        .map(|code| {
            let digits = pauli_digits(code, n_spins);
            let product = digits[1..]
                .iter()
                .fold(paulis[digits[0]].clone(), |acc, &k| acc.kron(&paulis[k]));
            product.scale(norm)
        })
        .collect();
    Ok(OperatorBasis::from_elements(d, BasisKind::PauliProduct, elements))
}

/// Base-4 digits of `code`, most significant (spin 1) first.
pub fn pauli_digits(code: usize, n_spins: usize) -> Vec<usize> {
    (0..n_spins)
        .rev()
        .map(|pos| (code >> (2 * pos)) & 3)
        .collect()
}

/// `ρ = 1/d + Σ xₙ Bₙ`. Positivity is not checked.
pub fn bloch_to_density(x: &RealVector, basis: &OperatorBasis) -> Result<ComplexMatrix> {
    if x.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: x.len(),
        });
    }
    let d = basis.dim();
    let mut rho = ComplexMatrix::identity(d).scale(1.0 / d as f64);
    for (&xn, b) in x.iter().zip(basis.elements()) {
        if xn != 0.0 {
            rho = &rho + &b.scale(xn);
        }
    }
    Ok(rho)
}

/// `xₙ = Tr(Bₙ ρ)`.
pub fn density_to_bloch(rho: &ComplexMatrix, basis: &OperatorBasis) -> Result<RealVector> {
    check_density(rho, basis.dim())?;
    let x = basis
        .elements()
        .iter()
        .map(|b| b.trace_product(rho).re)
        .collect();
    RealVector::new(x)
}

pub(crate) fn check_density(rho: &ComplexMatrix, d: usize) -> Result<()> {
    let tol = NumericPolicy::DEFAULT.density_tol;
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::NotDensityShaped(format!(
            "expected {d}x{d}, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let deviation = rho.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotDensityShaped(format!(
            "not Hermitian (deviation {deviation:e})"
        )));
    }
    let trace = rho.trace();
    if (trace - ONE).norm() > tol {
        return Err(Error::NotDensityShaped(format!("trace is {trace}")));
    }
    Ok(())
}

/// Smallest eigenvalue of `ρ`; negative values flag non-physical states.
pub fn min_eigenvalue(rho: &ComplexMatrix) -> Result<f64> {
    let (values, _) = crate::numerics::hermitian_eig(rho)?;
    Ok(values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::hermitian_eig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_orthonormal(basis: &OperatorBasis, tol: f64) {
        for (n, row) in basis.gram().iter().enumerate() {
            for (m, g) in row.iter().enumerate() {
                let target = if n == m { 1.0 } else { 0.0 };
                assert!(
                    (g - C64::new(target, 0.0)).norm() <= tol,
                    "Gram[{n}][{m}] = {g}"
                );
            }
        }
    }

    fn assert_traceless_hermitian(basis: &OperatorBasis) {
        for b in basis.elements() {
            assert!(b.is_hermitian(1e-12));
            assert!(b.trace().norm() <= 1e-12);
        }
    }

    #[test]
    fn qubit_gellmann_is_scaled_pauli() {
        let basis = gellmann_basis(2).unwrap();
        assert_eq!(basis.len(), 3);
        for (b, k) in basis.elements().iter().zip(1..4) {
            assert!(b.max_abs_diff(&pauli(k).scale(FRAC_1_SQRT_2)) < 1e-15);
        }
    }

    #[test]
    fn gellmann_d3_orthonormal() {
        let basis = gellmann_basis(3).unwrap();
        assert_eq!(basis.len(), 8);
        assert_orthonormal(&basis, 1e-12);
        assert_traceless_hermitian(&basis);
    }

    #[test]
    fn gellmann_d4_last_diagonal() {
        let basis = gellmann_basis(4).unwrap();
        let last = basis.elements().last().unwrap();
        let s = 1.0 / 12f64.sqrt();
        let expected = ComplexMatrix::from_real_diagonal(&[s, s, s, -3.0 * s]);
        assert!(last.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn gellmann_ordering() {
        let d = 4;
        let basis = gellmann_basis(d).unwrap();
        // First symmetric element couples levels 1 and 2, the last one 3 and 4.
        assert!(basis.elements()[0].get(0, 1).re > 0.0);
        assert!(basis.elements()[5].get(2, 3).re > 0.0);
        // First antisymmetric element: (i/√2)(|2><1| − |1><2|).
        let anti = &basis.elements()[6];
        assert!((anti.get(1, 0) - I * FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((anti.get(0, 1) + I * FRAC_1_SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn invalid_dimensions() {
        assert!(matches!(gellmann_basis(1), Err(Error::InvalidDimension(_))));
        assert!(matches!(pauli_basis(0), Err(Error::InvalidDimension(_))));
        assert!(OperatorBasis::for_dimension(BasisKind::PauliProduct, 6).is_err());
    }

    #[test]
    fn pauli_single_spin() {
        let basis = pauli_basis(1).unwrap();
        for (b, k) in basis.elements().iter().zip(1..4) {
            assert!(b.max_abs_diff(&pauli(k).scale(FRAC_1_SQRT_2)) < 1e-15);
        }
    }

    #[test]
    fn pauli_two_spins() {
        let basis = pauli_basis(2).unwrap();
        assert_eq!(basis.len(), 15);
        for b in basis.elements() {
            assert!((b.trace_product(b) - ONE).norm() < 1e-14);
        }
        // Tuple (z, 0) has code 3·4 + 0 = 12, i.e. index 11 after skipping 0.
        let expected = pauli(3).kron(&ComplexMatrix::identity(2)).scale(0.5);
        assert!(basis.elements()[11].max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn gram_is_identity_for_both_kinds() {
        for d in 2..=16 {
            assert_orthonormal(&gellmann_basis(d).unwrap(), 1e-10);
        }
        for n in 1..=4 {
            let basis = pauli_basis(n).unwrap();
            assert_orthonormal(&basis, 1e-10);
            assert_traceless_hermitian(&basis);
        }
    }

    #[test]
    fn pauli_elements_share_a_spectrum() {
        for n in 1..=3 {
            let basis = pauli_basis(n).unwrap();
            let d = basis.dim();
            let s = (d as f64).sqrt().recip();
            for b in basis.elements() {
                let (values, _) = hermitian_eig(b).unwrap();
                let neg = values.iter().filter(|&&v| (v + s).abs() < 1e-12).count();
                let pos = values.iter().filter(|&&v| (v - s).abs() < 1e-12).count();
                assert_eq!((neg, pos), (d / 2, d / 2));
            }
        }
    }

    #[test]
    fn bloch_conversions_simple() {
        let basis = gellmann_basis(3).unwrap();
        let rho = bloch_to_density(&RealVector::zeros(8), &basis).unwrap();
        assert!(rho
            .max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0))
            < 1e-15);
        let x = density_to_bloch(&rho, &basis).unwrap();
        assert!(x.norm() < 1e-15);

        let qubit = gellmann_basis(2).unwrap();
        let x = RealVector::new(vec![0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let rho = bloch_to_density(&x, &qubit).unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-15);
        let back = density_to_bloch(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0]), &qubit).unwrap();
        assert!(back.distance(&x) < 1e-15);
    }

    #[test]
    fn conversion_errors() {
        let basis = gellmann_basis(2).unwrap();
        assert!(matches!(
            bloch_to_density(&RealVector::zeros(2), &basis),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        ));
        let bad_trace = ComplexMatrix::identity(2);
        assert!(matches!(
            density_to_bloch(&bad_trace, &basis),
            Err(Error::NotDensityShaped(_))
        ));
        let mut skew = ComplexMatrix::identity(2).scale(0.5);
        skew.set(0, 1, ONE);
        assert!(density_to_bloch(&skew, &basis).is_err());
    }

    #[test]
    fn min_eigenvalue_flags_unphysical_states() {
        let basis = gellmann_basis(2).unwrap();
        let x = RealVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        let rho = bloch_to_density(&x, &basis).unwrap();
        assert!(min_eigenvalue(&rho).unwrap() < 0.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn bloch_round_trip(seed in any::<u64>(), d in 2usize..7, pauli_kind in any::<bool>()) {
                let basis = if pauli_kind {
                    pauli_basis((d % 3) + 1).unwrap()
                } else {
                    gellmann_basis(d).unwrap()
                };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x = RealVector::new(
                    (0..basis.len()).map(|_| rng.random_range(-0.3..0.3)).collect(),
                ).unwrap();
                let rho = bloch_to_density(&x, &basis).unwrap();
                prop_assert!(rho.is_hermitian(1e-12));
                prop_assert!((rho.trace() - ONE).norm() < 1e-12);
                let back = density_to_bloch(&rho, &basis).unwrap();
                for (a, b) in back.iter().zip(x.iter()) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
                let again = bloch_to_density(&back, &basis).unwrap();
                prop_assert!(again.max_abs_diff(&rho) < 1e-12);
            }
        }
    }
}
