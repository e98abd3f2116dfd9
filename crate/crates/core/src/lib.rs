//! Simulation of random-control quantum-state tomography and the
//! condition-number statistics of its tomography matrix.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] – dense complex linear algebra (eigen/SVD/QR, `exp(−iHt)`).
//! * [`bases`] – Gell-Mann and Pauli-product operator bases, Bloch vectors.
//! * [`haar`] – Haar-random unitaries and seeded random streams.
//! * [`control`] – the multilevel and Ising control systems and their propagators.
//! * [`tomography`] – the tomography matrix, measurement records, reconstruction, `κ`.
//! * [`distributions`] – reference densities, quadrature and KS statistics.
//! * [`lie`] – dynamical Lie-algebra rank test for controllability.
//! * [`experiment`] – seeded ensembles, plateau detection and report output.

pub mod bases;
pub mod control;
pub mod distributions;
pub mod error;
pub mod experiment;
pub mod haar;
pub mod lie;
pub mod numerics;
pub mod tomography;

pub use bases::{BasisKind, OperatorBasis};
pub use control::{ControlField, ControlSystem, PropagatorTrace};
pub use error::{Error, Result};
pub use haar::RngSeed;
pub use numerics::{ComplexMatrix, NumericPolicy, RealVector, C64};
pub use tomography::{TomographyMatrix, TomographySystem};
