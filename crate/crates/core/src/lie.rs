//! Numerical controllability test: the dimension of the real Lie algebra
//! generated by `iH₀` and `iH_c`.
//!
//! Elements are stored through Hermitian representatives `A` of `iA`; the
//! bracket `[iA, iB]` then corresponds to the Hermitian matrix `i[A, B]`.

use crate::control::ControlSystem;
use crate::numerics::{ComplexMatrix, C64, I};

/// Relative tolerance for accepting a new direction.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LieClosureResult {
    pub dimension: usize,
    pub generators_used: usize,
    /// `false` when `max_depth` was reached while brackets still produced
    /// new directions.
    pub converged: bool,
}

impl LieClosureResult {
    /// Whether the algebra is all of `su(d)`.
    pub fn is_full(&self, d: usize) -> bool {
        self.dimension == d * d - 1
    }
}

struct OrthonormalSpan {
    vectors: Vec<Vec<f64>>,
    elements: Vec<ComplexMatrix>,
}

impl OrthonormalSpan {
    fn new() -> Self {
        Self {
            vectors: Vec::new(),
            elements: Vec::new(),
        }
    }

    /// Adds the component of `m` orthogonal to the span, if it is not
    /// negligible. Returns the index of the new element.
    fn insert(&mut self, m: &ComplexMatrix) -> Option<usize> {
        let mut v = vectorize(m);
        let scale = norm(&v);
        if scale == 0.0 {
            return None;
        }
        // Two Gram–Schmidt passes keep the basis orthogonal to rounding.
        for _ in 0..2 {
            for q in &self.vectors {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let residual = norm(&v);
        if residual <= RANK_TOLERANCE * scale {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= residual);
        self.elements.push(devectorize(&v, m.rows()));
        self.vectors.push(v);
        Some(self.vectors.len() - 1)
    }
}

fn vectorize(m: &ComplexMatrix) -> Vec<f64> {
    m.entries_row_major().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn devectorize(v: &[f64], d: usize) -> ComplexMatrix {
    let entries = v.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
    ComplexMatrix::from_row_major(d, d, entries).expect("length d*d")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn traceless_part(m: &ComplexMatrix) -> ComplexMatrix {
    let d = m.rows();
    let shift = m.trace() / d as f64;
    m - &ComplexMatrix::identity(d).scale_complex(shift)
}

/// Dimension of `Lie(iH₀, iH_c)` restricted to traceless parts, expanding
/// nested brackets with the generators up to `max_depth` levels.
pub fn lie_closure_dimension(system: &ControlSystem, max_depth: usize) -> LieClosureResult {
    let d = system.dim();
    let target = d * d - 1;
    let mut span = OrthonormalSpan::new();
    let generators: Vec<ComplexMatrix> = [system.drift(), system.control()]
        .into_iter()
        .filter_map(|m| span.insert(&traceless_part(m)).map(|i| span.elements[i].clone()))
        .collect();
    let generators_used = generators.len();
    let mut frontier: Vec<usize> = (0..generators_used).collect();

    let mut depth = 0;
    while !frontier.is_empty() && span.vectors.len() < target {
        if depth == max_depth {
            return LieClosureResult {
                dimension: span.vectors.len(),
                generators_used,
                converged: false,
            };
        }
        depth += 1;
        let mut next = Vec::new();
        for &k in &frontier {
            for g in &generators {
                let bracket = g.commutator(&span.elements[k]).scale_complex(I);
                if let Some(idx) = span.insert(&bracket) {
                    next.push(idx);
                    if span.vectors.len() == target {
                        break;
                    }
                }
            }
        }
        frontier = next;
    }
    LieClosureResult {
        dimension: span.vectors.len(),
        generators_used,
        converged: true,
    }
}

/// Depth bound large enough for any system of dimension `d`.
pub fn default_max_depth(d: usize) -> usize {
    d * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::pauli;
    use crate::control::{ising_system, multilevel_system, single_site};
    use crate::haar::{sample_haar, RngSeed};

    fn closure(system: &ControlSystem) -> LieClosureResult {
        lie_closure_dimension(system, default_max_depth(system.dim()))
    }

    #[test]
    fn multilevel_is_fully_controllable() {
        for d in 2..=6 {
            let r = closure(&multilevel_system(d, 1.0, 10.0).unwrap());
            assert_eq!(r.dimension, d * d - 1, "d={d}");
            assert!(r.converged);
            assert_eq!(r.generators_used, 2);
        }
    }

    #[test]
    fn ising_is_fully_controllable() {
        for n in 2..=3 {
            let r = closure(&ising_system(n, 1.0, 10.0).unwrap());
            assert_eq!(r.dimension, (1 << (2 * n)) - 1, "N={n}");
            assert!(r.converged);
        }
    }

    #[test]
    fn degenerate_pair_gives_one_direction() {
        let sys = multilevel_system(3, 1.0, 10.0).unwrap();
        let same = ControlSystem::new(sys.drift().clone(), sys.drift().clone()).unwrap();
        let r = closure(&same);
        assert_eq!(r, LieClosureResult { dimension: 1, generators_used: 1, converged: true });
    }

    #[test]
    fn commuting_diagonal_generators() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 5.0]);
        let b = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0]);
        let r = closure(&ControlSystem::new(a, b).unwrap());
        assert_eq!(r.dimension, 2);
        assert!(r.converged);
    }

    #[test]
    fn depth_exhaustion_is_reported() {
        let r = lie_closure_dimension(&multilevel_system(5, 1.0, 10.0).unwrap(), 1);
        assert!(!r.converged);
        assert!(r.dimension < 24);
    }

    #[test]
    fn invariant_under_rescaling_and_conjugation() {
        let sys = multilevel_system(4, 1.0, 10.0).unwrap();
        let scaled = ControlSystem::new(sys.drift().scale(-3.5), sys.control().scale(0.02)).unwrap();
        assert_eq!(closure(&scaled).dimension, 15);
        let u = sample_haar(4, &mut RngSeed::new(3, 0).rng()).unwrap();
        let conj = |m: &ComplexMatrix| {
            let c = &(&u * m) * &u.adjoint();
            // Remove rounding-level anti-Hermitian noise.
            (&c + &c.adjoint()).scale(0.5)
        };
        let rotated = ControlSystem::new(conj(sys.drift()), conj(sys.control())).unwrap();
        assert_eq!(closure(&rotated).dimension, 15);
    }

    #[test]
    fn first_ising_bracket_is_in_the_algebra() {
        // a₁ ∝ σ₁ʸ + σ₁ʸσ₂ᶻ arises from bracketing the control with the drift.
        let sys = ising_system(2, 1.0, 10.0).unwrap();
        let gens = [traceless_part(sys.drift()), traceless_part(sys.control())];
        let mut span = OrthonormalSpan::new();
        for g in &gens {
            span.insert(g);
        }
        span.insert(&gens[1].commutator(&gens[0]).scale_complex(I));
        let sy = single_site(&pauli(2), 0, 2);
        let a1 = &sy + &(&sy * &single_site(&pauli(3), 1, 2));
        assert!(span.insert(&a1).is_none());
    }
}
