//! Haar-random unitaries and Monte-Carlo checks of their low-order moments.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{qr_unitary, ComplexMatrix, C64};

/// Seed plus substream index. The pair fixes the entire random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Generator for this `(seed, stream)` pair.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Counter-derived substream, independent of evaluation order.
    pub fn child(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws a `d × d` unitary from the Haar measure: a complex Ginibre matrix
/// followed by QR with the phases of `R`'s diagonal moved into `Q`.
pub fn sample_haar<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "Haar sampling needs d >= 2, got {d}"
        )));
    }
    loop {
        let g = ComplexMatrix::from_fn(d, d, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        // A Ginibre draw is singular with probability zero; retry on the
        // numerically degenerate case instead of failing.
        match qr_unitary(&g) {
            Ok(q) => return Ok(q),
            Err(Error::Singular { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Monte-Carlo estimate of a complex expectation with per-component
/// standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: C64,
    pub std_error_re: f64,
    pub std_error_im: f64,
    pub samples: usize,
}

impl MomentEstimate {
    pub fn from_samples(values: &[C64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<C64>() / n;
        let (var_re, var_im) = values.iter().fold((0.0, 0.0), |(a, b), z| {
            let dz = z - mean;
            (a + dz.re * dz.re, b + dz.im * dz.im)
        });
        let denom = (n - 1.0).max(1.0);
        Self {
            mean,
            std_error_re: (var_re / denom / n).sqrt(),
            std_error_im: (var_im / denom / n).sqrt(),
            samples: values.len(),
        }
    }

    /// Whether both components lie within `k` standard errors of `expected`.
    pub fn within(&self, expected: C64, k: f64) -> bool {
        (self.mean.re - expected.re).abs() <= k * self.std_error_re
            && (self.mean.im - expected.im).abs() <= k * self.std_error_im
    }
}

const MIN_MOMENT_SAMPLES: usize = 100;

fn check_indices(d: usize, indices: &[usize]) -> Result<()> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= d) {
        return Err(Error::InvalidParameter(format!(
            "matrix index {bad} out of range for d = {d}"
        )));
    }
    Ok(())
}

fn estimate<F>(d: usize, n_samples: usize, seed: RngSeed, f: F) -> Result<MomentEstimate>
where
    F: Fn(&ComplexMatrix) -> C64,
{
    if n_samples < MIN_MOMENT_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_MOMENT_SAMPLES,
            got: n_samples,
        });
    }
    let mut rng = seed.rng();
    let mut values = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        values.push(f(&sample_haar(d, &mut rng)?));
    }
    Ok(MomentEstimate::from_samples(&values))
}

/// Estimates `E[U_ij U*_kl]` (zero-based indices).
pub fn haar_moment2_estimate(
    d: usize,
    (i, j, k, l): (usize, usize, usize, usize),
    n_samples: usize,
    seed: RngSeed,
) -> Result<MomentEstimate> {
    check_indices(d, &[i, j, k, l])?;
    estimate(d, n_samples, seed, |u| u.get(i, j) * u.get(k, l).conj())
}

/// Estimates `E[U_ij U_kl U*_i'j' U*_k'l']`, indices given as
/// `[i, j, k, l, i', j', k', l']` (zero-based).
pub fn haar_moment4_estimate(
    d: usize,
    idx: [usize; 8],
    n_samples: usize,
    seed: RngSeed,
) -> Result<MomentEstimate> {
    check_indices(d, &idx)?;
    let [i, j, k, l, ip, jp, kp, lp] = idx;
    estimate(d, n_samples, seed, |u| {
        u.get(i, j) * u.get(k, l) * u.get(ip, jp).conj() * u.get(kp, lp).conj()
    })
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Exact `E[U_ij U*_kl] = δ_ik δ_jl / d`.
pub fn haar_moment2_exact(d: usize, (i, j, k, l): (usize, usize, usize, usize)) -> f64 {
    delta(i, k) * delta(j, l) / d as f64
}

/// Exact fourth moment from the Weingarten calculus for `U(d)`.
pub fn haar_moment4_exact(d: usize, idx: [usize; 8]) -> f64 {
    let [i, j, k, l, ip, jp, kp, lp] = idx;
    let d = d as f64;
    let direct = delta(i, ip) * delta(k, kp);
    let swapped = delta(i, kp) * delta(k, ip);
    let plus = direct * delta(j, jp) * delta(l, lp) + swapped * delta(j, lp) * delta(l, jp);
    let minus = direct * delta(j, lp) * delta(l, jp) + swapped * delta(j, jp) * delta(l, lp);
    plus / (d * d - 1.0) - minus / (d * (d * d - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_unitary() {
        let mut rng = RngSeed::new(1, 0).rng();
        for d in [2, 3, 8, 16] {
            for _ in 0..5 {
                assert!(sample_haar(d, &mut rng).unwrap().is_unitary(1e-10));
            }
        }
    }

    #[test]
    fn rejects_small_dimension() {
        let mut rng = RngSeed::new(1, 0).rng();
        assert!(matches!(sample_haar(1, &mut rng), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn identical_seed_identical_sequence() {
        let seed = RngSeed::new(42, 7);
        let (mut a, mut b) = (seed.rng(), seed.rng());
        for _ in 0..3 {
            let ua = sample_haar(4, &mut a).unwrap();
            let ub = sample_haar(4, &mut b).unwrap();
            assert_eq!(ua.entries_row_major(), ub.entries_row_major());
        }
        let mut other = RngSeed::new(42, 8).rng();
        assert_ne!(
            sample_haar(4, &mut seed.rng()).unwrap().entries_row_major(),
            sample_haar(4, &mut other).unwrap().entries_row_major()
        );
    }

    #[test]
    fn children_are_distinct_and_stable() {
        let base = RngSeed::new(3, 0);
        assert_eq!(base.child(5), base.child(5));
        let streams: std::collections::HashSet<u64> =
            (0..1000).map(|i| base.child(i).stream).collect();
        assert_eq!(streams.len(), 1000);
    }

    #[test]
    fn first_moment_diagonal() {
        let est = haar_moment2_estimate(4, (0, 0, 0, 0), 10_000, RngSeed::new(7, 1)).unwrap();
        assert!(est.within(C64::new(0.25, 0.0), 3.0), "{est:?}");
        let est = haar_moment2_estimate(2, (0, 0, 0, 0), 10_000, RngSeed::new(7, 2)).unwrap();
        assert!(est.within(C64::new(0.5, 0.0), 3.0), "{est:?}");
    }

    #[test]
    fn first_moment_off_diagonal_vanishes() {
        let est = haar_moment2_estimate(3, (0, 1, 2, 1), 10_000, RngSeed::new(7, 3)).unwrap();
        assert!(est.within(C64::new(0.0, 0.0), 3.0), "{est:?}");
    }

    #[test]
    fn fourth_moment_closed_form_values() {
        // E|U_ij|^4 = 2 / (d(d+1)).
        for d in 2..6 {
            let v = haar_moment4_exact(d, [0, 0, 0, 0, 0, 0, 0, 0]);
            assert!((v - 2.0 / (d * (d + 1)) as f64).abs() < 1e-15);
        }
        assert!((haar_moment4_exact(2, [0; 8]) - 1.0 / 3.0).abs() < 1e-15);
        // E|U_11|^2 |U_22|^2 = 1 / (d^2 - 1).
        assert!((haar_moment4_exact(3, [0, 0, 1, 1, 0, 0, 1, 1]) - 0.125).abs() < 1e-15);
        // E[U_11 U_22 U*_12 U*_21] = -1 / (d (d^2 - 1)).
        assert!((haar_moment4_exact(3, [0, 0, 1, 1, 0, 1, 1, 0]) + 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn fourth_moment_monte_carlo() {
        let cases: [(usize, [usize; 8]); 4] = [
            (3, [0, 0, 0, 0, 0, 0, 0, 0]),
            (3, [0, 0, 1, 1, 0, 0, 1, 1]),
            (2, [0, 0, 0, 0, 0, 0, 0, 0]),
            (4, [0, 1, 2, 3, 1, 0, 3, 2]),
        ];
        for (s, (d, idx)) in cases.into_iter().enumerate() {
            let est = haar_moment4_estimate(d, idx, 10_000, RngSeed::new(9, s as u64)).unwrap();
            let exact = haar_moment4_exact(d, idx);
            assert!(est.within(C64::new(exact, 0.0), 3.0), "{idx:?}: {est:?} vs {exact}");
        }
    }

    #[test]
    fn estimator_errors() {
        assert!(matches!(
            haar_moment2_estimate(2, (0, 0, 0, 0), 10, RngSeed::new(0, 0)),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(haar_moment2_estimate(2, (0, 2, 0, 0), 100, RngSeed::new(0, 0)).is_err());
    }

    #[test]
    fn left_invariance() {
        // Statistics of T·U and U agree for a fixed unitary T.
        let d = 3;
        let n = 10_000;
        let t = sample_haar(d, &mut RngSeed::new(100, 0).rng()).unwrap();
        let mut rng_a = RngSeed::new(100, 1).rng();
        let mut rng_b = RngSeed::new(100, 2).rng();
        let mut plain = Vec::with_capacity(n);
        let mut rotated = Vec::with_capacity(n);
        let mut plain_abs = Vec::with_capacity(n);
        let mut rotated_abs = Vec::with_capacity(n);
        for _ in 0..n {
            let u = sample_haar(d, &mut rng_a).unwrap();
            let v = &t * &sample_haar(d, &mut rng_b).unwrap();
            plain.push(u.get(0, 0));
            rotated.push(v.get(0, 0));
            plain_abs.push(C64::new(u.get(0, 0).norm_sqr(), 0.0));
            rotated_abs.push(C64::new(v.get(0, 0).norm_sqr(), 0.0));
        }
        for (a, b) in [(&plain, &rotated), (&plain_abs, &rotated_abs)] {
            let ea = MomentEstimate::from_samples(a);
            let eb = MomentEstimate::from_samples(b);
            let se_re = ea.std_error_re.hypot(eb.std_error_re);
            let se_im = ea.std_error_im.hypot(eb.std_error_im);
            assert!((ea.mean.re - eb.mean.re).abs() <= 3.0 * se_re);
            assert!((ea.mean.im - eb.mean.im).abs() <= 3.0 * se_im.max(1e-300));
        }
    }
}
