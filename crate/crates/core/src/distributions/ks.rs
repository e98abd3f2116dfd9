//! Kolmogorov–Smirnov goodness-of-fit statistics.

use crate::error::{Error, Result};

/// Smallest sample accepted by the one-sample test.
pub const MIN_KS_SAMPLES: usize = 100;

/// Outcome of a KS test at a fixed significance level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
}

impl KsOutcome {
    pub fn passes(&self) -> bool {
        self.statistic <= self.critical_value
    }
}

/// Asymptotic Kolmogorov coefficient `c(α) = √(−½ ln(α/2))`
/// (`c(0.01) ≈ 1.628`).
pub fn kolmogorov_coefficient(alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt()
}

/// Critical value of the one-sample statistic for `n` samples.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    kolmogorov_coefficient(alpha) / (n as f64).sqrt()
}

/// Critical value of the two-sample statistic.
pub fn two_sample_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    kolmogorov_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}

/// Asymptotic p-value `P(√n D > λ)` from the Kolmogorov series.
pub fn kolmogorov_pvalue(statistic: f64, n: usize) -> f64 {
    let lambda = statistic * (n as f64).sqrt();
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Sup-distance between the empirical CDF of `sorted` and reference CDF
/// values evaluated at the same points.
pub fn ks_statistic_from_cdf(sorted: &[f64], cdf: &[f64]) -> Result<f64> {
    if sorted.len() < MIN_KS_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_KS_SAMPLES,
            got: sorted.len(),
        });
    }
    if cdf.len() != sorted.len() {
        return Err(Error::LengthMismatch {
            expected: sorted.len(),
            got: cdf.len(),
        });
    }
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &f) in cdf.iter().enumerate() {
        let below = i as f64 / n;
        let above = (i + 1) as f64 / n;
        d = d.max((above - f).abs()).max((f - below).abs());
    }
    Ok(d)
}

/// Two-sample statistic `sup |F_a − F_b|`.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<f64> {
    for s in [a, b] {
        if s.len() < MIN_KS_SAMPLES {
            return Err(Error::TooFewSamples {
                required: MIN_KS_SAMPLES,
                got: s.len(),
            });
        }
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_matches_table() {
        assert!((kolmogorov_coefficient(0.01) - 1.6276).abs() < 1e-4);
        assert!((kolmogorov_coefficient(0.05) - 1.3581).abs() < 1e-4);
        assert!((ks_critical_value(10_000, 0.01) - 0.016276).abs() < 1e-6);
    }

    #[test]
    fn pvalue_is_consistent_with_coefficient() {
        for alpha in [0.01, 0.05, 0.2] {
            let n = 5000;
            let p = kolmogorov_pvalue(ks_critical_value(n, alpha), n);
            assert!((p - alpha).abs() < 1e-3 * alpha.max(0.01), "{alpha}: {p}");
        }
    }

    #[test]
    fn perfect_uniform_fit() {
        let n = 1000;
        let sorted: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic_from_cdf(&sorted, &sorted).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            ks_statistic_from_cdf(&[0.0; 10], &[0.0; 10]),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn two_sample_extremes() {
        let a: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..200).map(|i| 1000.0 + i as f64).collect();
        assert_eq!(two_sample_ks(&a, &b).unwrap(), 1.0);
        assert_eq!(two_sample_ks(&a, &a).unwrap(), 0.0);
    }
}
