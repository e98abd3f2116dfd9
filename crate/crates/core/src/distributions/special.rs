//! Special functions needed by the reference densities.

use statrs::function::gamma::ln_gamma;

/// `ln k!`.
pub fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// Regularized upper incomplete gamma `Q(n, z) = e^{−z} Σ_{k<n} z^k / k!`
/// for integer `n ≥ 1`, `z ≥ 0`.
///
/// The sum is evaluated outward from its largest term with every term
/// scaled by that term, so huge `n` and `z` neither overflow nor underflow
/// before the final exponentiation.
pub fn regularized_upper_gamma_int(n: u64, z: f64) -> f64 {
    ln_regularized_upper_gamma_int(n, z).exp().min(1.0)
}

/// `ln Q(n, z)`; finite wherever `Q` underflows.
pub fn ln_regularized_upper_gamma_int(n: u64, z: f64) -> f64 {
    assert!(n >= 1, "order must be at least 1");
    assert!(z >= 0.0, "argument must be non-negative");
    if z == 0.0 {
        return 0.0;
    }
    let last = n - 1;
    let peak = (z.floor() as u64).min(last);
    let ln_peak = -z + peak as f64 * z.ln() - ln_factorial(peak);
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in (peak + 1)..=last {
        term *= z / k as f64;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    term = 1.0;
    for k in (1..=peak).rev() {
        term *= k as f64 / z;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    (ln_peak + sum.ln()).min(0.0)
}

/// Upper incomplete gamma `Γ(n, z) = (n−1)! e^{−z} Σ_{k<n} z^k / k!` for
/// integer `n ≥ 1`.
pub fn incomplete_gamma_int(n: u64, z: f64) -> f64 {
    assert!(n >= 1, "order must be at least 1");
    if n <= 20 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..n {
            term *= z / k as f64;
            sum += term;
        }
        return factorial_small(n - 1) * (-z).exp() * sum;
    }
    (ln_factorial(n - 1) + ln_regularized_upper_gamma_int(n, z)).exp()
}

fn factorial_small(k: u64) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `ln K_{m+1/2}(z)` for integer `m ≥ 0`, `z > 0`, from the terminating
/// series `K_{m+1/2}(z) = √(π/2z) e^{−z} Σ_{k=0}^{m} (m+k)! / (k! (m−k)! (2z)^k)`.
pub fn ln_bessel_k_half_integer(m: u64, z: f64) -> f64 {
    assert!(z > 0.0, "argument must be positive");
    let ln_2z = (2.0 * z).ln();
    let logs: Vec<f64> = (0..=m)
        .map(|k| {
            ln_factorial(m + k) - ln_factorial(k) - ln_factorial(m - k) - k as f64 * ln_2z
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    0.5 * (std::f64::consts::PI / (2.0 * z)).ln() - z + top + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn incomplete_gamma_values() {
        for z in [0.0, 0.3, 1.0, 7.5] {
            assert!((incomplete_gamma_int(1, z) - (-z).exp()).abs() < 1e-15);
        }
        for n in 1..8u64 {
            assert_eq!(incomplete_gamma_int(n, 0.0), factorial_small(n - 1));
        }
        let expected = 10.0 * (-2.0f64).exp();
        assert!((incomplete_gamma_int(3, 2.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn regularized_gamma_matches_statrs() {
        for n in [1u64, 2, 5, 30, 400, 100_000] {
            for frac in [0.0, 0.2, 0.9, 1.0, 1.1, 3.0] {
                let z = frac * n as f64;
                let ours = regularized_upper_gamma_int(n, z);
                let reference = if z == 0.0 {
                    1.0
                } else {
                    statrs::function::gamma::gamma_ur(n as f64, z)
                };
                assert!((ours - reference).abs() < 1e-9, "n={n} z={z}: {ours} vs {reference}");
            }
        }
    }

    #[test]
    fn log_form_survives_underflow() {
        // Q(1, z) = e^{-z}
        assert!((ln_regularized_upper_gamma_int(1, 2000.0) + 2000.0).abs() < 1e-9);
        assert!(ln_regularized_upper_gamma_int(50, 5000.0).is_finite());
    }

    #[test]
    fn large_order_switches_to_log_space() {
        let v = incomplete_gamma_int(25, 3.0);
        let direct = factorial_small(24) * regularized_upper_gamma_int(25, 3.0);
        assert!((v / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bessel_k_low_orders() {
        // K_{1/2}(z) = √(π/2z) e^{−z};  K_{3/2}(z) = K_{1/2}(z) (1 + 1/z).
        for z in [0.1, 1.0, 4.0, 30.0] {
            let k_half = (PI / (2.0 * z)).sqrt() * (-z).exp();
            assert!((ln_bessel_k_half_integer(0, z) - k_half.ln()).abs() < 1e-13);
            let k_three_halves = k_half * (1.0 + 1.0 / z);
            assert!((ln_bessel_k_half_integer(1, z) - k_three_halves.ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn bessel_k_recurrence_at_high_order() {
        // K_{ν+1}(z) = K_{ν−1}(z) + (2ν/z) K_ν(z), checked in log space.
        for (m, z) in [(30u64, 5.0), (200, 40.0), (511, 3.0)] {
            let lo = ln_bessel_k_half_integer(m - 1, z);
            let mid = ln_bessel_k_half_integer(m, z);
            let hi = ln_bessel_k_half_integer(m + 1, z);
            let nu = m as f64 + 0.5;
            let rhs = (lo - hi).exp() + (2.0 * nu / z) * (mid - hi).exp();
            assert!((rhs - 1.0).abs() < 1e-10, "m={m}: {rhs}");
        }
    }
}
