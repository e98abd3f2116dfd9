//! Reference densities for the condition number and for the entries of the
//! tomography matrix, with the quadrature and KS machinery used to check
//! them.

pub mod ks;
pub mod quadrature;
pub mod special;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::numerics::RealVector;
pub use ks::KsOutcome;
use special::{ln_bessel_k_half_integer, ln_regularized_upper_gamma_int};

/// Log-mean of the limiting `κ/n` density, `∫ f(x) ln x dx`.
pub const EDELMAN_LOG_MEAN: f64 = 1.537;

/// Absolute tolerance used for CDF quadrature.
pub const CDF_TOLERANCE: f64 = 1e-10;

/// Limiting density of `κ/n` for large real random matrices,
/// `(2x+4)/x³ · exp(−2/x − 2/x²)`.
pub fn edelman_density(x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    ((2.0 * x + 4.0).ln() - 3.0 * x.ln() - 2.0 / x - 2.0 / (x * x)).exp()
}

/// `∫₀^∞ f(x) ln x dx` for the Edelman density, integrated in `u = ln x`.
pub fn edelman_log_mean() -> Result<f64> {
    quadrature::integrate(
        |u| {
            let x = u.exp();
            edelman_density(x) * x * u
        },
        -6.0,
        60.0,
        1e-10,
    )
}

/// Large-`d` prediction `E[ln κ] = ln(d² − 1) + 1.537`.
pub fn expected_logkappa_haar(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "dimension must be at least 2, got {d}"
        )));
    }
    Ok(((d * d - 1) as f64).ln() + EDELMAN_LOG_MEAN)
}

/// Density of the rescaled diagonal-basis entry `ν_n`.
///
/// # Panics
/// If `n == 0`.
pub fn case1_density(n: u64, x: f64) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    let nf = n as f64;
    let ln_pre = (nf - 0.5) * (nf / (nf + 1.0)).ln() + ((nf + 1.0) / nf).sqrt() * x;
    if x < 0.0 {
        return ln_pre.exp();
    }
    let z = (nf + 1.0).powf(1.5) / nf.sqrt() * x;
    (ln_pre + ln_regularized_upper_gamma_int(n, z)).exp()
}

/// `n → ∞` limit of [`case1_density`]: `e^{x−1} Θ(1 − x)`.
pub fn case1_limit_density(x: f64) -> f64 {
    if x <= 1.0 {
        (x - 1.0).exp()
    } else {
        0.0
    }
}

/// Density of an entry of the tomography matrix in the Pauli-product basis
/// for `n_spins` spins: a symmetric Bessel (variance-gamma) law.
///
/// # Panics
/// If `n_spins` is 0 or above 26.
pub fn case2_density(n_spins: u32, x: f64) -> f64 {
    assert!((1..=26).contains(&n_spins), "spin count out of range");
    let scale = (1u64 << n_spins) as f64;
    let a = (1u64 << (2 * n_spins - 1)) as f64;
    let ln_norm = n_spins as f64 * LN_2 - 0.5 * PI.ln() - ln_gamma(a);
    let z = scale * x.abs();
    if z == 0.0 {
        return (ln_norm + ln_gamma(a - 0.5) - LN_2).exp();
    }
    let m = (1u64 << (2 * n_spins - 1)) - 1;
    (ln_norm + (a - 0.5) * (z / 2.0).ln() + ln_bessel_k_half_integer(m, z)).exp()
}

/// Standard normal density.
pub fn std_normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Two-sided exponential `e^{−√2|x|}/√2` (unit variance).
pub fn exponential_sqrt2_density(x: f64) -> f64 {
    (-SQRT_2 * x.abs()).exp() / SQRT_2
}

fn check_gamma_params(params: &[f64]) -> Result<()> {
    if params.iter().all(|p| p.is_finite() && *p > 0.0) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "gamma shape and rate parameters must be positive, got {params:?}"
        )))
    }
}

fn ln_gamma_pdf(shape: f64, rate: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)
}

/// Density of `Z = X − Y` for independent `X ~ Gamma(α₁, rate β₁)` and
/// `Y ~ Gamma(α₂, rate β₂)`, by numerical convolution
/// `f_Z(z) = ∫ f_X(x) f_Y(x − z) dx`.
pub fn gamma_difference_density_numeric(
    alpha1: f64,
    beta1: f64,
    alpha2: f64,
    beta2: f64,
    z: f64,
) -> Result<f64> {
    check_gamma_params(&[alpha1, beta1, alpha2, beta2])?;
    let lo = z.max(0.0);
    quadrature::integrate_to_infinity(
        |x| (ln_gamma_pdf(alpha1, beta1, x) + ln_gamma_pdf(alpha2, beta2, x - z)).exp(),
        lo,
        1e-11,
    )
}

/// One draw of `X − Y` with `X ~ Gamma(α₁, rate β₁)`, `Y ~ Gamma(α₂, rate β₂)`.
pub fn sample_gamma_difference<R: Rng + ?Sized>(
    alpha1: f64,
    beta1: f64,
    alpha2: f64,
    beta2: f64,
    rng: &mut R,
) -> Result<f64> {
    check_gamma_params(&[alpha1, beta1, alpha2, beta2])?;
    let x = Gamma::new(alpha1, 1.0 / beta1).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let y = Gamma::new(alpha2, 1.0 / beta2).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(x.sample(rng) - y.sample(rng))
}

/// Gamma parameters `(α₁, β₁, α₂, β₂)` whose difference has density
/// [`case1_density`]`(n, ·)`.
pub fn case1_gamma_parameters(n: u64) -> (f64, f64, f64, f64) {
    let nf = n as f64;
    (nf, (nf * (nf + 1.0)).sqrt(), 1.0, ((nf + 1.0) / nf).sqrt())
}

/// Gamma parameters whose difference has density [`case2_density`]`(N, ·)`.
pub fn case2_gamma_parameters(n_spins: u32) -> (f64, f64, f64, f64) {
    let a = 4f64.powi(n_spins as i32) / 2.0;
    let b = 2f64.powi(n_spins as i32);
    (a, b, a, b)
}

/// A reference density used in goodness-of-fit checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensitySpec {
    EdelmanKappaOverN,
    Case1Nu(u64),
    Case1Limit,
    Case2Bessel(u32),
    StdNormal,
    ExponentialSqrt2,
}

impl DensitySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DensitySpec::Case1Nu(0) => Err(Error::InvalidParameter("case-1 order must be at least 1".into())),
            DensitySpec::Case2Bessel(n) if !(1..=26).contains(&n) => Err(Error::InvalidParameter(format!(
                "case-2 spin count must lie in 1..=26, got {n}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            DensitySpec::EdelmanKappaOverN => "edelman".into(),
            DensitySpec::Case1Nu(n) => format!("case1-n{n}"),
            DensitySpec::Case1Limit => "case1-limit".into(),
            DensitySpec::Case2Bessel(n) => format!("case2-N{n}"),
            DensitySpec::StdNormal => "std-normal".into(),
            DensitySpec::ExponentialSqrt2 => "exponential-sqrt2".into(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            DensitySpec::EdelmanKappaOverN => edelman_density(x),
            DensitySpec::Case1Nu(n) => case1_density(n, x),
            DensitySpec::Case1Limit => case1_limit_density(x),
            DensitySpec::Case2Bessel(n) => case2_density(n, x),
            DensitySpec::StdNormal => std_normal_density(x),
            DensitySpec::ExponentialSqrt2 => exponential_sqrt2_density(x),
        }
    }

    /// Lower and upper end of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DensitySpec::EdelmanKappaOverN => (0.0, f64::INFINITY),
            DensitySpec::Case1Limit => (f64::NEG_INFINITY, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Points where the density is not smooth; quadrature panels are split there.
    fn breakpoints(&self) -> &'static [f64] {
        match self {
            DensitySpec::Case1Nu(_) | DensitySpec::ExponentialSqrt2 | DensitySpec::Case2Bessel(_) => &[0.0],
            DensitySpec::Case1Limit => &[1.0],
            _ => &[],
        }
    }

    /// `∫ pdf` over the support.
    pub fn total_mass(&self) -> Result<f64> {
        self.validate()?;
        let (lo, hi) = self.support();
        let f = |x: f64| self.pdf(x);
        match (lo.is_finite(), hi.is_finite()) {
            (true, false) => quadrature::integrate_to_infinity(f, lo, 1e-10),
            (false, true) => quadrature::integrate_from_neg_infinity(f, hi, 1e-10),
            _ => quadrature::integrate_real_line(f, 0.0, 1e-10),
        }
    }

    /// CDF at a single point.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sorted(&[x])?[0])
    }

    /// CDF at each point of an ascending sequence, accumulated panel by
    /// panel between consecutive points.
    pub fn cdf_sorted(&self, sorted: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if sorted.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParameter("CDF points must be ascending and finite".into()));
        }
        let (lo, hi) = self.support();
        let f = |x: f64| self.pdf(x);
        let mut out = Vec::with_capacity(sorted.len());
        let mut acc = 0.0;
        let mut prev: Option<f64> = None;
        for &x in sorted {
            let x = x.clamp(lo, hi);
            match prev {
                None => {
                    acc = if lo.is_finite() {
                        self.piecewise_integral(lo, x)?
                    } else {
                        let start = self.breakpoints().iter().copied().fold(x, f64::min);
                        quadrature::integrate_from_neg_infinity(f, start, CDF_TOLERANCE)?
                            + self.piecewise_integral(start, x)?
                    };
                }
                Some(p) => acc += self.piecewise_integral(p, x)?,
            }
            prev = Some(x);
            out.push(acc.clamp(0.0, 1.0));
        }
        Ok(out)
    }

    fn piecewise_integral(&self, a: f64, b: f64) -> Result<f64> {
        if a >= b {
            return Ok(0.0);
        }
        let f = |x: f64| self.pdf(x);
        let mut total = 0.0;
        let mut left = a;
        for &bp in self.breakpoints() {
            if bp > left && bp < b {
                total += quadrature::integrate(f, left, bp, CDF_TOLERANCE)?;
                left = bp;
            }
        }
        Ok(total + quadrature::integrate(f, left, b, CDF_TOLERANCE)?)
    }
}

/// One-sample KS statistic of `samples` against `density`.
pub fn ks_statistic(samples: &RealVector, density: &DensitySpec) -> Result<f64> {
    if samples.len() < ks::MIN_KS_SAMPLES {
        return Err(Error::TooFewSamples {
            required: ks::MIN_KS_SAMPLES,
            got: samples.len(),
        });
    }
    let mut sorted = samples.as_slice().to_vec();
    sorted.sort_by(f64::total_cmp);
    let cdf = density.cdf_sorted(&sorted)?;
    ks::ks_statistic_from_cdf(&sorted, &cdf)
}

/// KS test of `samples` against `density` at level `alpha`.
pub fn ks_test(samples: &RealVector, density: &DensitySpec, alpha: f64) -> Result<KsOutcome> {
    Ok(KsOutcome {
        statistic: ks_statistic(samples, density)?,
        critical_value: ks::ks_critical_value(samples.len(), alpha),
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::RngSeed;

    fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
    }

    #[test]
    fn edelman_density_basics() {
        assert_eq!(edelman_density(0.0), 0.0);
        assert_eq!(edelman_density(-1.0), 0.0);
        assert!(edelman_density(1e-3) < 1e-300);
        let mass = DensitySpec::EdelmanKappaOverN.total_mass().unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn edelman_cdf_matches_closed_form() {
        // d/dx exp(−2/x − 2/x²) is the density itself.
        let xs: Vec<f64> = grid(0.2, 40.0, 50).collect();
        let cdf = DensitySpec::EdelmanKappaOverN.cdf_sorted(&xs).unwrap();
        for (x, c) in xs.iter().zip(cdf) {
            let exact = (-2.0 / x - 2.0 / (x * x)).exp();
            assert!((c - exact).abs() < 1e-9, "x={x}: {c} vs {exact}");
        }
    }

    #[test]
    fn edelman_log_mean_reproduces_constant() {
        let v = edelman_log_mean().unwrap();
        assert!((v - EDELMAN_LOG_MEAN).abs() < 1e-3, "{v}");
        // Frozen value of the integral itself.
        assert!((v - 1.537_09).abs() < 1e-4, "{v}");
    }

    #[test]
    fn expected_logkappa_values() {
        assert!((expected_logkappa_haar(4).unwrap() - 4.245).abs() < 1e-3);
        assert!((expected_logkappa_haar(2).unwrap() - 2.636).abs() < 1e-3);
        assert!((expected_logkappa_haar(64).unwrap() - 9.855).abs() < 1e-3);
        assert!(matches!(expected_logkappa_haar(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn case1_n1_is_two_sided_exponential() {
        for x in grid(-5.0, 5.0, 101) {
            let a = case1_density(1, x);
            let b = exponential_sqrt2_density(x);
            assert!((a - b).abs() < 1e-14, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn case1_approaches_heaviside_limit() {
        let n = 1_000_000;
        assert!((case1_density(n, 0.5) - case1_limit_density(0.5)).abs() < 1e-3);
        for x in grid(-3.0, 3.0, 61) {
            if (x - 1.0).abs() < 0.05 {
                continue;
            }
            let a = case1_density(n, x);
            let b = case1_limit_density(x);
            assert!((a - b).abs() < 1e-3, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn densities_are_normalised() {
        let specs = [
            DensitySpec::Case1Nu(1),
            DensitySpec::Case1Nu(2),
            DensitySpec::Case1Nu(5),
            DensitySpec::Case1Nu(20),
            DensitySpec::Case1Limit,
            DensitySpec::Case2Bessel(1),
            DensitySpec::Case2Bessel(2),
            DensitySpec::Case2Bessel(3),
            DensitySpec::Case2Bessel(5),
            DensitySpec::StdNormal,
            DensitySpec::ExponentialSqrt2,
        ];
        for spec in specs {
            let mass = spec.total_mass().unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "{spec:?}: {mass}");
        }
    }

    #[test]
    fn case2_n1_closed_form() {
        // Difference of two Gamma(2, rate 2) variables: (|x| + 1/2) e^{−2|x|}.
        for x in grid(-4.0, 4.0, 81) {
            let exact = (x.abs() + 0.5) * (-2.0 * x.abs()).exp();
            assert!((case2_density(1, x) - exact).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn case2_symmetric_and_nearly_normal() {
        for x in grid(-6.0, 6.0, 121) {
            for n in 1..=5 {
                let (a, b) = (case2_density(n, x), case2_density(n, -x));
                assert!((a - b).abs() <= 1e-15 * a.max(1e-300), "N={n} x={x}");
            }
        }
        let sup3 = grid(-6.0, 6.0, 1201)
            .map(|x| (case2_density(3, x) - std_normal_density(x)).abs())
            .fold(0.0, f64::max);
        // Independent oracle (scipy convolution): 4.7525e-3. Excess kurtosis
        // 3/32 keeps the N = 3 law this far from the normal.
        assert!((sup3 - 4.7525e-3).abs() < 1e-6, "{sup3}");
        for x in grid(-3.0, 3.0, 61) {
            assert!((case2_density(5, x) - std_normal_density(x)).abs() < 1e-3, "x={x}");
        }
    }

    #[test]
    fn case2_continuous_at_origin() {
        for n in 1..=4 {
            let at = case2_density(n, 0.0);
            let near = case2_density(n, 1e-9);
            assert!((at - near).abs() < 1e-6 * at, "N={n}: {at} vs {near}");
        }
    }

    #[test]
    fn laplace_from_convolution() {
        for z in grid(-4.0, 4.0, 33) {
            let v = gamma_difference_density_numeric(1.0, 1.0, 1.0, 1.0, z).unwrap();
            assert!((v - 0.5 * (-z.abs()).exp()).abs() < 1e-9, "z={z}");
        }
        assert!(gamma_difference_density_numeric(0.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn closed_forms_match_convolution() {
        // 200-point grid over ±6 standard deviations (all unit variance).
        for n in [1u64, 3, 10] {
            let (a1, b1, a2, b2) = case1_gamma_parameters(n);
            for x in grid(-6.0, 6.0, 200) {
                let oracle = gamma_difference_density_numeric(a1, b1, a2, b2, x).unwrap();
                let closed = case1_density(n, x);
                assert!((oracle - closed).abs() < 1e-6, "n={n} x={x}: {oracle} vs {closed}");
            }
        }
        for n_spins in [1u32, 2, 3] {
            let (a1, b1, a2, b2) = case2_gamma_parameters(n_spins);
            for x in grid(-6.0, 6.0, 200) {
                let oracle = gamma_difference_density_numeric(a1, b1, a2, b2, x).unwrap();
                let closed = case2_density(n_spins, x);
                assert!((oracle - closed).abs() < 1e-6, "N={n_spins} x={x}: {oracle} vs {closed}");
            }
        }
    }

    #[test]
    fn normal_cdf_through_quadrature() {
        let xs: Vec<f64> = grid(-5.0, 5.0, 41).collect();
        let cdf = DensitySpec::StdNormal.cdf_sorted(&xs).unwrap();
        for (x, c) in xs.iter().zip(cdf) {
            let exact = 0.5 * statrs::function::erf::erfc(-x / SQRT_2);
            assert!((c - exact).abs() < 1e-9, "x={x}");
        }
        let limit = DensitySpec::Case1Limit.cdf_sorted(&[-2.0, 0.0, 0.999, 1.0, 3.0]).unwrap();
        for (x, c) in [-2.0f64, 0.0, 0.999, 1.0, 1.0].iter().zip(limit) {
            assert!((c - (x - 1.0).exp()).abs() < 1e-9, "x={x}");
        }
    }

    fn draws(spec_params: (f64, f64, f64, f64), n: usize, seed: u64) -> RealVector {
        let mut rng = RngSeed::new(seed, 0).rng();
        let (a1, b1, a2, b2) = spec_params;
        RealVector::new(
            (0..n)
                .map(|_| sample_gamma_difference(a1, b1, a2, b2, &mut rng).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn ks_accepts_own_samples() {
        let n = 10_000;
        let crit = ks::ks_critical_value(n, 0.01);
        let s = draws(case1_gamma_parameters(1), n, 11);
        assert!(ks_statistic(&s, &DensitySpec::Case1Nu(1)).unwrap() <= crit);
        let s = draws(case2_gamma_parameters(2), n, 12);
        assert!(ks_statistic(&s, &DensitySpec::Case2Bessel(2)).unwrap() <= crit);
    }

    #[test]
    fn ks_rejects_constant_samples() {
        let s = RealVector::new(vec![0.5; 500]).unwrap();
        let d = ks_statistic(&s, &DensitySpec::StdNormal).unwrap();
        assert!(d > 0.6);
        let s = RealVector::new(vec![50.0; 500]).unwrap();
        assert!(ks_statistic(&s, &DensitySpec::StdNormal).unwrap() > 0.99);
        assert!(matches!(
            ks_statistic(&RealVector::new(vec![0.0; 5]).unwrap(), &DensitySpec::StdNormal),
            Err(Error::TooFewSamples { .. })
        ));
    }
}
