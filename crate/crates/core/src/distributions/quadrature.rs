//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (i, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// `∫_a^b f(x) dx` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let mut panels = vec![gk15(&f, a, b)];
    loop {
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let value: f64 = panels.iter().map(|p| p.value).sum();
        if !value.is_finite() {
            return Err(Error::QuadratureFailure {
                tolerance: tol,
                estimate: f64::INFINITY,
            });
        }
        if error <= tol {
            return Ok(value);
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure {
                tolerance: tol,
                estimate: error,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("non-empty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval can no longer be split in floating point.
            return Err(Error::QuadratureFailure {
                tolerance: tol,
                estimate: error,
            });
        }
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
}

/// `∫_a^∞ f(x) dx` through `x = a + s/(1 − s)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<f64> {
    integrate(
        |s| {
            let one_minus = 1.0 - s;
            let x = a + s / one_minus;
            let v = f(x) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_{−∞}^b f(x) dx`.
pub fn integrate_from_neg_infinity<F: Fn(f64) -> f64>(f: F, b: f64, tol: f64) -> Result<f64> {
    integrate_to_infinity(|x| f(-x), -b, tol)
}

/// `∫_{−∞}^{∞} f(x) dx`, split at `centre`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, centre: f64, tol: f64) -> Result<f64> {
    let left = integrate_from_neg_infinity(&f, centre, 0.5 * tol)?;
    let right = integrate_to_infinity(&f, centre, 0.5 * tol)?;
    Ok(left + right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(5) - 2.0 * x * x + 1.0, -1.0, 2.0, 1e-14).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - 2.0 * (8.0 + 1.0) / 3.0 + 3.0;
        assert!((v - exact).abs() < 1e-13);
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-10).unwrap(), 0.0);
        assert!((integrate(|x| x, 1.0, 0.0, 1e-12).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn peaked_and_infinite_integrals() {
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-8);

        let gauss = integrate_real_line(|x| (-x * x / 2.0).exp(), 0.0, 1e-12).unwrap();
        assert!((gauss - (2.0 * PI).sqrt()).abs() < 1e-11);

        let tail = integrate_to_infinity(|x| (-x).exp(), 1.0, 1e-12).unwrap();
        assert!((tail - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn divergent_integral_fails() {
        let r = integrate(|x| 1.0 / x.abs().sqrt() / x.abs(), -1.0, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
