//! Detection of the first low-slope stretch of a decaying `ln κ(t)` trace.
//!
//! Slopes are taken against `ln t`: as `t → 0` the unitaries approach the
//! identity and `κ` diverges like a power of `t`, so the initial drop has a
//! roughly constant slope on that axis. The slope at grid point `k` is the
//! least-squares slope over the five points `k..k+4`. The initial-drop slope
//! is the steepest descent seen on the trace. The plateau starts at the first point after it from which the
//! slope magnitude stays below `PLATEAU_FRACTION` of the initial slope for
//! `PLATEAU_PERSISTENCE` consecutive points.

use crate::error::{Error, Result};

use super::ensemble::EnsembleResult;

pub const SLOPE_WINDOW: usize = 5;
pub const PLATEAU_FRACTION: f64 = 0.2;
pub const PLATEAU_PERSISTENCE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauEstimate {
    /// Start of the plateau, in the units of the time grid.
    pub t_p: f64,
    /// Mean plateau slope magnitude over the initial-drop slope.
    pub slope_ratio: f64,
    /// Steepest descent rate per unit `ln t` before the plateau (positive).
    pub initial_slope: f64,
}

/// Least-squares slopes of `values` against `x` over every window of
/// `SLOPE_WINDOW` points.
pub fn windowed_slopes(x: &[f64], values: &[f64]) -> Vec<f64> {
    let times = x;
    if times.len() < SLOPE_WINDOW {
        return Vec::new();
    }
    times
        .windows(SLOPE_WINDOW)
        .zip(values.windows(SLOPE_WINDOW))
        .map(|(t, v)| {
            let tm = t.iter().sum::<f64>() / SLOPE_WINDOW as f64;
            let vm = v.iter().sum::<f64>() / SLOPE_WINDOW as f64;
            let num: f64 = t.iter().zip(v).map(|(a, b)| (a - tm) * (b - vm)).sum();
            let den: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
            num / den
        })
        .collect()
}

/// Plateau of a trace given as `(times, values)` with positive times;
/// non-finite values are dropped first.
pub fn plateau_of_trace(times: &[f64], values: &[f64]) -> Result<PlateauEstimate> {
    if times.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    let (t, v): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite())
        .map(|(a, b)| (*a, *b))
        .unzip();
    let needed = SLOPE_WINDOW + PLATEAU_PERSISTENCE;
    if t.len() < needed {
        return Err(Error::PlateauNotFound(format!(
            "{} finite points, need at least {needed}",
            t.len()
        )));
    }
    if t.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidParameter("plateau detection needs positive times".into()));
    }
    let log_t: Vec<f64> = t.iter().map(|x| x.ln()).collect();
    let slopes = windowed_slopes(&log_t, &v);
    let (k0, initial_slope) = slopes
        .iter()
        .enumerate()
        .map(|(k, s)| (k, -s))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    if !(initial_slope > 0.0) {
        return Err(Error::PlateauNotFound("trace never decreases".into()));
    }
    let threshold = PLATEAU_FRACTION * initial_slope;
    let mut run = 0;
    for k in k0 + 1..slopes.len() {
        if slopes[k].abs() < threshold {
            run += 1;
            if run == PLATEAU_PERSISTENCE {
                let start = k + 1 - PLATEAU_PERSISTENCE;
                let mean_slope = slopes[start..=k].iter().map(|s| s.abs()).sum::<f64>()
                    / PLATEAU_PERSISTENCE as f64;
                return Ok(PlateauEstimate {
                    t_p: t[start],
                    slope_ratio: mean_slope / initial_slope,
                    initial_slope,
                });
            }
        } else {
            run = 0;
        }
    }
    Err(Error::PlateauNotFound(
        "slope never settles below the plateau threshold".into(),
    ))
}

/// Plateau of the ensemble-mean `ln κ` trace.
pub fn plateau_estimate(result: &EnsembleResult) -> Result<PlateauEstimate> {
    plateau_of_trace(&result.times, &result.mean_logkappa)
}
