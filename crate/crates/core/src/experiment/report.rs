//! CSV tables and SVG plots. Numbers use Rust's shortest round-trip
//! formatting, so equal results give byte-identical files.

use std::fmt::Write;

use super::checks::{ControlCheckRow, DistributionCheckRow, ReconstructionTrial};
use super::ensemble::{EnsembleResult, HaarScalingRow};
use super::plateau::PlateauEstimate;
use crate::error::Result;

pub fn haar_scaling_csv(rows: &[HaarScalingRow]) -> String {
    let mut s = String::from(
        "basis,d,trials,mean_logkappa,std_error,log_mean_kappa,excluded_infinite,prediction,deviation\n",
    );
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.basis.as_str(),
            r.d,
            r.trials,
            r.stats.mean,
            r.stats.std_error,
            r.stats.log_mean_kappa,
            r.stats.excluded_infinite,
            r.prediction,
            r.deviation()
        )
        .unwrap();
    }
    s
}

pub fn time_trace_csv(results: &[EnsembleResult]) -> String {
    let mut s = String::from(
        "system,size,d,mode,field,t,mean_logkappa,std_error,log_mean_kappa,excluded_infinite,prediction\n",
    );
    for r in results {
        for k in 0..r.times.len() {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.system,
                r.size,
                r.dim,
                r.mode.as_str(),
                r.field.as_str(),
                r.times[k],
                r.mean_logkappa[k],
                r.std_error[k],
                r.log_mean_kappa[k],
                r.excluded_infinite[k],
                r.prediction
            )
            .unwrap();
        }
    }
    s
}

/// Per-realization seeds, so single trials can be replayed.
pub fn trial_seeds_csv(results: &[EnsembleResult]) -> String {
    let mut s = String::from("system,size,trial,seed,stream\n");
    for r in results {
        for (i, seed) in r.trial_seeds.iter().enumerate() {
            writeln!(s, "{},{},{},{},{}", r.system, r.size, i, seed.seed, seed.stream).unwrap();
        }
    }
    s
}

pub fn plateau_csv(results: &[EnsembleResult], estimates: &[Result<PlateauEstimate>]) -> String {
    let mut s = String::from("system,size,d,found,t_p,slope_ratio,initial_slope\n");
    for (r, e) in results.iter().zip(estimates) {
        match e {
            Ok(p) => writeln!(
                s,
                "{},{},{},true,{},{},{}",
                r.system, r.size, r.dim, p.t_p, p.slope_ratio, p.initial_slope
            ),
            Err(_) => writeln!(s, "{},{},{},false,NaN,NaN,NaN", r.system, r.size, r.dim),
        }
        .unwrap();
    }
    s
}

pub fn distribution_csv(rows: &[DistributionCheckRow]) -> String {
    let mut s =
        String::from("test,reference,n_samples,statistic,critical_value,p_value,pass,expect_pass\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.test,
            r.reference,
            r.n_samples,
            r.statistic,
            r.critical_value,
            r.p_value,
            r.pass(),
            r.expect_pass
        )
        .unwrap();
    }
    s
}

pub fn control_csv(rows: &[ControlCheckRow]) -> String {
    let mut s = String::from("system,size,d,dimension,target,generators_used,converged,full\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.system,
            r.size,
            r.dim,
            r.dimension,
            r.target(),
            r.generators_used,
            r.converged,
            r.full()
        )
        .unwrap();
    }
    s
}

pub fn reconstruct_csv(trials: &[ReconstructionTrial]) -> String {
    let mut s = String::from("sigma,trial,kappa,rel_error,rel_noise,bound,within_bound\n");
    for t in trials {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            t.sigma,
            t.trial,
            t.kappa,
            t.rel_error,
            t.rel_noise,
            t.bound(),
            t.within_bound()
        )
        .unwrap();
    }
    s
}

const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot of mean `ln κ` against `t`, one curve per result, with each
/// Haar prediction drawn as a dashed horizontal line.
pub fn time_trace_svg(results: &[EnsembleResult]) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 50.0);
    let points: Vec<(f64, f64)> = results
        .iter()
        .flat_map(|r| r.times.iter().copied().zip(r.mean_logkappa.iter().copied()))
        .filter(|(_, v)| v.is_finite())
        .collect();
    let t_max = points.iter().map(|p| p.0).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut y_lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut y_hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    for r in results {
        y_lo = y_lo.min(r.prediction);
        y_hi = y_hi.max(r.prediction);
    }
    if !(y_hi > y_lo) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    let pad = 0.05 * (y_hi - y_lo);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);
    let px = |t: f64| left + (w - left - right) * t / t_max;
    let py = |v: f64| top + (h - top - bottom) * (y_hi - v) / (y_hi - y_lo);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        h - top - bottom
    )
    .unwrap();
    for i in 0..=5 {
        let t = t_max * i as f64 / 5.0;
        let v = y_lo + (y_hi - y_lo) * i as f64 / 5.0;
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#,
            px(t),
            h - bottom + 18.0,
            t
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.2}</text>"#,
            left - 6.0,
            py(v) + 4.0,
            v
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t</text>"#,
        left + 0.5 * (w - left - right),
        h - 12.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">mean ln κ</text>"#,
        0.5 * h,
        0.5 * h
    )
    .unwrap();
    for (i, r) in results.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let path: Vec<String> = r
            .times
            .iter()
            .zip(&r.mean_logkappa)
            .filter(|(_, v)| v.is_finite())
            .map(|(t, v)| format!("{:.2},{:.2}", px(*t), py(*v)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{left}" x2="{:.2}" y1="{y:.2}" y2="{y:.2}" stroke="{colour}" stroke-dasharray="6 4"/>"#,
            w - right,
            y = py(r.prediction)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{colour}" text-anchor="end">{} {}={}</text>"#,
            w - right - 8.0,
            top + 16.0 * (i + 1) as f64,
            r.system,
            if r.system == "ising" { "N" } else { "d" },
            r.size
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
