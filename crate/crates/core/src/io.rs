//! Plain-text result formats. Numbers are written with 17 significant
//! digits so files round-trip exactly.

use std::fmt::Write;

use serde::Serialize;

use crate::dynamics::ProbeMask;
use crate::gaussian::GaussianState;
use crate::probes::{FidelityTrace, SpectralDensityCurve};
use crate::symplectic::SymplecticMatrix;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(v: Option<&Vec<f64>>, i: usize) -> String {
    v.map(|v| num(v[i])).unwrap_or_default()
}

/// Matrix with a one-line header naming the size, ordering, time and probe frequency.
pub fn matrix_dump(s: &SymplecticMatrix, t: f64, omega_s: f64) -> String {
    let m = s.modes();
    let mut out = format!(
        "# dim={} modes={} order=q_S,q_1..q_{},p_S,p_1..p_{} t={} omega_s={}\n",
        2 * m,
        m,
        m - 1,
        m - 1,
        num(t),
        num(omega_s)
    );
    for row in s.matrix().row_iter() {
        let line: Vec<String> = row.iter().map(|x| num(*x)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// `mode,q,p` rows; mode 0 is the probe.
pub fn mask_csv(mask: &ProbeMask) -> String {
    let mut out = String::from("mode,q,p\n");
    for (j, (q, p)) in mask.pairs().enumerate() {
        writeln!(out, "{j},{},{}", num(q), num(p)).unwrap();
    }
    out
}

pub fn spectral_csv(curve: &SpectralDensityCurve) -> String {
    let mut out = String::from("omega_s,J_analytic,J_probe,stderr\n");
    for (i, w) in curve.omega.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            num(*w),
            opt(curve.j_analytic.as_ref(), i),
            opt(curve.j_probe.as_ref(), i),
            opt(curve.stderr.as_ref(), i)
        )
        .unwrap();
    }
    out
}

pub fn trace_csv(trace: &FidelityTrace) -> String {
    let mut out = String::from("t,F_raw,F_smooth\n");
    for i in 0..trace.t.len() {
        writeln!(out, "{},{},{}", num(trace.t[i]), num(trace.raw[i]), num(trace.smooth[i])).unwrap();
    }
    out
}

pub fn samples_csv(samples: &[f64]) -> String {
    let mut out = String::from("x\n");
    for x in samples {
        out.push_str(&num(*x));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct StateDump {
    modes: usize,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

/// TOML with the mean vector and covariance rows.
pub fn state_dump(state: &GaussianState) -> String {
    let dump = StateDump {
        modes: state.modes(),
        mean: state.mean().iter().copied().collect(),
        cov: state
            .cov()
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
    };
    toml::to_string(&dump).expect("state serializes")
}
