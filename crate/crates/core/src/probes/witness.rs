use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::QuadraticModel;
use crate::error::{invalid, Result};
use crate::gaussian::{fidelity, GaussianState, SqueezedSpec};

/// Default smoothing window. Odd so the average stays centered.
pub const DEFAULT_WINDOW: usize = 51;

/// Centered moving average. Near the edges the window is truncated to the
/// available points.
pub fn moving_average(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return invalid(format!("smoothing window must be odd, got {window}"));
    }
    let h = window / 2;
    let n = values.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrace {
    pub omega_s: f64,
    pub t: Vec<f64>,
    pub raw: Vec<f64>,
    pub smooth: Vec<f64>,
    pub window: usize,
    pub rho1: SqueezedSpec,
    pub rho2: SqueezedSpec,
}

/// Fidelity between the two probe states as both evolve with the network
/// starting in vacuum.
pub fn qnm_trace(
    model: &QuadraticModel,
    rho1: &SqueezedSpec,
    rho2: &SqueezedSpec,
    times: &[f64],
    window: usize,
) -> Result<FidelityTrace> {
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("time grid must be non-empty and strictly increasing");
    }
    let s1 = GaussianState::squeezed(rho1)?;
    let s2 = GaussianState::squeezed(rho2)?;
    let m = model.modes();
    let embed = |probe: &GaussianState| {
        let mut cov = DMatrix::identity(2 * m, 2 * m) * 0.5;
        let c = probe.cov();
        cov[(0, 0)] = c[(0, 0)];
        cov[(0, m)] = c[(0, 1)];
        cov[(m, 0)] = c[(1, 0)];
        cov[(m, m)] = c[(1, 1)];
        cov
    };
    let (c1, c2) = (embed(&s1), embed(&s2));
    let raw = times
        .par_iter()
        .map(|&t| {
            let s = model.evolve(t)?;
            let mut rows = DMatrix::zeros(2, 2 * m);
            rows.set_row(0, &s.matrix().row(0));
            rows.set_row(1, &s.matrix().row(m));
            let reduce = |cov: &DMatrix<f64>| {
                let c = &rows * cov * rows.transpose();
                GaussianState::new(nalgebra::DVector::zeros(2), (&c + c.transpose()) * 0.5)
            };
            fidelity(&reduce(&c1)?, &reduce(&c2)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let smooth = moving_average(&raw, window)?;
    Ok(FidelityTrace {
        omega_s: model.probe_omega(),
        t: times.to_vec(),
        raw,
        smooth,
        window,
        rho1: *rho1,
        rho2: *rho2,
    })
}

/// One stretch of consecutive fidelity decreases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessInterval {
    pub t_start: f64,
    pub t_end: f64,
    pub decrease: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub omega_s: f64,
    #[serde(rename = "N")]
    pub value: f64,
    pub intervals: Vec<WitnessInterval>,
    pub smoothed: bool,
    pub window: usize,
    pub points: usize,
    pub t_start: f64,
    pub t_end: f64,
}

/// `sum_i max(0, F_i - F_{i+1})`.
pub fn negative_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[0] - w[1]).max(0.0)).sum()
}

/// Total fidelity decrease along the trace, split into maximal decreasing
/// intervals.
pub fn blp_witness(trace: &FidelityTrace, use_smoothed: bool) -> Result<WitnessReport> {
    let f = if use_smoothed { &trace.smooth } else { &trace.raw };
    if f.len() < 2 {
        return invalid("witness needs at least 2 trace points");
    }
    let mut intervals: Vec<WitnessInterval> = Vec::new();
    let mut open = false;
    for (i, w) in f.windows(2).enumerate() {
        let drop = w[0] - w[1];
        if drop > 0.0 {
            if open {
                let last = intervals.last_mut().unwrap();
                last.t_end = trace.t[i + 1];
                last.decrease += drop;
            } else {
                intervals.push(WitnessInterval {
                    t_start: trace.t[i],
                    t_end: trace.t[i + 1],
                    decrease: drop,
                });
                open = true;
            }
        } else {
            open = false;
        }
    }
    Ok(WitnessReport {
        omega_s: trace.omega_s,
        value: negative_variation(f),
        intervals,
        smoothed: use_smoothed,
        window: trace.window,
        points: f.len(),
        t_start: trace.t[0],
        t_end: *trace.t.last().unwrap(),
    })
}
