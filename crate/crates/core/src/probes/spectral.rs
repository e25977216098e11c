use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::dynamics::QuadraticModel;
use crate::error::{invalid, Error, Result};
use crate::gaussian::{estimate_second_moment, homodyne_sample, GaussianState, Readout};
use crate::netmodel::CouplingGraph;
use crate::seeds;

/// Bose-Einstein occupancy `1 / (e^{omega/T} - 1)`.
pub fn bose_occupancy(omega: f64, temperature: f64) -> f64 {
    1.0 / (omega / temperature).exp_m1()
}

/// How the network is prepared before the probe interacts with it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvironmentPrep {
    /// Exact thermal covariance of the network normal modes.
    #[default]
    Thermal,
    /// Squeezed vacuum in each network normal mode with
    /// `r_n = scale * asinh(sqrt(N(Omega_n)))`; at `scale = 1` the mode
    /// occupancies match the thermal ones. The thermal reference in the
    /// estimate becomes `sinh^2(scale * asinh(sqrt(N(omega_s))))`.
    SqueezedEmulation { scale: f64 },
}

/// Finite-sample readout of `<q_S^2>` and `<p_S^2>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    /// Homodyne shots per quadrature per repetition.
    pub samples: usize,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeOptions {
    pub temperature: f64,
    /// Initial probe occupancy `n0`.
    #[serde(default)]
    pub n0: f64,
    #[serde(default)]
    pub environment: EnvironmentPrep,
    #[serde(default)]
    pub sampling: Option<Sampling>,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            temperature: 1.0,
            n0: 0.0,
            environment: EnvironmentPrep::Thermal,
            sampling: None,
        }
    }
}

/// Excitation-based estimate at one probe frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeEstimate {
    pub j: f64,
    /// Standard error over repetitions, when sampling is enabled.
    pub stderr: Option<f64>,
    /// Exact probe occupancy at `t_max`.
    pub n_probe: f64,
    /// Reference occupancy `N` in the logarithm.
    pub n_thermal: f64,
}

/// Initial covariance of probe plus network in the renormalized frame.
pub fn initial_covariance(
    model: &QuadraticModel,
    temperature: f64,
    n0: f64,
    env: EnvironmentPrep,
) -> Result<DMatrix<f64>> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return invalid(format!("temperature must be positive, got {temperature}"));
    }
    if !(n0 >= 0.0 && n0.is_finite()) {
        return invalid(format!("initial probe occupancy must be >= 0, got {n0}"));
    }
    let m = model.modes();
    let n = m - 1;
    let o = model.env_modes();
    let freqs = model.env_frequencies();
    // (q, p) variances of each normal mode in its own unit-vacuum quadratures
    let per_mode: Vec<(f64, f64)> = match env {
        EnvironmentPrep::Thermal => freqs
            .iter()
            .map(|&w| {
                let v = bose_occupancy(w, temperature) + 0.5;
                (v, v)
            })
            .collect(),
        EnvironmentPrep::SqueezedEmulation { scale } => {
            if !(scale >= 0.0 && scale.is_finite()) {
                return invalid(format!("emulation scale must be >= 0, got {scale}"));
            }
            freqs
                .iter()
                .map(|&w| {
                    let r = scale * bose_occupancy(w, temperature).sqrt().asinh();
                    (0.5 * (-2.0 * r).exp(), 0.5 * (2.0 * r).exp())
                })
                .collect()
        }
    };
    let sqrt_w: Vec<f64> = model.frequencies()[1..].iter().map(|w| w.sqrt()).collect();
    let mut cov = DMatrix::zeros(2 * m, 2 * m);
    cov[(0, 0)] = n0 + 0.5;
    cov[(m, m)] = n0 + 0.5;
    for i in 0..n {
        for j in 0..n {
            let (mut qq, mut pp) = (0.0, 0.0);
            for (k, &(vq, vp)) in per_mode.iter().enumerate() {
                let oo = o[(i, k)] * o[(j, k)];
                qq += oo * vq / freqs[k];
                pp += oo * vp * freqs[k];
            }
            cov[(1 + i, 1 + j)] = qq * sqrt_w[i] * sqrt_w[j];
            cov[(m + 1 + i, m + 1 + j)] = pp / (sqrt_w[i] * sqrt_w[j]);
        }
    }
    Ok(cov)
}

/// Reference occupancy the estimate compares against.
pub fn reference_occupancy(omega_s: f64, temperature: f64, env: EnvironmentPrep) -> f64 {
    let n = bose_occupancy(omega_s, temperature);
    match env {
        EnvironmentPrep::Thermal => n,
        EnvironmentPrep::SqueezedEmulation { scale } => (scale * n.sqrt().asinh()).sinh().powi(2),
    }
}

fn log_estimate(omega_s: f64, t_max: f64, n_ref: f64, n0: f64, n_s: f64) -> Result<f64> {
    if n_s >= n_ref {
        return Err(Error::ProbeSaturated {
            omega_s,
            n_probe: n_s,
            n_thermal: n_ref,
        });
    }
    Ok(omega_s / t_max * ((n_ref - n0) / (n_ref - n_s)).ln())
}

/// `J = (omega_s / t_max) ln[(N - n0) / (N - n_S(t_max))]`, with the probe
/// occupancy taken from the exact evolution or from simulated homodyne data.
pub fn spectral_density_probe(
    model: &QuadraticModel,
    t_max: f64,
    options: &ProbeOptions,
) -> Result<ProbeEstimate> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return invalid(format!("t_max must be positive, got {t_max}"));
    }
    let omega_s = model.probe_omega();
    let n_ref = reference_occupancy(omega_s, options.temperature, options.environment);
    if options.n0 >= n_ref {
        return invalid(format!(
            "initial probe occupancy {} is not below the reference {n_ref}",
            options.n0
        ));
    }
    let cov0 = initial_covariance(model, options.temperature, options.n0, options.environment)?;
    let m = model.modes();
    let s = model.evolve(t_max)?;
    let mut rows = DMatrix::zeros(2, 2 * m);
    rows.set_row(0, &s.matrix().row(0));
    rows.set_row(1, &s.matrix().row(m));
    let probe_cov = &rows * cov0 * rows.transpose();
    let probe_cov = (&probe_cov + probe_cov.transpose()) * 0.5;
    let probe = GaussianState::new(nalgebra::DVector::zeros(2), probe_cov)?;
    let n_probe = probe.mean_photon()?;

    let Some(sampling) = options.sampling else {
        return Ok(ProbeEstimate {
            j: log_estimate(omega_s, t_max, n_ref, options.n0, n_probe)?,
            stderr: None,
            n_probe,
            n_thermal: n_ref,
        });
    };
    if sampling.repetitions < 2 {
        return invalid("sampling needs at least 2 repetitions");
    }
    let mut estimates = Vec::with_capacity(sampling.repetitions);
    for rep in 0..sampling.repetitions as u64 {
        let q = homodyne_sample(&probe, Readout::Q, sampling.samples, seeds::derive(sampling.seed, 2 * rep))?;
        let p = homodyne_sample(&probe, Readout::P, sampling.samples, seeds::derive(sampling.seed, 2 * rep + 1))?;
        let n_s = (estimate_second_moment(&q)?.estimate + estimate_second_moment(&p)?.estimate - 1.0) / 2.0;
        estimates.push(log_estimate(omega_s, t_max, n_ref, options.n0, n_s)?);
    }
    let r = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let var = estimates.iter().map(|j| (j - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Ok(ProbeEstimate {
        j: mean,
        stderr: Some((var / r).sqrt()),
        n_probe,
        n_thermal: n_ref,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Probe,
    #[default]
    Both,
}

impl Method {
    pub fn analytic(self) -> bool {
        matches!(self, Method::Analytic | Method::Both)
    }

    pub fn probe(self) -> bool {
        matches!(self, Method::Probe | Method::Both)
    }
}

/// Spectral density over a probe-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensityCurve {
    pub omega: Vec<f64>,
    pub j_analytic: Option<Vec<f64>>,
    pub j_probe: Option<Vec<f64>>,
    pub stderr: Option<Vec<f64>>,
    pub method: Method,
    pub t_max: f64,
    pub temperature: f64,
}

/// Agreement between the two estimation paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossPathSummary {
    /// Largest `|J_probe - J_analytic| / J_analytic` where `J_analytic`
    /// exceeds `threshold * max J_analytic`.
    pub max_relative_deviation: f64,
    pub pearson: f64,
    pub threshold: f64,
    pub points_compared: usize,
}

impl SpectralDensityCurve {
    pub fn cross_path(&self, threshold: f64) -> Option<CrossPathSummary> {
        let a = self.j_analytic.as_ref()?;
        let p = self.j_probe.as_ref()?;
        let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (x, y) in a.iter().zip(p) {
            if *x > threshold * max {
                worst = worst.max(((y - x) / x).abs());
                count += 1;
            }
        }
        Some(CrossPathSummary {
            max_relative_deviation: worst,
            pearson: pearson(a, p),
            threshold,
            points_compared: count,
        })
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// `points` equally spaced values on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) {
        return invalid(format!("grid needs >= 2 points and lo < hi (got {points} on [{lo}, {hi}])"));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect())
}

/// Evaluates the spectral density at every grid frequency in parallel.
/// With sampling enabled, point `i` draws from the stream derived from
/// the sampling seed and `i`.
pub fn spectral_sweep(
    graph: &CouplingGraph,
    grid: &[f64],
    t_max: f64,
    method: Method,
    options: &ProbeOptions,
) -> Result<SpectralDensityCurve> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.is_empty() {
        return invalid("frequency grid must be non-empty and strictly increasing");
    }
    let points: Vec<(f64, Option<ProbeEstimate>)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &omega_s)| {
            let model = QuadraticModel::assemble(&graph.with_probe_omega(omega_s)?)?;
            let analytic = Kernel::from_model(&model).spectral_density(omega_s, t_max);
            let probe = if method.probe() {
                let mut opts = *options;
                if let Some(s) = opts.sampling.as_mut() {
                    s.seed = seeds::derive(s.seed, i as u64);
                }
                Some(spectral_density_probe(&model, t_max, &opts)?)
            } else {
                None
            };
            Ok((analytic, probe))
        })
        .collect::<Result<_>>()?;

    let j_probe: Option<Vec<f64>> = method
        .probe()
        .then(|| points.iter().map(|(_, p)| p.unwrap().j).collect());
    let stderr = (method.probe() && options.sampling.is_some())
        .then(|| points.iter().map(|(_, p)| p.unwrap().stderr.unwrap()).collect());
    Ok(SpectralDensityCurve {
        omega: grid.to_vec(),
        j_analytic: method.analytic().then(|| points.iter().map(|(a, _)| *a).collect()),
        j_probe,
        stderr,
        method,
        t_max,
        temperature: options.temperature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::ProbeAttachment;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    fn lone(k: f64, omega_s: f64) -> QuadraticModel {
        let mut g = CouplingGraph::new(vec![0.25], BTreeMap::new()).unwrap();
        g.attach_probe(ProbeAttachment {
            site: 0,
            coupling: k,
            omega: omega_s,
        })
        .unwrap();
        QuadraticModel::assemble(&g).unwrap()
    }

    #[test]
    fn occupancy_at_default_temperature() {
        assert_relative_eq!(bose_occupancy(0.25, 1.0), 3.5208, epsilon = 1e-4);
    }

    #[test]
    fn decoupled_probe_stays_put() {
        let m = lone(0.0, 0.3);
        let est = spectral_density_probe(&m, 100.0, &ProbeOptions::default()).unwrap();
        assert!(est.j.abs() < 1e-14);
        assert!(est.n_probe.abs() < 1e-14);
    }

    #[test]
    fn thermal_network_occupancy() {
        let m = lone(0.0, 0.3);
        let cov = initial_covariance(&m, 1.0, 0.0, EnvironmentPrep::Thermal).unwrap();
        let n = bose_occupancy(0.25, 1.0);
        assert_relative_eq!(cov[(1, 1)], n + 0.5, epsilon = 1e-12);
        assert_relative_eq!(cov[(3, 3)], n + 0.5, epsilon = 1e-12);
        let emu = initial_covariance(&m, 1.0, 0.0, EnvironmentPrep::SqueezedEmulation { scale: 1.0 }).unwrap();
        assert_relative_eq!((emu[(1, 1)] + emu[(3, 3)] - 1.0) / 2.0, n, epsilon = 1e-12);
    }

    #[test]
    fn temperature_must_be_positive() {
        let m = lone(0.01, 0.3);
        let opts = ProbeOptions {
            temperature: 0.0,
            ..Default::default()
        };
        assert!(spectral_density_probe(&m, 100.0, &opts).is_err());
    }

    #[test]
    fn hot_probe_saturates() {
        // the probe starts just below N and gains energy from a warmer node
        let m = lone(0.05, 0.26);
        let n = bose_occupancy(0.26, 1.0);
        let opts = ProbeOptions {
            n0: n - 1e-3,
            ..Default::default()
        };
        assert!(matches!(
            spectral_density_probe(&m, 60.0, &opts),
            Err(Error::ProbeSaturated { .. })
        ));
    }

    #[test]
    fn weak_coupling_resonance_tracks_horizon_average() {
        // resonant exchange gives n_S = N sin^2(k t / 2 omega), so the
        // estimate is k^2 t / (4 omega): half the kernel value k^2 t / (2 omega)
        let m = lone(0.001, 0.25);
        let t = 150.0;
        let est = spectral_density_probe(&m, t, &ProbeOptions::default()).unwrap();
        let kernel = Kernel::from_model(&m);
        let averaged = kernel.averaged_spectral_density(0.25, t);
        assert!(((est.j - averaged) / averaged).abs() < 0.02, "{} vs {}", est.j, averaged);
        let ratio = est.j / kernel.spectral_density(0.25, t);
        assert!((ratio - 0.5).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn sampled_estimate_has_error_bar() {
        let m = lone(0.005, 0.26);
        let opts = ProbeOptions {
            sampling: Some(Sampling {
                samples: 2000,
                repetitions: 5,
                seed: 11,
            }),
            ..Default::default()
        };
        let a = spectral_density_probe(&m, 100.0, &opts).unwrap();
        let b = spectral_density_probe(&m, 100.0, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.stderr.unwrap() > 0.0);
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = linear_grid(0.2, 0.7, 120).unwrap();
        assert_eq!(g.len(), 120);
        assert_eq!(g[0], 0.2);
        assert_eq!(g[119], 0.7);
        assert!(linear_grid(0.2, 0.1, 5).is_err());
    }
}
