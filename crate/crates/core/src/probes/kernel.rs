use serde::{Deserialize, Serialize};

use crate::dynamics::QuadraticModel;
use crate::error::{invalid, Error, Result};

/// Normal-mode representation of the damping kernel seen by the probe:
/// `gamma(t) = sum_n w_n cos(Omega_n t)` with `w_n = c_n^2 / Omega_n^2` and
/// `c_n = k O_{l,n}` from the network eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub frequencies: Vec<f64>,
    pub weights: Vec<f64>,
    /// Spectral weights `O_{l,n}^2` of the probe site (sum to 1).
    pub local_density: Vec<f64>,
}

impl Kernel {
    pub fn from_model(model: &QuadraticModel) -> Self {
        let k = model.probe_coupling();
        let l = model.probe_site();
        let o = model.env_modes();
        let frequencies = model.env_frequencies().to_vec();
        let local_density: Vec<f64> = (0..frequencies.len()).map(|n| o[(l, n)].powi(2)).collect();
        let weights = frequencies
            .iter()
            .zip(&local_density)
            .map(|(w, d)| k * k * d / (w * w))
            .collect();
        Kernel {
            frequencies,
            weights,
            local_density,
        }
    }

    pub fn gamma(&self, t: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.weights)
            .map(|(w, c)| c * (w * t).cos())
            .sum()
    }

    /// `omega_s * int_0^t_max gamma(t) cos(omega_s t) dt`, term by term.
    pub fn spectral_density(&self, omega_s: f64, t_max: f64) -> f64 {
        let half_sinc = |x: f64| {
            if (x * t_max).abs() < 1e-8 {
                t_max / 2.0
            } else {
                (x * t_max).sin() / (2.0 * x)
            }
        };
        omega_s
            * self
                .frequencies
                .iter()
                .zip(&self.weights)
                .map(|(w, c)| c * (half_sinc(w - omega_s) + half_sinc(w + omega_s)))
                .sum::<f64>()
    }

    /// Average of [`Self::spectral_density`] over horizons `[0, t_max]`.
    /// The weak-coupling limit of the excitation-based estimate.
    pub fn averaged_spectral_density(&self, omega_s: f64, t_max: f64) -> f64 {
        let term = |x: f64| {
            if (x * t_max).abs() < 1e-6 {
                t_max / 4.0
            } else {
                (1.0 - (x * t_max).cos()) / (2.0 * x * x * t_max)
            }
        };
        omega_s
            * self
                .frequencies
                .iter()
                .zip(&self.weights)
                .map(|(w, c)| c * (term(w - omega_s) + term(w + omega_s)))
                .sum::<f64>()
    }

    /// Standard deviation of the network frequencies weighted by the
    /// probe site's local density of states.
    pub fn local_spread(&self) -> f64 {
        let mean: f64 = self
            .frequencies
            .iter()
            .zip(&self.local_density)
            .map(|(w, d)| w * d)
            .sum();
        self.frequencies
            .iter()
            .zip(&self.local_density)
            .map(|(w, d)| d * (w - mean).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// `gamma(t)` for the model's probe attachment.
pub fn damping_kernel(model: &QuadraticModel, t: f64) -> f64 {
    Kernel::from_model(model).gamma(t)
}

/// Finite-horizon spectral density from the kernel.
pub fn spectral_density_analytic(model: &QuadraticModel, omega_s: f64, t_max: f64) -> f64 {
    Kernel::from_model(model).spectral_density(omega_s, t_max)
}

/// Rule for placing `t_max` on the kernel plateau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TmaxRule {
    /// `t_max = constant / sigma_l`, with `sigma_l` the local spread of
    /// network frequencies. The kernel is a sum of cosines weighted by the
    /// local density, so its envelope decays on the dephasing time
    /// `~ 1 / sigma_l`.
    Dephasing { constant: f64 },
    /// First time the running max of `|gamma|` over a trailing window of
    /// `periods` slowest-mode periods drops below `fraction * gamma(0)`.
    Envelope { fraction: f64, periods: f64 },
}

impl Default for TmaxRule {
    fn default() -> Self {
        TmaxRule::Dephasing {
            constant: DEPHASING_CONSTANT,
        }
    }
}

pub const DEPHASING_CONSTANT: f64 = 15.7;

/// Suggested `t_max` with the default rule.
pub fn suggest_tmax(model: &QuadraticModel, horizon: f64) -> Result<f64> {
    suggest_tmax_with(model, horizon, TmaxRule::default())
}

pub fn suggest_tmax_with(model: &QuadraticModel, horizon: f64, rule: TmaxRule) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("search horizon must be positive, got {horizon}"));
    }
    let kernel = Kernel::from_model(model);
    match rule {
        TmaxRule::Dephasing { constant } => {
            if !(constant > 0.0) {
                return invalid(format!("dephasing constant must be positive, got {constant}"));
            }
            let scale = kernel.frequencies.iter().copied().fold(0.0, f64::max);
            let sigma = kernel.local_spread();
            if sigma <= 1e-9 * scale {
                return Err(Error::NoPlateau { horizon });
            }
            let t = constant / sigma;
            if t > horizon {
                return Err(Error::NoPlateau { horizon });
            }
            Ok(t)
        }
        TmaxRule::Envelope { fraction, periods } => {
            if !(fraction > 0.0 && fraction < 1.0 && periods > 0.0) {
                return invalid("envelope rule needs 0 < fraction < 1 and periods > 0");
            }
            envelope_plateau(&kernel, horizon, fraction, periods)
        }
    }
}

fn envelope_plateau(kernel: &Kernel, horizon: f64, fraction: f64, periods: f64) -> Result<f64> {
    let g0 = kernel.gamma(0.0).abs();
    if g0 == 0.0 {
        return Ok(0.0);
    }
    let w_max = kernel.frequencies.iter().copied().fold(0.0, f64::max);
    let w_min = kernel.frequencies.iter().copied().fold(f64::INFINITY, f64::min);
    let dt = 2.0 * std::f64::consts::PI / w_max / 20.0;
    let window = ((periods * 2.0 * std::f64::consts::PI / w_min) / dt).ceil() as usize;
    let steps = (horizon / dt).floor() as usize;
    let mut deque: std::collections::VecDeque<(usize, f64)> = Default::default();
    for i in 0..=steps {
        let v = kernel.gamma(i as f64 * dt).abs();
        while deque.back().is_some_and(|&(_, b)| b <= v) {
            deque.pop_back();
        }
        deque.push_back((i, v));
        while deque.front().is_some_and(|&(j, _)| j + window < i) {
            deque.pop_front();
        }
        if i >= window && deque.front().unwrap().1 < fraction * g0 {
            return Ok(i as f64 * dt);
        }
    }
    Err(Error::NoPlateau { horizon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_linear_chain, CouplingGraph, ProbeAttachment};
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
    fn one_mode_kernel() {
        let m = lone(0.01, 0.3);
        for t in [0.0, 1.0, 17.5] {
            assert_relative_eq!(
                damping_kernel(&m, t),
                1e-4 / 0.0625 * (0.25 * t).cos(),
                epsilon = 1e-16
            );
        }
    }

    #[test]
    fn kernel_at_origin_is_inverse_potential() {
        let mut g = build_linear_chain(16, &[0.1, 0.05], 0.25).unwrap();
        g.attach_probe(ProbeAttachment {
            site: 3,
            coupling: 0.01,
            omega: 0.5,
        })
        .unwrap();
        let m = QuadraticModel::assemble(&g).unwrap();
        let ve = m.potential().view((1, 1), (16, 16)).into_owned();
        let inv = ve.try_inverse().unwrap();
        assert_relative_eq!(damping_kernel(&m, 0.0), 1e-4 * inv[(3, 3)], max_relative = 1e-12);
    }

    #[test]
    fn no_coupling_no_density() {
        let m = lone(0.0, 0.3);
        assert_eq!(spectral_density_analytic(&m, 0.3, 150.0), 0.0);
    }

    #[test]
    fn resonant_limit() {
        let (k, w0, t) = (0.01, 0.25, 150.0);
        let m = lone(k, w0);
        let j = spectral_density_analytic(&m, w0, t);
        let leading = k * k / w0 * t / 2.0;
        // remainder is the bounded counter-rotating term
        let rest = k * k / w0 * (2.0 * w0 * t).sin() / (4.0 * w0);
        assert_relative_eq!(j, leading + rest, max_relative = 1e-12);
        let near = spectral_density_analytic(&m, w0 + 1e-12, t);
        assert_relative_eq!(near, j, max_relative = 1e-6);
    }

    #[test]
    fn averaged_density_matches_quadrature() {
        let mut g = build_linear_chain(6, &[0.1, 0.05], 0.25).unwrap();
        g.attach_probe(ProbeAttachment {
            site: 0,
            coupling: 0.01,
            omega: 0.4,
        })
        .unwrap();
        let kernel = Kernel::from_model(&QuadraticModel::assemble(&g).unwrap());
        let t = 80.0;
        let n = 20_000;
        let h = t / n as f64;
        // trapezoid rule over horizons
        let mut sum = 0.5 * (kernel.spectral_density(0.4, 0.0) + kernel.spectral_density(0.4, t));
        for i in 1..n {
            sum += kernel.spectral_density(0.4, i as f64 * h);
        }
        assert_relative_eq!(kernel.averaged_spectral_density(0.4, t), sum * h / t, max_relative = 1e-7);
    }

    #[test]
    fn lone_node_has_no_plateau() {
        let m = lone(0.01, 0.3);
        assert!(matches!(suggest_tmax(&m, 1e4), Err(Error::NoPlateau { .. })));
        let rule = TmaxRule::Envelope {
            fraction: 0.05,
            periods: 10.0,
        };
        assert!(matches!(suggest_tmax_with(&m, 1e3, rule), Err(Error::NoPlateau { .. })));
    }
}
