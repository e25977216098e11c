//! Run configuration files (TOML).
//!
//! ```toml
//! protocol = "spectral"      # optional; must match the verb when given
//! seed = 7
//!
//! [network]
//! preset = 1                 # or: graph = "net.toml", or: [network.recipe]
//!
//! [probe]
//! site = 1                   # 1-based node or "hub"
//! k = 0.01
//!
//! [spectral]
//! t_max = 150.0              # or "auto"
//! sweep = { lo = 0.2, hi = 0.7, points = 120 }
//! method = "both"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Result;
use cvnet_core::dynamics::ModeSqueeze;
use cvnet_core::gaussian::{Axis, Quadrature, SqueezedSpec};
use cvnet_core::netmodel::{load_graph, preset, CouplingGraph, NetworkRecipe, ProbeAttachment, ProbeSite};
use cvnet_core::probes::{EnvironmentPrep, Method, ProbeOptions, Sampling, TmaxRule, DEFAULT_WINDOW};
use serde::{Deserialize, Serialize};

/// Marks errors caused by the configuration rather than the physics.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()).into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Validate,
    Spectral,
    Qnm,
    Evolve,
    Masks,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Validate => "validate",
            Protocol::Spectral => "spectral",
            Protocol::Qnm => "qnm",
            Protocol::Evolve => "evolve",
            Protocol::Masks => "masks",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Protocol>,
    /// Master seed for every random stream of the run.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub network: NetworkSource,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub qnm: QnmConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub masks: MasksConfig,
}

/// Exactly one of `preset`, `recipe` or `graph`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<NetworkRecipe>,
    /// Graph document, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<ProbeSite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TMax {
    Fixed(f64),
    Auto(AutoKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

impl TMax {
    pub const AUTO: TMax = TMax::Auto(AutoKeyword::Auto);
}

impl std::str::FromStr for TMax {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(TMax::AUTO);
        }
        s.parse::<f64>()
            .map(TMax::Fixed)
            .map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    /// Defaults to the preset's horizon, otherwise `"auto"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<TMax>,
    #[serde(default)]
    pub tmax_rule: TmaxRule,
    /// Search limit for `t_max = "auto"`.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub n0: f64,
    #[serde(default)]
    pub environment: EnvironmentPrep,
    /// Homodyne shots per quadrature; exact moments when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_threshold")]
    pub cross_path_threshold: f64,
}

fn default_horizon() -> f64 {
    2000.0
}

fn default_temperature() -> f64 {
    1.0
}

fn default_reps() -> usize {
    20
}

fn default_threshold() -> f64 {
    0.1
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            t_max: None,
            tmax_rule: TmaxRule::default(),
            horizon: default_horizon(),
            sweep: None,
            method: Method::default(),
            temperature: default_temperature(),
            n0: 0.0,
            environment: EnvironmentPrep::default(),
            samples: None,
            reps: default_reps(),
            cross_path_threshold: default_threshold(),
        }
    }
}

impl SpectralConfig {
    pub fn probe_options(&self, seed: u64) -> ProbeOptions {
        ProbeOptions {
            temperature: self.temperature,
            n0: self.n0,
            environment: self.environment,
            sampling: self.samples.map(|samples| Sampling {
                samples,
                repetitions: self.reps,
                seed,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QnmConfig {
    /// Probe frequencies; falls back to `probe.omega_s`.
    #[serde(default)]
    pub omega_s: Vec<f64>,
    #[serde(default = "default_times")]
    pub times: TimeGrid,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_rho1")]
    pub rho1: SqueezedSpec,
    #[serde(default = "default_rho2")]
    pub rho2: SqueezedSpec,
}

fn default_times() -> TimeGrid {
    TimeGrid {
        start: 0.0,
        end: 500.0,
        points: 251,
    }
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_rho1() -> SqueezedSpec {
    SqueezedSpec::new(-1.8, 2.9, Axis::Quadrature(Quadrature::Q))
}

fn default_rho2() -> SqueezedSpec {
    SqueezedSpec::new(-1.3, 2.4, Axis::Quadrature(Quadrature::P))
}

impl Default for QnmConfig {
    fn default() -> Self {
        QnmConfig {
            omega_s: Vec::new(),
            times: default_times(),
            window: default_window(),
            rho1: default_rho1(),
            rho2: default_rho2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default)]
    pub times: Vec<f64>,
    /// Initial probe state; the network starts in its vacuum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_state: Option<SqueezedSpec>,
}

/// Squeezing applied to one mode before the evolution; mode 0 is the probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepEntry {
    pub mode: usize,
    pub r: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MasksConfig {
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub prep: Vec<PrepEntry>,
}

impl MasksConfig {
    pub fn preparation(&self, modes: usize) -> Result<Vec<ModeSqueeze>> {
        let mut prep = vec![ModeSqueeze::NONE; modes];
        for e in &self.prep {
            if e.mode >= modes {
                return config_error(format!("prep mode {} outside 0..{modes}", e.mode));
            }
            prep[e.mode] = ModeSqueeze::new(e.r, e.phi);
        }
        Ok(prep)
    }
}

/// Network with the probe attached, plus the defaults its source implies.
#[derive(Debug, Clone)]
pub struct ResolvedNetwork {
    pub graph: CouplingGraph,
    pub preset_t_max: Option<f64>,
    pub preset_sweep: Option<Sweep>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(RunConfig, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        if let Some(g) = cfg.network.graph.as_mut() {
            if g.is_relative() {
                *g = path.parent().unwrap_or(Path::new(".")).join(&*g);
            }
        }
        Ok((cfg, text))
    }

    pub fn network(&self, omega_s: f64) -> Result<ResolvedNetwork> {
        let src = &self.network;
        let given = [src.preset.is_some(), src.recipe.is_some(), src.graph.is_some()];
        if given.iter().filter(|&&b| b).count() != 1 {
            return config_error("[network] needs exactly one of preset, recipe or graph");
        }
        let (mut graph, mut site, mut k, t_max, sweep) = if let Some(id) = src.preset {
            let p = preset(id).map_err(|e| ConfigError(e.to_string()))?;
            let (lo, hi, points) = p.sweep;
            (
                p.recipe.build()?,
                Some(p.site),
                Some(p.k),
                Some(p.t_max),
                Some(Sweep { lo, hi, points }),
            )
        } else if let Some(recipe) = &src.recipe {
            (recipe.build()?, None, None, None, None)
        } else {
            let path = src.graph.as_ref().expect("checked above");
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read graph {}: {e}", path.display())))?;
            let g = load_graph(&text)?;
            let (site, k) = match g.probe() {
                Some(p) => (Some(ProbeSite::Node(p.site + 1)), Some(p.coupling)),
                None => (None, None),
            };
            (g, site, k, None, None)
        };
        site = self.probe.site.or(site);
        k = self.probe.k.or(k);
        let (Some(site), Some(k)) = (site, k) else {
            return config_error("[probe] needs site and k for this network");
        };
        let site = site.resolve(&graph)?;
        graph.attach_probe(ProbeAttachment {
            site,
            coupling: k,
            omega: omega_s,
        })?;
        Ok(ResolvedNetwork {
            graph,
            preset_t_max: t_max,
            preset_sweep: sweep,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn minimal_preset_config() {
        let cfg = parse("[network]\npreset = 1\n");
        let net = cfg.network(0.5).unwrap();
        assert_eq!(net.graph.n_nodes(), 16);
        assert_eq!(net.preset_t_max, Some(150.0));
        assert_eq!(cfg.qnm.times.points, 251);
    }

    #[test]
    fn t_max_accepts_auto_and_numbers() {
        let cfg = parse("[network]\npreset = 1\n[spectral]\nt_max = \"auto\"\n");
        assert_eq!(cfg.spectral.t_max, Some(TMax::AUTO));
        let cfg = parse("[network]\npreset = 1\n[spectral]\nt_max = 90.0\n");
        assert_eq!(cfg.spectral.t_max, Some(TMax::Fixed(90.0)));
        assert_eq!("auto".parse::<TMax>().unwrap(), TMax::AUTO);
        assert!("soon".parse::<TMax>().is_err());
    }

    #[test]
    fn network_source_must_be_unique() {
        let cfg = parse("[network]\npreset = 1\ngraph = \"x.toml\"\n");
        assert!(cfg.network(0.5).unwrap_err().downcast_ref::<ConfigError>().is_some());
    }

    #[test]
    fn recipe_needs_probe_block() {
        let text = "[network.recipe]\nkind = \"linear-periodic\"\nnodes = 4\npattern = [0.1]\nomega0 = 0.25\n";
        assert!(parse(text).network(0.5).is_err());
        let cfg = parse(&format!("{text}[probe]\nsite = 2\nk = 0.01\n"));
        assert_eq!(cfg.network(0.5).unwrap().graph.probe().unwrap().site, 1);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[network]\npreset = 1\n[spectral]\ntmax = 3\n").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = parse("seed = 3\n[network]\npreset = 4\n[spectral]\nt_max = \"auto\"\nsamples = 100\n");
        let again: RunConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
