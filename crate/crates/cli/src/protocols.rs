//! Protocol runners. Each returns the files to write and a JSON summary;
//! nothing touches the disk here.

use anyhow::Result;
use cvnet_core::dynamics::{probe_mask, QuadraticModel};
use cvnet_core::gaussian::GaussianState;
use cvnet_core::io::{mask_csv, matrix_dump, spectral_csv, state_dump, trace_csv};
use cvnet_core::probes::{
    blp_witness, linear_grid, qnm_trace, spectral_sweep, suggest_tmax_with, Kernel, Method,
};
use cvnet_core::symplectic::bloch_messiah;
use serde_json::{json, Value};

use crate::config::{config_error, RunConfig, Sweep, TMax};

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub omega_s: Option<f64>,
    pub t_max: Option<TMax>,
    pub points: Option<usize>,
    pub method: Option<Method>,
    pub samples: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    /// Applies the overrides and returns one `key=value` entry per flag used.
    pub fn apply(&self, cfg: &mut RunConfig) -> Vec<String> {
        let mut log = Vec::new();
        if let Some(w) = self.omega_s {
            cfg.probe.omega_s = Some(w);
            cfg.qnm.omega_s = vec![w];
            cfg.spectral.sweep = Some(Sweep {
                lo: w,
                hi: w,
                points: 1,
            });
            log.push(format!("omega_s={w}"));
        }
        if let Some(t) = self.t_max {
            cfg.spectral.t_max = Some(t);
            if let TMax::Fixed(t) = t {
                cfg.evolve.times = vec![t];
                cfg.masks.times = vec![t];
            }
            log.push(match t {
                TMax::Fixed(t) => format!("t_max={t}"),
                TMax::Auto(_) => "t_max=auto".into(),
            });
        }
        if let Some(p) = self.points {
            // the sweep itself may come from a preset; resolved later
            cfg.qnm.times.points = p;
            log.push(format!("points={p}"));
        }
        if let Some(m) = self.method {
            cfg.spectral.method = m;
            log.push(format!("method={}", serde_json::to_value(m).unwrap().as_str().unwrap()));
        }
        if let Some(n) = self.samples {
            cfg.spectral.samples = Some(n);
            log.push(format!("samples={n}"));
        }
        if let Some(r) = self.reps {
            cfg.spectral.reps = r;
            log.push(format!("reps={r}"));
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
            log.push(format!("seed={s}"));
        }
        log
    }
}

pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub results: Value,
    /// Short human-readable summary for stdout.
    pub summary: Vec<String>,
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points == 1 && lo == hi {
        return Ok(vec![lo]);
    }
    Ok(linear_grid(lo, hi, points)?)
}

fn label(x: f64) -> String {
    format!("{x}")
}

fn required_omega(cfg: &RunConfig, protocol: &str) -> Result<f64> {
    match cfg.probe.omega_s {
        Some(w) => Ok(w),
        None => config_error(format!("{protocol} needs probe.omega_s (or --omega-s)")),
    }
}

fn sweep_of(cfg: &RunConfig, preset_sweep: Option<Sweep>, points: Option<usize>) -> Result<Sweep> {
    let Some(mut sweep) = cfg.spectral.sweep.or(preset_sweep) else {
        return config_error("spectral needs [spectral] sweep = { lo, hi, points }");
    };
    if let Some(p) = points {
        if sweep.points != 1 {
            sweep.points = p;
        }
    }
    Ok(sweep)
}

pub fn run_validate(cfg: &RunConfig) -> Result<RunOutput> {
    // with no probe frequency, check the stability at both sweep ends
    let first = cfg.network(cfg.probe.omega_s.unwrap_or(1.0))?;
    let omegas = match (cfg.probe.omega_s, cfg.spectral.sweep.or(first.preset_sweep)) {
        (Some(w), _) => vec![w],
        (None, Some(s)) => vec![s.lo, s.hi],
        (None, None) => return config_error("validate needs probe.omega_s or a spectral sweep"),
    };
    let graph = &first.graph;
    let mut lowest = f64::INFINITY;
    let mut model = None;
    for &w in &omegas {
        let m = QuadraticModel::assemble(&graph.with_probe_omega(w)?)?;
        lowest = lowest.min(m.normal_frequencies()[0]);
        model.get_or_insert(m);
    }
    let model = model.expect("at least one frequency");
    let env = model.env_frequencies().to_vec();
    let gap = env
        .windows(2)
        .map(|w| (w[0], w[1]))
        .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
        .unwrap_or((env[0], env[0]));
    let t_max = suggest_tmax_with(&model, cfg.spectral.horizon, cfg.spectral.tmax_rule);
    let degrees = graph.degrees();
    let probe = graph.probe().expect("probe attached");
    let results = json!({
        "nodes": graph.n_nodes(),
        "edges": graph.n_edges(),
        "connected": graph.is_connected(),
        "degree_range": [degrees.iter().min(), degrees.iter().max()],
        "probe_site": probe.site + 1,
        "k": probe.coupling,
        "checked_omega_s": omegas,
        "stable": true,
        "lowest_normal_frequency": lowest,
        "environment_frequencies": env,
        "band": [env[0], env[env.len() - 1]],
        "largest_gap": [gap.0, gap.1],
        "local_spread": Kernel::from_model(&model).local_spread(),
        "suggested_t_max": t_max.as_ref().ok(),
        "suggested_t_max_error": t_max.as_ref().err().map(|e| e.to_string()),
    });
    let summary = vec![
        format!(
            "network: {} nodes, {} edges, connected = {}",
            graph.n_nodes(),
            graph.n_edges(),
            graph.is_connected()
        ),
        format!("stable: lowest normal frequency {lowest:.6}"),
        format!("band: [{:.6}, {:.6}], largest gap [{:.6}, {:.6}]", env[0], env[env.len() - 1], gap.0, gap.1),
        match &t_max {
            Ok(t) => format!("suggested t_max: {t:.2}"),
            Err(e) => format!("suggested t_max: none ({e})"),
        },
    ];
    let report = serde_json::to_string_pretty(&results)? + "\n";
    Ok(RunOutput {
        files: vec![("validate.json".into(), report)],
        results,
        summary,
    })
}

pub fn run_spectral(cfg: &RunConfig, points: Option<usize>) -> Result<RunOutput> {
    let net = cfg.network(1.0)?;
    let sweep = sweep_of(cfg, net.preset_sweep, points)?;
    let omega = grid(sweep.lo, sweep.hi, sweep.points)?;
    let graph = net.graph.with_probe_omega(omega[0])?;
    let (t_max, source) = match cfg.spectral.t_max.or(net.preset_t_max.map(TMax::Fixed)) {
        Some(TMax::Fixed(t)) => (t, "fixed"),
        Some(TMax::Auto(_)) | None => {
            let model = QuadraticModel::assemble(&graph)?;
            (
                suggest_tmax_with(&model, cfg.spectral.horizon, cfg.spectral.tmax_rule)?,
                "auto",
            )
        }
    };
    let opts = cfg.spectral.probe_options(cfg.seed);
    let curve = spectral_sweep(&graph, &omega, t_max, cfg.spectral.method, &opts)?;
    let cross = if omega.len() >= 2 {
        curve.cross_path(cfg.spectral.cross_path_threshold)
    } else {
        None
    };
    let mut summary = vec![format!(
        "{} points on [{}, {}], t_max = {t_max} ({source})",
        omega.len(),
        sweep.lo,
        sweep.hi
    )];
    if let Some(c) = &cross {
        summary.push(format!(
            "cross-path: max relative deviation {:.4} over {} points, Pearson {:.4}",
            c.max_relative_deviation, c.points_compared, c.pearson
        ));
    }
    let results = json!({
        "t_max": t_max,
        "t_max_source": source,
        "points": omega.len(),
        "lo": sweep.lo,
        "hi": sweep.hi,
        "method": curve.method,
        "temperature": curve.temperature,
        "cross_path": cross,
    });
    Ok(RunOutput {
        files: vec![("spectral.csv".into(), spectral_csv(&curve))],
        results,
        summary,
    })
}

pub fn run_qnm(cfg: &RunConfig) -> Result<RunOutput> {
    let omegas = if cfg.qnm.omega_s.is_empty() {
        vec![required_omega(cfg, "qnm")?]
    } else {
        cfg.qnm.omega_s.clone()
    };
    let tg = cfg.qnm.times;
    let times = grid(tg.start, tg.end, tg.points)?;
    let base = cfg.network(omegas[0])?.graph;
    let mut files = Vec::new();
    let mut reports = Vec::new();
    let mut summary = Vec::new();
    for &w in &omegas {
        let model = QuadraticModel::assemble(&base.with_probe_omega(w)?)?;
        let trace = qnm_trace(&model, &cfg.qnm.rho1, &cfg.qnm.rho2, &times, cfg.qnm.window)?;
        let report = blp_witness(&trace, cfg.qnm.window > 1)?;
        summary.push(format!(
            "omega_s = {w}: N = {:.6} over {} decreasing intervals",
            report.value,
            report.intervals.len()
        ));
        files.push((format!("trace_{}.csv", label(w)), trace_csv(&trace)));
        reports.push(report);
    }
    let results = serde_json::to_value(&reports)?;
    files.push(("witness.json".into(), serde_json::to_string_pretty(&results)? + "\n"));
    Ok(RunOutput {
        files,
        results: json!({ "witness": results }),
        summary,
    })
}

pub fn run_evolve(cfg: &RunConfig) -> Result<RunOutput> {
    let w = required_omega(cfg, "evolve")?;
    if cfg.evolve.times.is_empty() {
        return config_error("evolve needs [evolve] times (or --t-max)");
    }
    let model = QuadraticModel::assemble(&cfg.network(w)?.graph)?;
    let m = model.modes();
    let initial = match &cfg.evolve.probe_state {
        Some(spec) => GaussianState::squeezed(spec)?.tensor(&GaussianState::vacuum(m - 1)),
        None => GaussianState::vacuum(m),
    };
    let mut files = Vec::new();
    let mut photons = Vec::new();
    for &t in &cfg.evolve.times {
        let s = model.evolve(t)?;
        let probe = initial.propagate(&s)?.reduce(0)?;
        photons.push(json!({ "t": t, "probe_mean_photon": probe.mean_photon()? }));
        files.push((format!("evolution_t{}.txt", label(t)), matrix_dump(&s, t, w)));
        files.push((format!("probe_t{}.toml", label(t)), state_dump(&probe)));
    }
    let summary = vec![format!("{} evolution matrices of {} modes at omega_s = {w}", cfg.evolve.times.len(), m)];
    Ok(RunOutput {
        files,
        results: json!({ "omega_s": w, "modes": m, "probe": photons }),
        summary,
    })
}

/// Largest tolerated deviation of a mask from a canonical row pair.
const MASK_TOL: f64 = 1e-9;

pub fn run_masks(cfg: &RunConfig) -> Result<RunOutput> {
    let w = required_omega(cfg, "masks")?;
    if cfg.masks.times.is_empty() {
        return config_error("masks needs [masks] times (or --t-max)");
    }
    let model = QuadraticModel::assemble(&cfg.network(w)?.graph)?;
    let prep = cfg.masks.preparation(model.modes())?;
    let mut files = Vec::new();
    let mut checks = Vec::new();
    for &t in &cfg.masks.times {
        let s_eff = model.compose_preparation(&model.evolve(t)?, &prep)?;
        let mask = probe_mask(&s_eff)?;
        let (norm, pairing) = (mask.norm_residual(), mask.pairing());
        if norm > MASK_TOL || (pairing - 1.0).abs() > MASK_TOL {
            anyhow::bail!("mask at t = {t} is not a canonical pair (norm {norm:e}, pairing {pairing})");
        }
        let squeezing = bloch_messiah(&s_eff)?.squeezing();
        checks.push(json!({
            "t": t,
            "norm_residual": norm,
            "pairing": pairing,
            "max_squeezing": squeezing.first(),
        }));
        files.push((format!("mask_t{}.csv", label(t)), mask_csv(&mask)));
    }
    let summary = vec![format!(
        "{} masks of {} modes at omega_s = {w}, all normalized",
        cfg.masks.times.len(),
        model.modes()
    )];
    Ok(RunOutput {
        files,
        results: json!({ "omega_s": w, "masks": checks }),
        summary,
    })
}
