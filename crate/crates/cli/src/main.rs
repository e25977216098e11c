mod config;
mod protocols;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cvnet_core::probes::Method;
use serde_json::json;

use config::{ConfigError, Protocol, RunConfig, TMax};
use protocols::{Overrides, RunOutput};

/// Default output directory when neither `--out` nor the config names one.
const OUT_ENV: &str = "CVNET_OUT_DIR";

#[derive(Parser)]
#[command(name = "cvnet", version, about = "Probe oscillator coupled to harmonic-oscillator networks")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check stability and report the normal-mode band and a t_max suggestion.
    Validate(RunArgs),
    /// Sweep the probe frequency and estimate the spectral density.
    Spectral(RunArgs),
    /// Fidelity traces and non-Markovianity witnesses.
    Qnm(RunArgs),
    /// Dump evolution matrices and the evolved probe state.
    Evolve(RunArgs),
    /// Probe measurement masks from the passive factor of the evolution.
    Masks(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Analytic,
    Probe,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Analytic => Method::Analytic,
            MethodArg::Probe => Method::Probe,
            MethodArg::Both => Method::Both,
        }
    }
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long)]
    omega_s: Option<f64>,
    /// Interaction horizon, or "auto". Sets the time for evolve and masks.
    #[arg(long)]
    t_max: Option<TMax>,
    /// Sweep points (spectral) or time points (qnm).
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; falls back to the config, then $CVNET_OUT_DIR, then ./cvnet-out.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            omega_s: self.omega_s,
            t_max: self.t_max,
            points: self.points,
            method: self.method.map(Method::from),
            samples: self.samples,
            reps: self.reps,
            seed: self.seed,
        }
    }
}

fn out_dir(args: &RunArgs, cfg: &RunConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cvnet-out"))
}

/// Writes through a temporary name so a failed run leaves no partial file.
fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, dir.join(name)).with_context(|| format!("renaming {}", tmp.display()))?;
    Ok(())
}

fn run(protocol: Protocol, args: &RunArgs) -> Result<()> {
    let (mut cfg, text) = RunConfig::load(&args.config)?;
    if let Some(p) = cfg.protocol {
        if p != protocol {
            return config::config_error(format!(
                "config is for protocol {:?} but the verb is {:?}",
                p.name(),
                protocol.name()
            ));
        }
    }
    let overrides = args.overrides();
    let applied = overrides.apply(&mut cfg);
    let output: RunOutput = match protocol {
        Protocol::Validate => protocols::run_validate(&cfg)?,
        Protocol::Spectral => protocols::run_spectral(&cfg, overrides.points)?,
        Protocol::Qnm => protocols::run_qnm(&cfg)?,
        Protocol::Evolve => protocols::run_evolve(&cfg)?,
        Protocol::Masks => protocols::run_masks(&cfg)?,
    };

    let dir = out_dir(args, &cfg);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, contents) in &output.files {
        write_file(&dir, name, contents)?;
    }
    let manifest = json!({
        "tool": "cvnet",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": cvnet_core::VERSION,
        "protocol": protocol.name(),
        "config_path": args.config,
        "config_text": text,
        "config": cfg,
        "overrides": applied,
        "seed": cfg.seed,
        "outputs": output.files.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        "results": output.results,
    });
    write_file(&dir, "manifest.json", &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    for line in &output.summary {
        println!("{line}");
    }
    println!("wrote {} files to {}", output.files.len() + 1, dir.display());
    Ok(())
}

/// 2: configuration, 3: unstable network, 4: probe saturation, 1: anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<cvnet_core::Error>() {
            return match e {
                cvnet_core::Error::Invalid(_) | cvnet_core::Error::Document(_) | cvnet_core::Error::NoPlateau { .. } => 2,
                cvnet_core::Error::Unstable { .. } => 3,
                cvnet_core::Error::ProbeSaturated { .. } => 4,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (protocol, args) = match &cli.verb {
        Verb::Validate(a) => (Protocol::Validate, a),
        Verb::Spectral(a) => (Protocol::Spectral, a),
        Verb::Qnm(a) => (Protocol::Qnm, a),
        Verb::Evolve(a) => (Protocol::Evolve, a),
        Verb::Masks(a) => (Protocol::Masks, a),
    };
    match run(protocol, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
