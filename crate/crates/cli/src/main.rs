mod commands;
mod config;
mod failure;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use msync_core::manifolds::ManifoldSpec;
use msync_core::{Algorithm, NetworkGraph};

use config::ExperimentConfig;
use failure::Failure;
use sweep::SweepConfig;

/// Consensus, splay states and multistability on Riemannian manifolds.
#[derive(Debug, Parser)]
#[command(name = "msync", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one configured experiment; writes trajectory.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare flow velocities with finite-difference gradients of the potential.
    Gradcheck {
        /// `circle`, `sphere:N`, `torus:R1,R2`, `so:N`, `u:N` or manifold JSON.
        #[arg(long, value_parser = parse_manifold)]
        manifold: ManifoldSpec,
        #[arg(long, value_enum, default_value_t = Flow::Chordal)]
        algorithm: Flow,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        agents: usize,
        /// Circulant neighbourhood size; 1 is the cycle.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Construct the configured splay state, check it and optionally probe its stability.
    Splay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Perturbed runs; 0 skips the probe.
        #[arg(long, default_value_t = 0)]
        probe_trials: usize,
        #[arg(long, default_value_t = 1e-2)]
        magnitude: f64,
    },
    /// Solve the weighted loop-partition problem.
    Qp {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        weights: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        length: f64,
    },
    /// Run a parameter grid; writes sweep.csv with one row per run.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Base seed; defaults to the template's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Flow {
    Geodesic,
    Chordal,
    Kuramoto,
    Lohe,
}

impl From<Flow> for Algorithm {
    fn from(f: Flow) -> Self {
        match f {
            Flow::Geodesic => Algorithm::GeodesicConsensus,
            Flow::Chordal => Algorithm::ChordalConsensus,
            Flow::Kuramoto => Algorithm::KuramotoPolar,
            Flow::Lohe => Algorithm::LoheComplex,
        }
    }
}

fn parse_manifold(s: &str) -> Result<ManifoldSpec, String> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| e.to_string());
    }
    let (kind, args) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = args
        .split(',')
        .filter(|a| !a.is_empty())
        .map(|a| a.trim().parse::<f64>().map_err(|e| format!("bad parameter `{a}`: {e}")))
        .collect::<Result<_, _>>()?;
    let dim = |i: usize| -> Result<usize, String> {
        let x = *nums.get(i).ok_or("missing dimension")?;
        if x.fract() != 0.0 || x < 0.0 {
            return Err(format!("dimension must be a nonnegative integer, got {x}"));
        }
        Ok(x as usize)
    };
    let m = match kind.to_ascii_lowercase().as_str() {
        "circle" => ManifoldSpec::Circle,
        "sphere" => ManifoldSpec::Sphere(dim(0)?),
        "torus" => ManifoldSpec::FlatTorus(*nums.first().ok_or("missing radius")?, *nums.get(1).ok_or("missing radius")?),
        "so" => ManifoldSpec::SpecialOrthogonal(dim(0)?),
        "u" => ManifoldSpec::UnitaryRealified(dim(0)?),
        _ => return Err(format!("unknown manifold `{kind}`")),
    };
    m.validate().map_err(|e| e.to_string())?;
    Ok(m)
}

/// Prints a line, treating a closed stdout as success.
pub(crate) fn emit(line: &str) -> Result<(), Failure> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load(config: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn output_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let cfg = load(&config, seed)?;
            commands::simulate(&cfg, &output_dir(&cfg, out))
        }
        Command::Gradcheck { manifold, algorithm, trials, agents, k, seed } => {
            let graph = NetworkGraph::circulant(agents, k, 1.0)?;
            let report = commands::gradcheck(manifold, algorithm.into(), graph, trials, seed)?;
            emit(&serde_json::to_string(&report)?)?;
            if report.pass {
                Ok(())
            } else {
                Err(Failure::run(format!("max relative error {:.3e} exceeds {:e}", report.max_relative_error, commands::GRADCHECK_TOL)))
            }
        }
        Command::Splay { config, seed, out, probe_trials, magnitude } => {
            let cfg = load(&config, seed)?;
            let report = commands::splay(&cfg, probe_trials, magnitude, &output_dir(&cfg, out))?;
            emit(&serde_json::to_string_pretty(&report)?)?;
            Ok(())
        }
        Command::Qp { weights, length } => {
            emit(&commands::qp(&weights, length)?)?;
            Ok(())
        }
        Command::Sweep { config, seed, jobs, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Failure::config(format!("cannot read {}: {e}", config.display())))?;
            let sweep = SweepConfig::parse(&text)?;
            let seed = seed.unwrap_or_else(|| sweep.base_seed());
            let failed = sweep::sweep(&sweep, seed, jobs, &out)?;
            if failed > 0 {
                log::warn!("{failed} sweep runs failed; see the error column");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MSYNC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifold_shorthand() {
        assert_eq!(parse_manifold("circle").unwrap(), ManifoldSpec::Circle);
        assert_eq!(parse_manifold("sphere:3").unwrap(), ManifoldSpec::Sphere(3));
        assert_eq!(parse_manifold("torus:1,0.5").unwrap(), ManifoldSpec::FlatTorus(1.0, 0.5));
        assert_eq!(parse_manifold("SO:3").unwrap(), ManifoldSpec::SpecialOrthogonal(3));
        assert_eq!(parse_manifold("u:2").unwrap(), ManifoldSpec::UnitaryRealified(2));
        assert_eq!(parse_manifold(r#"{"kind":"Sphere","params":[2]}"#).unwrap(), ManifoldSpec::Sphere(2));
        assert!(parse_manifold("sphere:0").is_err());
        assert!(parse_manifold("sphere:1.5").is_err());
        assert!(parse_manifold("klein").is_err());
    }
}
