//! Command-line laboratory for soliton and breather gases of the focusing
//! mKdV equation.

pub mod config;
pub mod experiments;
pub mod output;
pub mod svg;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{parse_config, parse_config_str, ConfigError, RunConfig};
pub use experiments::{Check, ExperimentError, Outcome};

pub const VERSION: &str = concat!("sslab ", env!("CARGO_PKG_VERSION"));

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Soliton,
    Shielding,
    EllipseProfile,
    GfunCheck,
    ModelCheck,
    LeftTail,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Soliton => "soliton",
            Experiment::Shielding => "shielding",
            Experiment::EllipseProfile => "ellipse-profile",
            Experiment::GfunCheck => "gfun-check",
            Experiment::ModelCheck => "model-check",
            Experiment::LeftTail => "left-tail",
        }
    }
}

/// Everything a run needs besides the config file contents.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArgs {
    pub experiment: Experiment,
    pub config: PathBuf,
    pub plot: Option<PathBuf>,
    pub threads: Option<usize>,
    pub verbose: bool,
}

/// Thread count: explicit flag, then `SSLAB_THREADS`, then the machine.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, ConfigError> {
    if let Some(n) = flag {
        return if n == 0 {
            Err(ConfigError::Validation("--threads must be positive".into()))
        } else {
            Ok(n)
        };
    }
    match std::env::var("SSLAB_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(ConfigError::Validation(format!(
                "SSLAB_THREADS must be a positive integer, got {s:?}"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Write { .. } => EXIT_CONFIG,
            RunError::Experiment(ExperimentError::Config(_)) => EXIT_CONFIG,
            RunError::Experiment(ExperimentError::Numerical(_)) => EXIT_NUMERICAL,
        }
    }

    /// Machine-readable description for stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let (kind, extra) = match self {
            RunError::Config(ConfigError::Parse {
                path, line, column, ..
            })
            | RunError::Experiment(ExperimentError::Config(ConfigError::Parse {
                path,
                line,
                column,
                ..
            })) => (
                "parse",
                serde_json::json!({ "path": path, "line": line, "column": column }),
            ),
            RunError::Config(ConfigError::Io { path, .. }) => {
                ("io", serde_json::json!({ "path": path }))
            }
            RunError::Config(_) | RunError::Experiment(ExperimentError::Config(_)) => {
                ("validation", serde_json::json!({}))
            }
            RunError::Experiment(ExperimentError::Numerical(_)) => {
                ("numerical", serde_json::json!({}))
            }
            RunError::Write { path, .. } => ("io", serde_json::json!({ "path": path })),
        };
        let mut err = serde_json::json!({ "kind": kind, "message": self.to_string(), "exit_code": self.exit_code() });
        if let (Some(obj), Some(more)) = (err.as_object_mut(), extra.as_object()) {
            obj.extend(more.clone());
        }
        serde_json::json!({ "version": VERSION, "error": err })
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    std::fs::write(path, contents).map_err(|e| RunError::Write {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Runs one experiment and writes its outputs.
pub fn run(args: &RunArgs) -> Result<Outcome, RunError> {
    let log = |msg: &str| {
        if args.verbose {
            eprintln!("[sslab] {msg}");
        }
    };
    let cfg = parse_config(&args.config)?;
    if let Some(e) = cfg.experiment {
        if e != args.experiment {
            return Err(ConfigError::Validation(format!(
                "config is for experiment `{}` but `{}` was requested",
                e.name(),
                args.experiment.name()
            ))
            .into());
        }
    }
    let base = args
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let paths = config::OutputPaths::resolve(&cfg, base, args.plot.as_deref())?;
    let threads = resolve_threads(args.threads)?;
    log(&format!(
        "running {} on {threads} threads",
        args.experiment.name()
    ));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ConfigError::Validation(format!("cannot start thread pool: {e}")))?;
    let outcome = pool.install(|| experiments::run_experiment(args.experiment, &cfg, &log))?;
    write_file(&paths.csv, &output::csv(&outcome.series))?;
    log(&format!("wrote {}", paths.csv.display()));
    write_file(&paths.json, &output::json_report(args.experiment, &outcome))?;
    log(&format!("wrote {}", paths.json.display()));
    if let Some(svg_path) = &paths.svg {
        write_file(
            svg_path,
            &svg::render(args.experiment.name(), &outcome.series),
        )?;
        log(&format!("wrote {}", svg_path.display()));
    }
    for c in &outcome.checks {
        log(&format!(
            "{} {} = {:.6e}{}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            if c.binding { "" } else { " (informational)" }
        ));
    }
    Ok(outcome)
}

/// Full command-line behaviour: run, report errors as JSON on stderr and
/// map the result to an exit code.
pub fn run_cli(args: &RunArgs) -> i32 {
    match run(args) {
        Ok(outcome) if outcome.passed() => EXIT_PASS,
        Ok(_) => EXIT_TOLERANCE,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
