//! Command-line front end for the surface pipelines of `pnmc-core`.
//!
//! Exit codes: 0 on success, 2 when the configuration is invalid (nothing is
//! written), 3 when a computation fails (an error JSON goes to stderr), 1 when
//! output files cannot be written.

pub mod commands;
pub mod config;
pub mod error;
pub mod gridio;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{execute, OutputFile};
pub use config::{resolve, Command, KappaValue, RunConfig, Settings};
pub use error::CliError;

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "PNMC_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "pnmc-lab", version, about = "Surfaces with parallel normalized mean curvature: invariants, canonical charts, PDE residuals and reconstruction")]
pub struct Cli {
    /// Pipeline to run; may also be set in the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// TOML file with the same keys as the flags (tol_beta for --tol-beta).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Meridian family: euclidean or parabolic.
    #[arg(long)]
    pub family: Option<String>,
    /// Curvature of the directrix: unit, sine, or coefficients c0,c1,… of a polynomial in v.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub umin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub umax: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub vmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub vmax: Option<f64>,
    /// Grid nodes along u.
    #[arg(long)]
    pub nu: Option<usize>,
    /// Grid nodes along v.
    #[arg(long)]
    pub nv: Option<usize>,
    /// Ambient signature of a fields file: euclidean or minkowski.
    #[arg(long)]
    pub signature: Option<String>,
    /// Causal character of the normal b in Minkowski space: 1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<i32>,
    /// Finite-difference step for frame derivatives.
    #[arg(long)]
    pub h: Option<f64>,
    /// Threshold on |beta| for the classification.
    #[arg(long)]
    pub tol_beta: Option<f64>,
    /// Grid file with lambda, mu and nu columns in canonical parameters.
    #[arg(long)]
    pub fields: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Cli {
    fn flags(&self) -> RunConfig {
        RunConfig {
            command: self.command,
            family: self.family.clone(),
            kappa: self.kappa.clone().map(KappaValue::Text),
            umin: self.umin,
            umax: self.umax,
            vmin: self.vmin,
            vmax: self.vmax,
            nu: self.nu,
            nv: self.nv,
            signature: self.signature.clone(),
            epsilon: self.epsilon,
            h: self.h,
            tol_beta: self.tol_beta,
            fields: self.fields.clone(),
            out: self.out.clone(),
        }
    }

    /// Config file (if any) overridden by the flags.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::from_toml_file(p)?,
            None => RunConfig::default(),
        };
        Ok(base.overridden_by(self.flags()))
    }
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got '{s}'"))),
        },
    }
}

fn write_all(s: &Settings, files: &[OutputFile]) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &std::path::Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(&s.out).map_err(io(&s.out))?;
    files
        .iter()
        .map(|f| {
            let p = s.out.join(&f.name);
            std::fs::write(&p, &f.contents).map_err(io(&p))?;
            Ok(p)
        })
        .collect()
}

/// Validates `cfg`, runs the command and writes its files. Returns the written paths.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let settings = resolve(cfg)?;
    let files = match thread_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("cannot start {n} threads: {e}")))?
            .install(|| execute(&settings))?,
        None => execute(&settings)?,
    };
    write_all(&settings, &files)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.run_config().and_then(|cfg| run(&cfg)) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
