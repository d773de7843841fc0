use clap::{Parser, Subcommand};
use meanfield_spectra_cli::commands::{run, RunError};
use meanfield_spectra_cli::config::{CommandKind, ConfigError, Figure, Format, Grid, Method, RunConfig, Sweep, TOL_ENV};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectral gaps of mean-field O(n) spin models.
///
/// Flags override values from --config; MEANFIELD_SPECTRA_TOL (inline TOML,
/// e.g. "exponent_abs = 0.03") overrides the tolerance block. Exit status is
/// 0 on success, 1 on a failed check or computation, 2 on a config error.
#[derive(Parser, Debug)]
#[command(name = "meanfield-spectra", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,
    /// TOML run config; its `command` is used when none is given here.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format (default: csv)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Cap the expensive acceptance sweeps at N = 800.
    #[arg(long, global = true)]
    quick: bool,
    /// Number of spin components.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Inverse temperature
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// External field strength
    #[arg(long, global = true, allow_negative_numbers = true)]
    h: Option<f64>,
    /// A single system size.
    #[arg(long = "N", global = true, conflicts_with = "sweep")]
    n_spins: Option<usize>,
    /// start:factor:count or a comma list of system sizes.
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// Angular sector for the radial operator.
    #[arg(long, global = true)]
    l: Option<usize>,
    /// Gap method (default: chain for n = 1, schrodinger otherwise)
    #[arg(long, global = true, value_enum)]
    method: Option<Method>,
    /// Limit operator family for `figures`
    #[arg(long, global = true, value_enum)]
    figure: Option<Figure>,
    /// start:stop:points (φ for potential, β or λ for figures).
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Single-site constant for the constant transfer (required for n >= 2).
    #[arg(long, global = true)]
    gamma: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Table of V, V', V'' along the field line (or radius), plus critical points.
    Potential,
    /// Critical points of the renormalized potential.
    Criticalpoints,
    /// Spectral gap over a sweep of system sizes.
    Gap,
    /// Lowest five eigenvalues of the limit operators over a parameter grid.
    Figures,
    /// Muckenhoupt and Bobkov-Götze constants, sandwich check and transfer.
    Ineq,
    /// The acceptance suite.
    Verify,
}

impl From<Cmd> for CommandKind {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Potential => CommandKind::Potential,
            Cmd::Criticalpoints => CommandKind::Criticalpoints,
            Cmd::Gap => CommandKind::Gap,
            Cmd::Figures => CommandKind::Figures,
            Cmd::Ineq => CommandKind::Ineq,
            Cmd::Verify => CommandKind::Verify,
        }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            let mut cfg = RunConfig::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))?;
            if let Some(c) = cli.command {
                cfg.command = c.into();
            }
            cfg
        }
        None => RunConfig::new(cli.command.ok_or_else(|| ConfigError("no command given (and no --config)".into()))?.into()),
    };
    if let Some(v) = cli.n {
        cfg.model.n = v;
    }
    if let Some(v) = cli.beta {
        cfg.model.beta = v;
    }
    if let Some(v) = cli.h {
        cfg.model.h = v;
    }
    if let Some(n) = cli.n_spins {
        cfg.sweep = Some(Sweep::List(vec![n]));
    }
    if let Some(s) = &cli.sweep {
        cfg.sweep = Some(s.parse()?);
    }
    if let Some(v) = cli.l {
        cfg.l = v;
    }
    if cli.method.is_some() {
        cfg.method = cli.method;
    }
    if let Some(v) = cli.figure {
        cfg.figure = v;
    }
    if let Some(g) = &cli.grid {
        cfg.grid = Some(g.parse::<Grid>()?);
    }
    if cli.gamma.is_some() {
        cfg.gamma = cli.gamma;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    cfg.quick |= cli.quick;
    if let Ok(inline) = std::env::var(TOL_ENV) {
        cfg.apply_tolerance_override(&inline)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let cfg = build_config(cli)?;
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(ConfigError("--jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| RunError::Failed(format!("thread pool: {e}")))?;
    }
    let out: Box<dyn Write> = match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    run(&cfg, out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("meanfield-spectra: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
