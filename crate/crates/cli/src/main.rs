use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kouexp::mc::SimConfig;
use kouexp::presets::{self, TABLE1_LEVELS, TABLE3_LEVELS};
use kouexp::{Complex64, Error};

mod commands;
mod config;
mod output;

use config::{ExpSumSource, Format, Model, Resolved, RunConfig};
use output::Table;

/// Exponential functionals of Kou processes and GMDB risk measures.
#[derive(Debug, Parser)]
#[command(name = "kouexp", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for Monte Carlo runs.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Significant digits in CSV output (default 17).
    #[arg(long, global = true)]
    digits: Option<usize>,
    /// Override the configured model.
    #[arg(long, global = true, value_enum)]
    model: Option<Model>,
    /// Override the configured equity parameters with a named set.
    #[arg(long, global = true)]
    equity: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Rate {
    /// Real part of the exponential-clock rate q.
    #[arg(long, default_value_t = 0.05)]
    q: f64,
    /// Imaginary part of q.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    q_im: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Roots of ψ(z) = q and the jump-rate poles, in increasing order.
    Roots(Rate),
    /// Density, cdf and truncated means of I_{x,q} on a threshold grid.
    Dist {
        #[arg(long, default_value_t = 0.05)]
        q: f64,
        /// Starting value x (default 1/m_d).
        #[arg(long)]
        x: Option<f64>,
        /// Explicit thresholds; otherwise a grid from --y-min to --y-max.
        #[arg(long, value_delimiter = ',')]
        y: Vec<f64>,
        #[arg(long)]
        y_min: Option<f64>,
        #[arg(long)]
        y_max: Option<f64>,
        #[arg(long, default_value_t = 30)]
        points: usize,
    },
    /// Fit the lifetime density by an exponential sum.
    FitMortality {
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// P(L > V) for loss levels V.
    Tailprob {
        #[arg(long, value_delimiter = ',', default_values_t = TABLE1_LEVELS)]
        v: Vec<f64>,
    },
    /// Value at risk at confidence levels p.
    Var {
        #[arg(long, value_delimiter = ',', default_values_t = TABLE3_LEVELS)]
        p: Vec<f64>,
    },
    /// Conditional tail expectation at confidence levels p.
    Cte {
        #[arg(long, value_delimiter = ',', default_values_t = TABLE3_LEVELS)]
        p: Vec<f64>,
        /// Use this VaR instead of computing it (single level only).
        #[arg(long)]
        var: Option<f64>,
    },
    /// Monte Carlo tail probabilities against the analytic values.
    Mc {
        #[arg(long, value_delimiter = ',', default_values_t = TABLE1_LEVELS)]
        v: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = 20)]
        experiments: usize,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Tail probabilities across jump intensities.
    Table1,
    /// Monte Carlo concordance for the unit-intensity model.
    Table2 {
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = 20)]
        experiments: usize,
    },
    /// VaR and CTE for the two jump parameter sets.
    Table3,
    /// Tail-probability curves for plotting.
    Tailcurve {
        /// Equity sets, one column each.
        #[arg(long, value_delimiter = ',', default_values_t = ["gbm".to_string(), "set-A".to_string(), "set-B".to_string()])]
        sets: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        v_min: f64,
        #[arg(long, default_value_t = 0.99)]
        v_max: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}

/// Why a run failed; selects the exit code.
#[derive(Debug)]
pub enum Failure {
    Schema(String),
    Numerical { op: &'static str, error: Error },
}

impl Failure {
    /// Invalid arguments reported by the library are input problems, everything else is numerical.
    pub fn numerical(op: &'static str, error: Error) -> Self {
        match error {
            Error::InvalidArgument(msg) => Failure::Schema(format!("{op}: {msg}")),
            error => Failure::Numerical { op, error },
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Schema(_) => 2,
            Failure::Numerical { .. } => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Schema(msg) => write!(f, "invalid input: {msg}"),
            Failure::Numerical { op, error } => write!(f, "numerical failure in {op}: {error}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("kouexp: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

enum Artifact {
    Table(Table),
    Json(String),
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Schema(format!("--threads: {e}")))?;
    }
    let mut raw = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(m) = cli.model {
        raw.model = Some(m);
    }
    if let Some(name) = &cli.equity {
        raw.equity = Some(config::Named::Preset(name.clone()));
    }
    let cfg = Resolved::new(raw)?;
    let digits = cli.digits.or(cfg.digits);
    let sim = |paths: usize, experiments: usize, step: f64| {
        let s = SimConfig { paths, experiments, step, seed: cli.seed, max_age_horizon: None };
        s.validate().map_err(|e| Failure::numerical("mc::SimConfig", e)).map(|_| s)
    };

    let (artifact, default_format) = match &cli.command {
        Command::Roots(rate) => (Artifact::Table(commands::roots(&cfg, Complex64::new(rate.q, rate.q_im))?), Format::Csv),
        Command::Dist { q, x, y, y_min, y_max, points } => {
            let x = x.unwrap_or(1.0 / cfg.terms.m_d);
            let ys = if y.is_empty() {
                commands::grid(y_min.unwrap_or(0.1 * x), y_max.unwrap_or(3.0 * x), *points)?
            } else {
                y.clone()
            };
            (Artifact::Table(commands::dist(&cfg, x, *q, &ys)?), Format::Csv)
        }
        Command::FitMortality { terms, horizon, samples } => {
            let (t0, h0, s0) = match cfg.expsum {
                ExpSumSource::Fit { terms, horizon, samples } => (terms, horizon, samples),
                ExpSumSource::File { .. } => (presets::FIT_TERMS, presets::FIT_HORIZON, presets::FIT_SAMPLES),
            };
            let sum = kouexp::mortality::fit_exponential_sum(
                &cfg.mortality,
                terms.unwrap_or(t0),
                horizon.unwrap_or(h0),
                samples.unwrap_or(s0),
            )
            .map_err(|e| Failure::numerical("mortality::fit_exponential_sum", e))?;
            eprintln!("fitted {} terms, sup error {:e}", sum.terms.len(), sum.sup_error);
            match cli.format.or(cfg.format) {
                Some(Format::Csv) => (Artifact::Table(commands::expsum_table(&sum)), Format::Csv),
                _ => (Artifact::Json(sum.to_json().map_err(|e| Failure::numerical("mortality::to_json", e))?), Format::Json),
            }
        }
        Command::Tailprob { v } => (Artifact::Table(commands::tailprob(&cfg, &cfg.lifetimes()?, v)?), Format::Csv),
        Command::Var { p } => (Artifact::Table(commands::var(&cfg, &cfg.lifetimes()?, p)?), Format::Csv),
        Command::Cte { p, var } => (Artifact::Table(commands::cte(&cfg, &cfg.lifetimes()?, p, *var)?), Format::Csv),
        Command::Mc { v, paths, experiments, step } => {
            let s = sim(*paths, *experiments, *step)?;
            (Artifact::Table(commands::mc(&cfg, &cfg.lifetimes()?, cfg.equity, v, &s)?), Format::Csv)
        }
        Command::Table1 => (Artifact::Table(commands::table1(&cfg, &cfg.lifetimes()?)?), Format::Csv),
        Command::Table2 { paths, experiments } => {
            let s = sim(*paths, *experiments, 0.01)?;
            let equity = presets::kou_table1();
            (Artifact::Table(commands::mc(&cfg, &cfg.lifetimes()?, equity, &TABLE1_LEVELS, &s)?), Format::Csv)
        }
        Command::Table3 => (Artifact::Table(commands::table3(&cfg, &cfg.lifetimes()?)?), Format::Csv),
        Command::Tailcurve { sets, v_min, v_max, points } => {
            let named = sets
                .iter()
                .map(|n| presets::equity(n).map(|k| (n.clone(), k)))
                .collect::<kouexp::Result<Vec<_>>>()
                .map_err(|e| Failure::numerical("presets::equity", e))?;
            let g = commands::grid(*v_min, *v_max, *points)?;
            (Artifact::Table(commands::tailcurve(&cfg, &cfg.lifetimes()?, &named, &g)?), Format::Csv)
        }
    };

    let format = cli.format.or(cfg.format).unwrap_or(default_format);
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::Schema(format!("cannot create {}: {e}", path.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    let written = match artifact {
        Artifact::Table(t) => t.write(&mut out, format, digits),
        Artifact::Json(text) => writeln!(out, "{text}"),
    };
    written.and_then(|_| out.flush()).map_err(|e| Failure::Schema(format!("cannot write output: {e}")))
}
