//! Batch command-line front end: configuration, experiment orchestration,
//! and export of coefficient tables, moment checks, benchmark curves, and
//! regularity fits. Exit codes: 0 success, 2 config error, 3 budget error,
//! 4 gate failure in `--check` mode.

mod config;
mod manifest;
mod runs;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use config::{InitialData, RunConfig};
use runs::{Model, RunError, RunOutput};

#[derive(Parser)]
#[command(name = "wickheat", version, about = "Spectral Wiener-chaos solver for the stochastic heat equation with spatial white noise")]
struct Cli {
    /// JSON configuration file; flags override individual fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for artifacts and the run manifest
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Fail (exit 4) when any acceptance gate of the subcommand fails
    #[arg(long, global = true)]
    check: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the propagator system and export coefficients and variance
    /// tables
    Solve(Overrides),
    /// Draw Monte Carlo realizations and compare moments against the exact
    /// coefficients
    Sample(Overrides),
    /// Exact additive-noise benchmark curves
    Additive(Overrides),
    /// Increment curves and Holder-exponent fits
    Regularity(RegularityArgs),
    /// Fundamental chaos solution with kernel and symmetry report
    Fundamental(Overrides),
    /// Simplex integral tables with factorial-decay envelopes
    Integrals(Overrides),
    /// Deterministic positivity certificates for random potentials
    Certify(Overrides),
}

#[derive(Args)]
struct RegularityArgs {
    /// Which model to measure
    #[arg(long, value_enum, default_value_t = ModelArg::Both)]
    model: ModelArg,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Additive,
    Multiplicative,
    Both,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Additive => Model::Additive,
            ModelArg::Multiplicative => Model::Multiplicative,
            ModelArg::Both => Model::Both,
        }
    }
}

#[derive(Args, Default)]
struct Overrides {
    /// Chaos order truncation N
    #[arg(long)]
    order_cap: Option<u32>,
    /// Spectral truncation K
    #[arg(long)]
    modes: Option<usize>,
    /// Noise-mode truncation M
    #[arg(long)]
    noise_modes: Option<usize>,
    /// Initial data: "constant", "mode:<k>", or "band:<modes>:<seed>"
    #[arg(long)]
    u0: Option<String>,
    /// Comma-separated time grid; `--t` is shorthand for a single time
    #[arg(long)]
    times: Option<String>,
    #[arg(long)]
    t: Option<f64>,
    /// Comma-separated spatial grid in [0, pi]
    #[arg(long)]
    points: Option<String>,
    /// Single spatial point shorthand
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    lag_lo: Option<u32>,
    #[arg(long)]
    lag_hi: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    draws: Option<usize>,
    /// Truncation of the exact additive benchmark series
    #[arg(long)]
    additive_modes: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    /// Simplex depth cap (integrals)
    #[arg(long = "n")]
    depth: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Source point for the fundamental solution
    #[arg(long)]
    source: Option<f64>,
    /// Number of random potentials (certify)
    #[arg(long)]
    potentials: Option<usize>,
}

fn parse_list(text: &str, field: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| format!("{field}: cannot parse {tok:?} as a number"))
        })
        .collect()
}

fn parse_u0(text: &str) -> Result<InitialData, String> {
    if text == "constant" {
        return Ok(InitialData::Constant);
    }
    if let Some(k) = text.strip_prefix("mode:") {
        let k = k
            .parse::<usize>()
            .map_err(|_| format!("u0: bad mode index in {text:?}"))?;
        return Ok(InitialData::Mode { k });
    }
    if let Some(rest) = text.strip_prefix("band:") {
        let (modes, seed) = rest
            .split_once(':')
            .ok_or_else(|| format!("u0: expected band:<modes>:<seed>, got {text:?}"))?;
        return Ok(InitialData::BandLimited {
            modes: modes
                .parse()
                .map_err(|_| format!("u0: bad band limit in {text:?}"))?,
            seed: seed
                .parse()
                .map_err(|_| format!("u0: bad seed in {text:?}"))?,
        });
    }
    Err(format!(
        "u0: unknown preset {text:?} (expected constant, mode:<k>, or band:<modes>:<seed>)"
    ))
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) -> Result<(), String> {
        if let Some(v) = self.order_cap {
            config.order_cap = v;
        }
        if let Some(v) = self.modes {
            config.wavenumber_cap = v;
        }
        if let Some(v) = self.noise_modes {
            config.noise_modes = v;
        }
        if let Some(text) = &self.u0 {
            config.initial_data = parse_u0(text)?;
        }
        if let Some(text) = &self.times {
            config.times = parse_list(text, "times")?;
        }
        if let Some(t) = self.t {
            config.times = vec![t];
        }
        if let Some(text) = &self.points {
            config.points = parse_list(text, "points")?;
        }
        if let Some(x) = self.x {
            config.points = vec![x];
        }
        if let Some(v) = self.lag_lo {
            config.lag_lo = v;
        }
        if let Some(v) = self.lag_hi {
            config.lag_hi = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.draws {
            config.draws = v;
        }
        if let Some(v) = self.additive_modes {
            config.additive_modes = v;
        }
        if let Some(v) = self.horizon {
            config.horizon = v;
        }
        if let Some(v) = self.budget {
            config.budget = v;
        }
        if let Some(v) = self.depth {
            config.depth = v;
        }
        if let Some(v) = self.alpha {
            config.alpha = v;
        }
        if let Some(v) = self.beta {
            config.beta = v;
        }
        if let Some(v) = self.source {
            config.source = v;
        }
        if let Some(v) = self.potentials {
            config.potentials = v;
        }
        Ok(())
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_GATE: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(RunError::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(RunError::Budget(message)) => {
            eprintln!("budget error: {message}");
            ExitCode::from(EXIT_BUDGET)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, RunError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                RunError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| {
                RunError::Config(format!("{}: {e}", path.display()))
            })?
        }
        None => RunConfig::default(),
    };

    let (name, output): (&str, RunOutput) = match &cli.command {
        Command::Solve(ov) => {
            ov.apply(&mut config).map_err(RunError::Config)?;
            config.validate().map_err(RunError::Config)?;
            ("solve", runs::run_solve(&config)?)
        }
        Command::Sample(ov) => {
            ov.apply(&mut config).map_err(RunError::Config)?;
            config.validate().map_err(RunError::Config)?;
            ("sample", runs::run_sample(&config)?)
        }
        Command::Additive(ov) => {
            ov.apply(&mut config).map_err(RunError::Config)?;
            config.validate().map_err(RunError::Config)?;
            runs::check_anchor_points(&config)?;
            ("additive", runs::run_additive(&config)?)
        }
        Command::Regularity(args) => {
            args.overrides.apply(&mut config).map_err(RunError::Config)?;
            config.validate().map_err(RunError::Config)?;
            runs::check_anchor_points(&config)?;
            ("regularity", runs::run_regularity(&config, args.model.into())?)
        }
        Command::Fundamental(ov) => {
            ov.apply(&mut config).map_err(RunError::Config)?;
            config.validate().map_err(RunError::Config)?;
            ("fundamental", runs::run_fundamental(&config)?)
        }
        Command::Integrals(ov) => {
            ov.apply(&mut config).map_err(RunError::Config)?;
            config.validate().map_err(RunError::Config)?;
            ("integrals", runs::run_integrals(&config)?)
        }
        Command::Certify(ov) => {
            ov.apply(&mut config).map_err(RunError::Config)?;
            config.validate().map_err(RunError::Config)?;
            ("certify", runs::run_certify(&config)?)
        }
    };

    manifest::write_run(&cli.out, name, &config, &output.files)
        .map_err(|e| RunError::Config(format!("cannot write outputs: {e}")))?;

    for line in &output.summary {
        println!("{line}");
    }
    for (file, _) in &output.files {
        println!("wrote {}", cli.out.join(file).display());
    }
    println!("wrote {}", cli.out.join("manifest.json").display());

    if cli.check {
        if output.failed_gates.is_empty() {
            println!("check: all gates passed");
        } else {
            for gate in &output.failed_gates {
                eprintln!("gate failed: {gate}");
            }
            return Ok(ExitCode::from(EXIT_GATE));
        }
    }
    Ok(ExitCode::SUCCESS)
}
