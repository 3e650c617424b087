//! Command-line front end.
//!
//! ```text
//! truncexp estimate --g 24 --s 3 --m 55279 --sum-x 540000
//! truncexp estimate --g 24 --s 3 --durations data.csv --json
//! truncexp simulate scenarios.cfg
//! truncexp profile --g 24 --s 3 --m 55279 --sum-x 540000 --from 0.01 --to 0.2 --step 0.001
//! ```
//!
//! Exit codes: 0 success, 2 usage, 3 data or consistency error, 4 numerical failure.

pub mod config;
pub mod input;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::Error;
use crate::estimator::{self, EstimateReport, SufficientStats};
use crate::model::{ModelConfig, DEFAULT_EPSILON};
use crate::montecarlo::{self, SimulationReport, SimulationScenario};

/// Environment variable that replaces every scenario's seed.
pub const SEED_ENV: &str = "TRUNCEXP_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => CliError::Usage(e.to_string()),
            Error::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "truncexp",
    version,
    about = "Rate estimation for doubly-truncated Exponential durations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the rate from durations or sufficient statistics.
    Estimate {
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        data: DataArgs,
        /// One JSON record instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run the simulation scenarios of a config file.
    Simulate {
        config: PathBuf,
        /// One JSON record per line.
        #[arg(long)]
        json: bool,
    },
    /// Print the score on a grid of rates as CSV.
    Profile {
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
    },
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Length of the birth window.
    #[arg(long)]
    g: f64,
    /// Length of the observation window.
    #[arg(long)]
    s: f64,
    /// Parameter space is [epsilon, 1/epsilon].
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Number of observed units.
    #[arg(long)]
    m: Option<u64>,
    /// Sum of observed durations.
    #[arg(long = "sum-x")]
    sum_x: Option<f64>,
    /// Sum of squared observed durations.
    #[arg(long = "sum-x2")]
    sum_x2: Option<f64>,
    /// Text or CSV file of observed durations.
    #[arg(long)]
    durations: Option<PathBuf>,
    /// Interval counts such as "82:0-5,112:6-10", expanded to midpoints.
    #[arg(long)]
    grouped: Option<String>,
}

impl DataArgs {
    fn stats(&self) -> Result<SufficientStats, CliError> {
        let inline = self.m.is_some() || self.sum_x.is_some() || self.sum_x2.is_some();
        let sources = [inline, self.durations.is_some(), self.grouped.is_some()];
        match sources.iter().filter(|&&b| b).count() {
            0 => {
                return Err(CliError::Usage(
                    "give one data source: --m/--sum-x[/--sum-x2], --durations or --grouped".into(),
                ))
            }
            1 => {}
            _ => {
                return Err(CliError::Usage(
                    "--m/--sum-x, --durations and --grouped are mutually exclusive".into(),
                ))
            }
        }
        if inline {
            let (Some(m), Some(sum_x)) = (self.m, self.sum_x) else {
                return Err(CliError::Usage(
                    "inline statistics need both --m and --sum-x".into(),
                ));
            };
            return input::inline_stats(m, sum_x, self.sum_x2);
        }
        let durations = match (&self.durations, &self.grouped) {
            (Some(path), _) => input::read_durations(path)?,
            (_, Some(spec)) => input::parse_grouped(spec)?,
            _ => unreachable!(),
        };
        Ok(SufficientStats::from_durations(&durations)?)
    }
}

impl DesignArgs {
    fn config(&self) -> Result<ModelConfig, CliError> {
        Ok(ModelConfig::new(self.g, self.s, self.epsilon)?)
    }
}

/// Parses `args` (including the program name) and runs the command.
///
/// `--help` and `--version` print to `out` and succeed.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}")?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    match cli.command {
        Command::Estimate { design, data, json } => {
            let cfg = design.config()?;
            let stats = data.stats()?;
            let report = estimator::estimate(&cfg, &stats)?;
            write_estimate(out, &report, json)
        }
        Command::Simulate { config, json } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", config.display())))?;
            let seed_override = match std::env::var(SEED_ENV) {
                Ok(v) => Some(v.trim().parse::<u64>().map_err(|_| {
                    CliError::Usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))
                })?),
                Err(_) => None,
            };
            simulate(&text, seed_override, json, out)
        }
        Command::Profile {
            design,
            data,
            from,
            to,
            step,
        } => {
            let cfg = design.config()?;
            let stats = data.stats()?;
            let grid = theta_grid(&cfg, from, to, step)?;
            writeln!(out, "theta,score")?;
            for theta in grid {
                let v = estimator::score(&cfg, &stats, theta)?;
                writeln!(out, "{},{}", sig6(theta), sig6(v))?;
            }
            Ok(())
        }
    }
}

/// Runs every scenario of a config text and writes one row per latent size.
pub fn simulate(
    text: &str,
    seed_override: Option<u64>,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let specs = config::parse_config(text)?;
    if !json {
        writeln!(
            out,
            "{:>10} {:>8} {:>8} {:>10} {:>6} {:>10} {:>12} {:>12} {:>12} {:>12} {:>10} {:>8} {:>6}",
            "theta0",
            "g",
            "s",
            "n",
            "r",
            "alpha",
            "bias",
            "bias_se",
            "sigma2_hat",
            "n_var",
            "vif",
            "boundary",
            "empty"
        )?;
    }
    for spec in specs {
        let seed = seed_override.unwrap_or(spec.seed);
        for &n in &spec.n {
            let scenario = SimulationScenario {
                theta0: spec.theta0,
                cfg: spec.cfg,
                n,
                replications: spec.replications,
                master_seed: seed,
            };
            let report =
                montecarlo::run_scenario(&scenario).map_err(|e| match CliError::from(e) {
                    CliError::Usage(m) => {
                        CliError::Usage(format!("scenario at line {}: {m}", spec.line))
                    }
                    other => other,
                })?;
            write_simulation(out, &report, json)?;
        }
    }
    Ok(())
}

fn theta_grid(cfg: &ModelConfig, from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    let hi = cfg.theta_bounds().1;
    if !(from > 0.0 && to <= hi && from < to && step > 0.0 && step.is_finite()) {
        return Err(CliError::Usage(format!(
            "grid needs 0 < from < to <= {hi} and step > 0, got from={from} to={to} step={step}"
        )));
    }
    let count = ((to - from) / step * (1.0 + 1e-12)).floor() as usize + 1;
    if count < 2 {
        return Err(CliError::Usage(
            "grid must contain at least 2 points".into(),
        ));
    }
    if count > 10_000_000 {
        return Err(CliError::Usage(format!(
            "grid of {count} points is too large"
        )));
    }
    Ok((0..count)
        .map(|k| (from + k as f64 * step).min(to))
        .collect())
}

/// Formats `x` with 6 significant digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // Rounding may carry into a new leading digit, e.g. 9.999996 -> 10.00000.
        let s = if s
            .trim_start_matches('-')
            .replace('.', "")
            .trim_start_matches('0')
            .len()
            > 6
        {
            format!("{x:.prec$}", prec = decimals.saturating_sub(1))
        } else {
            s
        };
        trim_zeros(s)
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent");
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn round6(x: f64) -> Value {
    if x.is_finite() {
        json!(sig6(x).parse::<f64>().expect("sig6 output parses"))
    } else {
        Value::Null
    }
}

fn round6_opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, round6)
}

fn dash(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), sig6)
}

fn write_estimate(out: &mut dyn Write, r: &EstimateReport, json: bool) -> Result<(), CliError> {
    if json {
        let record = json!({
            "theta_hat": round6(r.theta_hat),
            "se_hat": round6_opt(r.se_hat),
            "n_hat": round6(r.n_hat),
            "theta_srs": round6(r.theta_srs),
            "se_srs": round6(r.se_srs),
            "vif_hat": round6_opt(r.vif_hat),
            "boundary": r.boundary.to_string(),
            "boundary_diagnostic": round6(r.boundary_diagnostic),
        });
        writeln!(out, "{record}")?;
        return Ok(());
    }
    let rows = [
        ("theta_hat", sig6(r.theta_hat)),
        ("se_hat", dash(r.se_hat)),
        ("n_hat", sig6(r.n_hat)),
        ("theta_srs", sig6(r.theta_srs)),
        ("se_srs", sig6(r.se_srs)),
        ("vif_hat", dash(r.vif_hat)),
        ("boundary", r.boundary.to_string()),
        ("boundary_diagnostic", sig6(r.boundary_diagnostic)),
    ];
    for (name, value) in rows {
        writeln!(out, "{name:<20} {value}")?;
    }
    Ok(())
}

fn write_simulation(out: &mut dyn Write, r: &SimulationReport, json: bool) -> Result<(), CliError> {
    let sc = &r.scenario;
    if json {
        let record = json!({
            "theta0": sc.theta0,
            "g": sc.cfg.g(),
            "s": sc.cfg.s(),
            "n": sc.n,
            "r": sc.replications,
            "seed": sc.master_seed,
            "alpha": round6(r.alpha),
            "mean_bias": round6(r.mean_bias),
            "bias_mc_se": round6(r.bias_mc_se),
            "mean_sigma2_hat": round6_opt(r.mean_sigma2_hat),
            "n_var_sim": round6(r.n_var_sim),
            "mean_vif": round6_opt(r.mean_vif),
            "boundary_count": r.boundary_count,
            "empty_count": r.empty_count,
            "replications_used": r.replications_used,
        });
        writeln!(out, "{record}")?;
        return Ok(());
    }
    writeln!(
        out,
        "{:>10} {:>8} {:>8} {:>10} {:>6} {:>10} {:>12} {:>12} {:>12} {:>12} {:>10} {:>8} {:>6}",
        sig6(sc.theta0),
        sig6(sc.cfg.g()),
        sig6(sc.cfg.s()),
        sc.n,
        sc.replications,
        sig6(r.alpha),
        sig6(r.mean_bias),
        sig6(r.bias_mc_se),
        dash(r.mean_sigma2_hat),
        sig6(r.n_var_sim),
        dash(r.mean_vif),
        r.boundary_count,
        r.empty_count
    )?;
    Ok(())
}
