//! `ouweather`: describe, fit, simulate, evaluate and generate daily
//! temperature series with the seasonal Ornstein–Uhlenbeck model.
//!
//! Exit codes: 0 success, 2 input error, 3 estimation failure.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ou_weather::pipeline::{evaluate_model, fit_raw_series, FitReport, PipelineError};
use ou_weather::reference;
use ou_weather::seasonal::SeasonalMeanParams;
use ou_weather::series::{parse_csv, strip_leap_days, write_csv, CalendarDay};
use ou_weather::simulate::{
    ensemble_band, generate_synthetic_series, write_band_csv, write_paths_csv, SimulationError,
};
use ou_weather::stats::{
    anderson_darling_normal, describe, DescriptiveSummary, NormalityTestResult,
};
use ou_weather::volatility::{MonthlyVolatilitySeries, VolatilityModelParams};
use ou_weather::{simulate_paths, Execution, SimulationConfig};

/// Seed used by every randomized subcommand when `--seed` is omitted.
const DEFAULT_SEED: u64 = 0;

#[derive(Parser)]
#[command(
    name = "ouweather",
    version,
    about = "Seasonal Ornstein-Uhlenbeck daily temperature model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics and normality tests (JSON on stdout, table on stderr).
    Describe {
        #[arg(long)]
        input: PathBuf,
    },
    /// Fit the full model and write a JSON report plus monthly volatilities.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Monthly volatility CSV; defaults to the report path with `.vols.csv`.
        #[arg(long)]
        vols_out: Option<PathBuf>,
    },
    /// Simulate an ensemble from a fitted report.
    Simulate {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        paths: usize,
        #[arg(long)]
        days: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write every path (`day,path_0,...`) instead of the summary band.
        #[arg(long)]
        full_paths: bool,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Fit, simulate over the observed span and score the mean path.
    Evaluate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Generate a synthetic series in the ingestion CSV format.
    Synth {
        /// Parameters to simulate from; the built-in reference set if omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        years: usize,
        #[arg(long, default_value_t = 2000)]
        start_year: i32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Constant volatility instead of the monthly process (0 gives the seasonal mean).
        #[arg(long)]
        vol_override: Option<f64>,
    },
}

#[derive(Args)]
struct SimFlags {
    /// Constant volatility instead of the monthly process.
    #[arg(long)]
    vol_override: Option<f64>,
    /// Starting temperature; defaults to the first observation of the fitted series.
    #[arg(long)]
    t0: Option<f64>,
    /// Run paths on one thread (output is identical either way).
    #[arg(long)]
    serial: bool,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Estimation(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Estimation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Estimation(m) => m,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Estimation(e.to_string())
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn read_series(path: &Path) -> Result<ou_weather::TemperatureSeries, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    parse_csv(BufReader::new(file)).map_err(|e| io_error(path, e))
}

fn read_report(path: &Path) -> Result<FitReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    FitReport::from_json(&text).map_err(|e| io_error(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

#[derive(Serialize)]
struct DescribeOutput {
    n_obs: usize,
    start: Option<CalendarDay>,
    end: Option<CalendarDay>,
    leap_days_removed: usize,
    temperature: DescriptiveSummary,
    temperature_normality: Option<NormalityTestResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    precipitation: Option<DescriptiveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    precipitation_normality: Option<NormalityTestResult>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

type Cell = fn(&DescriptiveSummary, Option<&NormalityTestResult>) -> String;

fn describe_table(out: &DescribeOutput) -> String {
    let columns: Vec<(&str, &DescriptiveSummary, Option<&NormalityTestResult>)> =
        std::iter::once((
            "Temperature",
            &out.temperature,
            out.temperature_normality.as_ref(),
        ))
        .chain(
            out.precipitation
                .as_ref()
                .map(|p| ("Precipitation", p, out.precipitation_normality.as_ref())),
        )
        .collect();
    let rows: [(&str, Cell); 10] = [
        ("Observations", |s, _| s.n.to_string()),
        ("Mean", |s, _| format!("{:.4}", s.mean)),
        ("Median", |s, _| format!("{:.4}", s.median)),
        ("Std. dev.", |s, _| format!("{:.4}", s.sd)),
        ("Skewness", |s, _| fmt_opt(s.skewness)),
        ("Excess kurtosis", |s, _| fmt_opt(s.excess_kurtosis)),
        ("Minimum", |s, _| format!("{:.4}", s.min)),
        ("Maximum", |s, _| format!("{:.4}", s.max)),
        ("Anderson-Darling A2*", |_, n| {
            fmt_opt(n.map(|n| n.a_squared_adjusted))
        }),
        ("A-D p-value", |_, n| {
            n.map_or_else(|| "n/a".to_string(), |n| n.p_value_display())
        }),
    ];
    let mut text = format!("{:<22}", "Statistic");
    for (name, _, _) in &columns {
        let _ = write!(text, "{name:>16}");
    }
    text.push('\n');
    for (label, cell) in rows {
        let _ = write!(text, "{label:<22}");
        for (_, summary, normality) in &columns {
            let _ = write!(text, "{:>16}", cell(summary, *normality));
        }
        text.push('\n');
    }
    text
}

fn run_describe(input: &Path) -> Result<(), CliError> {
    let raw = read_series(input)?;
    let series = strip_leap_days(&raw).map_err(|e| io_error(input, e))?;
    let temps = series.temperatures();
    let temperature = describe(&temps).map_err(|e| io_error(input, e))?;
    let precip = series.precipitation();
    let out = DescribeOutput {
        n_obs: series.len(),
        start: series.first_date(),
        end: series.last_date(),
        leap_days_removed: raw.len() - series.len(),
        temperature,
        temperature_normality: anderson_darling_normal(&temps).ok(),
        precipitation: precip.as_deref().and_then(|p| describe(p).ok()),
        precipitation_normality: precip
            .as_deref()
            .and_then(|p| anderson_darling_normal(p).ok()),
    };
    eprint!("{}", describe_table(&out));
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("serializable")
    );
    Ok(())
}

fn write_vols(path: &Path, vols: &MonthlyVolatilitySeries) -> Result<(), CliError> {
    let mut w = create(path)?;
    let mut body = String::from("year,month,sigma\n");
    for e in &vols.entries {
        let _ = writeln!(body, "{},{},{}", e.year, e.month, e.sigma);
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_error(path, e))
}

fn fit_table(report: &FitReport) -> String {
    let s = &report.seasonal;
    let v = &report.vol;
    format!(
        "Seasonal mean\n  a_T {:>14.6}\n  b_T {:>14.6e}\n  c_T {:>14.6}\n  psi {:>14.6}\n  R2  {:>14.6}\n\
         Volatility\n  sigma_bar   {:>10.6}\n  sigma_sigma {:>10.6}\n  kappa_sigma {:>10.6}\n\
         Mean reversion\n  kappa_T     {:>10.6}\n  daily adj.  {:>10.6}\n",
        s.a_t,
        s.b_t,
        s.c_t,
        s.psi,
        s.r_squared_fit,
        v.sigma_bar,
        v.sigma_sigma,
        v.kappa_sigma,
        report.kappa_t,
        report.daily_adjustment_fraction,
    )
}

fn run_fit(input: &Path, out: &Path, vols_out: Option<&Path>) -> Result<(), CliError> {
    let raw = read_series(input)?;
    let (_, report) = fit_raw_series(&raw)?;
    let mut w = create(out)?;
    w.write_all(report.to_json().as_bytes())
        .and_then(|_| w.write_all(b"\n"))
        .and_then(|_| w.flush())
        .map_err(|e| io_error(out, e))?;
    let vols_path = vols_out.map_or_else(|| out.with_extension("vols.csv"), Path::to_path_buf);
    write_vols(&vols_path, &report.monthly_vols)?;
    eprint!("{}", fit_table(&report));
    Ok(())
}

fn simulation_error(e: SimulationError) -> CliError {
    match e {
        SimulationError::InvalidParams(_) | SimulationError::SinglePath(_) => {
            CliError::Input(e.to_string())
        }
        other => CliError::Estimation(other.to_string()),
    }
}

fn run_simulate(
    report_path: &Path,
    n_paths: usize,
    n_days: usize,
    seed: u64,
    out: &Path,
    full_paths: bool,
    flags: &SimFlags,
) -> Result<(), CliError> {
    let report = read_report(report_path)?;
    let mut config = SimulationConfig::new(n_paths, n_days, seed)
        .with_t0(flags.t0.unwrap_or(report.meta.first_temp));
    config.constant_vol_override = flags.vol_override;
    if flags.serial {
        config = config.with_execution(Execution::Serial);
    }
    let ens = simulate_paths(&report.seasonal, &report.kappa(), &report.vol, &config)
        .map_err(simulation_error)?;
    let w = create(out)?;
    if full_paths {
        write_paths_csv(&ens, w).map_err(|e| io_error(out, e))?;
    } else {
        let band = ensemble_band(&ens).map_err(simulation_error)?;
        write_band_csv(&band, w).map_err(|e| io_error(out, e))?;
    }
    if ens.floor_hits > 0 {
        eprintln!(
            "volatility floor engaged in {} simulated months",
            ens.floor_hits
        );
    }
    Ok(())
}

fn run_evaluate(input: &Path, n_paths: usize, seed: u64) -> Result<(), CliError> {
    let raw = read_series(input)?;
    let (series, report) = fit_raw_series(&raw)?;
    let metrics = evaluate_model(&series, &report, n_paths, seed)?;
    eprintln!(
        "RMSE {:>10.4}\nMAPE {:>9.4}%\nR2   {:>10.5}",
        metrics.rmse, metrics.mape, metrics.r_squared
    );
    println!(
        "{}",
        serde_json::to_string_pretty(&metrics).expect("serializable")
    );
    Ok(())
}

fn run_synth(
    report: Option<&Path>,
    years: usize,
    start_year: i32,
    seed: u64,
    out: &Path,
    vol_override: Option<f64>,
) -> Result<(), CliError> {
    let (seasonal, kappa_t, vol): (SeasonalMeanParams, f64, VolatilityModelParams) = match report {
        Some(path) => {
            let r = read_report(path)?;
            (r.seasonal, r.kappa_t, r.vol)
        }
        None => (
            reference::seasonal(),
            reference::KAPPA_T,
            reference::volatility(),
        ),
    };
    let series = generate_synthetic_series(
        &seasonal,
        kappa_t,
        &vol,
        start_year,
        years,
        seed,
        vol_override,
    )
    .map_err(simulation_error)?;
    let w = create(out)?;
    write_csv(&series, w).map_err(|e| io_error(out, e))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Describe { input } => run_describe(&input),
        Command::Fit {
            input,
            out,
            vols_out,
        } => run_fit(&input, &out, vols_out.as_deref()),
        Command::Simulate {
            report,
            paths,
            days,
            seed,
            out,
            full_paths,
            sim,
        } => run_simulate(&report, paths, days, seed, &out, full_paths, &sim),
        Command::Evaluate { input, paths, seed } => run_evaluate(&input, paths, seed),
        Command::Synth {
            report,
            years,
            start_year,
            seed,
            out,
            vol_override,
        } => run_synth(
            report.as_deref(),
            years,
            start_year,
            seed,
            &out,
            vol_override,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
