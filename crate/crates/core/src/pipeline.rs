//! Full calibration in estimation order and ensemble-based evaluation.
//!
//! [`fit_full_model`] runs seasonal mean → residuals → monthly quadratic
//! variation → volatility process → κ_T, and packages the result with
//! descriptive statistics and normality tests as a [`FitReport`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mean_reversion::{estimate_kappa, MeanReversionError, MeanReversionEstimate};
use crate::seasonal::{fit_seasonal_mean, residuals, SeasonalError, SeasonalMeanParams};
use crate::series::{strip_leap_days, CalendarDay, SeriesError, TemperatureSeries};
use crate::simulate::{simulate_calendar_paths, SimulationConfig, SimulationError};
use crate::stats::{
    anderson_darling_normal, describe, DescriptiveSummary, FitMetrics, NormalityTestResult,
    StatsError,
};
use crate::volatility::{
    estimate_kappa_sigma, estimate_sigma_bar, estimate_sigma_sigma, estimate_volatility_model,
    monthly_quadratic_variation, MonthlyVolatilitySeries, VolatilityError, VolatilityModelParams,
};

/// Version of the JSON report layout. Reports with any other version are rejected.
pub const SCHEMA_VERSION: u32 = 1;
/// Shortest series accepted by [`fit_full_model`], in calendar months.
pub const MIN_MONTHS: usize = 24;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input: {0}")]
    Input(#[from] SeriesError),
    #[error("series spans {months} calendar months; at least {MIN_MONTHS} are required")]
    TooShort { months: usize },
    #[error("temperature is constant: every monthly volatility is zero, so the 1/σ² weights and the model are undefined")]
    ConstantSeries,
    #[error("seasonal mean stage: {0}")]
    Seasonal(#[source] SeasonalError),
    #[error("volatility stage: {0}")]
    Volatility(#[source] VolatilityError),
    #[error("mean reversion stage: {0}")]
    MeanReversion(#[source] MeanReversionError),
    #[error("descriptive statistics stage: {0}")]
    Statistics(#[source] StatsError),
    #[error("simulation stage: {0}")]
    Simulation(#[source] SimulationError),
    #[error("metrics stage: {0}")]
    Metrics(#[source] StatsError),
}

impl PipelineError {
    /// True for malformed input, false for estimation failures on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            PipelineError::Input(_) | PipelineError::TooShort { .. }
        )
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report schema_version {found:?} is not supported (expected {SCHEMA_VERSION})")]
    UnsupportedVersion { found: Option<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveBlock {
    pub temperature: DescriptiveSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precipitation: Option<DescriptiveSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityBlock {
    pub temperature: NormalityTestResult,
    pub residuals: NormalityTestResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precipitation: Option<NormalityTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub n_obs: usize,
    pub start: CalendarDay,
    pub end: CalendarDay,
    pub leap_days_removed: usize,
    pub schema_version: u32,
    /// First observed temperature, the default `T(0)` for simulation.
    pub first_temp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation_paths: Option<usize>,
}

/// Everything estimated from one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub seasonal: SeasonalMeanParams,
    pub kappa_t: f64,
    pub daily_adjustment_fraction: f64,
    pub kappa_diagnostics: MeanReversionEstimate,
    pub vol: VolatilityModelParams,
    pub monthly_vols: MonthlyVolatilitySeries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<FitMetrics>,
    pub descriptive: DescriptiveBlock,
    pub normality: NormalityBlock,
    pub meta: ReportMeta,
}

impl FitReport {
    pub fn kappa(&self) -> MeanReversionEstimate {
        self.kappa_diagnostics
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are always serializable")
    }

    /// Parses a report, rejecting unknown schema versions before anything else.
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value
            .get("meta")
            .and_then(|m| m.get("schema_version"))
            .and_then(|v| v.as_u64());
        if found != Some(u64::from(SCHEMA_VERSION)) {
            return Err(ReportError::UnsupportedVersion { found });
        }
        Ok(serde_json::from_value(value)?)
    }
}

/// Fits every model component to a leap-stripped, gap-free series.
pub fn fit_full_model(series: &TemperatureSeries) -> Result<FitReport, PipelineError> {
    fit_normalized(series, 0)
}

/// Strips leap days from `raw`, then fits. Returns the stripped series too.
pub fn fit_raw_series(
    raw: &TemperatureSeries,
) -> Result<(TemperatureSeries, FitReport), PipelineError> {
    let series = strip_leap_days(raw)?;
    let report = fit_normalized(&series, raw.len() - series.len())?;
    Ok((series, report))
}

fn fit_normalized(
    series: &TemperatureSeries,
    leap_days_removed: usize,
) -> Result<FitReport, PipelineError> {
    series.check_normalized()?;
    let (Some(start), Some(end)) = (series.first_date(), series.last_date()) else {
        return Err(PipelineError::TooShort { months: 0 });
    };
    let months = (end.year() - start.year()) as usize * 12 + end.month() as usize
        - start.month() as usize
        + 1;
    if months < MIN_MONTHS {
        return Err(PipelineError::TooShort { months });
    }
    let temps = series.temperatures();
    let temp_summary = describe(&temps).map_err(PipelineError::Statistics)?;
    if temp_summary.sd == 0.0 {
        return Err(PipelineError::ConstantSeries);
    }

    let seasonal = fit_seasonal_mean(series).map_err(PipelineError::Seasonal)?;
    let resid = residuals(series, &seasonal);
    let monthly_vols = monthly_quadratic_variation(series).map_err(PipelineError::Volatility)?;
    let vol = estimate_volatility_model(&monthly_vols).map_err(PipelineError::Volatility)?;
    let kappa =
        estimate_kappa(series, &seasonal, &monthly_vols).map_err(PipelineError::MeanReversion)?;

    let precip = series.precipitation();
    let precip_summary = precip
        .as_deref()
        .map(describe)
        .transpose()
        .map_err(PipelineError::Statistics)?;
    let precip_normality = precip
        .as_deref()
        .and_then(|p| anderson_darling_normal(p).ok());

    Ok(FitReport {
        seasonal,
        kappa_t: kappa.kappa_t,
        daily_adjustment_fraction: kappa.daily_adjustment_fraction(),
        kappa_diagnostics: kappa,
        vol,
        monthly_vols,
        metrics: None,
        descriptive: DescriptiveBlock {
            temperature: temp_summary,
            precipitation: precip_summary,
        },
        normality: NormalityBlock {
            temperature: anderson_darling_normal(&temps).map_err(PipelineError::Statistics)?,
            residuals: anderson_darling_normal(&resid).map_err(PipelineError::Statistics)?,
            precipitation: precip_normality,
        },
        meta: ReportMeta {
            n_obs: series.len(),
            start,
            end,
            leap_days_removed,
            schema_version: SCHEMA_VERSION,
            first_temp: temps[0],
            evaluation_seed: None,
            evaluation_paths: None,
        },
    })
}

/// Stage-by-stage estimates from one series. Unlike [`fit_full_model`],
/// a failure in one stage does not hide the others, which is what a
/// parameter-recovery study needs.
#[derive(Debug, Clone)]
pub struct ParameterRecovery {
    pub seasonal: SeasonalMeanParams,
    pub sigma_bar: f64,
    pub sigma_sigma: f64,
    pub kappa_sigma: Result<f64, VolatilityError>,
    pub kappa_t: Result<f64, MeanReversionError>,
}

/// Runs each estimator on a normalized series, keeping per-stage failures.
/// Fails only when the seasonal mean or the monthly volatilities cannot be
/// computed, since every later stage depends on them.
pub fn recover_parameters(series: &TemperatureSeries) -> Result<ParameterRecovery, PipelineError> {
    series.check_normalized()?;
    let seasonal = fit_seasonal_mean(series).map_err(PipelineError::Seasonal)?;
    let monthly_vols = monthly_quadratic_variation(series).map_err(PipelineError::Volatility)?;
    let sigmas = monthly_vols.sigmas();
    let sigma_bar = estimate_sigma_bar(&sigmas).map_err(PipelineError::Volatility)?;
    let sigma_sigma = estimate_sigma_sigma(&sigmas).map_err(PipelineError::Volatility)?;
    Ok(ParameterRecovery {
        seasonal,
        sigma_bar,
        sigma_sigma,
        kappa_sigma: estimate_kappa_sigma(&sigmas, sigma_bar),
        kappa_t: estimate_kappa(series, &seasonal, &monthly_vols).map(|k| k.kappa_t),
    })
}

/// Simulates `config.n_paths` calendar-aligned paths over the series span
/// and scores the ensemble mean path against the observations.
/// `config.n_days` is overwritten with the series length.
pub fn evaluate_model_with(
    series: &TemperatureSeries,
    report: &FitReport,
    config: &SimulationConfig,
) -> Result<FitMetrics, PipelineError> {
    if config.n_paths < 2 {
        return Err(PipelineError::Simulation(SimulationError::SinglePath(
            config.n_paths,
        )));
    }
    let dates: Vec<CalendarDay> = series.dates().collect();
    let mut config = config.clone();
    config.n_days = dates.len();
    let ens = simulate_calendar_paths(
        &report.seasonal,
        &report.kappa(),
        &report.vol,
        &config,
        &dates,
    )
    .map_err(PipelineError::Simulation)?;
    FitMetrics::compute(&series.temperatures(), &ens.mean_path).map_err(PipelineError::Metrics)
}

/// [`evaluate_model_with`] starting from the first observation.
pub fn evaluate_model(
    series: &TemperatureSeries,
    report: &FitReport,
    n_paths: usize,
    seed: u64,
) -> Result<FitMetrics, PipelineError> {
    let t0 = series
        .records()
        .first()
        .map(|r| r.temp)
        .ok_or(PipelineError::TooShort { months: 0 })?;
    let config = SimulationConfig::new(n_paths, series.len(), seed).with_t0(t0);
    evaluate_model_with(series, report, &config)
}
