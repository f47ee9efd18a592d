//! Euler–Maruyama simulation of the monthly volatility process and of
//! daily temperature paths, Monte Carlo ensembles and synthetic series.
//!
//! Time steps are one day for temperature and one month for volatility.
//! The daily update, written in deviation form `D = T − T̃`, is
//!
//! ```text
//! T(j+1) = T̃(j+1) + (1 − κ)·(T(j) − T̃(j)) + σ(month of j)·Z_j
//! ```
//!
//! which is `ΔT = ΔT̃ + κ(T̃ − T)Δt + σZ` with `Δt = 1`. The monthly
//! volatility follows `σ(n) = σ(n−1) + κ_σ(σ̄ − σ(n−1)) + σ_σ·Z_h`, floored
//! at [`VOL_FLOOR`].
//!
//! # Reproducibility
//!
//! Path `p` draws from its own ChaCha8 stream: the generator is seeded
//! with `master_seed` through `seed_from_u64` and `set_stream(p)` selects
//! the substream. Standard normals come from `rand_distr::StandardNormal`
//! (ziggurat). Each path first draws its month volatilities, then its
//! daily shocks. Because no state is shared between paths, serial and
//! parallel execution produce bit-identical ensembles.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::mean_reversion::MeanReversionEstimate;
use crate::seasonal::SeasonalMeanParams;
use crate::series::{CalendarDay, DailyRecord, SeriesError, TemperatureSeries, DAYS_PER_YEAR};
use crate::volatility::VolatilityModelParams;

/// Simulated volatilities are never allowed below this.
pub const VOL_FLOOR: f64 = 1e-6;
/// Length of a simulated "month" when no calendar drives the volatility switch.
pub const DAYS_PER_BLOCK_MONTH: usize = 30;
/// Temperature time step, days.
pub const DT_DAYS: f64 = 1.0;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
    #[error("cross-path dispersion needs at least 2 paths, got {0}")]
    SinglePath(usize),
    #[error("synthetic series: {0}")]
    Series(#[from] SeriesError),
}

/// How paths are scheduled. `Parallel` runs on the rayon pool when the
/// `parallel` feature is enabled and falls back to serial otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_paths: usize,
    pub n_days: usize,
    pub master_seed: u64,
    /// `T(0)`; defaults to `T̃(0)`.
    pub t0_temp: Option<f64>,
    /// `σ(0)` for the first month; defaults to `σ̄`.
    pub sigma0: Option<f64>,
    /// Replaces the stochastic volatility by this constant when set.
    pub constant_vol_override: Option<f64>,
    pub execution: Execution,
}

impl SimulationConfig {
    pub fn new(n_paths: usize, n_days: usize, master_seed: u64) -> Self {
        Self {
            n_paths,
            n_days,
            master_seed,
            t0_temp: None,
            sigma0: None,
            constant_vol_override: None,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_vol_override(mut self, sigma: f64) -> Self {
        self.constant_vol_override = Some(sigma);
        self
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0_temp = Some(t0);
        self
    }
}

/// Row-major `n_paths × n_days` matrix of simulated temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedEnsemble {
    pub n_paths: usize,
    pub n_days: usize,
    pub paths: Vec<f64>,
    pub mean_path: Vec<f64>,
    /// Sample standard deviation across paths; `None` for a single path.
    pub cross_path_sd: Option<Vec<f64>>,
    /// Months whose simulated volatility hit [`VOL_FLOOR`].
    pub floor_hits: usize,
    /// Simulated volatility months over all paths.
    pub vol_months: usize,
}

impl SimulatedEnsemble {
    pub fn path(&self, p: usize) -> &[f64] {
        &self.paths[p * self.n_days..(p + 1) * self.n_days]
    }

    pub fn column(&self, t: usize) -> Vec<f64> {
        (0..self.n_paths)
            .map(|p| self.paths[p * self.n_days + t])
            .collect()
    }
}

/// Monthly volatility path and how often the floor was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityPath {
    pub sigma: Vec<f64>,
    pub floor_hits: usize,
}

/// The generator for path `path` under `master_seed`.
pub fn path_rng(master_seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path);
    rng
}

fn volatility_path<R: Rng + ?Sized>(
    vol: &VolatilityModelParams,
    sigma0: f64,
    n_months: usize,
    rng: &mut R,
) -> VolatilityPath {
    let mut sigma = Vec::with_capacity(n_months);
    let mut floor_hits = 0;
    let mut s = sigma0;
    for n in 0..n_months {
        if n > 0 {
            let z: f64 = StandardNormal.sample(rng);
            s += vol.kappa_sigma * (vol.sigma_bar - s) + vol.sigma_sigma * z;
        }
        if s < VOL_FLOOR {
            s = VOL_FLOOR;
            floor_hits += 1;
        }
        sigma.push(s);
    }
    VolatilityPath { sigma, floor_hits }
}

/// Monthly volatilities `σ(0), σ(1), …` on stream 0 of `seed`.
pub fn simulate_volatility_months(
    vol: &VolatilityModelParams,
    sigma0: f64,
    n_months: usize,
    seed: u64,
) -> VolatilityPath {
    volatility_path(vol, sigma0, n_months, &mut path_rng(seed, 0))
}

/// Month index of every day: 30-day blocks.
pub fn block_months(n_days: usize) -> Vec<usize> {
    (0..n_days).map(|d| d / DAYS_PER_BLOCK_MONTH).collect()
}

/// Month index of every day from calendar dates; a new index starts
/// whenever the calendar month changes.
pub fn calendar_months(dates: &[CalendarDay]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dates.len());
    let mut idx = 0;
    for (i, d) in dates.iter().enumerate() {
        if i > 0 && d.month_key() != dates[i - 1].month_key() {
            idx += 1;
        }
        out.push(idx);
    }
    out
}

fn validate(
    kappa_t: f64,
    vol: &VolatilityModelParams,
    config: &SimulationConfig,
) -> Result<(), SimulationError> {
    let bad = |m: String| Err(SimulationError::InvalidParams(m));
    if config.n_paths == 0 || config.n_days == 0 {
        return bad(format!(
            "need n_paths >= 1 and n_days >= 1, got {} and {}",
            config.n_paths, config.n_days
        ));
    }
    if !(kappa_t.is_finite() && kappa_t > 0.0) {
        return bad(format!("kappa_t must be > 0, got {kappa_t}"));
    }
    match config.constant_vol_override {
        Some(s) if !(s.is_finite() && s >= 0.0) => {
            bad(format!("volatility override must be >= 0, got {s}"))
        }
        Some(_) => Ok(()),
        None => {
            vol.validate()
                .map_err(|e| SimulationError::InvalidParams(e.to_string()))?;
            match config.sigma0 {
                Some(s) if !(s.is_finite() && s > 0.0) => {
                    bad(format!("sigma0 must be > 0, got {s}"))
                }
                _ => Ok(()),
            }
        }
    }
}

/// Fills `row` with one temperature path and returns the floor hit count.
#[allow(clippy::too_many_arguments)]
fn simulate_one_path(
    seasonal_path: &[f64],
    kappa_t: f64,
    vol: &VolatilityModelParams,
    config: &SimulationConfig,
    months: &[usize],
    n_months: usize,
    path: usize,
    row: &mut [f64],
) -> usize {
    let mut rng = path_rng(config.master_seed, path as u64);
    let (sigmas, floor_hits) = match config.constant_vol_override {
        Some(s) => (vec![s; n_months], 0),
        None => {
            let sigma0 = config.sigma0.unwrap_or(vol.sigma_bar);
            let vp = volatility_path(vol, sigma0, n_months, &mut rng);
            (vp.sigma, vp.floor_hits)
        }
    };
    let keep = 1.0 - kappa_t * DT_DAYS;
    let mut dev = config.t0_temp.unwrap_or(seasonal_path[0]) - seasonal_path[0];
    row[0] = seasonal_path[0] + dev;
    for j in 0..row.len() - 1 {
        let z: f64 = StandardNormal.sample(&mut rng);
        dev = keep * dev + sigmas[months[j]] * z;
        row[j + 1] = seasonal_path[j + 1] + dev;
    }
    floor_hits
}

/// Simulates an ensemble with an explicit day → month schedule.
pub fn simulate_with_schedule(
    seasonal: &SeasonalMeanParams,
    kappa_t: f64,
    vol: &VolatilityModelParams,
    config: &SimulationConfig,
    months: &[usize],
) -> Result<SimulatedEnsemble, SimulationError> {
    validate(kappa_t, vol, config)?;
    if months.len() != config.n_days {
        return Err(SimulationError::InvalidParams(format!(
            "month schedule covers {} days, expected {}",
            months.len(),
            config.n_days
        )));
    }
    let n_days = config.n_days;
    let n_months = months.last().map_or(0, |m| m + 1);
    let seasonal_path = seasonal.path(0, n_days);
    let mut paths = vec![0.0; config.n_paths * n_days];

    let run = |(p, row): (usize, &mut [f64])| {
        simulate_one_path(
            &seasonal_path,
            kappa_t,
            vol,
            config,
            months,
            n_months,
            p,
            row,
        )
    };
    let floor_hits: usize = match config.execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => paths.par_chunks_mut(n_days).enumerate().map(run).sum(),
        _ => paths.chunks_mut(n_days).enumerate().map(run).sum(),
    };

    let mut ens = SimulatedEnsemble {
        n_paths: config.n_paths,
        n_days,
        paths,
        mean_path: Vec::new(),
        cross_path_sd: None,
        floor_hits,
        vol_months: if config.constant_vol_override.is_some() {
            0
        } else {
            n_months * config.n_paths
        },
    };
    ens.mean_path = column_means(&ens);
    if ens.n_paths >= 2 {
        ens.cross_path_sd = Some(column_sds(&ens, &ens.mean_path));
    }
    Ok(ens)
}

/// Simulates `config.n_paths` paths with 30-day volatility months.
pub fn simulate_paths(
    seasonal: &SeasonalMeanParams,
    kappa: &MeanReversionEstimate,
    vol: &VolatilityModelParams,
    config: &SimulationConfig,
) -> Result<SimulatedEnsemble, SimulationError> {
    simulate_with_schedule(
        seasonal,
        kappa.kappa_t,
        vol,
        config,
        &block_months(config.n_days),
    )
}

/// Simulates paths aligned to `dates`; `config.n_days` must equal `dates.len()`.
pub fn simulate_calendar_paths(
    seasonal: &SeasonalMeanParams,
    kappa: &MeanReversionEstimate,
    vol: &VolatilityModelParams,
    config: &SimulationConfig,
    dates: &[CalendarDay],
) -> Result<SimulatedEnsemble, SimulationError> {
    simulate_with_schedule(
        seasonal,
        kappa.kappa_t,
        vol,
        config,
        &calendar_months(dates),
    )
}

/// 365-day years from January 1 of `start_year`, February 29 skipped.
pub fn leap_free_calendar(start_year: i32, n_years: usize) -> Vec<CalendarDay> {
    let mut out = Vec::with_capacity(n_years * DAYS_PER_YEAR);
    let mut d = CalendarDay::from_ymd(start_year, 1, 1);
    while let Some(day) = d {
        if out.len() == n_years * DAYS_PER_YEAR {
            break;
        }
        out.push(day);
        d = day.succ_skipping_leap();
    }
    out
}

/// One simulated path on a leap-free calendar, starting at `T̃(0)`, with
/// calendar months driving the volatility switch.
#[allow(clippy::too_many_arguments)]
pub fn generate_synthetic_series(
    seasonal: &SeasonalMeanParams,
    kappa_t: f64,
    vol: &VolatilityModelParams,
    start_year: i32,
    n_years: usize,
    seed: u64,
    constant_vol_override: Option<f64>,
) -> Result<TemperatureSeries, SimulationError> {
    if n_years == 0 {
        return Err(SimulationError::InvalidParams(
            "n_years must be >= 1".into(),
        ));
    }
    let dates = leap_free_calendar(start_year, n_years);
    let mut config = SimulationConfig::new(1, dates.len(), seed).with_execution(Execution::Serial);
    config.constant_vol_override = constant_vol_override;
    let ens = simulate_with_schedule(seasonal, kappa_t, vol, &config, &calendar_months(&dates))?;
    let records = dates
        .iter()
        .zip(ens.path(0))
        .map(|(&date, &temp)| DailyRecord {
            date,
            temp,
            precip: None,
        })
        .collect();
    Ok(TemperatureSeries::new(records)?)
}

/// Column means, summed in path order.
fn column_means(ens: &SimulatedEnsemble) -> Vec<f64> {
    let mut sum = vec![0.0; ens.n_days];
    for row in ens.paths.chunks(ens.n_days) {
        for (s, v) in sum.iter_mut().zip(row) {
            *s += v;
        }
    }
    let n = ens.n_paths as f64;
    sum.into_iter().map(|s| s / n).collect()
}

fn column_sds(ens: &SimulatedEnsemble, mean: &[f64]) -> Vec<f64> {
    let mut ss = vec![0.0; ens.n_days];
    for row in ens.paths.chunks(ens.n_days) {
        for ((s, v), m) in ss.iter_mut().zip(row).zip(mean) {
            *s += (v - m) * (v - m);
        }
    }
    let d = (ens.n_paths - 1) as f64;
    ss.into_iter().map(|s| (s / d).sqrt()).collect()
}

/// Column-wise mean and sample standard deviation.
pub fn ensemble_summary(ens: &SimulatedEnsemble) -> Result<(Vec<f64>, Vec<f64>), SimulationError> {
    if ens.n_paths < 2 {
        return Err(SimulationError::SinglePath(ens.n_paths));
    }
    let mean = column_means(ens);
    let sd = column_sds(ens, &mean);
    Ok((mean, sd))
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One row of the plot-ready ensemble summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub day: usize,
    pub mean: f64,
    pub sd: f64,
    pub p05: f64,
    pub p95: f64,
}

/// Per-day mean, sd and 5%/95% quantiles across paths.
pub fn ensemble_band(ens: &SimulatedEnsemble) -> Result<Vec<BandRow>, SimulationError> {
    let (mean, sd) = ensemble_summary(ens)?;
    let band = |t: usize| {
        let mut col = ens.column(t);
        col.sort_by(f64::total_cmp);
        BandRow {
            day: t,
            mean: mean[t],
            sd: sd[t],
            p05: quantile_sorted(&col, 0.05),
            p95: quantile_sorted(&col, 0.95),
        }
    };
    #[cfg(feature = "parallel")]
    let rows = (0..ens.n_days).into_par_iter().map(band).collect();
    #[cfg(not(feature = "parallel"))]
    let rows = (0..ens.n_days).map(band).collect();
    Ok(rows)
}

/// `day,mean,sd,p05,p95`.
pub fn write_band_csv<W: std::io::Write>(rows: &[BandRow], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `day,path_0,…,path_{k−1}`.
pub fn write_paths_csv<W: std::io::Write>(
    ens: &SimulatedEnsemble,
    writer: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["day".to_string()];
    header.extend((0..ens.n_paths).map(|p| format!("path_{p}")));
    w.write_record(&header)?;
    for t in 0..ens.n_days {
        let mut rec = vec![t.to_string()];
        rec.extend((0..ens.n_paths).map(|p| ens.paths[p * ens.n_days + t].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table_vol() -> VolatilityModelParams {
        VolatilityModelParams {
            sigma_bar: 0.877,
            sigma_sigma: 0.419,
            kappa_sigma: 0.989,
        }
    }

    fn table_seasonal() -> SeasonalMeanParams {
        SeasonalMeanParams::new(26.4, -7.58e-5, 1.75, 0.531)
    }

    #[test]
    fn deterministic_vol_fixed_point() {
        let vol = VolatilityModelParams {
            sigma_sigma: 0.0,
            ..table_vol()
        };
        let p = simulate_volatility_months(&vol, vol.sigma_bar, 24, 1);
        assert!(p.sigma.iter().all(|&s| s == vol.sigma_bar));
    }

    #[test]
    fn deterministic_vol_decay() {
        let vol = VolatilityModelParams {
            sigma_sigma: 0.0,
            ..table_vol()
        };
        let p = simulate_volatility_months(&vol, vol.sigma_bar + 1.0, 4, 1);
        let dev: Vec<f64> = p.sigma.iter().map(|s| s - vol.sigma_bar).collect();
        assert_abs_diff_eq!(dev[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dev[1], 0.011, epsilon = 1e-12);
        assert_abs_diff_eq!(dev[2], 0.000121, epsilon = 1e-12);
        assert_abs_diff_eq!(dev[3], 0.011f64.powi(3), epsilon = 1e-12);
    }

    #[test]
    fn long_run_vol_mean_and_floor_rate() {
        let p = simulate_volatility_months(&table_vol(), 0.877, 10_000, 99);
        let m = p.sigma.iter().sum::<f64>() / p.sigma.len() as f64;
        // sd of one month ≈ 0.419, nearly independent months: se ≈ 0.0042
        assert!((m - 0.877).abs() < 0.02, "mean {m}");
        assert!((p.floor_hits as f64) < 0.05 * 10_000.0);
    }

    #[test]
    fn zero_noise_on_mean_start_tracks_seasonal_exactly() {
        let s = table_seasonal();
        let cfg = SimulationConfig::new(3, 400, 5).with_vol_override(0.0);
        let ens = simulate_paths(
            &s,
            &MeanReversionEstimate::from_rate(0.1872),
            &table_vol(),
            &cfg,
        )
        .unwrap();
        let expected = s.path(0, 400);
        for p in 0..3 {
            assert_eq!(ens.path(p), expected.as_slice());
        }
        // averaging three equal values may round in the last place
        for (m, e) in ens.mean_path.iter().zip(&expected) {
            assert_abs_diff_eq!(*m, *e, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_noise_deviation_decays_by_one_minus_kappa() {
        let s = table_seasonal();
        let k = 0.1872;
        let cfg = SimulationConfig::new(1, 30, 5)
            .with_vol_override(0.0)
            .with_t0(s.evaluate(0) + 2.0);
        let ens =
            simulate_paths(&s, &MeanReversionEstimate::from_rate(k), &table_vol(), &cfg).unwrap();
        for (t, v) in ens.path(0).iter().enumerate() {
            let expected = 2.0 * (1.0 - k).powi(t as i32);
            assert_abs_diff_eq!(v - s.evaluate(t), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let s = table_seasonal();
        let k = MeanReversionEstimate::from_rate(0.1872);
        let base = SimulationConfig::new(37, 200, 2024);
        let a = simulate_paths(
            &s,
            &k,
            &table_vol(),
            &base.clone().with_execution(Execution::Serial),
        )
        .unwrap();
        let b = simulate_paths(
            &s,
            &k,
            &table_vol(),
            &base.with_execution(Execution::Parallel),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_path_is_exact_column_mean() {
        let ens = simulate_paths(
            &table_seasonal(),
            &MeanReversionEstimate::from_rate(0.1872),
            &table_vol(),
            &SimulationConfig::new(13, 50, 3),
        )
        .unwrap();
        for t in 0..50 {
            let mut s = 0.0;
            for p in 0..13 {
                s += ens.path(p)[t];
            }
            assert_eq!(ens.mean_path[t], s / 13.0);
        }
    }

    #[test]
    fn summary_examples() {
        let mk = |rows: Vec<Vec<f64>>| SimulatedEnsemble {
            n_paths: rows.len(),
            n_days: rows[0].len(),
            paths: rows.concat(),
            mean_path: vec![],
            cross_path_sd: None,
            floor_hits: 0,
            vol_months: 0,
        };
        let x = vec![1.0, 5.0, -2.0];
        let (_, sd) = ensemble_summary(&mk(vec![x.clone(), x.clone()])).unwrap();
        assert_eq!(sd, vec![0.0; 3]);
        let x2: Vec<f64> = x.iter().map(|v| v + 2.0).collect();
        let (mean, sd) = ensemble_summary(&mk(vec![x.clone(), x2])).unwrap();
        for t in 0..3 {
            assert_abs_diff_eq!(mean[t], x[t] + 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(sd[t], 2f64.sqrt(), epsilon = 1e-15);
        }
        assert!(matches!(
            ensemble_summary(&mk(vec![x])),
            Err(SimulationError::SinglePath(1))
        ));
    }

    #[test]
    fn quantiles_interpolate() {
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        assert_abs_diff_eq!(quantile_sorted(&v, 0.05), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(quantile_sorted(&[0.0, 1.0], 0.95), 0.95, epsilon = 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        let s = table_seasonal();
        let cfg = SimulationConfig::new(2, 10, 0);
        let bad_k = simulate_paths(
            &s,
            &MeanReversionEstimate::from_rate(0.0),
            &table_vol(),
            &cfg,
        );
        assert!(matches!(bad_k, Err(SimulationError::InvalidParams(_))));
        let vol = VolatilityModelParams {
            sigma_bar: 0.0,
            ..table_vol()
        };
        let bad_v = simulate_paths(&s, &MeanReversionEstimate::from_rate(0.2), &vol, &cfg);
        assert!(matches!(bad_v, Err(SimulationError::InvalidParams(_))));
        // the override makes the volatility parameters irrelevant
        assert!(simulate_paths(
            &s,
            &MeanReversionEstimate::from_rate(0.2),
            &vol,
            &cfg.with_vol_override(0.5)
        )
        .is_ok());
    }

    #[test]
    fn synthetic_calendar_and_determinism() {
        let cal = leap_free_calendar(2000, 24);
        assert_eq!(cal.len(), 8760);
        assert!(cal.iter().all(|d| !d.is_leap_day()));
        assert_eq!(calendar_months(&cal).last(), Some(&287));

        let s = table_seasonal();
        let a = generate_synthetic_series(&s, 0.1872, &table_vol(), 2000, 2, 8, None).unwrap();
        let b = generate_synthetic_series(&s, 0.1872, &table_vol(), 2000, 2, 8, None).unwrap();
        assert_eq!(a, b);
        assert!(a.check_normalized().is_ok());
        let flat =
            generate_synthetic_series(&s, 0.1872, &table_vol(), 2000, 2, 8, Some(0.0)).unwrap();
        for (t, r) in flat.records().iter().enumerate() {
            assert_eq!(r.temp, s.evaluate(t));
        }
    }

    #[test]
    fn band_csv_has_header_and_rows() {
        let ens = simulate_paths(
            &table_seasonal(),
            &MeanReversionEstimate::from_rate(0.1872),
            &table_vol(),
            &SimulationConfig::new(20, 5, 1),
        )
        .unwrap();
        let rows = ensemble_band(&ens).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.p05 <= r.mean + 3.0 * r.sd && r.p05 <= r.p95));
        let mut buf = Vec::new();
        write_band_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("day,mean,sd,p05,p95\n"));
        assert_eq!(text.lines().count(), 6);
        let mut buf = Vec::new();
        write_paths_csv(&ens, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("day,path_0,path_1,"));
    }
}
