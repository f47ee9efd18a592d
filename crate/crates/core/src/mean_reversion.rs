//! Temperature mean-reversion rate from the martingale estimating function.
//!
//! With residuals `r_j = T(j) − T̃(j)` the one-day conditional mean is
//! `E[T(j) | T(j−1)] = T̃(j) + r_{j−1}·e^{−κ}`, and the weighted estimating
//! function
//!
//! ```text
//! G(κ) = Σ_j w_{j−1} · r_{j−1} · (r_j − r_{j−1}·e^{−κ})
//! ```
//!
//! has the closed-form zero `κ̂ = −ln(Σ w r_{j−1} r_j / Σ w r_{j−1}²)`.
//! The weights are `1/σ²` of the month containing day `j − 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seasonal::{residuals, SeasonalMeanParams};
use crate::series::{DayIndex, MonthKey, TemperatureSeries};
use crate::volatility::MonthlyVolatilitySeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecayRateError {
    #[error(
        "lag-one ratio {ratio} is not positive (anti-persistent deviations); the log is undefined"
    )]
    LogDomain { ratio: f64 },
    #[error("lag-one ratio {ratio} >= 1 gives a non-positive rate: deviations do not mean-revert")]
    NotMeanReverting { ratio: f64 },
    #[error("all deviations are zero; the reversion rate is unidentifiable")]
    Degenerate,
}

/// `−ln(num / den)` for a lag-one regression ratio in (0, 1).
pub fn decay_rate(num: f64, den: f64) -> Result<f64, DecayRateError> {
    if !num.is_finite() || !den.is_finite() || den <= 0.0 {
        return Err(DecayRateError::Degenerate);
    }
    let ratio = num / den;
    if ratio <= 0.0 {
        Err(DecayRateError::LogDomain { ratio })
    } else if ratio >= 1.0 {
        Err(DecayRateError::NotMeanReverting { ratio })
    } else {
        Ok(-ratio.ln())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeanReversionError {
    #[error("need at least 3 observations, got {got}")]
    TooFewObservations { got: usize },
    #[error("{residuals} residuals but {weights} weights")]
    LengthMismatch { residuals: usize, weights: usize },
    #[error("month {month} has zero volatility; its 1/σ² weight is undefined")]
    ZeroVolatility { month: MonthKey },
    #[error("no monthly volatility for {month}")]
    MissingMonth { month: MonthKey },
    #[error("weight {weight} at day {day} is not a positive finite number")]
    BadWeight { day: usize, weight: f64 },
    #[error("residuals are numerically zero (rms {rms:e}); the series has no noise to identify mean reversion")]
    DegenerateResiduals { rms: f64 },
    #[error(transparent)]
    Rate(#[from] DecayRateError),
}

/// Fitted temperature reversion rate with its estimating-equation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanReversionEstimate {
    /// κ_T, per day.
    pub kappa_t: f64,
    /// `G(κ̂)`; zero up to rounding.
    pub g_at_kappa: f64,
    /// Magnitude of the summands of `G(κ̂)` before cancellation.
    pub g_scale: f64,
    /// Number of terms in the estimating sum (n − 1).
    pub n_terms: usize,
    /// Weighted lag-one ratio `e^{−κ̂}`.
    pub ratio: f64,
}

impl MeanReversionEstimate {
    /// An estimate carrying only the rate, for simulation from given parameters.
    pub fn from_rate(kappa_t: f64) -> Self {
        Self {
            kappa_t,
            g_at_kappa: 0.0,
            g_scale: 0.0,
            n_terms: 0,
            ratio: (-kappa_t).exp(),
        }
    }

    /// Fraction of a deviation removed in one day, `1 − e^{−κ}`.
    pub fn daily_adjustment_fraction(&self) -> f64 {
        1.0 - (-self.kappa_t).exp()
    }
}

/// `E[T(j) | T(j−1)]` for a one-day step from day `t_prev`.
pub fn conditional_mean(
    seasonal: &SeasonalMeanParams,
    kappa: f64,
    temp_prev: f64,
    t_prev: DayIndex,
) -> f64 {
    seasonal.evaluate(t_prev + 1) + (temp_prev - seasonal.evaluate(t_prev)) * (-kappa).exp()
}

/// `G(κ)` and the magnitude `Σ w|r_{j−1}|(|r_j| + |r_{j−1}|e^{−κ})` it is judged against. `weights[j]` is the weight of observation `j`
/// and multiplies the term whose lagged observation is `j`.
pub fn estimating_function(residuals: &[f64], weights: &[f64], kappa: f64) -> (f64, f64) {
    let decay = (-kappa).exp();
    residuals
        .windows(2)
        .zip(weights)
        .fold((0.0, 0.0), |(g, scale), (r, w)| {
            let term = w * r[0] * (r[1] - r[0] * decay);
            (
                g + term,
                scale + w * r[0].abs() * (r[1].abs() + r[0].abs() * decay),
            )
        })
}

/// Closed-form zero of the weighted estimating function.
pub fn kappa_from_residuals(
    residuals: &[f64],
    weights: &[f64],
) -> Result<MeanReversionEstimate, MeanReversionError> {
    let n = residuals.len();
    if n < 3 {
        return Err(MeanReversionError::TooFewObservations { got: n });
    }
    if weights.len() != n {
        return Err(MeanReversionError::LengthMismatch {
            residuals: n,
            weights: weights.len(),
        });
    }
    if let Some((day, &weight)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w > 0.0))
    {
        return Err(MeanReversionError::BadWeight { day, weight });
    }
    let (num, den) = residuals
        .windows(2)
        .zip(weights)
        .fold((0.0, 0.0), |(num, den), (r, w)| {
            (num + w * r[0] * r[1], den + w * r[0] * r[0])
        });
    let kappa_t = decay_rate(num, den)?;
    let (g_at_kappa, g_scale) = estimating_function(residuals, weights, kappa_t);
    Ok(MeanReversionEstimate {
        kappa_t,
        g_at_kappa,
        g_scale,
        n_terms: n - 1,
        ratio: num / den,
    })
}

/// Per-day weights `1/σ²(month of day)`.
pub fn monthly_weights(
    series: &TemperatureSeries,
    vols: &MonthlyVolatilitySeries,
) -> Result<Vec<f64>, MeanReversionError> {
    let table = vols.lookup();
    series
        .dates()
        .map(|d| {
            let month = d.month_key();
            match table.get(&month) {
                None => Err(MeanReversionError::MissingMonth { month }),
                Some(&s) if s > 0.0 => Ok(1.0 / (s * s)),
                Some(_) => Err(MeanReversionError::ZeroVolatility { month }),
            }
        })
        .collect()
}

/// Estimates κ_T from a series, its seasonal fit and its monthly volatilities.
pub fn estimate_kappa(
    series: &TemperatureSeries,
    seasonal: &SeasonalMeanParams,
    vols: &MonthlyVolatilitySeries,
) -> Result<MeanReversionEstimate, MeanReversionError> {
    let n = series.len();
    if n < 3 {
        return Err(MeanReversionError::TooFewObservations { got: n });
    }
    let weights = monthly_weights(series, vols)?;
    let r = residuals(series, seasonal);
    let rms = (r.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let level = series.records().iter().map(|x| x.temp.abs()).sum::<f64>() / n as f64;
    if rms <= 1e-9 * (1.0 + level) {
        return Err(MeanReversionError::DegenerateResiduals { rms });
    }
    kappa_from_residuals(&r, &weights)
}
