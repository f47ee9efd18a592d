//! Monthly volatility by quadratic variation and the mean-reverting
//! volatility process `dσ = κ_σ(σ̄ − σ)dρ + σ_σ dB`, with `ρ` in months.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mean_reversion::{decay_rate, DecayRateError};
use crate::series::{MonthKey, TemperatureSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolatilityError {
    #[error("month {month} has {count} observation(s); quadratic variation needs at least 2")]
    SparseMonth { month: MonthKey, count: usize },
    #[error("need at least {needed} monthly volatilities, got {got}")]
    TooFewMonths { needed: usize, got: usize },
    #[error("volatility mean reversion: {0}")]
    Kappa(#[from] DecayRateError),
    #[error("invalid volatility parameters: {0}")]
    InvalidParams(String),
}

/// Realized volatility of one calendar month, °C per √day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthlyVolatility {
    pub year: i32,
    pub month: u32,
    pub sigma: f64,
}

impl MonthlyVolatility {
    pub fn key(&self) -> MonthKey {
        MonthKey {
            year: self.year,
            month: self.month,
        }
    }
}

/// One entry per calendar month of a series, in chronological order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonthlyVolatilitySeries {
    pub entries: Vec<MonthlyVolatility>,
}

impl MonthlyVolatilitySeries {
    pub fn sigmas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.sigma).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self) -> HashMap<MonthKey, f64> {
        self.entries.iter().map(|e| (e.key(), e.sigma)).collect()
    }

    /// Same months, every sigma multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| MonthlyVolatility {
                    sigma: e.sigma * factor,
                    ..*e
                })
                .collect(),
        }
    }
}

/// Parameters of the monthly volatility process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityModelParams {
    /// Long-run volatility level σ̄, °C per √day.
    pub sigma_bar: f64,
    /// Volatility of volatility σ_σ, per √month.
    pub sigma_sigma: f64,
    /// Reversion rate κ_σ, per month.
    pub kappa_sigma: f64,
}

impl VolatilityModelParams {
    pub fn validate(&self) -> Result<(), VolatilityError> {
        let ok = self.sigma_bar.is_finite()
            && self.sigma_bar > 0.0
            && self.sigma_sigma.is_finite()
            && self.sigma_sigma >= 0.0
            && self.kappa_sigma.is_finite()
            && self.kappa_sigma > 0.0;
        if ok {
            Ok(())
        } else {
            Err(VolatilityError::InvalidParams(format!(
                "need sigma_bar > 0, sigma_sigma >= 0, kappa_sigma > 0; got {self:?}"
            )))
        }
    }
}

/// Per-month `σ² = Σ (T(j+1) − T(j))² / (N_m − 1)`, summing only increments
/// whose two endpoints both fall inside the month.
pub fn monthly_quadratic_variation(
    series: &TemperatureSeries,
) -> Result<MonthlyVolatilitySeries, VolatilityError> {
    let records = series.records();
    let mut entries = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let key = records[start].date.month_key();
        let end = records[start..]
            .iter()
            .position(|r| r.date.month_key() != key)
            .map_or(records.len(), |p| start + p);
        let count = end - start;
        if count < 2 {
            return Err(VolatilityError::SparseMonth { month: key, count });
        }
        let qv: f64 = records[start..end]
            .windows(2)
            .map(|w| {
                let d = w[1].temp - w[0].temp;
                d * d
            })
            .sum();
        entries.push(MonthlyVolatility {
            year: key.year,
            month: key.month,
            sigma: (qv / (count - 1) as f64).sqrt(),
        });
        start = end;
    }
    Ok(MonthlyVolatilitySeries { entries })
}

/// Long-run level: the arithmetic mean of the monthly volatilities.
pub fn estimate_sigma_bar(sigmas: &[f64]) -> Result<f64, VolatilityError> {
    if sigmas.is_empty() {
        return Err(VolatilityError::TooFewMonths { needed: 1, got: 0 });
    }
    Ok(sigmas.iter().sum::<f64>() / sigmas.len() as f64)
}

/// Volatility of volatility from month-to-month increments,
/// `σ_σ² = Σ (σ(h+1) − σ(h))² / (n − 1)`.
pub fn estimate_sigma_sigma(sigmas: &[f64]) -> Result<f64, VolatilityError> {
    if sigmas.len() < 2 {
        return Err(VolatilityError::TooFewMonths {
            needed: 2,
            got: sigmas.len(),
        });
    }
    let qv: f64 = sigmas.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((qv / (sigmas.len() - 1) as f64).sqrt())
}

/// `κ_σ = −ln(Σ d_{j−1} d_j / Σ d_{j−1}²)` with `d = σ − σ̄`.
pub fn estimate_kappa_sigma(sigmas: &[f64], sigma_bar: f64) -> Result<f64, VolatilityError> {
    if sigmas.len() < 3 {
        return Err(VolatilityError::TooFewMonths {
            needed: 3,
            got: sigmas.len(),
        });
    }
    let dev: Vec<f64> = sigmas.iter().map(|s| s - sigma_bar).collect();
    let (num, den) = dev
        .windows(2)
        .fold((0.0, 0.0), |(n, d), w| (n + w[0] * w[1], d + w[0] * w[0]));
    Ok(decay_rate(num, den)?)
}

/// All three volatility-process parameters from a monthly series.
pub fn estimate_volatility_model(
    vols: &MonthlyVolatilitySeries,
) -> Result<VolatilityModelParams, VolatilityError> {
    let sigmas = vols.sigmas();
    let sigma_bar = estimate_sigma_bar(&sigmas)?;
    let sigma_sigma = estimate_sigma_sigma(&sigmas)?;
    let kappa_sigma = estimate_kappa_sigma(&sigmas, sigma_bar)?;
    Ok(VolatilityModelParams {
        sigma_bar,
        sigma_sigma,
        kappa_sigma,
    })
}
