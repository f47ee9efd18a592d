//! Seasonal mean function `T̃(t) = a + b·t + c·sin(2πt/365 + ψ)`.
//!
//! The fit is linear in `[1, t, sin(2πt/365), cos(2πt/365)]`; the sine and
//! cosine coefficients are converted back to amplitude and phase with
//! [`recover_amplitude_phase`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{seasonal_basis, DayIndex, TemperatureSeries};
use crate::stats::{self, StatsError};

/// Number of regression coefficients.
pub const N_COEFFS: usize = 4;

/// A column whose Householder diagonal falls below this fraction of its
/// own norm is treated as linearly dependent on the earlier columns.
const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeasonalError {
    #[error("need at least {needed} observations for the seasonal fit, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("seasonal design matrix is rank deficient (column {column} is collinear with earlier columns); the series is too short")]
    RankDeficient { column: usize },
    #[error("both harmonic coefficients are zero; amplitude and phase are undefined")]
    ZeroAmplitude,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Coefficients of `y = β₀ + β₁·t + β₂·sin(2πt/365) + β₃·cos(2πt/365)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsSolution {
    pub beta: [f64; N_COEFFS],
    pub residual_sum_squares: f64,
}

/// Fitted seasonal mean function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonalMeanParams {
    /// Mean level, °C.
    pub a_t: f64,
    /// Linear trend, °C per day.
    pub b_t: f64,
    /// Amplitude, °C (non-negative).
    pub c_t: f64,
    /// Phase, radians in (−π, π].
    pub psi: f64,
    /// R² of the fitted values against the data.
    #[serde(rename = "r2")]
    pub r_squared_fit: f64,
}

impl SeasonalMeanParams {
    /// Parameters without a fit quality attached.
    pub fn new(a_t: f64, b_t: f64, c_t: f64, psi: f64) -> Self {
        Self {
            a_t,
            b_t,
            c_t,
            psi,
            r_squared_fit: f64::NAN,
        }
    }

    /// `T̃(t)`.
    pub fn evaluate(&self, t: DayIndex) -> f64 {
        evaluate_seasonal_mean(self, t)
    }

    /// The linear coefficients `[a, b, c·cos ψ, c·sin ψ]`.
    pub fn betas(&self) -> [f64; N_COEFFS] {
        let (s, c) = self.psi.sin_cos();
        [self.a_t, self.b_t, self.c_t * c, self.c_t * s]
    }

    /// `T̃(0), …, T̃(n − 1)` starting from `offset`.
    pub fn path(&self, offset: DayIndex, n: usize) -> Vec<f64> {
        (offset..offset + n).map(|t| self.evaluate(t)).collect()
    }
}

/// `a + b·t + c·sin(2πt/365 + ψ)`, using `sin(x + ψ) = sin x cos ψ + cos x sin ψ`
/// on the reduced-phase basis.
pub fn evaluate_seasonal_mean(params: &SeasonalMeanParams, t: DayIndex) -> f64 {
    let (s, c) = seasonal_basis(t);
    let (sp, cp) = params.psi.sin_cos();
    params.a_t + params.b_t * t as f64 + params.c_t * (s * cp + c * sp)
}

/// Amplitude and phase from the sine and cosine coefficients.
///
/// Uses the two-argument arctangent so the amplitude is never negative; the
/// phase is normalized to (−π, π].
pub fn recover_amplitude_phase(beta2: f64, beta3: f64) -> Result<(f64, f64), SeasonalError> {
    if beta2 == 0.0 && beta3 == 0.0 {
        return Err(SeasonalError::ZeroAmplitude);
    }
    let c = beta2.hypot(beta3);
    let mut psi = beta3.atan2(beta2);
    if psi <= -std::f64::consts::PI {
        psi = std::f64::consts::PI;
    }
    Ok((c, psi))
}

/// Row `t` of the design matrix.
pub fn design_row(t: DayIndex) -> [f64; N_COEFFS] {
    let (s, c) = seasonal_basis(t);
    [1.0, t as f64, s, c]
}

/// Least squares on the seasonal design by Householder QR.
pub fn fit_seasonal_ols(values: &[f64]) -> Result<OlsSolution, SeasonalError> {
    let n = values.len();
    if n <= N_COEFFS {
        return Err(SeasonalError::TooFewObservations {
            needed: N_COEFFS + 1,
            got: n,
        });
    }
    // column-major copy of the design
    let mut cols: Vec<Vec<f64>> = (0..N_COEFFS)
        .map(|j| (0..n).map(|t| design_row(t)[j]).collect())
        .collect();
    let col_norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut y = values.to_vec();
    let mut diag = [0.0; N_COEFFS];

    for k in 0..N_COEFFS {
        let norm = cols[k][k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= RANK_TOLERANCE * col_norms[k] {
            return Err(SeasonalError::RankDeficient { column: k });
        }
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        diag[k] = alpha;
        cols[k][k] = alpha;
        for x in &mut cols[k][k + 1..] {
            *x = 0.0;
        }
        let reflect = |target: &mut [f64]| {
            let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (t, vi) in target.iter_mut().zip(&v) {
                *t -= f * vi;
            }
        };
        for col in cols.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut y[k..]);
    }

    // back substitution on R β = (Qᵀy)[..4]
    let mut beta = [0.0; N_COEFFS];
    for i in (0..N_COEFFS).rev() {
        let mut acc = y[i];
        for j in i + 1..N_COEFFS {
            acc -= cols[j][i] * beta[j];
        }
        beta[i] = acc / diag[i];
    }
    let residual_sum_squares = y[N_COEFFS..].iter().map(|r| r * r).sum();
    Ok(OlsSolution {
        beta,
        residual_sum_squares,
    })
}

/// Fits the seasonal mean to raw values indexed `t = 0, 1, …`.
pub fn fit_seasonal_mean_values(values: &[f64]) -> Result<SeasonalMeanParams, SeasonalError> {
    let ols = fit_seasonal_ols(values)?;
    let [a_t, b_t, b2, b3] = ols.beta;
    let (c_t, psi) = recover_amplitude_phase(b2, b3)?;
    let mut params = SeasonalMeanParams::new(a_t, b_t, c_t, psi);
    let fitted = params.path(0, values.len());
    params.r_squared_fit = stats::r_squared(values, &fitted)?;
    Ok(params)
}

/// Fits the seasonal mean to a leap-stripped series.
pub fn fit_seasonal_mean(series: &TemperatureSeries) -> Result<SeasonalMeanParams, SeasonalError> {
    fit_seasonal_mean_values(&series.temperatures())
}

/// `T(t) − T̃(t)` for every observation.
pub fn residuals(series: &TemperatureSeries, params: &SeasonalMeanParams) -> Vec<f64> {
    residuals_of(&series.temperatures(), params)
}

pub fn residuals_of(values: &[f64], params: &SeasonalMeanParams) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(t, v)| v - params.evaluate(t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Normal equations XᵀX β = Xᵀy solved by Gaussian elimination with
    /// partial pivoting. Independent of the QR path.
    fn normal_equations(values: &[f64]) -> [f64; 4] {
        let mut a = [[0.0f64; 5]; 4];
        for (t, &y) in values.iter().enumerate() {
            let x = design_row(t);
            for i in 0..4 {
                for j in 0..4 {
                    a[i][j] += x[i] * x[j];
                }
                a[i][4] += x[i] * y;
            }
        }
        for k in 0..4 {
            let p = (k..4)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap();
            a.swap(k, p);
            for i in k + 1..4 {
                let f = a[i][k] / a[k][k];
                let pivot_row = a[k];
                for (dst, src) in a[i][k..].iter_mut().zip(&pivot_row[k..]) {
                    *dst -= f * src;
                }
            }
        }
        let mut beta = [0.0; 4];
        for i in (0..4).rev() {
            let mut acc = a[i][4];
            for j in i + 1..4 {
                acc -= a[i][j] * beta[j];
            }
            beta[i] = acc / a[i][i];
        }
        beta
    }

    fn wiggle(n: usize, seed: u64) -> Vec<f64> {
        // deterministic pseudo-noise
        (0..n)
            .map(|t| {
                let x = ((t as u64 + 1)
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(seed))
                    >> 33;
                x as f64 / (1u64 << 31) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn noiseless_sine_is_recovered_exactly() {
        let truth = SeasonalMeanParams::new(2.0, 0.0, 1.0, 0.0);
        let y = truth.path(0, 730);
        let fit = fit_seasonal_mean_values(&y).unwrap();
        assert_abs_diff_eq!(fit.a_t, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.b_t, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.c_t, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.psi, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.r_squared_fit, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn amplitude_phase_examples() {
        assert_eq!(recover_amplitude_phase(1.0, 0.0).unwrap(), (1.0, 0.0));
        let (c, psi) = recover_amplitude_phase(1.509, 0.886).unwrap();
        assert_abs_diff_eq!(c, 1.75, epsilon = 0.002);
        assert_abs_diff_eq!(psi, 0.531, epsilon = 0.001);
        assert_eq!(recover_amplitude_phase(-1.0, 0.0).unwrap(), (1.0, PI));
        assert_eq!(recover_amplitude_phase(-1.0, -0.0).unwrap(), (1.0, PI));
        assert_eq!(
            recover_amplitude_phase(0.0, 0.0),
            Err(SeasonalError::ZeroAmplitude)
        );
    }

    #[test]
    fn evaluate_examples() {
        let p = SeasonalMeanParams::new(26.4, -7.58e-5, 1.75, 0.531);
        assert_abs_diff_eq!(p.evaluate(0), 26.4 + 1.75 * 0.531f64.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.evaluate(0), 27.286, epsilon = 1e-3);
        let zero = SeasonalMeanParams::new(0.0, 0.0, 0.0, 0.0);
        assert_eq!(zero.evaluate(1234), 0.0);
        let trend = SeasonalMeanParams::new(10.0, 1.0, 0.0, 0.0);
        assert_eq!(trend.evaluate(5), 15.0);
    }

    #[test]
    fn residual_examples() {
        let p = SeasonalMeanParams::new(26.4, -7.58e-5, 1.75, 0.531);
        let y = p.path(0, 400);
        assert!(residuals_of(&y, &p).iter().all(|r| r.abs() < 1e-12));
        let shifted: Vec<f64> = y.iter().map(|v| v + 0.5).collect();
        assert!(residuals_of(&shifted, &p)
            .iter()
            .all(|r| (r - 0.5).abs() < 1e-12));
    }

    #[test]
    fn too_short_series_errors() {
        assert!(matches!(
            fit_seasonal_ols(&[1.0, 2.0, 3.0, 4.0]),
            Err(SeasonalError::TooFewObservations { .. })
        ));
    }

    #[test]
    fn qr_agrees_with_normal_equations() {
        for seed in 0..20u64 {
            let truth = SeasonalMeanParams::new(
                20.0 + seed as f64,
                1e-4 * (seed as f64 - 10.0),
                0.5 + 0.1 * seed as f64,
                -3.0 + 0.3 * seed as f64,
            );
            let n = 500 + 97 * seed as usize;
            let y: Vec<f64> = truth
                .path(0, n)
                .iter()
                .zip(wiggle(n, seed))
                .map(|(a, b)| a + b)
                .collect();
            let qr = fit_seasonal_ols(&y).unwrap().beta;
            let ne = normal_equations(&y);
            for k in 0..4 {
                assert!(
                    (qr[k] - ne[k]).abs() <= 1e-8 * (1.0 + ne[k].abs()),
                    "seed {seed} k {k}"
                );
            }
        }
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let truth = SeasonalMeanParams::new(26.4, -7.58e-5, 1.75, 0.531);
        let n = 2000;
        let y: Vec<f64> = truth
            .path(0, n)
            .iter()
            .zip(wiggle(n, 3))
            .map(|(a, b)| a + 3.0 * b)
            .collect();
        let ols = fit_seasonal_ols(&y).unwrap();
        let r: Vec<f64> = (0..n)
            .map(|t| {
                let x = design_row(t);
                y[t] - x.iter().zip(&ols.beta).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        let rss: f64 = r.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(rss, ols.residual_sum_squares, epsilon = 1e-8 * rss);
        for j in 0..4 {
            let (mut dot, mut scale) = (0.0, 0.0);
            for (t, rt) in r.iter().enumerate() {
                let x = design_row(t)[j];
                dot += x * rt;
                scale += (x * rt).abs();
            }
            assert!(dot.abs() <= 1e-6 * scale, "column {j}");
        }
        let fit = fit_seasonal_mean_values(&y).unwrap();
        let mean_r = residuals_of(&y, &fit).iter().sum::<f64>() / n as f64;
        assert!(mean_r.abs() < 1e-9);
        let fitted = fit.path(0, n);
        assert_eq!(fit.r_squared_fit, stats::r_squared(&y, &fitted).unwrap());
    }

    proptest! {
        #[test]
        fn amplitude_phase_round_trip(b2 in -10.0f64..10.0, b3 in -10.0f64..10.0) {
            prop_assume!(b2.abs() + b3.abs() > 1e-6);
            let (c, psi) = recover_amplitude_phase(b2, b3).unwrap();
            prop_assert!(c >= 0.0);
            prop_assert!(psi > -PI && psi <= PI);
            prop_assert!((c * psi.cos() - b2).abs() < 1e-10);
            prop_assert!((c * psi.sin() - b3).abs() < 1e-10);
        }

        #[test]
        fn one_year_shift_adds_one_year_of_trend(
            a in -10.0f64..40.0, b in -1e-3f64..1e-3, c in 0.0f64..5.0,
            psi in -3.1f64..3.1, t in 0usize..20_000,
        ) {
            let p = SeasonalMeanParams::new(a, b, c, psi);
            let d = p.evaluate(t + 365) - p.evaluate(t);
            prop_assert!((d - 365.0 * b).abs() < 1e-11);
        }

        #[test]
        fn constant_shift_moves_only_the_level(k in -20.0f64..20.0, seed in 0u64..1000) {
            let truth = SeasonalMeanParams::new(26.4, -7.58e-5, 1.75, 0.531);
            let n = 1095;
            let y: Vec<f64> = truth.path(0, n).iter().zip(wiggle(n, seed)).map(|(a, b)| a + b).collect();
            let shifted: Vec<f64> = y.iter().map(|v| v + k).collect();
            let f0 = fit_seasonal_mean_values(&y).unwrap();
            let f1 = fit_seasonal_mean_values(&shifted).unwrap();
            prop_assert!((f1.a_t - f0.a_t - k).abs() < 1e-9);
            prop_assert!((f1.b_t - f0.b_t).abs() < 1e-9);
            prop_assert!((f1.c_t - f0.c_t).abs() < 1e-9);
            prop_assert!((f1.psi - f0.psi).abs() < 1e-9);
        }
    }
}
