//! Descriptive statistics, the composite-normal Anderson–Darling test and
//! goodness-of-fit metrics (RMSE, MAPE, R²).

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

/// Significance level used for the reject flag.
pub const SIGNIFICANCE: f64 = 0.05;
/// Smallest sample accepted by [`anderson_darling_normal`].
pub const AD_MIN_SAMPLES: usize = 8;
/// p-values below this are displayed as `< 0.001`.
pub const P_VALUE_RESOLUTION: f64 = 0.001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty input")]
    Empty,
    #[error("need at least {needed} values, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("length mismatch: {obs} observations vs {pred} predictions")]
    LengthMismatch { obs: usize, pred: usize },
    #[error("MAPE undefined: observation {index} is zero; use RMSE or R² for series that cross 0")]
    ZeroObservation { index: usize },
    #[error("R² undefined: observations are constant (zero total sum of squares)")]
    ConstantObservations,
}

/// Table-style summary of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveSummary {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single value.
    pub sd: f64,
    /// `m₃ / m₂^1.5`; `None` when the sample has no spread.
    pub skewness: Option<f64>,
    /// `m₄ / m₂² − 3`; `None` when the sample has no spread.
    pub excess_kurtosis: Option<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Median of already sorted values.
fn sorted_median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn describe(values: &[f64]) -> Result<DescriptiveSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = values.len();
    let nf = n as f64;
    let m = mean(values);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in values {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let ss = m2;
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let sd = if n > 1 { (ss / (nf - 1.0)).sqrt() } else { 0.0 };
    let spread = m2 > 0.0 && sorted[0] != sorted[n - 1];
    Ok(DescriptiveSummary {
        n,
        mean: m,
        median: sorted_median(&sorted),
        sd: if spread { sd } else { 0.0 },
        skewness: spread.then(|| m3 / m2.powf(1.5)),
        excess_kurtosis: spread.then(|| m4 / (m2 * m2) - 3.0),
        min: sorted[0],
        max: sorted[n - 1],
    })
}

/// Result of the composite-normal Anderson–Darling test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityTestResult {
    pub n: usize,
    /// Raw A² statistic.
    pub a_squared: f64,
    /// Small-sample corrected A²* = A²(1 + 0.75/n + 2.25/n²).
    pub a_squared_adjusted: f64,
    pub p_value: f64,
    pub reject_at_5pct: bool,
}

impl NormalityTestResult {
    /// p-value as printed in reports: `< 0.001` below the approximation's resolution.
    pub fn p_value_display(&self) -> String {
        if self.p_value < P_VALUE_RESOLUTION {
            "< 0.001".to_string()
        } else {
            format!("{:.4}", self.p_value)
        }
    }
}

/// ln Φ(z) and ln(1 − Φ(z)) through erfc, which keeps both tails accurate.
fn ln_normal_cdf(z: f64) -> f64 {
    (0.5 * erfc(-z / std::f64::consts::SQRT_2))
        .max(f64::MIN_POSITIVE)
        .ln()
}

fn ln_normal_sf(z: f64) -> f64 {
    ln_normal_cdf(-z)
}

/// Upper-tail p-value for the adjusted statistic, case 3 (mean and
/// variance estimated), from D'Agostino & Stephens (1986), Table 4.9.
pub fn anderson_darling_p_value(a2_adjusted: f64) -> f64 {
    // The upper-branch quadratic has its vertex at 5.709 / 0.0372 ≈ 153.5 and
    // turns back upward beyond it; hold the statistic there.
    const UPPER_VERTEX: f64 = 5.709 / (2.0 * 0.0186);
    let a = a2_adjusted;
    let p = if a >= 0.6 {
        let a = a.min(UPPER_VERTEX);
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a > 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a > 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    p.clamp(0.0, 1.0)
}

/// Anderson–Darling test of normality with mean and variance estimated
/// from the sample.
pub fn anderson_darling_normal(values: &[f64]) -> Result<NormalityTestResult, StatsError> {
    let n = values.len();
    if n < AD_MIN_SAMPLES {
        return Err(StatsError::TooFewPoints {
            needed: AD_MIN_SAMPLES,
            got: n,
        });
    }
    let nf = n as f64;
    let m = mean(values);
    let var = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let mut z: Vec<f64> = values.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);

    let s: f64 = (0..n)
        .map(|i| {
            let w = (2 * i + 1) as f64;
            w * (ln_normal_cdf(z[i]) + ln_normal_sf(z[n - 1 - i]))
        })
        .sum();
    let a2 = (-nf - s / nf).max(0.0);
    let a2_adj = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p_value = anderson_darling_p_value(a2_adj);
    Ok(NormalityTestResult {
        n,
        a_squared: a2,
        a_squared_adjusted: a2_adj,
        p_value,
        reject_at_5pct: p_value < SIGNIFICANCE,
    })
}

fn check_pair(obs: &[f64], pred: &[f64]) -> Result<(), StatsError> {
    if obs.len() != pred.len() {
        return Err(StatsError::LengthMismatch {
            obs: obs.len(),
            pred: pred.len(),
        });
    }
    if obs.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(())
}

fn sum_squared_error(obs: &[f64], pred: &[f64]) -> f64 {
    obs.iter().zip(pred).map(|(o, p)| (o - p) * (o - p)).sum()
}

pub fn rmse(obs: &[f64], pred: &[f64]) -> Result<f64, StatsError> {
    check_pair(obs, pred)?;
    Ok((sum_squared_error(obs, pred) / obs.len() as f64).sqrt())
}

/// Mean absolute percentage error, in percent.
pub fn mape(obs: &[f64], pred: &[f64]) -> Result<f64, StatsError> {
    check_pair(obs, pred)?;
    if let Some(index) = obs.iter().position(|&o| o == 0.0) {
        return Err(StatsError::ZeroObservation { index });
    }
    let total: f64 = obs.iter().zip(pred).map(|(o, p)| ((o - p) / o).abs()).sum();
    Ok(100.0 * total / obs.len() as f64)
}

/// Coefficient of determination; negative for predictors worse than the mean.
pub fn r_squared(obs: &[f64], pred: &[f64]) -> Result<f64, StatsError> {
    check_pair(obs, pred)?;
    if obs.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            got: obs.len(),
        });
    }
    let m = mean(obs);
    let tss: f64 = obs.iter().map(|o| (o - m) * (o - m)).sum();
    if tss == 0.0 {
        return Err(StatsError::ConstantObservations);
    }
    Ok(1.0 - sum_squared_error(obs, pred) / tss)
}

/// Goodness of fit of a predicted path against observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub rmse: f64,
    #[serde(rename = "mape_pct")]
    pub mape: f64,
    #[serde(rename = "r2")]
    pub r_squared: f64,
}

impl FitMetrics {
    pub fn compute(obs: &[f64], pred: &[f64]) -> Result<Self, StatsError> {
        Ok(Self {
            rmse: rmse(obs, pred)?,
            mape: mape(obs, pred)?,
            r_squared: r_squared(obs, pred)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    #[test]
    fn describe_small_sample() {
        let d = describe(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.mean, 2.5);
        assert_eq!(d.median, 2.5);
        assert_abs_diff_eq!(d.sd, (5.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.sd, 1.29099, epsilon = 1e-5);
        assert_abs_diff_eq!(d.skewness.unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.excess_kurtosis.unwrap(), -1.36, epsilon = 1e-12);
        assert_eq!((d.min, d.max), (1.0, 4.0));
    }

    #[test]
    fn describe_constant_flags_undefined_moments() {
        let d = describe(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(d.sd, 0.0);
        assert!(d.skewness.is_none());
        assert!(d.excess_kurtosis.is_none());
        assert_eq!(describe(&[]), Err(StatsError::Empty));
        let one = describe(&[3.0]).unwrap();
        assert_eq!((one.sd, one.median), (0.0, 3.0));
    }

    #[test]
    fn describe_odd_median_and_skew_sign() {
        let d = describe(&[1.0, 1.0, 1.0, 10.0, 2.0]).unwrap();
        assert_eq!(d.median, 1.0);
        assert!(d.skewness.unwrap() > 0.0);
    }

    #[test]
    fn metric_examples() {
        assert_eq!(rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap(),
            (4.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            mape(&[10.0, 20.0], &[11.0, 18.0]).unwrap(),
            10.0,
            epsilon = 1e-12
        );
        assert_eq!(mape(&[10.0, 20.0], &[10.0, 20.0]).unwrap(), 0.0);
        assert_eq!(r_squared(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap(), 1.0);
        let obs = [1.0, 2.0, 4.0, 9.0];
        let m = mean(&obs);
        assert_abs_diff_eq!(r_squared(&obs, &[m; 4]).unwrap(), 0.0, epsilon = 1e-15);
        assert!(r_squared(&obs, &[9.0, 4.0, 2.0, 1.0]).unwrap() < 0.0);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(
            rmse(&[1.0], &[1.0, 2.0]),
            Err(StatsError::LengthMismatch { .. })
        ));
        assert_eq!(rmse(&[], &[]), Err(StatsError::Empty));
        assert_eq!(
            mape(&[1.0, 0.0], &[1.0, 1.0]),
            Err(StatsError::ZeroObservation { index: 1 })
        );
        assert_eq!(
            r_squared(&[2.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::ConstantObservations)
        );
    }

    #[test]
    fn ad_rejects_bad_input() {
        assert!(matches!(
            anderson_darling_normal(&[1.0; 5]),
            Err(StatsError::TooFewPoints { .. })
        ));
        assert_eq!(
            anderson_darling_normal(&[1.0; 10]),
            Err(StatsError::ZeroVariance)
        );
    }

    #[test]
    fn ad_p_value_is_continuous_and_monotone() {
        let mut prev = 1.0;
        for k in 0..4000 {
            let a = k as f64 * 0.001;
            let p = anderson_darling_p_value(a);
            assert!((0.0..=1.0).contains(&p));
            // the published branches join with jumps of up to ~0.003
            assert!(p <= prev + 5e-3, "a={a}");
            prev = p;
        }
        assert!(anderson_darling_p_value(723.16) < 1e-100);
        assert!(anderson_darling_p_value(76.797) < P_VALUE_RESOLUTION);
        // 5% critical value of the adjusted statistic is about 0.752
        assert_abs_diff_eq!(anderson_darling_p_value(0.752), 0.05, epsilon = 0.002);
    }

    #[test]
    fn ad_statistic_matches_direct_formula() {
        // Hand-written evaluation with erf-based CDF on a fixed sample.
        let x = [
            2.1, -0.3, 0.7, 1.9, -1.2, 0.05, 0.4, -0.8, 1.1, 0.0, -2.2, 0.9,
        ];
        let r = anderson_darling_normal(&x).unwrap();
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let mut z: Vec<f64> = x.iter().map(|v| (v - m) / sd).collect();
        z.sort_by(f64::total_cmp);
        let cdf = |v: f64| 0.5 * (1.0 + statrs::function::erf::erf(v / 2f64.sqrt()));
        let mut s = 0.0;
        for i in 0..z.len() {
            let k = (2 * i + 1) as f64;
            s += k * (cdf(z[i]).ln() + (1.0 - cdf(z[z.len() - 1 - i])).ln());
        }
        let a2 = -n - s / n;
        assert_abs_diff_eq!(r.a_squared, a2, epsilon = 1e-12);
        assert!(!r.reject_at_5pct);
    }

    #[test]
    fn ad_null_and_power_small_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let reps = 300;
        let mut rejects = 0;
        for _ in 0..reps {
            let x: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
            if anderson_darling_normal(&x).unwrap().reject_at_5pct {
                rejects += 1;
            }
        }
        let rate = rejects as f64 / reps as f64;
        assert!(rate <= 0.08, "size {rate}");
        for _ in 0..20 {
            let x: Vec<f64> = (0..500).map(|_| Exp1.sample(&mut rng)).collect();
            let r = anderson_darling_normal(&x).unwrap();
            assert!(r.reject_at_5pct);
            assert_eq!(r.p_value_display(), "< 0.001");
        }
    }

    proptest! {
        #[test]
        fn describe_permutation_invariant(mut v in prop::collection::vec(-50.0f64..50.0, 2..60), seed in any::<u64>()) {
            let a = describe(&v).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(v.as_mut_slice(), &mut rng);
            let b = describe(&v).unwrap();
            prop_assert!((a.mean - b.mean).abs() < 1e-12);
            prop_assert_eq!(a.median, b.median);
            prop_assert!((a.sd - b.sd).abs() < 1e-10);
            prop_assert_eq!((a.min, a.max), (b.min, b.max));
        }

        #[test]
        fn describe_affine_equivariant(
            v in prop::collection::vec(-50.0f64..50.0, 3..60),
            a in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
            b in -100.0f64..100.0,
        ) {
            let d = describe(&v).unwrap();
            prop_assume!(d.skewness.is_some() && d.sd > 1e-3);
            let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let e = describe(&w).unwrap();
            prop_assert!((e.mean - (a * d.mean + b)).abs() < 1e-9);
            prop_assert!((e.sd - a.abs() * d.sd).abs() < 1e-9 * (1.0 + d.sd));
            prop_assert!((e.skewness.unwrap() - a.signum() * d.skewness.unwrap()).abs() < 1e-7);
            prop_assert!((e.excess_kurtosis.unwrap() - d.excess_kurtosis.unwrap()).abs() < 1e-7);
            prop_assert!(e.min <= e.median && e.median <= e.max);
        }

        #[test]
        fn ad_affine_invariant(
            v in prop::collection::vec(-10.0f64..10.0, 8..80),
            a in 0.1f64..10.0,
            b in -50.0f64..50.0,
        ) {
            let Ok(r) = anderson_darling_normal(&v) else { return Ok(()); };
            let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let s = anderson_darling_normal(&w).unwrap();
            prop_assert!((r.a_squared - s.a_squared).abs() < 1e-8 * (1.0 + r.a_squared));
        }

        #[test]
        fn r_squared_rmse_identity(
            pairs in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 2..100)
        ) {
            let (obs, pred): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let m = mean(&obs);
            let tss: f64 = obs.iter().map(|o| (o - m).powi(2)).sum();
            prop_assume!(tss > 1e-9);
            let e = rmse(&obs, &pred).unwrap();
            let r2 = r_squared(&obs, &pred).unwrap();
            let expected = 1.0 - e * e * obs.len() as f64 / tss;
            prop_assert!((r2 - expected).abs() < 1e-9 * (1.0 + expected.abs()));
        }
    }
}
