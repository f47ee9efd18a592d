//! Reference calibration of a tropical station (daily data 2000–2023),
//! used as the default generating parameters for synthetic series and as
//! recovery targets in tests.

use crate::seasonal::SeasonalMeanParams;
use crate::volatility::VolatilityModelParams;

pub const A_T: f64 = 26.4;
pub const B_T: f64 = -7.58e-5;
pub const C_T: f64 = 1.75;
pub const PSI: f64 = 0.531;
pub const SEASONAL_R2: f64 = 0.5062;

pub const SIGMA_BAR: f64 = 0.877;
pub const SIGMA_SIGMA: f64 = 0.419;
pub const KAPPA_SIGMA: f64 = 0.989;

pub const KAPPA_T: f64 = 0.1872;

/// Mean simulated path (1000 paths) against the observations.
pub const EVAL_RMSE: f64 = 1.2482;
pub const EVAL_MAPE_PCT: f64 = 3.5922;
pub const EVAL_R2: f64 = 0.50182;

pub fn seasonal() -> SeasonalMeanParams {
    SeasonalMeanParams {
        r_squared_fit: SEASONAL_R2,
        ..SeasonalMeanParams::new(A_T, B_T, C_T, PSI)
    }
}

pub fn volatility() -> VolatilityModelParams {
    VolatilityModelParams {
        sigma_bar: SIGMA_BAR,
        sigma_sigma: SIGMA_SIGMA,
        kappa_sigma: KAPPA_SIGMA,
    }
}
