//! Seasonal Ornstein–Uhlenbeck model for daily average temperature.
//!
//! The model is
//!
//! ```text
//! dT(t) = dT̃(t) − κ_T (T(t) − T̃(t)) dt + σ_T(t) dB(t)
//! T̃(t)  = a + b·t + c·sin(2πt/365 + ψ)
//! ```
//!
//! with a volatility that is constant within a calendar month and follows
//! its own mean-reverting process from month to month. The crate fits all
//! parameters from a daily series ([`pipeline::fit_full_model`]), simulates
//! Monte Carlo ensembles ([`simulate`]) and scores the ensemble mean path
//! against the observations ([`pipeline::evaluate_model`]).
//!
//! Path simulation runs on rayon when the default `parallel` feature is
//! enabled; results are bit-identical to serial execution.

pub mod mean_reversion;
pub mod pipeline;
pub mod reference;
pub mod seasonal;
pub mod series;
pub mod simulate;
pub mod stats;
pub mod volatility;

pub use mean_reversion::{estimate_kappa, MeanReversionEstimate};
pub use pipeline::{
    evaluate_model, fit_full_model, recover_parameters, FitReport, ParameterRecovery, PipelineError,
};
pub use seasonal::{fit_seasonal_mean, SeasonalMeanParams};
pub use series::{parse_csv, strip_leap_days, CalendarDay, TemperatureSeries};
pub use simulate::{simulate_paths, Execution, SimulatedEnsemble, SimulationConfig};
pub use stats::{DescriptiveSummary, FitMetrics, NormalityTestResult};
pub use volatility::{MonthlyVolatilitySeries, VolatilityModelParams};
