//! Loss reweighting for time-series forecasting based on local discrepancy.
//!
//! A forecaster trained on rolling windows sees mostly *normal* windows, where
//! the output continues the trend and periodicity of the input, and a few
//! windows containing *abrupt changes* (flukes, frequency changes, level
//! shifts). The abrupt windows are unpredictable from their input, yet they
//! dominate the training loss. This crate measures how different each output
//! window is from its input window (the local discrepancy, LD), estimates how
//! common each LD value is, and turns that density into per-window loss
//! weights (ReLD): frequent LD values are up-weighted, rare ones down-weighted.
//!
//! ```
//! use reld::{gen_periodic, ld_profile, reld, LdMetric, PeriodicSpec, ReldConfig, WindowSpec};
//!
//! let series = gen_periodic(&PeriodicSpec::sine(1024, 64, 1.0)).unwrap();
//! let spec = WindowSpec::new(32, 32).unwrap();
//! let profile = ld_profile(&series, spec, LdMetric::welch()).unwrap();
//! let (weights, _densities) = reld(&profile, &ReldConfig::default()).unwrap();
//! assert_eq!(weights.len(), profile.len());
//! ```
//!
//! Modules:
//! - [`series`]: the series container, CSV input and rolling windows
//! - [`discrepancy`]: Welch t, Hotelling t² and KPSS LD, plus periodicity residuals
//! - [`weighting`]: histogram, kernel smoothing, ReLD and invLD weights
//! - [`losses`]: weighted loss and the smoothing, filtering and error-based baselines
//! - [`synth`]: synthetic periodic and rectangular series with labeled abrupt changes
//! - [`forecaster`]: a linear direct multi-horizon model, training and evaluation
//! - [`experiment`]: end-to-end pipelines used by the `reld` binary

#![forbid(unsafe_code)]
// NaN must fail parameter checks, so several guards are written `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrepancy;
pub mod error;
pub mod experiment;
pub mod export;
pub mod forecaster;
pub mod losses;
pub mod series;
pub mod synth;
pub mod weighting;

pub use discrepancy::{
    hotelling_ld, hotelling_ld_with, kpss_ld, ld_profile, periodicity_residual, welch_ld,
    window_moment_residual, CovarianceIndexing, LdMetric, LdProfile, LongRunVariance,
};
pub use error::{Error, Result};
pub use forecaster::{
    evaluate, grad_check, loss_gradient, train, window_losses, EvalReport, LinearForecaster,
    TrainConfig, TrainOutcome, TrainScheme,
};
pub use losses::{
    ema, error_weight, filter_outliers, moving_average, weighted_loss, ErrorReweightKind, LossKind,
};
pub use series::{
    load_csv, make_windows, window_stats, write_csv, Series, SeriesView, WindowPair, WindowSet,
    WindowSpec,
};
pub use synth::{
    gen_periodic, gen_rect, inject_abrupt, window_labels, AbruptEvent, AbruptKind, LabeledSeries,
    PeriodicSpec, RectSpec,
};
pub use weighting::{
    build_histogram, invld_weights, normalize_weights, reld, reld_weights, smooth_density,
    DensityEstimate, Histogram, KernelSpec, ReldConfig, WeightScheme, WeightTable,
};
