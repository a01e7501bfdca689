//! Singular spectrum analysis of one-dimensional series.
//!
//! The pipeline is embed, decompose ([`decompose`]), group and reconstruct
//! ([`grouping`]). Forecasting and gap filling live in [`predict`],
//! parametric modelling in [`model`], finite-rank approximation in
//! [`lowrank`] and red-noise testing in [`detect`].

pub mod decompose;
pub mod detect;
pub mod error;
pub mod fft;
pub mod filter;
pub mod grouping;
pub mod linalg;
pub mod lowrank;
pub mod model;
pub mod periodogram;
pub mod predict;
pub mod series;
pub mod svd;
pub mod trajectory;

pub use decompose::{
    decompose, decompose_basic, decompose_double_centered, decompose_toeplitz, default_window, Centering,
    Decomposition, DecompositionDoc, Method,
};
pub use detect::{fit_ar1, mcssa_test, Ar1Model, Correction, McssaOptions, McssaReport};
pub use error::{Result, SsaError};
pub use filter::{last_point_weights, middle_point_filter, FilterCoefficients};
pub use grouping::{
    auto_periodic_pairs, auto_trend, cluster_groups, reconstruct, wcor, wcor_of_series, Grouping, PeriodicPair,
    Reconstruction, WCorMatrix,
};
pub use lowrank::{cadzow, extract_signal, rank_select, CadzowResult, Criterion, Estimator, RankSelection};
pub use model::{
    char_roots, esprit, estimate_amplitudes, minnorm_lrr, roots_to_realform, LinearRecurrence, RealTerm, Root,
    SignalModel, SubspaceModel,
};
pub use predict::{
    bootstrap_group_intervals, bootstrap_intervals, forecast, forecast_recurrent, forecast_vector, gapfill_iterative, gapfill_subspace,
    BootstrapOptions, ForecastMethod, ForecastResult, GapFillResult,
};
pub use series::Series;
pub use svd::{truncated_svd, EigenTriple, SvdOptions};
pub use trajectory::{embed, TrajectoryOperator, WindowConfig};
