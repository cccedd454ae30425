//! Count-regression models for per-organization intrusion data.
//!
//! The crate fits Poisson and NB2 generalized linear models with a log
//! link via iteratively reweighted least squares, and layers diagnostics
//! (deviance, dispersion, a deviance-based BIC, Pearson residuals),
//! leave-one-out jackknife validation, heterogeneity sweeps, and
//! predictor-restriction case studies on top. Linear and
//! principal-component regression baselines and a calibrated synthetic
//! data generator round out the toolkit.

pub mod cli;
pub mod countglm;
pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod linmodel;
pub mod study;
pub mod validation;

pub use countglm::{coef_inference, irls_fit, Family, FitOptions, FitResult};
pub use dataset::{encode, load_csv, simulate, CaseLabel, OrgRecord, PredictorSchema, SynthConfig};
pub use diagnostics::{bic, lr_test, DiagnosticsReport};
pub use error::{Error, Result};
pub use linmodel::{condition_number, ols_fit, pc_regression, pca};
pub use study::{badness_score, compare_models, gamma_sweep, run_cases, DEFAULT_GAMMA_GRID};
pub use validation::{jackknife, JackknifeResult};
