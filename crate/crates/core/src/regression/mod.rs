//! Standardization, logistic-regression fitting and Wald inference.

mod inference;
mod logistic;
mod scale;

pub use inference::{
    analyze, coefficient_row, cross_validated_accuracy, significance_stars, two_sided_p,
    wald_summary, CoefficientRow, RegressionSummary, Z_975,
};
pub use logistic::{
    accuracy, design_matrix, fit_logistic, gradient, log_likelihood, sigmoid, FitConfig,
    RegressionFit,
};
pub use scale::{standard_scale, Dataset, ScalerParams};
