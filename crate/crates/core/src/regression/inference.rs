//! Wald inference, accuracy and cross-validation.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{accuracy, fit_logistic, standard_scale, Dataset, FitConfig, RegressionFit};
use crate::error::RegressionError;

/// Two-sided 97.5% standard normal quantile.
pub const Z_975: f64 = 1.959964;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub name: String,
    pub beta: f64,
    pub std_error: f64,
    pub z: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
}

impl CoefficientRow {
    /// "***" below 0.001, "**" below 0.01, blank otherwise.
    pub fn stars(&self) -> &'static str {
        significance_stars(self.p_value)
    }
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else {
        ""
    }
}

/// Two-sided p-value of a standard normal statistic.
pub fn two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / core::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSummary {
    pub rows: Vec<CoefficientRow>,
    pub n: usize,
    pub log_likelihood: f64,
    /// In-sample accuracy.
    pub accuracy: Option<f64>,
    /// Seeded k-fold accuracy, reported next to the in-sample figure.
    pub cv_accuracy: Option<f64>,
    pub cv_folds: usize,
}

/// Wald confidence intervals and normal-test p-values for every coefficient.
/// `names` includes the intercept.
pub fn wald_summary(
    fit: &RegressionFit,
    names: &[String],
) -> Result<RegressionSummary, RegressionError> {
    if !fit.converged {
        return Err(RegressionError::NotConverged);
    }
    if names.len() != fit.beta.len() {
        return Err(RegressionError::NameMismatch {
            names: names.len(),
            coefficients: fit.beta.len(),
        });
    }
    let rows = fit
        .beta
        .iter()
        .enumerate()
        .map(|(j, &beta)| {
            let se = libm::sqrt(fit.covariance[(j, j)]);
            coefficient_row(names[j].clone(), beta, se)
        })
        .collect();
    Ok(RegressionSummary {
        rows,
        n: 0,
        log_likelihood: fit.log_likelihood,
        accuracy: None,
        cv_accuracy: None,
        cv_folds: 0,
    })
}

pub fn coefficient_row(name: String, beta: f64, std_error: f64) -> CoefficientRow {
    let z = beta / std_error;
    CoefficientRow {
        name,
        beta,
        std_error,
        z,
        ci_low: beta - Z_975 * std_error,
        ci_high: beta + Z_975 * std_error,
        p_value: two_sided_p(z),
    }
}

/// Seeded k-fold cross-validated accuracy. Each fold is standardized with
/// statistics of its own training part.
pub fn cross_validated_accuracy(
    raw: &Dataset,
    config: FitConfig,
    folds: usize,
    seed: u64,
) -> Result<f64, RegressionError> {
    if folds < 2 || raw.len() < folds {
        return Err(RegressionError::TooFewRows {
            needed: folds.max(2),
            got: raw.len(),
        });
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut hits = 0.0;
    for fold in 0..folds {
        let (test, train): (Vec<(usize, usize)>, Vec<(usize, usize)>) = order
            .iter()
            .copied()
            .enumerate()
            .partition(|(pos, _)| pos % folds == fold);
        let test: Vec<usize> = test.into_iter().map(|(_, i)| i).collect();
        let train: Vec<usize> = train.into_iter().map(|(_, i)| i).collect();
        let (train_scaled, params) = standard_scale(&raw.subset(&train))?;
        let fit = fit_logistic(&train_scaled, config)?;
        let test_scaled = params.transform(&raw.subset(&test));
        hits += accuracy(&fit, &test_scaled) * test.len() as f64;
    }
    Ok(hits / raw.len() as f64)
}

/// Standardize, fit, summarize; the usual end-to-end regression run.
pub fn analyze(
    raw: &Dataset,
    config: FitConfig,
    cv_folds: usize,
    seed: u64,
) -> Result<(RegressionSummary, RegressionFit), RegressionError> {
    let (scaled, _) = standard_scale(raw)?;
    let fit = fit_logistic(&scaled, config)?;
    let mut names = Vec::with_capacity(raw.n_features() + 1);
    names.push("const".to_string());
    names.extend(raw.names.iter().cloned());
    let mut summary = wald_summary(&fit, &names)?;
    summary.n = raw.len();
    summary.accuracy = Some(accuracy(&fit, &scaled));
    if cv_folds >= 2 {
        summary.cv_accuracy = cross_validated_accuracy(raw, config, cv_folds, seed).ok();
        summary.cv_folds = cv_folds;
    }
    Ok((summary, fit))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| alloc::format!("{v:.3}"))
}

impl fmt::Display for RegressionSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .rows
            .iter()
            .map(|r| r.name.chars().count())
            .max()
            .unwrap_or(9)
            .max(9);
        writeln!(
            f,
            "{:<width$} {:>8} {:>8} {:>8} {:>10}  sig.",
            "predictor", "beta", "[0.025", "0.975]", "pval"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<width$} {:>8.3} {:>8.2} {:>8.2} {:>10.3e}  {}",
                r.name,
                r.beta,
                r.ci_low,
                r.ci_high,
                r.p_value,
                r.stars()
            )?;
        }
        writeln!(f, "n = {}, log-likelihood = {:.4}", self.n, self.log_likelihood)?;
        write!(f, "accuracy (in-sample) = {}", fmt_opt(self.accuracy))?;
        if self.cv_folds >= 2 {
            write!(f, ", {}-fold CV = {}", self.cv_folds, fmt_opt(self.cv_accuracy))?;
        }
        writeln!(f)
    }
}
