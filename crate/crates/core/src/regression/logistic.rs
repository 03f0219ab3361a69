//! Binary logistic regression by Newton / IRLS with step halving.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::Dataset;
use crate::error::RegressionError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Convergence threshold on the max-norm of the gradient or of the
    /// Newton step.
    pub tolerance: f64,
    pub max_iter: usize,
    /// L2 penalty on the slopes (the intercept is never penalized).
    pub ridge: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tolerance: 1e-8,
            max_iter: 100,
            ridge: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    /// Intercept first, then one coefficient per feature.
    pub beta: Vec<f64>,
    /// Inverse of the (penalized) observed information at the estimate.
    pub covariance: DMatrix<f64>,
    /// Unpenalized Bernoulli log-likelihood at `beta`.
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_max_norm: f64,
    /// Penalized objective after each accepted step, starting at `beta = 0`.
    pub objective_trace: Vec<f64>,
}

impl RegressionFit {
    pub fn predict_proba(&self, features: &[f64]) -> f64 {
        let eta = self.beta[0]
            + features
                .iter()
                .zip(&self.beta[1..])
                .map(|(x, b)| x * b)
                .sum::<f64>();
        sigmoid(eta)
    }
}

pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + libm::exp(-eta))
    } else {
        let e = libm::exp(eta);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// Design matrix with a leading intercept column.
pub fn design_matrix(data: &Dataset) -> DMatrix<f64> {
    let p = data.n_features() + 1;
    DMatrix::from_fn(data.len(), p, |i, j| if j == 0 { 1.0 } else { data.rows[i][j - 1] })
}

fn targets(data: &Dataset) -> DVector<f64> {
    DVector::from_iterator(data.len(), data.labels.iter().map(|l| f64::from(*l)))
}

/// Bernoulli log-likelihood `Σ y η - ln(1 + e^η)`.
pub fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter().zip(y.iter()).map(|(e, yi)| yi * e - softplus(*e)).sum()
}

/// Analytic gradient `Xᵀ (y - μ)` of [`log_likelihood`].
pub fn gradient(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> DVector<f64> {
    let mu = (x * beta).map(sigmoid);
    x.transpose() * (y - mu)
}

const OBJECTIVE_ROUNDING: f64 = 1e-12;

fn penalty_mask(p: usize) -> DVector<f64> {
    DVector::from_fn(p, |j, _| if j == 0 { 0.0 } else { 1.0 })
}

fn objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, ridge: f64) -> f64 {
    let mask = penalty_mask(beta.len());
    log_likelihood(x, y, beta) - 0.5 * ridge * beta.component_mul(&mask).norm_squared()
}

fn information(x: &DMatrix<f64>, beta: &DVector<f64>, ridge: f64) -> DMatrix<f64> {
    let mu = (x * beta).map(sigmoid);
    let w = mu.map(|m| m * (1.0 - m));
    let mut weighted = x.clone();
    for (i, mut row) in weighted.row_iter_mut().enumerate() {
        row *= w[i];
    }
    let mut info = x.transpose() * weighted;
    for j in 1..info.nrows() {
        info[(j, j)] += ridge;
    }
    info
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, g| m.max(g.abs()))
}

/// Maximizes the (optionally ridge-penalized) Bernoulli log-likelihood.
pub fn fit_logistic(data: &Dataset, config: FitConfig) -> Result<RegressionFit, RegressionError> {
    let n = data.len();
    if n == 0 {
        return Err(RegressionError::TooFewRows { needed: 1, got: 0 });
    }
    let positives = data.labels.iter().filter(|l| **l == 1).count();
    if positives == 0 || positives == n {
        return Err(RegressionError::SingleClass);
    }

    let x = design_matrix(data);
    let y = targets(data);
    let p = x.ncols();
    let mask = penalty_mask(p);
    let mut beta = DVector::zeros(p);
    let mut current = objective(&x, &y, &beta, config.ridge);
    let mut trace = alloc::vec![current];
    let mut converged = false;
    let mut iterations = 0;

    while iterations <= config.max_iter {
        let grad = gradient(&x, &y, &beta) - beta.component_mul(&mask) * config.ridge;
        let grad_norm = max_abs(&grad);
        if grad_norm < config.tolerance {
            converged = true;
            break;
        }
        if iterations == config.max_iter {
            break;
        }
        let info = information(&x, &beta, config.ridge);
        let step = match info.cholesky() {
            Some(chol) => chol.solve(&grad),
            None if config.ridge == 0.0 && perfectly_separated(&x, &y, &beta) => {
                return Err(RegressionError::PerfectSeparation)
            }
            None => return Err(RegressionError::Singular),
        };

        // the objective is a sum over rows; differences below its rounding
        // error do not reject a step
        let floor = current - OBJECTIVE_ROUNDING * current.abs().max(1.0);
        let mut scale = 1.0;
        let mut candidate = &beta + &step;
        let mut value = objective(&x, &y, &candidate, config.ridge);
        let mut halvings = 0;
        while !(value >= floor) && halvings < 40 {
            scale *= 0.5;
            candidate = &beta + &step * scale;
            value = objective(&x, &y, &candidate, config.ridge);
            halvings += 1;
        }
        // near the optimum the gradient can stall above the threshold
        // while the Newton step is already negligible
        let negligible = max_abs(&step) < config.tolerance;
        if !(value >= floor) {
            converged = negligible;
            break;
        }
        beta = candidate;
        current = value;
        trace.push(current);
        iterations += 1;
        if negligible {
            converged = true;
            break;
        }

        if config.ridge == 0.0 && perfectly_separated(&x, &y, &beta) {
            return Err(RegressionError::PerfectSeparation);
        }
    }

    if !converged {
        if config.ridge == 0.0 && perfectly_separated(&x, &y, &beta) {
            return Err(RegressionError::PerfectSeparation);
        }
        return Err(RegressionError::NonConvergence { iterations });
    }

    let grad_norm = max_abs(&(gradient(&x, &y, &beta) - beta.component_mul(&mask) * config.ridge));
    let covariance = information(&x, &beta, config.ridge)
        .try_inverse()
        .ok_or(RegressionError::Singular)?;
    Ok(RegressionFit {
        beta: beta.iter().copied().collect(),
        covariance,
        log_likelihood: log_likelihood(&x, &y, &beta),
        converged,
        iterations,
        gradient_max_norm: grad_norm,
        objective_trace: trace,
    })
}

/// Every observation is predicted with near certainty: the likelihood has
/// no finite maximizer.
fn perfectly_separated(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> bool {
    let mu = (x * beta).map(sigmoid);
    mu.iter().zip(y.iter()).all(|(m, yi)| (yi - m).abs() < 1e-6)
}

/// Fraction of rows whose thresholded prediction (p ≥ 0.5) equals the label.
pub fn accuracy(fit: &RegressionFit, data: &Dataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let hits = data
        .rows
        .iter()
        .zip(&data.labels)
        .filter(|(row, label)| u8::from(fit.predict_proba(row) >= 0.5) == **label)
        .count();
    hits as f64 / data.len() as f64
}
