use alloc::string::String;
use alloc::vec::Vec;

use crate::error::RegressionError;

/// A numeric design table with binary targets. `rows[i][j]` is feature `j`
/// of observation `i`; the intercept is not included.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
    ) -> Result<Self, RegressionError> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(RegressionError::DimensionMismatch {
                    row: i,
                    expected: names.len(),
                    got: row.len(),
                });
            }
        }
        if rows.len() != labels.len() {
            return Err(RegressionError::DimensionMismatch {
                row: rows.len().min(labels.len()),
                expected: rows.len(),
                got: labels.len(),
            });
        }
        Ok(Dataset {
            names,
            rows,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn positive_rate(&self) -> f64 {
        self.labels.iter().filter(|l| **l == 1).count() as f64 / self.len() as f64
    }
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ScalerParams {
    pub fn fit(data: &Dataset) -> Result<Self, RegressionError> {
        let n = data.len();
        if n < 2 {
            return Err(RegressionError::TooFewRows { needed: 2, got: n });
        }
        let mut means = Vec::with_capacity(data.n_features());
        let mut stds = Vec::with_capacity(data.n_features());
        for j in 0..data.n_features() {
            let col = data.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let std = libm::sqrt(var);
            // relative test so columns of tiny magnitude are not rejected
            if !(std > 1e-12 * mean.abs().max(1.0)) {
                return Err(RegressionError::ConstantColumn(data.names[j].clone()));
            }
            means.push(mean);
            stds.push(std);
        }
        Ok(ScalerParams {
            names: data.names.clone(),
            means,
            stds,
        })
    }

    pub fn transform(&self, data: &Dataset) -> Dataset {
        Dataset {
            names: data.names.clone(),
            rows: data
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(j, v)| (v - self.means[j]) / self.stds[j])
                        .collect()
                })
                .collect(),
            labels: data.labels.clone(),
        }
    }
}

/// Standardizes every feature to mean 0 and population standard deviation 1.
/// Labels are untouched.
pub fn standard_scale(data: &Dataset) -> Result<(Dataset, ScalerParams), RegressionError> {
    let params = ScalerParams::fit(data)?;
    Ok((params.transform(data), params))
}
