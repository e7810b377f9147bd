use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Skewness constant `(1 − 2τ) / (τ(1 − τ))`.
pub fn theta1(tau: f64) -> f64 {
    (1.0 - 2.0 * tau) / (tau * (1.0 - tau))
}

/// Scale constant `√(2 / (τ(1 − τ)))`.
pub fn theta2(tau: f64) -> f64 {
    (2.0 / (tau * (1.0 - tau))).sqrt()
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("quantile level {tau} outside (0, 1)")))
    }
}

/// Per-series quantile levels together with the constants that make the
/// location of the asymmetric Laplace law equal to the τ-quantile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileConfig {
    tau: Vec<f64>,
    theta1: Vec<f64>,
    theta2: Vec<f64>,
}

impl QuantileConfig {
    pub fn new(tau: &[f64]) -> Result<Self> {
        if tau.is_empty() {
            return Err(Error::Domain("empty quantile vector".into()));
        }
        for &t in tau {
            check_tau(t)?;
        }
        Ok(Self {
            tau: tau.to_vec(),
            theta1: tau.iter().map(|&t| theta1(t)).collect(),
            theta2: tau.iter().map(|&t| theta2(t)).collect(),
        })
    }

    /// The same level for all `n` series.
    pub fn uniform(tau: f64, n: usize) -> Result<Self> {
        Self::new(&vec![tau; n])
    }

    pub fn dim(&self) -> usize {
        self.tau.len()
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn theta1(&self) -> &[f64] {
        &self.theta1
    }

    pub fn theta2(&self) -> &[f64] {
        &self.theta2
    }

    pub fn theta1_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.theta1)
    }

    pub fn theta2_diag(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.theta2))
    }

    /// `θ₂ Σ θ₂` for a scale matrix `Σ`.
    pub fn scaled(&self, sigma: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.theta2[i] * sigma[(i, j)] * self.theta2[j])
    }

    /// Skewness shift `D(Σ) θ₁`, with `D(Σ) = diag(√Σᵢᵢ)`.
    pub fn skew_shift(&self, sigma: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| sigma[(i, i)].sqrt() * self.theta1[i])
    }
}

/// Returns `make_quantile_config(τ)`.
pub fn make_quantile_config(tau: &[f64]) -> Result<QuantileConfig> {
    QuantileConfig::new(tau)
}
