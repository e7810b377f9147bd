use nalgebra::{DMatrix, DVector};

use crate::data::MixedFrequencyPanel;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{regressor, BetaVector};
use crate::state_space::naive_fill;

/// Gaussian prior on `β` and inverse-Wishart prior on `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    n: usize,
    p: usize,
    beta_mean: DVector<f64>,
    beta_cov: DMatrix<f64>,
    beta_precision: DMatrix<f64>,
    sigma_df: f64,
    sigma_scale: DMatrix<f64>,
}

impl PriorSpec {
    pub fn new(
        n: usize,
        p: usize,
        beta_mean: DVector<f64>,
        beta_cov: DMatrix<f64>,
        sigma_df: f64,
        sigma_scale: DMatrix<f64>,
    ) -> Result<Self> {
        let nb = BetaVector::len_for(n, p);
        if beta_mean.len() != nb || beta_cov.shape() != (nb, nb) {
            return Err(Error::Dimension(format!("beta prior must have dimension n(1+np) = {nb}")));
        }
        if sigma_scale.shape() != (n, n) {
            return Err(Error::Dimension(format!("sigma prior scale must be {n}x{n}")));
        }
        if !(sigma_df > n as f64 - 1.0) {
            return Err(Error::Domain(format!("sigma prior degrees of freedom {sigma_df} must exceed {}", n as f64 - 1.0)));
        }
        linalg::cholesky(&sigma_scale)?;
        let beta_precision = linalg::symmetrize(&linalg::cholesky(&beta_cov)?.inverse());
        Ok(Self { n, p, beta_mean, beta_cov, beta_precision, sigma_df, sigma_scale })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn beta_mean(&self) -> &DVector<f64> {
        &self.beta_mean
    }

    pub fn beta_cov(&self) -> &DMatrix<f64> {
        &self.beta_cov
    }

    pub fn beta_precision(&self) -> &DMatrix<f64> {
        &self.beta_precision
    }

    pub fn sigma_df(&self) -> f64 {
        self.sigma_df
    }

    pub fn sigma_scale(&self) -> &DMatrix<f64> {
        &self.sigma_scale
    }

    /// `Ω_β = v · I`.
    pub fn with_beta_variance(self, v: f64) -> Result<Self> {
        let nb = self.beta_mean.len();
        Self::new(self.n, self.p, self.beta_mean, DMatrix::identity(nb, nb) * v, self.sigma_df, self.sigma_scale)
    }

    pub fn with_sigma(self, df: f64, scale: DMatrix<f64>) -> Result<Self> {
        Self::new(self.n, self.p, self.beta_mean, self.beta_cov, df, scale)
    }

    /// `E[Σ] = Φ₀/(ν₀ − n − 1)` when it exists, else `Φ₀`.
    pub fn sigma_start(&self) -> DMatrix<f64> {
        let excess = self.sigma_df - self.n as f64 - 1.0;
        if excess > 0.0 {
            &self.sigma_scale / excess
        } else {
            self.sigma_scale.clone()
        }
    }
}

/// Equation-wise least squares on the naively filled panel for the prior
/// mean, `Ω_β = 100·I`, `ν₀ = n + 2`, `Φ₀ = I`.
pub fn default_prior(panel: &MixedFrequencyPanel, p: usize) -> Result<PriorSpec> {
    let n = panel.n();
    let y = DMatrix::from_row_slice(panel.t_len(), n, naive_fill(panel).as_slice());
    default_prior_from_data(&y, p)
}

/// [`default_prior`] for a complete `T × n` data matrix.
pub fn default_prior_from_data(y: &DMatrix<f64>, p: usize) -> Result<PriorSpec> {
    let (t_len, n) = y.shape();
    let m = 1 + n * p;
    if t_len < p + m {
        return Err(Error::InsufficientData(format!(
            "{} usable months for {m} regressors per equation",
            t_len.saturating_sub(p)
        )));
    }
    let mut zz = DMatrix::zeros(m, m);
    let mut yz = DMatrix::zeros(n, m);
    for t in p..t_len {
        let z = regressor(y, t, p);
        zz += &z * z.transpose();
        yz += y.row(t).transpose() * z.transpose();
    }
    let chol = linalg::cholesky(&zz)
        .map_err(|_| Error::InsufficientData("regressors are collinear on the filled data".into()))?;
    // A = (Σ y zᵀ)(Σ z zᵀ)⁻¹, solved as Aᵀ = (Σ z zᵀ)⁻¹ (Σ z yᵀ)
    let a = chol.solve(&yz.transpose()).transpose();
    let nb = n * m;
    PriorSpec::new(
        n,
        p,
        DVector::from_column_slice(a.as_slice()),
        DMatrix::identity(nb, nb) * 100.0,
        n as f64 + 2.0,
        DMatrix::identity(n, n),
    )
}
