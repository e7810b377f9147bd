use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Intercepts, lag matrices and innovation scale of an `n`-variate QVAR(p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QvarParams {
    pub b0: DVector<f64>,
    pub lags: Vec<DMatrix<f64>>,
    pub sigma: DMatrix<f64>,
}

impl QvarParams {
    pub fn new(b0: DVector<f64>, lags: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> Result<Self> {
        let n = b0.len();
        if lags.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::Dimension(format!("every lag matrix must be {n}x{n}")));
        }
        if sigma.nrows() != n || sigma.ncols() != n {
            return Err(Error::Dimension(format!("scale matrix must be {n}x{n}")));
        }
        linalg::cholesky(&sigma)?;
        Ok(Self { b0, lags, sigma })
    }

    pub fn n(&self) -> usize {
        self.b0.len()
    }

    pub fn p(&self) -> usize {
        self.lags.len()
    }

    /// `D(Σ) = diag(√Σ₁₁, …, √Σₙₙ)`.
    pub fn d_matrix(&self) -> DMatrix<f64> {
        d_of(&self.sigma)
    }

    /// Correlation matrix `Ψ = D⁻¹ Σ D⁻¹`.
    pub fn psi(&self) -> DMatrix<f64> {
        let d: Vec<f64> = (0..self.n()).map(|i| self.sigma[(i, i)].sqrt()).collect();
        DMatrix::from_fn(self.n(), self.n(), |i, j| self.sigma[(i, j)] / (d[i] * d[j]))
    }

    pub fn beta(&self) -> BetaVector {
        beta_pack(self)
    }

    /// `n × (1 + np)` coefficient block `[b₀ | B₁ | … | B_p]`.
    pub fn coefficient_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, 1 + n * self.p());
        m.set_column(0, &self.b0);
        for (j, b) in self.lags.iter().enumerate() {
            m.view_mut((0, 1 + j * n), (n, n)).copy_from(b);
        }
        m
    }

    /// Spectral radius of the companion matrix; `< 1` means stable dynamics.
    pub fn companion_spectral_radius(&self) -> f64 {
        let n = self.n();
        let p = self.p();
        if p == 0 {
            return 0.0;
        }
        let mut c = DMatrix::zeros(n * p, n * p);
        for (j, b) in self.lags.iter().enumerate() {
            c.view_mut((0, j * n), (n, n)).copy_from(b);
        }
        for i in n..n * p {
            c[(i, i - n)] = 1.0;
        }
        c.complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn d_of(sigma: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&sigma.diagonal().map(f64::sqrt))
}

/// Stacked coefficients `β = (b₀ᵀ, vec(B₁)ᵀ, …, vec(B_p)ᵀ)ᵀ`, with column-major `vec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaVector {
    pub values: DVector<f64>,
}

impl BetaVector {
    pub fn len_for(n: usize, p: usize) -> usize {
        n * (1 + n * p)
    }

    /// Reshape to the `n × (1 + np)` block `[b₀ | B₁ | … | B_p]`.
    pub fn coefficient_matrix(&self, n: usize) -> DMatrix<f64> {
        DMatrix::from_column_slice(n, self.values.len() / n, self.values.as_slice())
    }
}

pub fn beta_pack(params: &QvarParams) -> BetaVector {
    let m = params.coefficient_matrix();
    BetaVector {
        values: DVector::from_column_slice(m.as_slice()),
    }
}

/// Splits `β` into `(b₀, [B₁, …, B_p])`.
pub fn beta_unpack(beta: &BetaVector, n: usize, p: usize) -> Result<(DVector<f64>, Vec<DMatrix<f64>>)> {
    let expected = BetaVector::len_for(n, p);
    if beta.values.len() != expected {
        return Err(Error::Dimension(format!(
            "beta has length {}, expected n(1+np) = {expected}",
            beta.values.len()
        )));
    }
    let m = beta.coefficient_matrix(n);
    let b0 = m.column(0).into_owned();
    let lags = (0..p)
        .map(|j| m.view((0, 1 + j * n), (n, n)).into_owned())
        .collect();
    Ok((b0, lags))
}

/// Regressor `z_t = (1, y_{t−1}ᵀ, …, y_{t−p}ᵀ)ᵀ` for row `t` of a `T × n` data matrix.
pub fn regressor(y: &DMatrix<f64>, t: usize, p: usize) -> DVector<f64> {
    let n = y.ncols();
    let mut z = DVector::zeros(1 + n * p);
    z[0] = 1.0;
    for j in 1..=p {
        for i in 0..n {
            z[1 + (j - 1) * n + i] = y[(t - j, i)];
        }
    }
    z
}

/// Design matrix `X_t = z_tᵀ ⊗ I_n = (I_n, y_{t−1}ᵀ ⊗ I_n, …, y_{t−p}ᵀ ⊗ I_n)`.
pub fn design_matrix(y: &DMatrix<f64>, t: usize, p: usize) -> DMatrix<f64> {
    let n = y.ncols();
    let z = regressor(y, t, p);
    let mut x = DMatrix::zeros(n, z.len() * n);
    for (k, zk) in z.iter().enumerate() {
        for i in 0..n {
            x[(i, k * n + i)] = *zk;
        }
    }
    x
}

/// Conditional location `X_t β = b₀ + Σ_j B_j y_{t−j}`.
pub fn location(coefs: &DMatrix<f64>, y: &DMatrix<f64>, t: usize, p: usize) -> DVector<f64> {
    coefs * regressor(y, t, p)
}
