use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{location, BetaVector, QuantileConfig};

/// Complete-data log-likelihood of the Gaussian mixture representation:
///
/// `Σ_{t=p}^{T−1} [ ln N(y_t | X_tβ + D(Σ)θ₁ w_t, w_t θ₂Σθ₂) − w_t ]`
///
/// `y` is `T × n` (rows are months), `w` holds one weight per likelihood
/// term (`T − p` entries).
pub fn complete_data_loglik(
    y: &DMatrix<f64>,
    w: &[f64],
    beta: &BetaVector,
    sigma: &DMatrix<f64>,
    q: &QuantileConfig,
) -> Result<f64> {
    let n = y.ncols();
    let t_total = y.nrows();
    if q.dim() != n || sigma.nrows() != n {
        return Err(Error::Dimension(format!(
            "data have {n} series, quantiles {}, scale {}",
            q.dim(),
            sigma.nrows()
        )));
    }
    let k = beta.values.len() / n;
    if !beta.values.len().is_multiple_of(n) || !(k - 1).is_multiple_of(n) {
        return Err(Error::Dimension(format!("beta of length {} for n = {n}", beta.values.len())));
    }
    let p = (k - 1) / n;
    if w.len() + p != t_total {
        return Err(Error::Dimension(format!(
            "{} mixing weights for {} likelihood terms",
            w.len(),
            t_total.saturating_sub(p)
        )));
    }
    if let Some(bad) = w.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::Domain(format!("mixing weight {bad} must be positive")));
    }
    let scaled = q.scaled(sigma);
    let chol = linalg::cholesky(&scaled)?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let shift = q.skew_shift(sigma);
    let coefs = beta.coefficient_matrix(n);
    let nf = n as f64;

    let mut total = 0.0;
    for (idx, &wt) in w.iter().enumerate() {
        let t = idx + p;
        let resid = y.row(t).transpose() - location(&coefs, y, t, p) - &shift * wt;
        let quad = resid.dot(&chol.solve(&resid)) / wt;
        total += -0.5 * (nf * (2.0 * PI).ln() + nf * wt.ln() + log_det + quad) - wt;
    }
    Ok(total)
}
