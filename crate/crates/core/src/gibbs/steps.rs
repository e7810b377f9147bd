use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dist::{gig_sample, GigParams, SliceTuner};
use crate::error::{Error, Result};
use crate::gibbs::PriorSpec;
use crate::linalg;
use crate::model::{regressor, BetaVector, QuantileConfig};

const W_FLOOR: f64 = 1e-12;

fn check_inputs(y: &DMatrix<f64>, p: usize, w: &[f64], sigma: &DMatrix<f64>, q: &QuantileConfig) -> Result<()> {
    let n = y.ncols();
    if q.dim() != n || sigma.shape() != (n, n) {
        return Err(Error::Dimension(format!("data have {n} series, quantiles {}, scale {}", q.dim(), sigma.nrows())));
    }
    if w.len() + p != y.nrows() {
        return Err(Error::Dimension(format!("{} mixing weights for {} equations", w.len(), y.nrows().saturating_sub(p))));
    }
    Ok(())
}

/// Mean and Cholesky factor of the posterior precision of `β` given the
/// complete data, `w` and `Σ`.
pub fn beta_conditional(
    y: &DMatrix<f64>,
    w: &[f64],
    sigma: &DMatrix<f64>,
    q: &QuantileConfig,
    prior: &PriorSpec,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (n, p) = (prior.n(), prior.p());
    check_inputs(y, p, w, sigma, q)?;
    let m = 1 + n * p;
    let s_inv = linalg::symmetrize(&linalg::cholesky(&q.scaled(sigma))?.inverse());
    let delta = q.skew_shift(sigma);
    let mut zz = DMatrix::zeros(m, m);
    let mut ez = DMatrix::zeros(n, m);
    for (r, wt) in w.iter().enumerate() {
        let t = r + p;
        let z = regressor(y, t, p);
        zz += &z * z.transpose() / *wt;
        let e = y.row(t).transpose() - &delta * *wt;
        ez += e * z.transpose() / *wt;
    }
    // Σ_t X_tᵀ S_t⁻¹ X_t = (Σ z zᵀ/w) ⊗ S⁻¹ and Σ_t X_tᵀ S_t⁻¹ ẽ_t = vec(S⁻¹ Σ ẽ zᵀ/w)
    let precision = linalg::symmetrize(&(prior.beta_precision() + zz.kronecker(&s_inv)));
    let data_rhs = &s_inv * ez;
    let rhs = prior.beta_precision() * prior.beta_mean() + DVector::from_column_slice(data_rhs.as_slice());
    let chol = linalg::cholesky(&precision)?;
    let mean = chol.solve(&rhs);
    Ok((mean, chol.l()))
}

pub fn draw_beta<R: Rng + ?Sized>(
    y: &DMatrix<f64>,
    w: &[f64],
    sigma: &DMatrix<f64>,
    q: &QuantileConfig,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<BetaVector> {
    let (mean, l) = beta_conditional(y, w, sigma, q, prior)?;
    let z = DVector::from_fn(mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let dev = l
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or(Error::NotPositiveDefinite { minor: 0 })?;
    Ok(BetaVector { values: mean + dev })
}

/// One GIG draw per equation, floored at `1e−12`.
pub fn draw_w<R: Rng + ?Sized>(
    y: &DMatrix<f64>,
    beta: &BetaVector,
    sigma: &DMatrix<f64>,
    q: &QuantileConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = y.ncols();
    let m = beta.values.len() / n.max(1);
    if n == 0 || !beta.values.len().is_multiple_of(n) || !(m - 1).is_multiple_of(n) {
        return Err(Error::Dimension(format!("beta of length {} for n = {n}", beta.values.len())));
    }
    let p = (m - 1) / n;
    check_inputs(y, p, &vec![1.0; y.nrows().saturating_sub(p)], sigma, q)?;
    let coefs = beta.coefficient_matrix(n);
    let s_inv = linalg::symmetrize(&linalg::cholesky(&q.scaled(sigma))?.inverse());
    let delta = q.skew_shift(sigma);
    let p_w = 1.0 - n as f64 / 2.0;
    let a_w = 2.0 + (delta.transpose() * &s_inv * &delta)[0];
    let mut out = Vec::with_capacity(y.nrows() - p);
    for t in p..y.nrows() {
        let u = y.row(t).transpose() - &coefs * regressor(y, t, p);
        let mut b_w = (u.transpose() * &s_inv * &u)[0].max(0.0);
        if p_w <= 0.0 && b_w < W_FLOOR {
            log::debug!("flooring GIG b at month {t}: residual is numerically zero");
            b_w = W_FLOOR;
        }
        let params = GigParams::new(p_w, a_w, b_w)?;
        out.push(gig_sample(&params, rng).max(W_FLOOR));
    }
    Ok(out)
}

/// Log full conditional of `Σ` in log-Cholesky coordinates `η`, built from
/// sufficient statistics of the residuals `u_t = y_t − X_tβ`:
/// `A = Σ u uᵀ/w`, `s = Σ u`, `W = Σ w`.
#[derive(Debug, Clone)]
pub struct SigmaTarget {
    n: usize,
    equations: f64,
    a: DMatrix<f64>,
    s: DVector<f64>,
    w_sum: f64,
    prior_df: f64,
    prior_scale: DMatrix<f64>,
    theta1: DVector<f64>,
    theta2_inv: DVector<f64>,
}

impl SigmaTarget {
    pub fn new(
        y: &DMatrix<f64>,
        beta: &BetaVector,
        w: &[f64],
        q: &QuantileConfig,
        prior: &PriorSpec,
    ) -> Result<Self> {
        let (n, p) = (prior.n(), prior.p());
        if q.dim() != n || y.ncols() != n || w.len() + p != y.nrows() {
            return Err(Error::Dimension("inconsistent inputs to the scale-matrix step".into()));
        }
        let coefs = beta.coefficient_matrix(n);
        let mut a = DMatrix::zeros(n, n);
        let mut s = DVector::zeros(n);
        for (r, wt) in w.iter().enumerate() {
            let t = r + p;
            let u = y.row(t).transpose() - &coefs * regressor(y, t, p);
            a += &u * u.transpose() / *wt;
            s += u;
        }
        Ok(Self {
            n,
            equations: w.len() as f64,
            a,
            s,
            w_sum: w.iter().sum(),
            prior_df: prior.sigma_df(),
            prior_scale: prior.sigma_scale().clone(),
            theta1: q.theta1_vec(),
            theta2_inv: DVector::from_iterator(n, q.theta2().iter().map(|t| 1.0 / t)),
        })
    }

    pub fn dim(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// Log target including the log-Jacobian `Σ_i (n − i + 2) η_i` (1-based `i`).
    pub fn log_density(&self, eta: &[f64]) -> f64 {
        let n = self.n;
        let l = unpack_log_cholesky(eta, n);
        if l.iter().any(|v| !v.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let log_det: f64 = 2.0 * (0..n).map(|i| eta[i * (i + 3) / 2]).sum::<f64>();
        let Some(l_inv) = l.clone().solve_lower_triangular(&DMatrix::identity(n, n)) else {
            return f64::NEG_INFINITY;
        };
        let sigma_inv = l_inv.transpose() * &l_inv;
        let sigma = &l * l.transpose();
        let delta = DVector::from_fn(n, |i, _| sigma[(i, i)].sqrt() * self.theta1[i]);
        // S⁻¹ = θ₂⁻¹ Σ⁻¹ θ₂⁻¹
        let s_inv = DMatrix::from_fn(n, n, |i, j| self.theta2_inv[i] * sigma_inv[(i, j)] * self.theta2_inv[j]);
        let m = &self.a - &self.s * delta.transpose() - &delta * self.s.transpose() + &delta * delta.transpose() * self.w_sum;
        let quad = (s_inv.component_mul(&m)).sum();
        let prior_tr = (self.prior_scale.component_mul(&sigma_inv)).sum();
        let jac: f64 = (0..n).map(|i| (n - i + 1) as f64 * eta[i * (i + 3) / 2]).sum();
        let v = -0.5 * (self.prior_df + n as f64 + 1.0) * log_det - 0.5 * prior_tr - 0.5 * self.equations * log_det
            - 0.5 * quad
            + jac;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

/// Row-wise lower triangle of the Cholesky factor, diagonal on the log scale.
pub fn pack_log_cholesky(sigma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let l = linalg::cholesky(sigma)?.l();
    let n = sigma.nrows();
    let mut eta = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..i {
            eta.push(l[(i, j)]);
        }
        eta.push(l[(i, i)].ln());
    }
    Ok(eta)
}

pub fn unpack_log_cholesky(eta: &[f64], n: usize) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..i {
            l[(i, j)] = eta[k];
            k += 1;
        }
        l[(i, i)] = eta[k].exp();
        k += 1;
    }
    l
}

/// `sweeps` slice-sampling sweeps over the log-Cholesky coordinates of `Σ`.
#[allow(clippy::too_many_arguments)]
pub fn draw_sigma<R: Rng + ?Sized>(
    y: &DMatrix<f64>,
    beta: &BetaVector,
    w: &[f64],
    q: &QuantileConfig,
    prior: &PriorSpec,
    current: &DMatrix<f64>,
    tuner: &mut SliceTuner,
    sweeps: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let target = SigmaTarget::new(y, beta, w, q, prior)?;
    let mut eta = pack_log_cholesky(current)?;
    for _ in 0..sweeps.max(1) {
        eta = tuner
            .step(|x| target.log_density(x), &eta, rng)
            .map_err(|e| match e {
                Error::TargetEvaluation(_) => Error::TargetEvaluation(format!("scale matrix near {current}")),
                other => other,
            })?;
    }
    let l = unpack_log_cholesky(&eta, prior.n());
    Ok(linalg::symmetrize(&(&l * l.transpose())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{inverse_wishart_sample, DEFAULT_SLICE_WIDTH};
    use crate::gibbs::default_prior_from_data;
    use crate::model::{complete_data_loglik, design_matrix};
    use crate::testutil::random_params;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn data(n: usize, t_len: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(t_len, n, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn gls_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (n, p) = (2, 1);
        let y = data(n, 40, 1);
        let params = random_params(n, p, &mut rng);
        let q = QuantileConfig::uniform(0.5, n).unwrap();
        let prior = default_prior_from_data(&y, p).unwrap().with_beta_variance(1e8).unwrap();
        let w = vec![1.0; 39];
        let (mean, _) = beta_conditional(&y, &w, &params.sigma, &q, &prior).unwrap();
        // GLS on the stacked design
        let s_inv = q.scaled(&params.sigma).try_inverse().unwrap();
        let nb = mean.len();
        let (mut xtx, mut xty) = (DMatrix::zeros(nb, nb), DVector::zeros(nb));
        for t in 1..40 {
            let x = design_matrix(&y, t, p);
            xtx += x.transpose() * &s_inv * &x;
            xty += x.transpose() * &s_inv * y.row(t).transpose();
        }
        let gls = xtx.try_inverse().unwrap() * xty;
        let rel = (&mean - &gls).amax() / gls.amax();
        assert!(rel < 1e-6, "relative gap {rel}");
    }

    #[test]
    fn no_data_returns_the_prior() {
        let (n, p) = (1, 1);
        let prior = PriorSpec::new(
            n,
            p,
            DVector::from_vec(vec![0.5, -0.2]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]),
            3.0,
            DMatrix::identity(1, 1),
        )
        .unwrap();
        let y = DMatrix::from_element(1, 1, 0.0);
        let q = QuantileConfig::uniform(0.3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 10_000;
        let mut sum = DVector::zeros(2);
        let mut cross = DMatrix::zeros(2, 2);
        for _ in 0..draws {
            let b = draw_beta(&y, &[], &DMatrix::identity(1, 1), &q, &prior, &mut rng).unwrap().values;
            sum += &b;
            cross += &b * b.transpose();
        }
        let mean = sum / draws as f64;
        let cov = cross / draws as f64 - &mean * mean.transpose();
        assert!((mean[0] - 0.5).abs() < 4.0 * (2.0f64 / draws as f64).sqrt());
        assert!((mean[1] + 0.2).abs() < 4.0 * (0.5f64 / draws as f64).sqrt());
        assert!((&cov - prior.beta_cov()).amax() < 0.08);
    }

    #[test]
    fn posterior_spread_shrinks_with_sample_size() {
        let q = QuantileConfig::uniform(0.5, 2).unwrap();
        let y = data(2, 400, 9);
        let mut last = f64::INFINITY;
        for t_len in [25, 50, 100, 200, 400] {
            let yt = y.rows(0, t_len).into_owned();
            let prior = default_prior_from_data(&y, 1).unwrap();
            let (_, l) = beta_conditional(&yt, &vec![1.0; t_len - 1], &DMatrix::identity(2, 2), &q, &prior).unwrap();
            let cov = (&l * l.transpose()).try_inverse().unwrap();
            assert!(cov.trace() < last);
            last = cov.trace();
        }
    }

    #[test]
    fn w_parameters_at_the_median() {
        // at τ = 0.5 the skew term vanishes, leaving a = 2 and p = 1 − n/2
        let y = DMatrix::from_row_slice(2, 1, &[0.0, 0.0]);
        let beta = BetaVector { values: DVector::from_vec(vec![0.0, 0.0]) };
        let q = QuantileConfig::uniform(0.5, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // u = 0, n = 1: GIG(1/2, 2, 0) = Gamma(1/2, scale 1)
        let draws = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let w = draw_w(&y, &beta, &DMatrix::identity(1, 1), &q, &mut rng).unwrap()[0];
            s += w;
            s2 += w * w;
        }
        let mean = s / draws as f64;
        let var = s2 / draws as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 4.0 * (0.5f64 / draws as f64).sqrt());
        assert!((var - 0.5).abs() < 0.02);
    }

    #[test]
    fn w_draws_match_gig_by_ks() {
        let y = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.8, -0.4]);
        let beta = BetaVector { values: DVector::zeros(6) };
        let q = QuantileConfig::new(&[0.2, 0.6]).unwrap();
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        let s_inv = q.scaled(&sigma).try_inverse().unwrap();
        let delta = q.skew_shift(&sigma);
        let u = DVector::from_vec(vec![0.8, -0.4]);
        let (pw, aw, bw) = (0.0, 2.0 + (delta.transpose() * &s_inv * &delta)[0], (u.transpose() * &s_inv * &u)[0]);
        // CDF of the GIG by quadrature of the unnormalised density
        let dens = |x: f64| x.powf(pw - 1.0) * (-(aw * x + bw / x) / 2.0).exp();
        let grid: Vec<f64> = (1..=20_000).map(|k| k as f64 * 1e-3).collect();
        let mut cdf = vec![0.0; grid.len()];
        let mut acc = 0.0;
        let mut prev = (0.0, 0.0);
        for (k, &x) in grid.iter().enumerate() {
            let d = dens(x);
            acc += 0.5 * (d + prev.1) * (x - prev.0);
            prev = (x, d);
            cdf[k] = acc;
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut draws: Vec<f64> = (0..4000).map(|_| draw_w(&y, &beta, &sigma, &q, &mut rng).unwrap()[0]).collect();
        draws.sort_by(f64::total_cmp);
        let mut d_max: f64 = 0.0;
        for (k, x) in draws.iter().enumerate() {
            let idx = ((x / 1e-3) as usize).clamp(1, grid.len()) - 1;
            let f = cdf[idx] / total;
            d_max = d_max.max((f - k as f64 / 4000.0).abs()).max((f - (k + 1) as f64 / 4000.0).abs());
        }
        // 1% critical value 1.63/√N
        assert!(d_max < 1.63 / 4000f64.sqrt(), "KS distance {d_max}");
    }

    #[test]
    fn log_cholesky_round_trip() {
        let s = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.1, 0.5, 1.0, -0.2, 0.1, -0.2, 3.0]);
        let eta = pack_log_cholesky(&s).unwrap();
        let l = unpack_log_cholesky(&eta, 3);
        assert!((&l * l.transpose() - s).amax() < 1e-12);
    }

    #[test]
    fn sigma_target_matches_complete_data_likelihood() {
        // differences in Σ of the target equal differences of
        // log prior + complete-data log-likelihood + log-Jacobian
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (n, p) = (2, 1);
        let y = data(n, 30, 5);
        let q = QuantileConfig::new(&[0.1, 0.7]).unwrap();
        let prior = default_prior_from_data(&y, p).unwrap();
        let beta = BetaVector { values: prior.beta_mean().clone() };
        let w: Vec<f64> = (0..29).map(|_| rng.random_range(0.2..2.0)).collect();
        let target = SigmaTarget::new(&y, &beta, &w, &q, &prior).unwrap();
        let full = |s: &DMatrix<f64>| {
            let eta = pack_log_cholesky(s).unwrap();
            let inv = s.clone().try_inverse().unwrap();
            let det = s.determinant();
            let prior_term = -0.5 * (prior.sigma_df() + n as f64 + 1.0) * det.ln() - 0.5 * (prior.sigma_scale() * inv).trace();
            let jac = n as f64 * 2f64.ln() + n as f64 * eta[0] + eta[2] + eta[0] + eta[2];
            (complete_data_loglik(&y, &w, &beta, s, &q).unwrap() + prior_term + jac, target.log_density(&eta))
        };
        let s1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]);
        let s2 = DMatrix::from_row_slice(2, 2, &[2.0, -0.4, -0.4, 1.5]);
        let (f1, g1) = full(&s1);
        let (f2, g2) = full(&s2);
        assert!(((f1 - f2) - (g1 - g2)).abs() < 1e-9, "{} vs {}", f1 - f2, g1 - g2);
    }

    #[test]
    fn scalar_sigma_matches_quadrature() {
        // n = 1, τ = 0.5, w ≡ 1: the conditional of σ² is inverse gamma
        let y = data(1, 61, 13) * 1.5;
        let q = QuantileConfig::uniform(0.5, 1).unwrap();
        let prior = PriorSpec::new(1, 1, DVector::zeros(2), DMatrix::identity(2, 2), 3.0, DMatrix::identity(1, 1)).unwrap();
        let beta = BetaVector { values: DVector::from_vec(vec![0.1, 0.2]) };
        let w = vec![1.0; 60];
        let target = SigmaTarget::new(&y, &beta, &w, &q, &prior).unwrap();
        // quadrature of the density in σ² (η = ln σ / the target includes the Jacobian)
        let log_dens = |s2: f64| target.log_density(&[0.5 * s2.ln()]) + (0.5 / s2).ln();
        let peak = (1..4000).map(|k| log_dens(k as f64 * 1e-3)).fold(f64::NEG_INFINITY, f64::max);
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for k in 1..40_000 {
            let s2 = k as f64 * 1e-4;
            let d = (log_dens(s2) - peak).exp();
            z += d;
            m1 += d * s2;
            m2 += d * s2 * s2;
        }
        let (mean, var) = (m1 / z, m2 / z - (m1 / z).powi(2));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut tuner = SliceTuner::with_default(1);
        let mut s = DMatrix::identity(1, 1);
        let (mut a1, mut a2) = (0.0, 0.0);
        let draws = 40_000;
        for k in 0..draws + 1000 {
            if k == 1000 {
                tuner.freeze();
            }
            s = draw_sigma(&y, &beta, &w, &q, &prior, &s, &mut tuner, 1, &mut rng).unwrap();
            if k >= 1000 {
                a1 += s[(0, 0)];
                a2 += s[(0, 0)].powi(2);
            }
        }
        let (smean, svar) = (a1 / draws as f64, a2 / draws as f64 - (a1 / draws as f64).powi(2));
        assert!((smean / mean - 1.0).abs() < 0.02, "{smean} vs {mean}");
        assert!((svar / var - 1.0).abs() < 0.1, "{svar} vs {var}");
        assert!(DEFAULT_SLICE_WIDTH > 0.0);
    }

    #[test]
    fn empty_likelihood_recovers_the_inverse_wishart_prior() {
        let n = 2;
        let scale = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        let prior = PriorSpec::new(n, 1, DVector::zeros(6), DMatrix::identity(6, 6), 7.0, scale.clone()).unwrap();
        let q = QuantileConfig::new(&[0.3, 0.5]).unwrap();
        let y = DMatrix::zeros(1, 2);
        let beta = BetaVector { values: DVector::zeros(6) };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut tuner = SliceTuner::with_default(3);
        let mut s = DMatrix::identity(2, 2);
        let mut sum = DMatrix::zeros(2, 2);
        let draws = 40_000;
        for k in 0..draws + 500 {
            if k == 500 {
                tuner.freeze();
            }
            s = draw_sigma(&y, &beta, &[], &q, &prior, &s, &mut tuner, 1, &mut rng).unwrap();
            assert!(linalg::cholesky(&s).is_ok());
            if k >= 500 {
                sum += &s;
            }
        }
        let slice_mean = sum / draws as f64;
        let mut iw = DMatrix::zeros(2, 2);
        for _ in 0..draws {
            iw += inverse_wishart_sample(7.0, &scale, &mut rng).unwrap();
        }
        let iw_mean = iw / draws as f64;
        let exact = &scale / (7.0 - 3.0);
        assert!((&iw_mean - &exact).amax() < 0.03);
        assert!((&slice_mean - &exact).amax() < 0.05, "{slice_mean} vs {exact}");
    }
}
