use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, BandedSymmetric};
use crate::model::{QuantileConfig, QvarParams};

/// `𝐁 𝐘 = 𝐛 + ζ` with `ζ ~ N(0, 𝚺)`, `𝚺 = blockdiag(w_t θ₂Σθ₂)`.
///
/// `𝐁` has one block row per equation `t = p..T` and acts on all `T·n`
/// cells, ordered `t·n + i`. Block row `t` holds `I` at column block `t` and
/// `−B_j` at `t − j`.
#[derive(Debug, Clone)]
pub struct StackedSystem {
    n: usize,
    p: usize,
    t_len: usize,
    // C_0 = I, C_j = -B_j
    coef_blocks: Vec<DMatrix<f64>>,
    bigb: DVector<f64>,
    w: Vec<f64>,
    scale: DMatrix<f64>,
    scale_inv: DMatrix<f64>,
}

pub fn build_stacked_system(params: &QvarParams, q: &QuantileConfig, w: &[f64]) -> Result<StackedSystem> {
    let n = params.n();
    let p = params.p();
    if q.dim() != n {
        return Err(Error::Dimension(format!("{} quantile levels for {n} series", q.dim())));
    }
    if w.is_empty() {
        return Err(Error::Dimension("no equations: w is empty".into()));
    }
    if let Some(bad) = w.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("mixing weight {bad} is not positive")));
    }
    let mut coef_blocks = Vec::with_capacity(p + 1);
    coef_blocks.push(DMatrix::identity(n, n));
    coef_blocks.extend(params.lags.iter().map(|b| -b));
    let delta = q.skew_shift(&params.sigma);
    let mut bigb = DVector::zeros(w.len() * n);
    for (r, wt) in w.iter().enumerate() {
        bigb.rows_mut(r * n, n).copy_from(&(&params.b0 + &delta * *wt));
    }
    let scale = q.scaled(&params.sigma);
    let scale_inv = linalg::cholesky(&scale)?.inverse();
    Ok(StackedSystem {
        n,
        p,
        t_len: w.len() + p,
        coef_blocks,
        bigb,
        w: w.to_vec(),
        scale,
        scale_inv: linalg::symmetrize(&scale_inv),
    })
}

impl StackedSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn cells(&self) -> usize {
        self.t_len * self.n
    }

    pub fn bigb(&self) -> &DVector<f64> {
        &self.bigb
    }

    /// Half-bandwidth of `𝐁ᵀ𝚺⁻¹𝐁`.
    pub fn bandwidth(&self) -> usize {
        self.n * (self.p + 1) - 1
    }

    /// Covariance block of equation `r` (time `p + r`).
    pub fn sigma_block(&self, r: usize) -> DMatrix<f64> {
        &self.scale * self.w[r]
    }

    pub fn big_b_dense(&self) -> DMatrix<f64> {
        let (n, p) = (self.n, self.p);
        let mut m = DMatrix::zeros(self.w.len() * n, self.cells());
        for r in 0..self.w.len() {
            let t = r + p;
            for (j, c) in self.coef_blocks.iter().enumerate() {
                m.view_mut((r * n, (t - j) * n), (n, n)).copy_from(c);
            }
        }
        m
    }

    pub fn big_sigma_dense(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(self.w.len() * n, self.w.len() * n);
        for r in 0..self.w.len() {
            m.view_mut((r * n, r * n), (n, n)).copy_from(&self.sigma_block(r));
        }
        m
    }

    fn check_len(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.cells() {
            return Err(Error::Dimension(format!("vector of length {} for {} cells", y.len(), self.cells())));
        }
        Ok(())
    }

    /// `𝐁 𝐘`.
    pub fn apply(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(y)?;
        let n = self.n;
        let mut out = DVector::zeros(self.w.len() * n);
        for r in 0..self.w.len() {
            let t = r + self.p;
            let mut acc = out.rows_mut(r * n, n);
            for (j, c) in self.coef_blocks.iter().enumerate() {
                acc.gemv(1.0, c, &y.rows((t - j) * n, n), 1.0);
            }
        }
        Ok(out)
    }

    /// `𝐁 𝐘 − 𝐛`: per-equation residuals `y_t − X_tβ − δ w_t`.
    pub fn residuals(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.apply(y)? - &self.bigb)
    }

    /// `𝐁ᵀ 𝚺⁻¹ v` for a vector over equations.
    pub fn weighted_transpose(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n;
        if v.len() != self.w.len() * n {
            return Err(Error::Dimension(format!("vector of length {} for {} equations", v.len(), self.w.len())));
        }
        let mut out = DVector::zeros(self.cells());
        for r in 0..self.w.len() {
            let t = r + self.p;
            let pv = &self.scale_inv * v.rows(r * n, n) / self.w[r];
            for (j, c) in self.coef_blocks.iter().enumerate() {
                let mut dst = out.rows_mut((t - j) * n, n);
                dst.gemv_tr(1.0, c, &pv, 1.0);
            }
        }
        Ok(out)
    }

    /// `𝐁ᵀ 𝚺⁻¹ 𝐁` in banded storage over all cells.
    pub fn precision(&self) -> BandedSymmetric {
        let n = self.n;
        let mut k = BandedSymmetric::zeros(self.cells(), self.bandwidth());
        // C_jᵀ S⁻¹ C_k is shared by every equation up to the 1/w_t factor
        let blocks: Vec<Vec<DMatrix<f64>>> = self
            .coef_blocks
            .iter()
            .map(|cj| self.coef_blocks.iter().map(|ck| cj.transpose() * &self.scale_inv * ck).collect())
            .collect();
        for (r, wt) in self.w.iter().enumerate() {
            let t = r + self.p;
            for (j, row) in blocks.iter().enumerate() {
                for (l, blk) in row.iter().enumerate().take(j + 1) {
                    // block (t-j, t-l) with t-j <= t-l; store its lower triangle
                    let (rb, cb) = ((t - l) * n, (t - j) * n);
                    for a in 0..n {
                        for b in 0..n {
                            let (gi, gj) = (rb + a, cb + b);
                            if gi >= gj {
                                k.add(gi, gj, blk[(b, a)] / wt);
                            }
                        }
                    }
                }
            }
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{beta_pack, design_matrix};
    use crate::testutil::random_params;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_lag_pattern() {
        let params = QvarParams::new(DVector::from_element(1, 0.3), vec![DMatrix::zeros(1, 1)], DMatrix::identity(1, 1)).unwrap();
        let q = QuantileConfig::uniform(0.5, 1).unwrap();
        let sys = build_stacked_system(&params, &q, &[1.0, 2.0, 0.5]).unwrap();
        let b = sys.big_b_dense();
        let mut expected = DMatrix::zeros(3, 4);
        expected.view_mut((0, 1), (3, 3)).fill_with_identity();
        assert_eq!(b, expected);
        assert_eq!(sys.bigb(), &DVector::from_element(3, 0.3));
    }

    #[test]
    fn residuals_match_direct_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (n, p, t_len) = (2, 2, 8);
            let params = random_params(n, p, &mut rng);
            let q = QuantileConfig::new(&[0.1, 0.7]).unwrap();
            let w: Vec<f64> = (0..t_len - p).map(|_| rng.random_range(0.1..3.0)).collect();
            let sys = build_stacked_system(&params, &q, &w).unwrap();
            let y = DVector::from_fn(t_len * n, |_, _| rng.random_range(-2.0..2.0));
            let ymat = DMatrix::from_row_slice(t_len, n, y.as_slice());
            let beta = beta_pack(&params);
            let delta = q.skew_shift(&params.sigma);
            let resid = sys.residuals(&y).unwrap();
            let dense = &sys.big_b_dense() * &y - sys.bigb();
            for (r, wt) in w.iter().enumerate() {
                let t = r + p;
                let x = design_matrix(&ymat, t, p);
                let direct = ymat.row(t).transpose() - &x * &beta.values - &delta * *wt;
                assert!((resid.rows(r * n, n) - &direct).amax() < 1e-10);
                assert!((dense.rows(r * n, n) - &direct).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn median_intercept_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = random_params(3, 1, &mut rng);
        let q = QuantileConfig::uniform(0.5, 3).unwrap();
        let sys = build_stacked_system(&params, &q, &[0.2, 5.0, 1.0, 9.0]).unwrap();
        for r in 0..4 {
            assert_eq!(sys.bigb().rows(r * 3, 3), params.b0.rows(0, 3));
        }
    }

    #[test]
    fn banded_precision_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n, p, t_len) = (3, 2, 9);
        let params = random_params(n, p, &mut rng);
        let q = QuantileConfig::new(&[0.2, 0.5, 0.9]).unwrap();
        let w: Vec<f64> = (0..t_len - p).map(|_| rng.random_range(0.1..3.0)).collect();
        let sys = build_stacked_system(&params, &q, &w).unwrap();
        let b = sys.big_b_dense();
        let sig_inv = sys.big_sigma_dense().try_inverse().unwrap();
        let dense = b.transpose() * &sig_inv * &b;
        let banded = sys.precision().to_dense();
        assert!((&dense - &banded).amax() < 1e-10 * dense.amax());
        let v = DVector::from_fn(b.nrows(), |_, _| rng.random_range(-1.0..1.0));
        let expected = b.transpose() * &sig_inv * &v;
        assert!((sys.weighted_transpose(&v).unwrap() - expected).amax() < 1e-10);
    }

    #[test]
    fn rejects_bad_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = random_params(2, 1, &mut rng);
        let q = QuantileConfig::uniform(0.5, 2).unwrap();
        assert!(matches!(build_stacked_system(&params, &q, &[1.0, 0.0]), Err(Error::Domain(_))));
        let q3 = QuantileConfig::uniform(0.5, 3).unwrap();
        assert!(matches!(build_stacked_system(&params, &q3, &[1.0]), Err(Error::Dimension(_))));
    }
}
