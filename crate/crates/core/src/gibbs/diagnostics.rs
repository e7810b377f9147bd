use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::PosteriorChain;

/// Chains whose effective sample size falls below this are flagged.
const LOW_ESS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    /// Summed over chains.
    pub ess: f64,
    /// Split-chain potential scale reduction.
    pub rhat: f64,
    pub low_ess: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub chains: usize,
    pub draws_per_chain: usize,
    pub parameters: Vec<ParameterSummary>,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0))
}

/// Effective sample size by Geyer's initial monotone sequence estimator.
/// A constant chain returns 1.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return n as f64;
    }
    let m = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - m).collect();
    let autocov = |k: usize| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let g0 = autocov(0);
    if g0 <= f64::MIN_POSITIVE {
        return 1.0;
    }
    let mut tau = -1.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while k + 1 < n {
        let pair = (autocov(k) + autocov(k + 1)) / g0;
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        tau += 2.0 * pair;
        prev = pair;
        k += 2;
    }
    n as f64 / tau.max(1.0 / n as f64)
}

/// Split-chain `R̂` over one or more chains of equal length.
pub fn split_rhat(chains: &[&[f64]]) -> f64 {
    let half = chains.iter().map(|c| c.len()).min().unwrap_or(0) / 2;
    if half < 2 {
        return f64::NAN;
    }
    let pieces: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..half], &c[c.len() - half..]])
        .collect();
    let stats: Vec<(f64, f64)> = pieces.iter().map(|p| mean_var(p)).collect();
    let m = stats.len() as f64;
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m;
    let b = half as f64 * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>() / (m - 1.0);
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m;
    if w <= 0.0 {
        return if b <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (half as f64 - 1.0) / half as f64 * w + b / half as f64;
    (var_plus / w).sqrt()
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-parameter summaries of `β` and `Σ` across chains fitted to the same
/// data.
pub fn diagnostics(chains: &[PosteriorChain]) -> Result<Diagnostics> {
    let first = chains.first().ok_or_else(|| Error::InsufficientData("no chains".into()))?;
    let draws = first.draws();
    if draws < 2 {
        return Err(Error::InsufficientData("a single draw has no spread to summarise".into()));
    }
    if chains.iter().any(|c| c.draws() != draws || c.header.data_digest != first.header.data_digest || c.header.n != first.header.n || c.header.p != first.header.p) {
        return Err(Error::Dimension("chains differ in length, model or data".into()));
    }
    let names = first.parameter_names();
    let (nb, ns) = (first.n_beta(), first.header.n * first.header.n);
    let mut parameters = Vec::with_capacity(names.len());
    for (k, name) in names.into_iter().enumerate() {
        let series: Vec<Vec<f64>> = chains
            .iter()
            .map(|c| {
                (0..draws)
                    .map(|d| if k < nb { c.beta_draws[d * nb + k] } else { c.sigma_draws[d * ns + k - nb] })
                    .collect()
            })
            .collect();
        let mut pooled: Vec<f64> = series.iter().flatten().copied().collect();
        let (mean, var) = mean_var(&pooled);
        pooled.sort_by(f64::total_cmp);
        let ess: f64 = series.iter().map(|s| effective_sample_size(s)).sum();
        let refs: Vec<&[f64]> = series.iter().map(Vec::as_slice).collect();
        parameters.push(ParameterSummary {
            name,
            mean,
            sd: var.sqrt(),
            q05: quantile(&pooled, 0.05),
            q50: quantile(&pooled, 0.5),
            q95: quantile(&pooled, 0.95),
            ess,
            rhat: split_rhat(&refs),
            low_ess: ess < LOW_ESS,
        });
    }
    Ok(Diagnostics { chains: chains.len(), draws_per_chain: draws, parameters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn iid(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn iid_chain_has_full_ess() {
        let x = iid(4000, 1);
        let ess = effective_sample_size(&x);
        assert!((ess / 4000.0 - 1.0).abs() < 0.1, "{ess}");
    }

    #[test]
    fn ar1_chain_ess_matches_theory() {
        // ESS/N = (1 − φ)/(1 + φ)
        let e = iid(100_000, 2);
        let mut x = vec![0.0; e.len()];
        for t in 1..e.len() {
            x[t] = 0.8 * x[t - 1] + e[t];
        }
        let ratio = effective_sample_size(&x) / x.len() as f64;
        assert!((ratio / (0.2 / 1.8) - 1.0).abs() < 0.15, "{ratio}");
    }

    #[test]
    fn constant_chain_is_one_effective_draw() {
        assert_eq!(effective_sample_size(&[3.0; 500]), 1.0);
        assert!(1.0 < LOW_ESS);
    }

    #[test]
    fn identical_chains_give_unit_rhat() {
        let x = iid(2000, 3);
        let r = split_rhat(&[&x, &x]);
        assert!((r - 1.0).abs() < 0.01, "{r}");
        let shifted: Vec<f64> = x.iter().map(|v| v + 3.0).collect();
        assert!(split_rhat(&[&x, &shifted]) > 1.5);
    }
}
