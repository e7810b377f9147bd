use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{classify_nowcast, MixedFrequencyPanel, NowcastClass, NowcastLabel, YearMonth};
use crate::dist::MalParams;
use crate::error::{Error, Result};
use crate::gibbs::{panel_digest, PosteriorChain};
use crate::model::{regressor, QuantileConfig};
use crate::rng;

/// How a month's value is obtained from a posterior draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Conditional quantile location `X_tβ` at a month inside the sample;
    /// the observation itself where the cell is observed.
    Location,
    /// Monte Carlo τ-quantile of simulated MAL paths.
    McQuantile,
    /// Location iterated forward with innovations set to zero.
    IteratedLocation,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Location => "location",
            Variant::McQuantile => "mc_quantile",
            Variant::IteratedLocation => "iterated_location",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthSummary {
    pub month: YearMonth,
    /// Months after the origin.
    pub offset: i64,
    pub variant: Variant,
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
    pub observed: bool,
    /// Per-draw values, pooled over chains in chain order.
    #[serde(skip)]
    pub draws: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NowcastResult {
    pub origin: YearMonth,
    pub class: NowcastClass,
    pub tau: Vec<f64>,
    pub target: String,
    pub target_tau: f64,
    /// Credible mass of `[lower, upper]`.
    pub mass: f64,
    pub summaries: Vec<MonthSummary>,
    pub data_digest: String,
    pub seed: u64,
}

impl NowcastResult {
    pub fn target_months(&self) -> Vec<YearMonth> {
        let mut m: Vec<YearMonth> = self.summaries.iter().map(|s| s.month).collect();
        m.dedup();
        m
    }

    /// Headline figure: the first forecast month's Monte Carlo quantile, or
    /// the origin month's location for nowcasts.
    pub fn headline(&self) -> &MonthSummary {
        let (offset, variant) = match self.class.label {
            NowcastLabel::Forecast => (1, Variant::McQuantile),
            _ => (0, Variant::Location),
        };
        self.summaries
            .iter()
            .find(|s| s.offset == offset && s.variant == variant)
            .expect("every class reports its headline month")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NowcastOptions {
    pub mass: f64,
    /// Simulated paths per posterior draw for forecast months.
    pub paths_per_draw: usize,
}

impl Default for NowcastOptions {
    fn default() -> Self {
        Self { mass: 0.68, paths_per_draw: 200 }
    }
}

/// Type-7 quantile of sorted values.
pub(crate) fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn summarise(draws: Vec<f64>, mass: f64) -> (f64, f64, f64, f64, Vec<f64>) {
    let k = draws.len() as f64;
    // shifted by the first draw so a constant sample returns that constant
    let mean = draws[0] + draws.iter().map(|v| v - draws[0]).sum::<f64>() / k;
    let sd = if draws.len() > 1 {
        (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = draws.clone();
    sorted.sort_by(f64::total_cmp);
    let lower = sorted_quantile(&sorted, (1.0 - mass) / 2.0);
    let upper = sorted_quantile(&sorted, (1.0 + mass) / 2.0);
    (mean, sd, lower, upper, draws)
}

/// Posterior summaries of the target series' conditional quantile at the
/// months `class` reports on.
pub fn nowcast(
    chains: &[PosteriorChain],
    panel: &MixedFrequencyPanel,
    class: NowcastClass,
    options: &NowcastOptions,
) -> Result<NowcastResult> {
    let first = chains.first().ok_or_else(|| Error::Spec("no chains to summarise".into()))?;
    let digest = panel_digest(panel);
    if chains.iter().any(|c| c.header.data_digest != digest) {
        return Err(Error::Spec("chains were not fitted on this panel".into()));
    }
    let detected = classify_nowcast(panel)?;
    if detected != class {
        return Err(Error::Spec(format!("panel is a {} origin, not {}", detected.label, class.label)));
    }
    if !(options.mass > 0.0 && options.mass < 1.0) || options.paths_per_draw == 0 {
        return Err(Error::Settings("credible mass must lie in (0, 1) and paths per draw be positive".into()));
    }
    let (n, p) = (first.header.n, first.header.p);
    let q = QuantileConfig::new(&first.header.tau)?;
    let target = panel.target;
    let t_last = panel.t_len() - 1;
    let mut per_key: Vec<((i64, Variant), Vec<f64>)> = Vec::new();
    let mut push = |key: (i64, Variant), v: f64| match per_key.iter_mut().find(|(k, _)| *k == key) {
        Some((_, vals)) => vals.push(v),
        None => per_key.push((key, vec![v])),
    };
    let offsets = class.target_offsets();
    for chain in chains {
        let mut frng = rng::stream(chain.header.settings.seed, rng::FORECAST_STREAM_BASE | chain.header.chain_index);
        let yu_thin = chain.header.settings.yu_thin;
        let stored = chain.draws().div_ceil(yu_thin);
        for k in 0..stored {
            let d = k * yu_thin;
            let coefs = chain.beta(d).coefficient_matrix(n);
            let y = chain.y_full(k);
            for &off in &offsets {
                if off > 0 {
                    continue;
                }
                let t = (t_last as i64 + off) as usize;
                push((off, Variant::Location), location_or_observed(panel, &coefs, &y, p, t, target));
            }
            if class.label == NowcastLabel::Forecast {
                let horizon = offsets.iter().copied().max().unwrap_or(0) as usize;
                let shocks = MalParams::from_quantiles(DVector::zeros(n), &chain.sigma(d), &q)?;
                let iterated = iterated_locations(&coefs, &y, p, horizon, target);
                let mut paths = vec![Vec::with_capacity(options.paths_per_draw); horizon];
                let mut ext = DMatrix::zeros(y.nrows() + horizon, n);
                ext.rows_mut(0, y.nrows()).copy_from(&y);
                for _ in 0..options.paths_per_draw {
                    for h in 0..horizon {
                        let t = y.nrows() + h;
                        let next = &coefs * regressor(&ext, t, p) + shocks.sample(&mut frng);
                        ext.set_row(t, &next.transpose());
                        paths[h].push(next[target]);
                    }
                }
                for h in 0..horizon {
                    let sorted = {
                        let mut s = std::mem::take(&mut paths[h]);
                        s.sort_by(f64::total_cmp);
                        s
                    };
                    push(((h + 1) as i64, Variant::McQuantile), sorted_quantile(&sorted, q.tau()[target]));
                    push(((h + 1) as i64, Variant::IteratedLocation), iterated[h]);
                }
            }
        }
    }
    per_key.sort_by_key(|(k, _)| *k);
    let origin = panel.month(t_last);
    let summaries = per_key
        .into_iter()
        .map(|((offset, variant), draws)| {
            let t = t_last as i64 + offset;
            let observed = t <= t_last as i64 && panel.get(t as usize, target).is_some();
            let (mean, sd, lower, upper, draws) = summarise(draws, options.mass);
            MonthSummary { month: origin.plus(offset), offset, variant, mean, sd, lower, upper, observed, draws }
        })
        .collect();
    Ok(NowcastResult {
        origin,
        class,
        tau: q.tau().to_vec(),
        target: panel.series[target].id.clone(),
        target_tau: q.tau()[target],
        mass: options.mass,
        summaries,
        data_digest: digest,
        seed: first.header.settings.seed,
    })
}

fn location_or_observed(
    panel: &MixedFrequencyPanel,
    coefs: &DMatrix<f64>,
    y: &DMatrix<f64>,
    p: usize,
    t: usize,
    series: usize,
) -> f64 {
    match panel.get(t, series) {
        Some(obs) => obs,
        None if t >= p => (coefs * regressor(y, t, p))[series],
        None => y[(t, series)],
    }
}

/// Posterior summary of one series' quantile location at grid month `t`.
/// Observed cells pass through unchanged.
pub fn in_sample_summary(
    chains: &[PosteriorChain],
    panel: &MixedFrequencyPanel,
    series: usize,
    t: usize,
    mass: f64,
) -> Result<MonthSummary> {
    if chains.is_empty() || series >= panel.n() || t >= panel.t_len() {
        return Err(Error::Spec(format!("no posterior for series {series} at month {t}")));
    }
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::Settings("credible mass must lie in (0, 1)".into()));
    }
    let digest = panel_digest(panel);
    if chains.iter().any(|c| c.header.data_digest != digest) {
        return Err(Error::Spec("chains were not fitted on this panel".into()));
    }
    let mut draws = Vec::new();
    for chain in chains {
        let (n, p) = (chain.header.n, chain.header.p);
        let yu_thin = chain.header.settings.yu_thin;
        for k in 0..chain.draws().div_ceil(yu_thin) {
            let coefs = chain.beta(k * yu_thin).coefficient_matrix(n);
            draws.push(location_or_observed(panel, &coefs, &chain.y_full(k), p, t, series));
        }
    }
    let (mean, sd, lower, upper, draws) = summarise(draws, mass);
    let origin = panel.month(panel.t_len() - 1);
    let month = panel.month(t);
    Ok(MonthSummary {
        month,
        offset: origin.months_until(month),
        variant: Variant::Location,
        mean,
        sd,
        lower,
        upper,
        observed: panel.get(t, series).is_some(),
        draws,
    })
}

/// Target component of the location iterated `horizon` months past the end
/// of `y`, feeding each location back in as the next observation.
fn iterated_locations(coefs: &DMatrix<f64>, y: &DMatrix<f64>, p: usize, horizon: usize, target: usize) -> Vec<f64> {
    let n = y.ncols();
    let mut ext = DMatrix::zeros(y.nrows() + horizon, n);
    ext.rows_mut(0, y.nrows()).copy_from(y);
    (0..horizon)
        .map(|h| {
            let t = y.nrows() + h;
            let loc = coefs * regressor(&ext, t, p);
            ext.set_row(t, &loc.transpose());
            loc[target]
        })
        .collect()
}
