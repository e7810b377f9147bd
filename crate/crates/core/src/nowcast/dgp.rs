use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Frequency, MixedFrequencyPanel, QuarterlyObs, SeriesSpec, Transformation, YearMonth};
use crate::dist::MalParams;
use crate::error::{Error, Result};
use crate::model::{QuantileConfig, QvarParams};
use crate::rng;
use crate::state_space::MM_WEIGHTS;

/// Which series are seen only as quarterly aggregates and how many months
/// each series lags the end of the sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingTemplate {
    pub quarterly: Vec<usize>,
    /// Per series, trailing months without a release.
    pub publication_lags: Vec<usize>,
}

impl MissingTemplate {
    pub fn fully_observed(n: usize) -> Self {
        Self { quarterly: Vec::new(), publication_lags: vec![0; n] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDgp {
    pub params: QvarParams,
    pub q: QuantileConfig,
    pub t_len: usize,
    pub template: MissingTemplate,
    pub seed: u64,
    /// First grid month.
    pub start: YearMonth,
    /// Discarded warm-up months.
    pub warm_up: usize,
}

impl SyntheticDgp {
    pub fn new(params: QvarParams, q: QuantileConfig, t_len: usize, template: MissingTemplate, seed: u64) -> Result<Self> {
        let n = params.n();
        let radius = params.companion_spectral_radius();
        if !(radius < 1.0) {
            return Err(Error::Unstable(radius));
        }
        if q.dim() != n || template.publication_lags.len() != n || template.quarterly.iter().any(|&i| i >= n) {
            return Err(Error::Dimension(format!("template or quantile levels do not match {n} series")));
        }
        if t_len <= params.p() {
            return Err(Error::InsufficientData(format!("{t_len} months for {} lags", params.p())));
        }
        Ok(Self {
            params,
            q,
            t_len,
            template,
            seed,
            start: YearMonth { year: 2000, month: 1 },
            warm_up: 100,
        })
    }

    pub fn series_specs(&self) -> Vec<SeriesSpec> {
        (0..self.params.n())
            .map(|i| SeriesSpec {
                id: format!("y{}", i + 1),
                frequency: if self.template.quarterly.contains(&i) { Frequency::Quarterly } else { Frequency::Monthly },
                transformation: Transformation::Level,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    /// `T × n` ground truth.
    pub truth: DMatrix<f64>,
    pub panel: MixedFrequencyPanel,
}

/// Simulates the QVAR with MAL innovations, then masks it: quarterly series
/// are replaced by aggregates at the third month of each quarter (from the
/// fifth month on) and every series loses its trailing `publication_lags`
/// months.
pub fn simulate_dgp(dgp: &SyntheticDgp) -> Result<SimulatedData> {
    let (n, p) = (dgp.params.n(), dgp.params.p());
    let mut rng = rng::stream(dgp.seed, rng::SIMULATION_STREAM);
    let shocks = MalParams::from_quantiles(DVector::zeros(n), &dgp.params.sigma, &dgp.q)?;
    let total = dgp.warm_up + dgp.t_len;
    let mut y = DMatrix::zeros(total + p, n);
    for t in p..total + p {
        let mut next = dgp.params.b0.clone() + shocks.sample(&mut rng);
        for (j, b) in dgp.params.lags.iter().enumerate() {
            next += b * y.row(t - j - 1).transpose();
        }
        y.set_row(t, &next.transpose());
    }
    let truth = y.rows(p + dgp.warm_up, dgp.t_len).into_owned();

    let specs = dgp.series_specs();
    let mut cells = vec![None; dgp.t_len * n];
    let mut quarterly = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let last = dgp.t_len as i64 - 1 - dgp.template.publication_lags[i] as i64;
        for t in 0..dgp.t_len {
            if t as i64 > last {
                break;
            }
            match spec.frequency {
                Frequency::Monthly => cells[t * n + i] = Some(truth[(t, i)]),
                Frequency::Quarterly => {
                    if t >= 4 && dgp.start.plus(t as i64).month_of_quarter() == 3 {
                        let value = (0..5).map(|j| MM_WEIGHTS[j] * truth[(t - 4 + j, i)]).sum();
                        quarterly.push(QuarterlyObs { series: i, month: t, value });
                    }
                }
            }
        }
    }
    let target = dgp.template.quarterly.first().copied().unwrap_or(0);
    let panel = MixedFrequencyPanel::new(specs, dgp.start, cells, quarterly, target, 3)?;
    Ok(SimulatedData { truth, panel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dgp(lags: Vec<DMatrix<f64>>, tau: f64, t_len: usize, template: MissingTemplate, seed: u64) -> Result<SyntheticDgp> {
        let n = template.publication_lags.len();
        let params = QvarParams::new(DVector::from_fn(n, |i, _| i as f64), lags, DMatrix::identity(n, n) * 0.5)?;
        SyntheticDgp::new(params, QuantileConfig::uniform(tau, n)?, t_len, template, seed)
    }

    #[test]
    fn no_dynamics_gives_iid_median_draws() {
        let d = dgp(vec![DMatrix::zeros(2, 2)], 0.5, 20_000, MissingTemplate::fully_observed(2), 1).unwrap();
        let sim = simulate_dgp(&d).unwrap();
        for i in 0..2 {
            let below = sim.truth.column(i).iter().filter(|v| **v <= i as f64).count() as f64 / 20_000.0;
            assert!((below - 0.5).abs() < 0.015, "{below}");
        }
    }

    #[test]
    fn quarterly_values_follow_the_weights() {
        let template = MissingTemplate { quarterly: vec![1], publication_lags: vec![0, 2] };
        let lag = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.2, 0.3]);
        let sim = simulate_dgp(&dgp(vec![lag], 0.2, 48, template, 9).unwrap()).unwrap();
        let obs = &sim.panel.quarterly_obs;
        assert_eq!(obs.len(), 14); // months 5, 8, …, 44 (1-based 6..45); 47 is past the lag
        for o in obs {
            let direct = sim.truth[(o.month - 4, 1)] / 3.0
                + 2.0 * sim.truth[(o.month - 3, 1)] / 3.0
                + sim.truth[(o.month - 2, 1)]
                + 2.0 * sim.truth[(o.month - 1, 1)] / 3.0
                + sim.truth[(o.month, 1)] / 3.0;
            assert!((o.value - direct).abs() < 1e-12);
        }
        assert!(sim.panel.get(47, 0).is_some());
        assert!((0..48).all(|t| sim.panel.get(t, 1).is_none()));
    }

    #[test]
    fn deterministic_and_stability_gated() {
        let t = MissingTemplate::fully_observed(1);
        let a = simulate_dgp(&dgp(vec![DMatrix::from_element(1, 1, 0.9)], 0.3, 50, t.clone(), 4).unwrap()).unwrap();
        let b = simulate_dgp(&dgp(vec![DMatrix::from_element(1, 1, 0.9)], 0.3, 50, t.clone(), 4).unwrap()).unwrap();
        assert_eq!(a, b);
        let err = dgp(vec![DMatrix::from_element(1, 1, 1.02)], 0.3, 50, t, 4).unwrap_err();
        assert!(matches!(err, Error::Unstable(r) if r >= 1.0));
    }
}
