use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{classify_nowcast, Frequency, MixedFrequencyPanel, NowcastLabel};
use crate::error::{Error, Result};
use crate::gibbs::PosteriorChain;
use crate::nowcast::report::percentile_label;
use crate::nowcast::result::summarise;
use crate::nowcast::{nowcast, NowcastOptions, NowcastResult, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualSpec {
    pub shocked_series: String,
    /// Number of final months shocked.
    pub window: usize,
    /// In units of the series' in-sample standard deviation.
    pub shock_size: f64,
}

impl CounterfactualSpec {
    pub fn new(shocked_series: impl Into<String>) -> Self {
        Self { shocked_series: shocked_series.into(), window: 3, shock_size: 1.0 }
    }

    /// Copy of `panel` with the shock applied.
    pub fn apply(&self, panel: &MixedFrequencyPanel) -> Result<MixedFrequencyPanel> {
        if self.window == 0 {
            return Err(Error::Spec("shock window must be at least one month".into()));
        }
        if !self.shock_size.is_finite() {
            return Err(Error::Spec("shock size must be finite".into()));
        }
        let i = panel
            .series_index(&self.shocked_series)
            .ok_or_else(|| Error::Spec(format!("unknown series '{}'", self.shocked_series)))?;
        if panel.series[i].frequency != Frequency::Monthly {
            return Err(Error::Spec(format!("'{}' is not a monthly series", self.shocked_series)));
        }
        if self.window > panel.t_len() {
            return Err(Error::Spec(format!("shock window {} exceeds the sample", self.window)));
        }
        let sd = panel
            .series_sd(i)
            .ok_or_else(|| Error::Spec(format!("'{}' has too few observations for a standard deviation", self.shocked_series)))?;
        let t = panel.t_len();
        panel.shifted(i, t - self.window..t, self.shock_size * sd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSummary {
    pub offset: i64,
    pub variant: Variant,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub prob_negative: f64,
    #[serde(skip)]
    pub draws: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualResult {
    pub spec: CounterfactualSpec,
    /// Additive shift applied per shocked month.
    pub delta: f64,
    pub actual: NowcastResult,
    pub counterfactual: NowcastResult,
    pub differences: Vec<DifferenceSummary>,
}

impl CounterfactualResult {
    pub fn headline(&self) -> &DifferenceSummary {
        let h = self.actual.headline();
        self.differences
            .iter()
            .find(|d| d.offset == h.offset && d.variant == h.variant)
            .expect("differences cover the headline month")
    }
}

/// Fits `fit` on the actual and the shocked panel and differences the
/// nowcasts draw by draw. `fit` must be deterministic in its seed so the two
/// runs share random numbers.
pub fn counterfactual<F>(
    fit: F,
    panel: &MixedFrequencyPanel,
    spec: &CounterfactualSpec,
    options: &NowcastOptions,
) -> Result<CounterfactualResult>
where
    F: Fn(&MixedFrequencyPanel) -> Result<Vec<PosteriorChain>> + Sync,
{
    let shocked = spec.apply(panel)?;
    let i = panel.series_index(&spec.shocked_series).expect("checked by apply");
    let t = panel.t_len() - 1;
    let delta = shocked.get(t, i).unwrap() - panel.get(t, i).unwrap();
    let class = classify_nowcast(panel)?;
    let (a, c) = std::thread::scope(|s| {
        let h = s.spawn(|| fit(&shocked));
        let a = fit(panel);
        (a, h.join().expect("counterfactual fit panicked"))
    });
    let (a, c) = (a?, c?);
    let actual = nowcast(&a, panel, class, options)?;
    let counter = nowcast(&c, &shocked, class, options)?;
    let mut differences = Vec::new();
    for (sa, sc) in actual.summaries.iter().zip(&counter.summaries) {
        debug_assert_eq!((sa.offset, sa.variant), (sc.offset, sc.variant));
        let diffs: Vec<f64> = sc.draws.iter().zip(&sa.draws).map(|(x, y)| x - y).collect();
        let prob_negative = diffs.iter().filter(|d| **d < 0.0).count() as f64 / diffs.len() as f64;
        let (mean, _, lower, upper, draws) = summarise(diffs, options.mass);
        differences.push(DifferenceSummary { offset: sa.offset, variant: sa.variant, mean, lower, upper, prob_negative, draws });
    }
    Ok(CounterfactualResult { spec: spec.clone(), delta, actual, counterfactual: counter, differences })
}

/// Average posterior mean differences, one row per τ and one column per
/// class. `cells[r][c]` is the value for `taus[r]` under `NowcastLabel::ALL[c]`.
pub fn write_difference_table<W: Write>(taus: &[f64], cells: &[[Option<f64>; 3]], out: W) -> Result<()> {
    if taus.len() != cells.len() {
        return Err(Error::Spec("one row of differences per quantile level".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["Percentiles".to_string()];
    header.extend(NowcastLabel::ALL.iter().map(|l| l.heading().to_string()));
    w.write_record(&header).map_err(|e| Error::Format(e.to_string()))?;
    for (tau, row) in taus.iter().zip(cells) {
        let mut rec = vec![percentile_label(*tau)];
        rec.extend(row.iter().map(|v| v.map(|x| format!("{x:.2}")).unwrap_or_default()));
        w.write_record(&rec).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<table>", e))
}
