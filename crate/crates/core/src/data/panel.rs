use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{transform, Frequency, RawSeriesSet, SeriesSpec, YearMonth};
use crate::error::{Error, Result};

/// A released quarterly value placed on the monthly grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarterlyObs {
    pub series: usize,
    /// 0-based grid month.
    pub month: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelOptions {
    /// First grid month. Defaults to the first quarter start at which every
    /// monthly series has a transformed value.
    pub start: Option<YearMonth>,
    /// Month of the quarter (1..=3) that carries the quarterly value.
    pub quarter_anchor: u32,
    /// Designated GDP series; defaults to the first quarterly series.
    pub target: Option<String>,
}

impl Default for PanelOptions {
    fn default() -> Self {
        Self {
            start: None,
            quarter_anchor: 3,
            target: None,
        }
    }
}

/// Monthly grid of transformed values with missing markers, the released
/// quarterly values and the release calendar at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedFrequencyPanel {
    pub series: Vec<SeriesSpec>,
    pub start: YearMonth,
    /// Last grid month; the nowcast origin.
    pub origin: YearMonth,
    /// Row-major `T × n` cells, cell `t * n + i`.
    pub cells: Vec<Option<f64>>,
    pub quarterly_obs: Vec<QuarterlyObs>,
    /// Per series, the last grid month holding a released value.
    pub calendar: Vec<Option<usize>>,
    pub target: usize,
    pub quarter_anchor: u32,
}

impl MixedFrequencyPanel {
    /// Builds a panel from parts, checking its invariants.
    pub fn new(
        series: Vec<SeriesSpec>,
        start: YearMonth,
        cells: Vec<Option<f64>>,
        quarterly_obs: Vec<QuarterlyObs>,
        target: usize,
        quarter_anchor: u32,
    ) -> Result<Self> {
        let n = series.len();
        if n == 0 || cells.is_empty() || !cells.len().is_multiple_of(n) {
            return Err(Error::Dimension(format!("{} cells for {n} series", cells.len())));
        }
        let t_len = cells.len() / n;
        let mut calendar = vec![None; n];
        for (k, c) in cells.iter().enumerate() {
            if let Some(v) = c {
                let (t, i) = (k / n, k % n);
                if !v.is_finite() {
                    return Err(Error::Data(format!("non-finite value for {} at {}", series[i].id, start.plus(t as i64))));
                }
                if series[i].frequency == Frequency::Quarterly {
                    return Err(Error::Data(format!("quarterly series {} has a monthly cell", series[i].id)));
                }
                calendar[i] = Some(t);
            }
        }
        let mut panel = Self {
            series,
            start,
            origin: start.plus(t_len as i64 - 1),
            cells,
            quarterly_obs: Vec::new(),
            calendar,
            target,
            quarter_anchor,
        };
        if !(1..=3).contains(&quarter_anchor) {
            return Err(Error::Config(format!("quarter anchor {quarter_anchor} outside 1..=3")));
        }
        if target >= n {
            return Err(Error::Config(format!("target index {target} for {n} series")));
        }
        let mut obs = quarterly_obs;
        obs.sort_by_key(|o| (o.series, o.month));
        for w in obs.windows(2) {
            if w[0].series == w[1].series && w[0].month == w[1].month {
                return Err(Error::Data(format!("two quarterly values at {}", panel.month(w[0].month))));
            }
        }
        for o in &obs {
            if o.series >= n || panel.series[o.series].frequency != Frequency::Quarterly {
                return Err(Error::Data(format!("quarterly observation on non-quarterly series {}", o.series)));
            }
            if o.month >= t_len {
                return Err(Error::Data(format!("quarterly observation at month {} beyond the grid", o.month)));
            }
            if panel.month(o.month).month_of_quarter() != quarter_anchor {
                return Err(Error::Data(format!(
                    "misaligned quarter anchoring: {} value at {}",
                    panel.series[o.series].id,
                    panel.month(o.month)
                )));
            }
            if !o.value.is_finite() {
                return Err(Error::Data(format!("non-finite quarterly value at {}", panel.month(o.month))));
            }
            panel.calendar[o.series] = Some(o.month);
        }
        panel.quarterly_obs = obs;
        Ok(panel)
    }

    pub fn n(&self) -> usize {
        self.series.len()
    }

    pub fn t_len(&self) -> usize {
        self.cells.len() / self.series.len()
    }

    pub fn get(&self, t: usize, i: usize) -> Option<f64> {
        self.cells[t * self.n() + i]
    }

    pub fn month(&self, t: usize) -> YearMonth {
        self.start.plus(t as i64)
    }

    pub fn index_of(&self, m: YearMonth) -> Option<usize> {
        let k = self.start.months_until(m);
        (0..self.t_len() as i64).contains(&k).then_some(k as usize)
    }

    pub fn series_index(&self, id: &str) -> Option<usize> {
        self.series.iter().position(|s| s.id == id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.series.iter().map(|s| s.id.clone()).collect()
    }

    /// Observation mask, true where the cell holds a value.
    pub fn observed_mask(&self) -> Vec<bool> {
        self.cells.iter().map(Option::is_some).collect()
    }

    /// Per-month values of one quarterly series' released observations.
    pub fn quarterly_values(&self, series: usize) -> Vec<(usize, f64)> {
        self.quarterly_obs
            .iter()
            .filter(|o| o.series == series)
            .map(|o| (o.month, o.value))
            .collect()
    }

    /// Human-readable name of a cell.
    pub fn cell_name(&self, t: usize, i: usize) -> String {
        format!("{} at {}", self.series[i].id, self.month(t))
    }

    /// Sample standard deviation of a series' observed cells.
    pub fn series_sd(&self, i: usize) -> Option<f64> {
        let v: Vec<f64> = (0..self.t_len()).filter_map(|t| self.get(t, i)).collect();
        if v.len() < 2 {
            return None;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        Some((v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt())
    }

    /// The panel's values as vintage rows dated `vintage`: monthly values on
    /// the first of their month, quarterly values on the first of their
    /// quarter.
    pub fn to_vintage_rows(&self, vintage: chrono::NaiveDate) -> Vec<crate::data::VintageRow> {
        let mut rows = Vec::new();
        for (i, spec) in self.series.iter().enumerate() {
            let mut push = |m: YearMonth, v: f64| {
                rows.push(crate::data::VintageRow {
                    series_id: spec.id.clone(),
                    date: m.first_day(),
                    value: Some(v),
                    vintage_date: vintage,
                    line: 0,
                })
            };
            match spec.frequency {
                Frequency::Monthly => (0..self.t_len()).for_each(|t| {
                    if let Some(v) = self.get(t, i) {
                        push(self.month(t), v)
                    }
                }),
                Frequency::Quarterly => {
                    for (t, v) in self.quarterly_values(i) {
                        push(self.month(t).quarter_month(1), v);
                    }
                }
            }
        }
        rows
    }

    /// Copy with `delta` added to series `i` at the given months.
    pub fn shifted(&self, i: usize, months: std::ops::Range<usize>, delta: f64) -> Result<Self> {
        let mut out = self.clone();
        let n = self.n();
        for t in months {
            match out.cells.get_mut(t * n + i) {
                Some(Some(v)) => *v += delta,
                _ => {
                    return Err(Error::Spec(format!("{} is not observed", self.cell_name(t.min(self.t_len() - 1), i))));
                }
            }
        }
        Ok(out)
    }
}

/// Transforms a raw vintage and places it on the monthly grid ending at
/// `origin`.
pub fn assemble_panel(
    raw: &RawSeriesSet,
    origin: YearMonth,
    specs: &[SeriesSpec],
    options: &PanelOptions,
) -> Result<MixedFrequencyPanel> {
    if !specs.iter().any(|s| s.frequency == Frequency::Monthly) || !specs.iter().any(|s| s.frequency == Frequency::Quarterly) {
        return Err(Error::Config("need at least one monthly and one quarterly series".into()));
    }
    let anchor = options.quarter_anchor;
    if !(1..=3).contains(&anchor) {
        return Err(Error::Config(format!("quarter anchor {anchor} outside 1..=3")));
    }
    let mut transformed = Vec::with_capacity(specs.len());
    for spec in specs {
        spec.validate()?;
        let values = raw.get(&spec.id).map(Vec::as_slice).unwrap_or(&[]);
        transformed.push(transform(values, spec)?);
    }
    let start = match options.start {
        Some(s) => s,
        None => {
            let first = transformed
                .iter()
                .filter(|s| s.frequency == Frequency::Monthly)
                .map(|s| s.values.first().map(|v| v.0))
                .collect::<Option<Vec<_>>>()
                .and_then(|v| v.into_iter().max());
            let Some(first) = first else {
                let empty = transformed.iter().find(|s| s.values.is_empty()).expect("some series is empty");
                return Err(Error::Data(format!("series {} has no observations", empty.id)));
            };
            let lead = anchor % 3 + 1;
            first.plus(((lead + 3 - first.month_of_quarter()) % 3) as i64)
        }
    };
    if start > origin {
        return Err(Error::InsufficientData(format!("grid start {start} after origin {origin}")));
    }
    let t_len = start.months_until(origin) as usize + 1;
    let n = specs.len();
    let mut cells = vec![None; t_len * n];
    let mut quarterly = Vec::new();
    for (i, series) in transformed.iter().enumerate() {
        let mut placed = BTreeMap::new();
        for &(m, v) in &series.values {
            let m = match series.frequency {
                Frequency::Monthly => m,
                Frequency::Quarterly => {
                    let moq = m.month_of_quarter();
                    if moq != 1 && moq != anchor {
                        return Err(Error::Data(format!(
                            "misaligned quarter anchoring: {} dated {m}",
                            series.id
                        )));
                    }
                    m.quarter_month(anchor)
                }
            };
            if m < start || m > origin {
                continue;
            }
            if placed.insert(m, v).is_some() {
                return Err(Error::Data(format!("misaligned quarter anchoring: {} has two values for {m}", series.id)));
            }
        }
        if placed.is_empty() {
            return Err(Error::Data(format!("series {} has no observations between {start} and {origin}", series.id)));
        }
        for (m, v) in placed {
            let t = start.months_until(m) as usize;
            match series.frequency {
                Frequency::Monthly => cells[t * n + i] = Some(v),
                Frequency::Quarterly => quarterly.push(QuarterlyObs { series: i, month: t, value: v }),
            }
        }
    }
    let target = match &options.target {
        Some(id) => specs
            .iter()
            .position(|s| &s.id == id)
            .ok_or_else(|| Error::Config(format!("unknown target series '{id}'")))?,
        None => specs.iter().position(|s| s.frequency == Frequency::Quarterly).expect("checked above"),
    };
    MixedFrequencyPanel::new(specs.to_vec(), start, cells, quarterly, target, anchor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Transformation;
    use chrono::NaiveDate;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn specs() -> Vec<SeriesSpec> {
        vec![
            SeriesSpec::new("M1", Frequency::Monthly, Transformation::Level).unwrap(),
            SeriesSpec::new("M2", Frequency::Monthly, Transformation::Level).unwrap(),
            SeriesSpec::new("GDP", Frequency::Quarterly, Transformation::Level).unwrap(),
        ]
    }

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    /// M1 through 2020-06, M2 through 2020-05 with a hole in 2020-02, GDP
    /// released for Q4 2019 and Q1 2020.
    fn raw() -> RawSeriesSet {
        let mut raw = RawSeriesSet::new();
        raw.insert("M1".into(), (1..=6).map(|m| (d(&format!("2020-{m:02}-01")), m as f64)).collect());
        raw.insert(
            "M2".into(),
            [1, 3, 4, 5].iter().map(|&m| (d(&format!("2020-{m:02}-01")), 10.0 * m as f64)).collect(),
        );
        raw.insert("GDP".into(), vec![(d("2019-10-01"), 2.5), (d("2020-01-01"), -1.0)]);
        raw
    }

    #[test]
    fn ragged_edge_matches_hand_mask() {
        let p = assemble_panel(&raw(), ym("2020-06"), &specs(), &PanelOptions::default()).unwrap();
        assert_eq!(p.start, ym("2020-01"));
        assert_eq!(p.t_len(), 6);
        let mask: Vec<bool> = p.observed_mask();
        #[rustfmt::skip]
        let hand = [
            true, true, false,
            true, false, false,
            true, true, false,
            true, true, false,
            true, true, false,
            true, false, false,
        ];
        assert_eq!(mask, hand);
        // Q4 2019 lies before the grid.
        assert_eq!(p.quarterly_obs, vec![QuarterlyObs { series: 2, month: 2, value: -1.0 }]);
        assert_eq!(p.calendar, vec![Some(5), Some(4), Some(2)]);
        assert_eq!(p.target, 2);
    }

    #[test]
    fn fourth_quarter_lands_in_december() {
        let opts = PanelOptions { start: Some(ym("2019-10")), ..Default::default() };
        let mut r = raw();
        r.get_mut("M1").unwrap().insert(0, (d("2019-10-01"), 0.0));
        let p = assemble_panel(&r, ym("2020-06"), &specs(), &opts).unwrap();
        let q4 = p.quarterly_obs[0];
        assert_eq!(p.month(q4.month), ym("2019-12"));
        assert_eq!(q4.value, 2.5);
        assert!(p.quarterly_obs.iter().all(|o| (o.month + 1) % 3 == 0));
    }

    #[test]
    fn round_trip_of_observed_cells() {
        let r = raw();
        let p = assemble_panel(&r, ym("2020-06"), &specs(), &PanelOptions::default()).unwrap();
        for (i, id) in ["M1", "M2"].iter().enumerate() {
            for &(date, v) in &r[*id] {
                let t = p.index_of(YearMonth::from_date(date)).unwrap();
                assert_eq!(p.get(t, i), Some(v));
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut r = raw();
        r.insert("GDP".into(), vec![(d("2020-02-01"), 1.0)]);
        let err = assemble_panel(&r, ym("2020-06"), &specs(), &PanelOptions::default()).unwrap_err();
        assert!(err.to_string().contains("misaligned"), "{err}");

        let mut r = raw();
        r.insert("M2".into(), vec![]);
        let err = assemble_panel(&r, ym("2020-06"), &specs(), &PanelOptions::default()).unwrap_err();
        assert!(err.to_string().contains("M2"), "{err}");

        let only_monthly = &specs()[..2];
        assert!(assemble_panel(&raw(), ym("2020-06"), only_monthly, &PanelOptions::default()).is_err());
    }

    #[test]
    fn shift_requires_observed_cells() {
        let p = assemble_panel(&raw(), ym("2020-06"), &specs(), &PanelOptions::default()).unwrap();
        let s = p.shifted(0, 3..6, 1.5).unwrap();
        assert_eq!(s.get(5, 0), Some(7.5));
        assert_eq!(s.get(2, 0), Some(3.0));
        assert!(matches!(p.shifted(1, 3..6, 1.0), Err(Error::Spec(_))));
    }
}
