use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{NowcastLabel, YearMonth};
use crate::error::{Error, Result};
use crate::nowcast::NowcastResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingRow {
    pub origin: YearMonth,
    pub tau: f64,
    pub class: NowcastLabel,
    pub value: f64,
    pub change: f64,
    /// Trailing three-month average of `change`.
    pub rolling_change: f64,
}

/// First differences of the headline posterior mean across consecutive
/// monthly origins and their trailing three-month average, per τ. Each row
/// carries the class of its origin.
pub fn rolling_report(results: &[NowcastResult]) -> Result<Vec<RollingRow>> {
    let mut groups: BTreeMap<u64, Vec<&NowcastResult>> = BTreeMap::new();
    for r in results {
        groups.entry(r.target_tau.to_bits()).or_default().push(r);
    }
    let mut rows = Vec::new();
    for (tau_bits, mut group) in groups {
        group.sort_by_key(|r| r.origin);
        if group.len() < 4 {
            return Err(Error::InsufficientData(format!(
                "{} origins at tau {}; need at least 4",
                group.len(),
                f64::from_bits(tau_bits)
            )));
        }
        for w in group.windows(2) {
            if w[0].origin.months_until(w[1].origin) != 1 {
                if w[0].origin == w[1].origin {
                    return Err(Error::Spec(format!("origin {} appears twice", w[0].origin)));
                }
                return Err(Error::Spec(format!("gap in origins between {} and {}", w[0].origin, w[1].origin)));
            }
        }
        let values: Vec<f64> = group.iter().map(|r| r.headline().mean).collect();
        let changes: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        for k in 2..changes.len() {
            rows.push(RollingRow {
                origin: group[k + 1].origin,
                tau: f64::from_bits(tau_bits),
                class: group[k + 1].class.label,
                value: values[k + 1],
                change: changes[k],
                rolling_change: (changes[k - 2] + changes[k - 1] + changes[k]) / 3.0,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadRow {
    pub origin: YearMonth,
    pub class: NowcastLabel,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
    pub difference: f64,
}

/// Per-origin headline means at τ = 0.1, 0.5, 0.9 and the 90−10 spread.
pub fn percentile_spread(q10: &[NowcastResult], q50: &[NowcastResult], q90: &[NowcastResult]) -> Result<Vec<SpreadRow>> {
    if q10.len() != q50.len() || q10.len() != q90.len() {
        return Err(Error::Spec("the three quantile runs cover different origins".into()));
    }
    let key = |r: &NowcastResult| (r.origin, r.class.label);
    let index = |rs: &[NowcastResult]| -> BTreeMap<_, f64> { rs.iter().map(|r| (key(r), r.headline().mean)).collect() };
    let (m10, m50, m90) = (index(q10), index(q50), index(q90));
    let mut rows = Vec::with_capacity(m10.len());
    for ((origin, class), lo) in &m10 {
        let (Some(mid), Some(hi)) = (m50.get(&(*origin, *class)), m90.get(&(*origin, *class))) else {
            return Err(Error::Spec(format!("origin {origin} ({class}) missing from a quantile run")));
        };
        rows.push(SpreadRow { origin: *origin, class: *class, q10: *lo, q50: *mid, q90: *hi, difference: hi - lo });
    }
    if rows.len() != m50.len() || rows.len() != m90.len() {
        return Err(Error::Spec("the three quantile runs cover different origins".into()));
    }
    Ok(rows)
}

/// "December 2019".
pub fn long_month(m: YearMonth) -> String {
    const NAMES: [&str; 12] = [
        "January", "February", "March", "April", "May", "June", "July", "August", "September", "October", "November",
        "December",
    ];
    format!("{} {}", NAMES[m.month as usize - 1], m.year)
}

/// "10th Percentile".
pub fn percentile_label(tau: f64) -> String {
    let k = (tau * 100.0).round() as i64;
    let suffix = match (k % 10, k % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{k}{suffix} Percentile")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Dates, the three percentiles and their difference, two decimals.
pub fn write_spread_table<W: Write>(rows: &[SpreadRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Dates", "tau=0.1", "tau=0.5", "tau=0.9", "Difference between tau=0.9 and tau=0.1"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            long_month(r.origin),
            format!("{:.2}", r.q10),
            format!("{:.2}", r.q50),
            format!("{:.2}", r.q90),
            format!("{:.2}", r.difference),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<table>", e))
}

pub fn write_rolling_table<W: Write>(rows: &[RollingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["origin", "tau", "class", "value", "change", "rolling_change"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.origin.to_string(),
            r.tau.to_string(),
            r.class.to_string(),
            format!("{:?}", r.value),
            format!("{:?}", r.change),
            format!("{:?}", r.rolling_change),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<table>", e))
}

/// One line per origin, reported month and variant.
pub fn write_nowcast_table<W: Write>(results: &[NowcastResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "origin", "class", "target", "tau", "month", "offset", "variant", "mean", "sd", "lower", "upper", "observed",
    ])
    .map_err(csv_err)?;
    for result in results {
        for s in &result.summaries {
            w.write_record([
                result.origin.to_string(),
                result.class.label.to_string(),
                result.target.clone(),
                result.target_tau.to_string(),
                s.month.to_string(),
                s.offset.to_string(),
                s.variant.name().to_string(),
                format!("{:?}", s.mean),
                format!("{:?}", s.sd),
                format!("{:?}", s.lower),
                format!("{:?}", s.upper),
                s.observed.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io("<table>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::NowcastClass;
    use crate::nowcast::{MonthSummary, Variant};

    fn result(origin: YearMonth, tau: f64, label: NowcastLabel, value: f64) -> NowcastResult {
        let class = NowcastClass { label, gdp_delay_months: label.delay() };
        let (offset, variant) = if label == NowcastLabel::Forecast { (1, Variant::McQuantile) } else { (0, Variant::Location) };
        NowcastResult {
            origin,
            class,
            tau: vec![tau],
            target: "GDP".into(),
            target_tau: tau,
            mass: 0.68,
            summaries: vec![MonthSummary {
                month: origin.plus(offset),
                offset,
                variant,
                mean: value,
                sd: 0.0,
                lower: value,
                upper: value,
                observed: false,
                draws: vec![value],
            }],
            data_digest: String::new(),
            seed: 0,
        }
    }

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    #[test]
    fn constant_and_linear_series() {
        let flat: Vec<_> = (0..6).map(|k| result(ym("2020-01").plus(k), 0.1, NowcastLabel::NowcastT1, 2.5)).collect();
        assert!(rolling_report(&flat).unwrap().iter().all(|r| r.change == 0.0 && r.rolling_change == 0.0));
        let line: Vec<_> = (0..6).map(|k| result(ym("2020-01").plus(k), 0.1, NowcastLabel::Forecast, 1.0 + 0.25 * k as f64)).collect();
        let rows = rolling_report(&line).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| (r.rolling_change - 0.25).abs() < 1e-12));
    }

    #[test]
    fn hand_computed_rolling_table() {
        let vals = [1.0, 3.0, 2.0, 6.0, 4.0];
        let rs: Vec<_> = vals.iter().enumerate().map(|(k, v)| result(ym("2019-11").plus(k as i64), 0.5, NowcastLabel::NowcastT2, *v)).collect();
        let rows = rolling_report(&rs).unwrap();
        // changes 2, −1, 4, −2
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].origin, rows[0].change, rows[0].rolling_change), (ym("2020-02"), 4.0, 5.0 / 3.0));
        assert_eq!((rows[1].origin, rows[1].change, rows[1].rolling_change), (ym("2020-03"), -2.0, 1.0 / 3.0));
    }

    #[test]
    fn gaps_and_short_runs_are_errors() {
        let mut rs: Vec<_> = (0..5).map(|k| result(ym("2020-01").plus(k), 0.1, NowcastLabel::Forecast, 1.0)).collect();
        rs.remove(2);
        assert!(matches!(rolling_report(&rs), Err(Error::Spec(_))));
        assert!(matches!(rolling_report(&rs[..3]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn spread_table_layout() {
        // unrounded inputs whose printed values are the paper's December 2019 row
        let o = ym("2019-12");
        let rows = percentile_spread(
            &[result(o, 0.1, NowcastLabel::NowcastT1, -1.436)],
            &[result(o, 0.5, NowcastLabel::NowcastT1, 1.171)],
            &[result(o, 0.9, NowcastLabel::NowcastT1, 5.196)],
        )
        .unwrap();
        assert_eq!(rows[0].difference, 5.196 - -1.436);
        let mut buf = Vec::new();
        write_spread_table(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "Dates,tau=0.1,tau=0.5,tau=0.9,Difference between tau=0.9 and tau=0.1\nDecember 2019,-1.44,1.17,5.20,6.63\n"
        );
    }

    #[test]
    fn degenerate_and_mismatched_spreads() {
        let o = ym("2020-04");
        let r = |t| result(o, t, NowcastLabel::Forecast, 0.7);
        let rows = percentile_spread(&[r(0.1)], &[r(0.5)], &[r(0.9)]).unwrap();
        assert_eq!(rows[0].difference, 0.0);
        let other = result(ym("2020-05"), 0.9, NowcastLabel::Forecast, 0.7);
        assert!(matches!(percentile_spread(&[r(0.1)], &[r(0.5)], &[other]), Err(Error::Spec(_))));
    }

    #[test]
    fn labels() {
        assert_eq!(percentile_label(0.1), "10th Percentile");
        assert_eq!(percentile_label(0.01), "1st Percentile");
        assert_eq!(percentile_label(0.12), "12th Percentile");
        assert_eq!(percentile_label(0.22), "22nd Percentile");
        assert_eq!(long_month(ym("2021-01")), "January 2021");
    }
}
