use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use chrono::NaiveDate;

use crate::data::SeriesSpec;
use crate::error::{Error, Result};

pub const VINTAGE_HEADER: [&str; 4] = ["series_id", "date", "value", "vintage_date"];

/// Per-series, date-sorted raw values of one vintage.
pub type RawSeriesSet = BTreeMap<String, Vec<(NaiveDate, f64)>>;

#[derive(Debug, Clone, PartialEq)]
pub struct VintageRow {
    pub series_id: String,
    pub date: NaiveDate,
    /// `None` for the `.` / empty missing marker.
    pub value: Option<f64>,
    pub vintage_date: NaiveDate,
    /// 1-based line in the source file.
    pub line: u64,
}

fn parse_date(s: &str, line: u64, what: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|_| Error::Data(format!("line {line}: unparseable {what} '{s}'")))
}

/// Reads every row of a long-format vintage file.
pub fn read_vintage_rows(path: &Path) -> Result<Vec<VintageRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        .clone();
    let mut col = [0usize; 4];
    for (k, name) in VINTAGE_HEADER.iter().enumerate() {
        col[k] = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| Error::Format(format!("{}: missing header column '{name}'", path.display())))?;
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |k: usize| record.get(col[k]).unwrap_or("");
        let value = match field(2) {
            "" | "." => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|_| Error::Data(format!("line {line}: unparseable value '{s}'")))?,
            ),
        };
        rows.push(VintageRow {
            series_id: field(0).to_string(),
            date: parse_date(field(1), line, "date")?,
            value,
            vintage_date: parse_date(field(3), line, "vintage_date")?,
            line,
        });
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: vintage file has no rows", path.display())));
    }
    Ok(rows)
}

/// Keeps, per (series, date), the latest row with `vintage_date <= as_of`.
pub fn select_vintage(rows: &[VintageRow], specs: &[SeriesSpec], as_of: NaiveDate) -> Result<RawSeriesSet> {
    if rows.is_empty() {
        return Err(Error::Data("empty vintage set".into()));
    }
    let known: HashSet<&str> = specs.iter().map(|s| s.id.as_str()).collect();
    let mut seen = HashSet::new();
    let mut best: HashMap<(&str, NaiveDate), (NaiveDate, Option<f64>)> = HashMap::new();
    for row in rows {
        if !known.contains(row.series_id.as_str()) {
            return Err(Error::Data(format!("line {}: unknown series id '{}'", row.line, row.series_id)));
        }
        if !seen.insert((row.series_id.as_str(), row.date, row.vintage_date)) {
            return Err(Error::Data(format!(
                "line {}: duplicate row for {} {} vintage {}",
                row.line, row.series_id, row.date, row.vintage_date
            )));
        }
        if row.vintage_date > as_of {
            continue;
        }
        let slot = best.entry((row.series_id.as_str(), row.date)).or_insert((row.vintage_date, row.value));
        if row.vintage_date >= slot.0 {
            *slot = (row.vintage_date, row.value);
        }
    }
    let mut set: RawSeriesSet = specs.iter().map(|s| (s.id.clone(), Vec::new())).collect();
    for ((id, date), (_, value)) in best {
        if let Some(v) = value {
            set.get_mut(id).expect("known id").push((date, v));
        }
    }
    for values in set.values_mut() {
        values.sort_by_key(|(d, _)| *d);
    }
    Ok(set)
}

/// Reads a vintage file and selects the vintage in force at `as_of`.
pub fn load_vintage(path: &Path, specs: &[SeriesSpec], as_of: NaiveDate) -> Result<RawSeriesSet> {
    let rows = read_vintage_rows(path)?;
    select_vintage(&rows, specs, as_of)
}

/// Writes rows in the ingestion format, values in shortest round-trip form.
pub fn write_vintage_csv<W: std::io::Write>(rows: &[VintageRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Format(e.to_string());
    wtr.write_record(VINTAGE_HEADER).map_err(err)?;
    for r in rows {
        let value = r.value.map_or_else(|| ".".to_string(), |v| format!("{v:?}"));
        wtr.write_record([r.series_id.clone(), r.date.to_string(), value, r.vintage_date.to_string()])
            .map_err(err)?;
    }
    wtr.flush().map_err(|e| Error::io("<vintage csv>", e))
}
