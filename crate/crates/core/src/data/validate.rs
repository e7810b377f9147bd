use std::path::Path;

use serde::Serialize;

use crate::data::{
    assemble_panel, classify_nowcast, read_vintage_rows, select_vintage, transform, NowcastClass, PanelOptions,
    SeriesSpec, YearMonth,
};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IssueKind {
    Schema,
    Data,
    Transformation,
    Calendar,
    Config,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationIssue {
    pub kind: IssueKind,
    pub series: Option<String>,
    pub date: Option<String>,
    pub message: String,
}

impl ValidationIssue {
    pub fn from_error(e: Error) -> Self {
        let kind = match &e {
            Error::Format(_) | Error::Io { .. } => IssueKind::Schema,
            Error::Transformation { .. } => IssueKind::Transformation,
            Error::Calendar(_) => IssueKind::Calendar,
            Error::Config(_) => IssueKind::Config,
            _ => IssueKind::Data,
        };
        let (series, date) = match &e {
            Error::Transformation { series, date, .. } => (Some(series.clone()), Some(date.clone())),
            _ => (None, None),
        };
        Self { kind, series, date, message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub origin: YearMonth,
    pub issues: Vec<ValidationIssue>,
    /// Set when the inputs assemble into a classifiable panel.
    pub class: Option<NowcastClass>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks a vintage file against the series declarations at `origin`:
/// schema, transformation domains, then calendar consistency. Every
/// transformation failure is reported, one per series.
pub fn validate_inputs(path: &Path, specs: &[SeriesSpec], origin: YearMonth, options: &PanelOptions) -> ValidationReport {
    let mut report = ValidationReport { origin, issues: Vec::new(), class: None };
    let mut fail = |e| {
        report.issues.push(ValidationIssue::from_error(e));
    };
    let raw = match read_vintage_rows(path).and_then(|rows| select_vintage(&rows, specs, origin.last_day())) {
        Ok(raw) => raw,
        Err(e) => {
            fail(e);
            return report;
        }
    };
    for spec in specs {
        if let Err(e) = spec.validate().and_then(|_| transform(&raw[&spec.id], spec)) {
            fail(e);
        }
    }
    if !report.issues.is_empty() {
        return report;
    }
    match assemble_panel(&raw, origin, specs, options).and_then(|p| classify_nowcast(&p)) {
        Ok(class) => report.class = Some(class),
        Err(e) => report.issues.push(ValidationIssue::from_error(e)),
    }
    report
}
