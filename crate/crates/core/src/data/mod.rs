//! Vintage ingestion, transformations, monthly-grid assembly and nowcast
//! classification.

mod calendar;
mod classify;
mod panel;
mod series;
mod transform;
mod validate;
mod vintage;

pub use calendar::YearMonth;
pub use classify::{classify_nowcast, NowcastClass, NowcastLabel};
pub use panel::{assemble_panel, MixedFrequencyPanel, PanelOptions, QuarterlyObs};
pub use series::{Frequency, SeriesSpec, Transformation};
pub use transform::{transform, TransformedSeries};
pub use validate::{validate_inputs, IssueKind, ValidationIssue, ValidationReport};
pub use vintage::{
    load_vintage, read_vintage_rows, select_vintage, write_vintage_csv, RawSeriesSet, VintageRow, VINTAGE_HEADER,
};
