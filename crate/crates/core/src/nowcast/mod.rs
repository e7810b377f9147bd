//! Nowcasts, report tables, counterfactuals and synthetic data.

mod counterfactual;
mod dgp;
mod miniature;
mod report;
mod result;

pub use counterfactual::{counterfactual, write_difference_table, CounterfactualResult, CounterfactualSpec, DifferenceSummary};
pub use dgp::{simulate_dgp, MissingTemplate, SimulatedData, SyntheticDgp};
pub use miniature::{miniature_dataset, miniature_specs, MINIATURE_SEED};
pub use report::{
    long_month, percentile_label, percentile_spread, rolling_report, write_nowcast_table, write_rolling_table,
    write_spread_table, RollingRow, SpreadRow,
};
pub use result::{in_sample_summary, nowcast, MonthSummary, NowcastOptions, NowcastResult, Variant};
