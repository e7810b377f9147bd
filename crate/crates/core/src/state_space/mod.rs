//! Stacked matrix form of the QVAR over a monthly grid, the split of its cells
//! into observed and missing parts, the quarterly aggregation constraints, and
//! the constrained draw of the missing cells.

mod aggregation;
mod fill;
mod missing;
mod selection;
mod stacked;

pub use aggregation::{
    build_aggregation_constraints, AggregationConstraints, AggregationRow, DroppedObservation, MM_WEIGHTS,
};
pub use fill::naive_fill;
pub use missing::{conditional_missing_distribution, draw_missing, factor_missing, missing_sampler};
pub use selection::SelectionMatrices;
pub use stacked::{build_stacked_system, StackedSystem};
