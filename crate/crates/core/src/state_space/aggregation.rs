use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::MixedFrequencyPanel;
use crate::error::{Error, Result};
use crate::state_space::SelectionMatrices;

/// Weights on months `t−4, …, t` tying a quarterly log-difference to the
/// latent monthly ones.
pub const MM_WEIGHTS: [f64; 5] = [1.0 / 3.0, 2.0 / 3.0, 1.0, 2.0 / 3.0, 1.0 / 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationRow {
    pub series: usize,
    /// 0-based grid month of the quarterly value.
    pub month: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedObservation {
    pub series: usize,
    pub month: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationConstraints {
    n: usize,
    pub rows: Vec<AggregationRow>,
    pub dropped: Vec<DroppedObservation>,
}

pub fn build_aggregation_constraints(panel: &MixedFrequencyPanel) -> AggregationConstraints {
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for o in &panel.quarterly_obs {
        if o.month < 4 {
            log::warn!(
                "dropping {} value at {}: fewer than four months of history",
                panel.series[o.series].id,
                panel.month(o.month)
            );
            dropped.push(DroppedObservation {
                series: o.series,
                month: o.month,
                reason: "fewer than four months of history".into(),
            });
        } else {
            rows.push(AggregationRow { series: o.series, month: o.month, value: o.value });
        }
    }
    AggregationConstraints { n: panel.n(), rows, dropped }
}

impl AggregationConstraints {
    pub fn new(n: usize, rows: Vec<AggregationRow>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.series >= n || r.month < 4) {
            return Err(Error::Dimension(format!("constraint at series {} month {} has no full window", r.series, r.month)));
        }
        Ok(Self { n, rows, dropped: Vec::new() })
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// Grid cells of a row, oldest first, aligned with [`MM_WEIGHTS`].
    pub fn cells(&self, row: &AggregationRow) -> [usize; 5] {
        std::array::from_fn(|j| (row.month + j - 4) * self.n + row.series)
    }

    pub fn ytilde(&self) -> DVector<f64> {
        DVector::from_iterator(self.k(), self.rows.iter().map(|r| r.value))
    }

    /// Constraint matrix over all `T·n` cells.
    pub fn ma_full(&self, t_len: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.k(), t_len * self.n);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, w) in self.cells(row).iter().zip(MM_WEIGHTS) {
                m[(r, *c)] = w;
            }
        }
        m
    }

    /// Drops rows whose window reaches a known cell (the fixed initial block).
    pub fn restrict_to(&self, sel: &SelectionMatrices) -> Self {
        let mut out = Self { n: self.n, rows: Vec::new(), dropped: self.dropped.clone() };
        for row in &self.rows {
            if self.cells(row).iter().all(|&c| sel.missing_position(c).is_some()) {
                out.rows.push(*row);
            } else {
                out.dropped.push(DroppedObservation {
                    series: row.series,
                    month: row.month,
                    reason: "window reaches the fixed initial block".into(),
                });
            }
        }
        out
    }

    /// `M_a`, `k × n_u`, over the missing cells of `sel`.
    pub fn ma(&self, sel: &SelectionMatrices) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.k(), sel.missing().len());
        for (r, row) in self.rows.iter().enumerate() {
            for (c, w) in self.cells(row).iter().zip(MM_WEIGHTS) {
                let pos = sel.missing_position(*c).ok_or_else(|| {
                    Error::ConstraintRank(format!("constraint at month {} touches a known cell", row.month))
                })?;
                m[(r, pos)] = w;
            }
        }
        Ok(m)
    }
}
