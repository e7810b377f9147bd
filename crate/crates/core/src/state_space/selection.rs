use nalgebra::{DMatrix, DVector};

use crate::data::MixedFrequencyPanel;
use crate::error::{Error, Result};

/// Partition of the `T·n` grid cells into missing cells `y^u` and known
/// cells `y^o`, each kept in cell order.
///
/// Cells in the first `p` months condition the recursion and are always
/// treated as known, whether observed or filled.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionMatrices {
    n: usize,
    t_len: usize,
    missing: Vec<usize>,
    observed: Vec<usize>,
    labels: Vec<String>,
}

impl SelectionMatrices {
    /// `mask[t·n + i]` is true where the cell is observed.
    pub fn from_mask(mask: &[bool], n: usize, p: usize) -> Result<Self> {
        if n == 0 || !mask.len().is_multiple_of(n) {
            return Err(Error::Dimension(format!("mask of length {} for {n} series", mask.len())));
        }
        let t_len = mask.len() / n;
        let (mut missing, mut observed) = (Vec::new(), Vec::new());
        for (k, &seen) in mask.iter().enumerate() {
            if seen || k / n < p {
                observed.push(k);
            } else {
                missing.push(k);
            }
        }
        let labels = missing.iter().map(|k| format!("series {} at month {}", k % n, k / n)).collect();
        Ok(Self { n, t_len, missing, observed, labels })
    }

    pub fn from_panel(panel: &MixedFrequencyPanel, p: usize) -> Result<Self> {
        let mut sel = Self::from_mask(&panel.observed_mask(), panel.n(), p)?;
        sel.labels = sel.missing.iter().map(|&k| panel.cell_name(k / sel.n, k % sel.n)).collect();
        Ok(sel)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn cells(&self) -> usize {
        self.n * self.t_len
    }

    pub fn missing(&self) -> &[usize] {
        &self.missing
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    /// Position of a cell within `y^u`.
    pub fn missing_position(&self, cell: usize) -> Option<usize> {
        self.missing.binary_search(&cell).ok()
    }

    pub fn label(&self, missing_pos: usize) -> &str {
        &self.labels[missing_pos]
    }

    /// `M_u`, `Tn × n_u`.
    pub fn mu_dense(&self) -> DMatrix<f64> {
        selector(self.cells(), &self.missing)
    }

    /// `M_o`, `Tn × n_o`.
    pub fn mo_dense(&self) -> DMatrix<f64> {
        selector(self.cells(), &self.observed)
    }

    /// `M_u y^u + M_o y^o`.
    pub fn combine(&self, yu: &DVector<f64>, yo: &DVector<f64>) -> Result<DVector<f64>> {
        if yu.len() != self.missing.len() || yo.len() != self.observed.len() {
            return Err(Error::Dimension(format!(
                "{} missing and {} known values for a {}/{} split",
                yu.len(),
                yo.len(),
                self.missing.len(),
                self.observed.len()
            )));
        }
        let mut y = DVector::zeros(self.cells());
        for (v, &k) in yu.iter().zip(&self.missing) {
            y[k] = *v;
        }
        for (v, &k) in yo.iter().zip(&self.observed) {
            y[k] = *v;
        }
        Ok(y)
    }

    pub fn take_missing(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.missing.len(), self.missing.iter().map(|&k| y[k]))
    }

    pub fn take_observed(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.observed.len(), self.observed.iter().map(|&k| y[k]))
    }
}

fn selector(rows: usize, cols: &[usize]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols.len());
    for (c, &r) in cols.iter().enumerate() {
        m[(r, c)] = 1.0;
    }
    m
}
