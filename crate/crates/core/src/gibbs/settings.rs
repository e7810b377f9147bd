use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    /// Retained draws per chain.
    pub draws: usize,
    pub burn_in: usize,
    #[serde(default = "one")]
    pub thin: usize,
    pub seed: u64,
    /// Initial slice widths for the log-Cholesky coordinates of `Σ`; empty
    /// for the default, one value to broadcast. Adapted during burn-in.
    #[serde(default)]
    pub slice_widths: Vec<f64>,
    /// Slice sweeps over `Σ` per iteration.
    #[serde(default = "one")]
    pub sigma_sweeps: usize,
    /// Keep every `yu_thin`-th retained draw of the missing cells.
    #[serde(default = "one")]
    pub yu_thin: usize,
    #[serde(default)]
    pub store_w: bool,
}

impl SamplerSettings {
    pub fn new(draws: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            draws,
            burn_in,
            thin: 1,
            seed,
            slice_widths: Vec::new(),
            sigma_sweeps: 1,
            yu_thin: 1,
            store_w: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::Settings("draws must be positive".into()));
        }
        if self.thin == 0 || self.yu_thin == 0 || self.sigma_sweeps == 0 {
            return Err(Error::Settings("thin, yu_thin and sigma_sweeps must be at least 1".into()));
        }
        if self.slice_widths.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Settings("slice widths must be positive".into()));
        }
        Ok(())
    }

    pub fn iterations(&self) -> usize {
        self.burn_in + self.draws * self.thin
    }
}
