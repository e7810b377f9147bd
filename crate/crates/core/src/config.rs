//! Model configuration files.
//!
//! ```toml
//! version = 1
//!
//! [model]
//! p = 1
//! tau = [0.1]          # one level for every series, or one per series
//! target = "GDPC1"
//!
//! [sampler]
//! draws = 2000
//! burn_in = 500
//! chains = 2
//! seed = 42
//!
//! [[series]]
//! id = "INDPRO"
//! frequency = "monthly"
//! transformation = "logdiff100"
//! ```

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{MixedFrequencyPanel, PanelOptions, SeriesSpec, YearMonth};
use crate::error::{Error, Result};
use crate::gibbs::{default_prior, PriorSpec, SamplerSettings};
use crate::model::QuantileConfig;
use crate::nowcast::NowcastOptions;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub version: u32,
    pub model: ModelSection,
    pub sampler: SamplerSection,
    #[serde(default)]
    pub prior: PriorSection,
    #[serde(default)]
    pub nowcast: NowcastSection,
    pub series: Vec<SeriesSpec>,
}

fn default_anchor() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub p: usize,
    pub tau: Vec<f64>,
    pub target: String,
    #[serde(default = "default_anchor")]
    pub quarter_anchor: u32,
    /// First grid month; defaults to the first quarter with every monthly
    /// series available.
    #[serde(default)]
    pub start: Option<YearMonth>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub draws: usize,
    pub burn_in: usize,
    #[serde(default = "one")]
    pub chains: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub thin: usize,
    #[serde(default = "one")]
    pub sigma_sweeps: usize,
    #[serde(default = "one")]
    pub yu_thin: usize,
    #[serde(default)]
    pub slice_widths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    /// `Ω_β = v·I`; default 100.
    pub beta_variance: Option<f64>,
    /// Inverse-Wishart degrees of freedom; default `n + 2`.
    pub sigma_df: Option<f64>,
    /// `Φ₀ = s·I`; default 1.
    pub sigma_scale: Option<f64>,
}

fn default_mass() -> f64 {
    0.68
}

fn default_paths() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NowcastSection {
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default = "default_paths")]
    pub paths_per_draw: usize,
}

impl Default for NowcastSection {
    fn default() -> Self {
        Self { mass: default_mass(), paths_per_draw: default_paths() }
    }
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version)));
        }
        if self.series.is_empty() {
            return Err(Error::Config("no series declared".into()));
        }
        for (k, s) in self.series.iter().enumerate() {
            s.validate()?;
            if self.series[..k].iter().any(|o| o.id == s.id) {
                return Err(Error::Config(format!("series '{}' declared twice", s.id)));
            }
        }
        if !self.series.iter().any(|s| s.id == self.model.target) {
            return Err(Error::Config(format!("target '{}' is not a declared series", self.model.target)));
        }
        if self.model.tau.len() != 1 && self.model.tau.len() != self.series.len() {
            return Err(Error::Config(format!("{} quantile levels for {} series", self.model.tau.len(), self.series.len())));
        }
        if self.model.p == 0 {
            return Err(Error::Config("lag order p must be at least 1".into()));
        }
        if !(1..=3).contains(&self.model.quarter_anchor) {
            return Err(Error::Config("quarter_anchor must be 1, 2 or 3".into()));
        }
        if self.sampler.chains == 0 {
            return Err(Error::Settings("at least one chain is required".into()));
        }
        self.quantiles()?;
        self.sampler_settings().validate()?;
        if !(self.nowcast.mass > 0.0 && self.nowcast.mass < 1.0) || self.nowcast.paths_per_draw == 0 {
            return Err(Error::Config("nowcast mass must lie in (0, 1) and paths_per_draw be positive".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.series.len()
    }

    pub fn quantiles(&self) -> Result<QuantileConfig> {
        match self.model.tau.as_slice() {
            [t] => QuantileConfig::uniform(*t, self.n()),
            ts => QuantileConfig::new(ts),
        }
    }

    pub fn sampler_settings(&self) -> SamplerSettings {
        let s = &self.sampler;
        SamplerSettings {
            thin: s.thin,
            slice_widths: s.slice_widths.clone(),
            sigma_sweeps: s.sigma_sweeps,
            yu_thin: s.yu_thin,
            ..SamplerSettings::new(s.draws, s.burn_in, s.seed)
        }
    }

    pub fn panel_options(&self) -> PanelOptions {
        PanelOptions {
            start: self.model.start,
            quarter_anchor: self.model.quarter_anchor,
            target: Some(self.model.target.clone()),
        }
    }

    pub fn nowcast_options(&self) -> NowcastOptions {
        NowcastOptions { mass: self.nowcast.mass, paths_per_draw: self.nowcast.paths_per_draw }
    }

    /// Default prior with the configured overrides.
    pub fn prior(&self, panel: &MixedFrequencyPanel) -> Result<PriorSpec> {
        let n = self.n();
        let mut prior = default_prior(panel, self.model.p)?;
        if let Some(v) = self.prior.beta_variance {
            prior = prior.with_beta_variance(v)?;
        }
        if self.prior.sigma_df.is_some() || self.prior.sigma_scale.is_some() {
            let df = self.prior.sigma_df.unwrap_or(prior.sigma_df());
            let scale = self.prior.sigma_scale.map_or_else(|| prior.sigma_scale().clone(), |s| DMatrix::identity(n, n) * s);
            prior = prior.with_sigma(df, scale)?;
        }
        Ok(prior)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serialises")))
    }
}
