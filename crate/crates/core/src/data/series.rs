use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Monthly,
    Quarterly,
}

/// Closed set of data transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transformation {
    /// `x_t`
    Level,
    /// `0.1 · x_t`
    Scale01,
    /// `100 · Δ ln x_t`
    Logdiff100,
    /// `400 · Δ ln x_t`
    Logdiff400,
}

impl Transformation {
    pub fn is_difference(self) -> bool {
        matches!(self, Transformation::Logdiff100 | Transformation::Logdiff400)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub id: String,
    pub frequency: Frequency,
    pub transformation: Transformation,
}

impl SeriesSpec {
    pub fn new(id: impl Into<String>, frequency: Frequency, transformation: Transformation) -> Result<Self> {
        let spec = Self {
            id: id.into(),
            frequency,
            transformation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::Config("series id must not be empty".into()));
        }
        if self.frequency == Frequency::Quarterly
            && !matches!(self.transformation, Transformation::Level | Transformation::Logdiff400)
        {
            return Err(Error::Config(format!(
                "quarterly series {} must use level or logdiff400",
                self.id
            )));
        }
        Ok(())
    }
}
