use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::MixedFrequencyPanel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NowcastLabel {
    Forecast,
    NowcastT1,
    NowcastT2,
}

impl NowcastLabel {
    pub const ALL: [NowcastLabel; 3] = [NowcastLabel::Forecast, NowcastLabel::NowcastT1, NowcastLabel::NowcastT2];

    pub fn delay(self) -> u32 {
        self as u32
    }

    /// Column heading used in reports.
    pub fn heading(self) -> &'static str {
        match self {
            NowcastLabel::Forecast => "Forecast",
            NowcastLabel::NowcastT1 => "Nowcast T+1",
            NowcastLabel::NowcastT2 => "Nowcast T+2",
        }
    }
}

impl fmt::Display for NowcastLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.heading())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NowcastClass {
    pub label: NowcastLabel,
    pub gdp_delay_months: u32,
}

impl NowcastClass {
    pub fn from_delay(delay: u32) -> Result<Self> {
        let label = match delay {
            0 => NowcastLabel::Forecast,
            1 => NowcastLabel::NowcastT1,
            2 => NowcastLabel::NowcastT2,
            d => return Err(Error::Calendar(format!("GDP release delay of {d} months"))),
        };
        Ok(Self { label, gdp_delay_months: delay })
    }

    /// Grid months the class reports on, relative to the origin: the three
    /// months after it for a forecast, otherwise the unreleased months up to it.
    pub fn target_offsets(self) -> Vec<i64> {
        match self.label {
            NowcastLabel::Forecast => vec![1, 2, 3],
            NowcastLabel::NowcastT1 => vec![0],
            NowcastLabel::NowcastT2 => vec![-1, 0],
        }
    }
}

/// Months between the last month covered by a released value of the target
/// series and the origin.
pub fn classify_nowcast(panel: &MixedFrequencyPanel) -> Result<NowcastClass> {
    let last = panel.calendar[panel.target]
        .ok_or_else(|| Error::Calendar(format!("{} has no released value", panel.series[panel.target].id)))?;
    let delay = panel.t_len() - 1 - last;
    NowcastClass::from_delay(delay as u32)
}
