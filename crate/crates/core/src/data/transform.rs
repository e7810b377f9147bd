use chrono::NaiveDate;

use crate::data::{Frequency, SeriesSpec, Transformation, YearMonth};
use crate::error::{Error, Result};

/// A series on its native frequency after transformation, keyed by month
/// (quarterly values carry the month of their observation date).
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSeries {
    pub id: String,
    pub frequency: Frequency,
    pub values: Vec<(YearMonth, f64)>,
}

/// Applies the series' transformation to date-sorted raw values.
///
/// Differenced series lose their first observation, and any observation whose
/// predecessor period is absent.
pub fn transform(raw: &[(NaiveDate, f64)], spec: &SeriesSpec) -> Result<TransformedSeries> {
    let step = match spec.frequency {
        Frequency::Monthly => 1,
        Frequency::Quarterly => 3,
    };
    let mut values = Vec::with_capacity(raw.len());
    let fail = |date: &NaiveDate, reason: String| Error::Transformation {
        series: spec.id.clone(),
        date: date.to_string(),
        reason,
    };
    for (k, (date, x)) in raw.iter().enumerate() {
        if !x.is_finite() {
            return Err(fail(date, format!("non-finite value {x}")));
        }
        let month = YearMonth::from_date(*date);
        let v = match spec.transformation {
            Transformation::Level => *x,
            Transformation::Scale01 => 0.1 * x,
            Transformation::Logdiff100 | Transformation::Logdiff400 => {
                if *x <= 0.0 {
                    return Err(fail(date, format!("log of non-positive level {x}")));
                }
                let scale = if spec.transformation == Transformation::Logdiff100 { 100.0 } else { 400.0 };
                let Some((prev_date, prev)) = k.checked_sub(1).map(|j| raw[j]) else {
                    continue;
                };
                if YearMonth::from_date(prev_date).months_until(month) != step {
                    continue;
                }
                if prev <= 0.0 {
                    return Err(fail(&prev_date, format!("log of non-positive level {prev}")));
                }
                scale * (x.ln() - prev.ln())
            }
        };
        values.push((month, v));
    }
    Ok(TransformedSeries {
        id: spec.id.clone(),
        frequency: spec.frequency,
        values,
    })
}
