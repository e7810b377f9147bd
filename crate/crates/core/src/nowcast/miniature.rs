use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};

use crate::data::{Frequency, SeriesSpec, Transformation, VintageRow, YearMonth};
use crate::error::Result;
use crate::model::{QuantileConfig, QvarParams};
use crate::nowcast::{simulate_dgp, MissingTemplate, SyntheticDgp};

pub const MINIATURE_SEED: u64 = 20_190_331;

/// Series of the bundled miniature dataset: eight monthly indicators and
/// quarterly real GDP, with their FRED mnemonics.
pub fn miniature_specs() -> Vec<SeriesSpec> {
    use Frequency::*;
    use Transformation::*;
    [
        ("AWHMAN", Monthly, Scale01),
        ("CPIAUCSL", Monthly, Logdiff100),
        ("INDPRO", Monthly, Logdiff100),
        ("SP500", Monthly, Logdiff100),
        ("FEDFUNDS", Monthly, Level),
        ("GS10", Monthly, Level),
        ("UNRATE", Monthly, Level),
        ("NFCI", Monthly, Level),
        ("GDPC1", Quarterly, Logdiff400),
    ]
    .into_iter()
    .map(|(id, f, t)| SeriesSpec { id: id.to_string(), frequency: f, transformation: t })
    .collect()
}

/// Ten years (2010–2019) of synthetic raw data in the ingestion format.
///
/// Values are simulated in transformed units from a stable nine-series QVAR
/// and mapped back to levels. Monthly values are released at the end of
/// their month, except CPIAUCSL and INDPRO which come a month later. GDP is
/// first released at the end of the quarter's last month and revised one
/// quarter later, so origins in the third, first and second month of a
/// quarter have no, one and two months of GDP delay.
pub fn miniature_dataset(seed: u64) -> Result<Vec<VintageRow>> {
    let specs = miniature_specs();
    let n = specs.len();
    let mean = [4.1, 0.18, 0.15, 0.7, 1.0, 2.6, 6.5, -0.5, 0.75];
    let sd = [0.02, 0.07, 0.25, 1.2, 0.08, 0.08, 0.06, 0.05, 0.3];
    let persist = [0.7, 0.3, 0.2, 0.1, 0.95, 0.9, 0.95, 0.85, 0.3];
    let mut lag = DMatrix::from_diagonal(&DVector::from_row_slice(&persist));
    lag[(8, 2)] = 0.6; // industrial production feeds GDP
    lag[(8, 7)] = -1.5; // tighter financial conditions lower GDP
    lag[(6, 8)] = -0.01;
    lag[(3, 7)] = -2.0;
    let mu = DVector::from_row_slice(&mean);
    let b0 = (DMatrix::identity(n, n) - &lag) * &mu;
    let sigma = DMatrix::from_fn(n, n, |i, j| {
        let rho = if i == j { 1.0 } else { 0.15 };
        rho * sd[i] * sd[j]
    });
    let params = QvarParams::new(b0, vec![lag], sigma)?;
    let q = QuantileConfig::uniform(0.5, n)?;
    let dgp = SyntheticDgp {
        start: YearMonth { year: 2010, month: 1 },
        ..SyntheticDgp::new(params, q, 120, MissingTemplate::fully_observed(n), seed)?
    };
    let truth = simulate_dgp(&dgp)?.truth;

    let date = |y: i32, m: u32, d: u32| NaiveDate::from_ymd_opt(y, m, d).expect("valid date");
    let mut rows = Vec::new();
    let mut push = |id: &str, m: YearMonth, value: f64, vintage: NaiveDate| {
        rows.push(VintageRow { series_id: id.to_string(), date: m.first_day(), value: Some(value), vintage_date: vintage, line: 0 });
    };
    // GDP: the weights sum to three, so a monthly mean of 0.75 gives about
    // 2.2% annualised quarterly growth
    // start values for the level-reconstructed series, with one pre-sample month
    let base = [41.0, 218.0, 92.0, 1115.0, 0.0, 0.0, 0.0, 0.0, 14_700.0];
    for (i, spec) in specs.iter().enumerate() {
        let pre = dgp.start.plus(-1);
        match spec.transformation {
            Transformation::Scale01 => {
                for t in 0..120 {
                    let m = dgp.start.plus(t as i64);
                    push(&spec.id, m, round(10.0 * truth[(t, i)], 2), m.last_day());
                }
            }
            Transformation::Level => {
                for t in 0..120 {
                    let m = dgp.start.plus(t as i64);
                    push(&spec.id, m, round(truth[(t, i)], 2), m.last_day());
                }
            }
            Transformation::Logdiff100 => {
                let lagged = matches!(spec.id.as_str(), "CPIAUCSL" | "INDPRO");
                let mut level = base[i];
                push(&spec.id, pre, round(level, 3), pre.last_day());
                for t in 0..120 {
                    let m = dgp.start.plus(t as i64);
                    level *= (truth[(t, i)] / 100.0).exp();
                    let released = if lagged { m.plus(1).last_day() } else { m.last_day() };
                    push(&spec.id, m, round(level, 3), released);
                }
            }
            Transformation::Logdiff400 => {
                // quarterly levels whose 400·Δln equals the weighted monthly path
                let mut level = base[i];
                let first_q = dgp.start.plus(-3);
                push(&spec.id, first_q, round(level, 1), date(2009, 12, 31));
                for t in (2..120).step_by(3) {
                    let m = dgp.start.plus(t as i64);
                    let g = if t >= 4 {
                        (0..5).map(|j| crate::state_space::MM_WEIGHTS[j] * truth[(t - 4 + j, i)]).sum::<f64>()
                    } else {
                        truth[(t, i)]
                    };
                    level *= (g / 400.0).exp();
                    let quarter = m.quarter_month(1);
                    push(&spec.id, quarter, round(level, 1), m.last_day());
                    if m.plus(3) < dgp.start.plus(120) {
                        // small revision a quarter later
                        let revised = level * (1.0 + 0.0004 * ((t as f64) * 0.7).sin());
                        push(&spec.id, quarter, round(revised, 1), m.plus(3).last_day());
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn round(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}
