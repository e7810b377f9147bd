use nalgebra::DVector;

use crate::data::{Frequency, MixedFrequencyPanel};

/// Crude values for every cell: linear interpolation of monthly series (flat
/// beyond the ends) and a third of each quarterly value on the months of its
/// window (flat beyond the first and last quarters).
///
/// A third is the monthly value that reproduces the quarterly one under the
/// aggregation weights when growth is constant.
pub fn naive_fill(panel: &MixedFrequencyPanel) -> DVector<f64> {
    let (n, t_len) = (panel.n(), panel.t_len());
    let mut y = DVector::zeros(n * t_len);
    for i in 0..n {
        let knots: Vec<(usize, f64)> = match panel.series[i].frequency {
            Frequency::Monthly => (0..t_len).filter_map(|t| panel.get(t, i).map(|v| (t, v))).collect(),
            Frequency::Quarterly => panel
                .quarterly_values(i)
                .into_iter()
                .flat_map(|(m, v)| (m.saturating_sub(2)..=m).map(move |t| (t, v / 3.0)))
                .collect(),
        };
        for t in 0..t_len {
            y[t * n + i] = interpolate(&knots, t);
        }
    }
    y
}

fn interpolate(knots: &[(usize, f64)], t: usize) -> f64 {
    let Some(first) = knots.first() else {
        return 0.0;
    };
    let last = knots[knots.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let k = knots.partition_point(|&(s, _)| s <= t);
    let (a, b) = (knots[k - 1], knots[k]);
    if a.0 == t {
        return a.1;
    }
    a.1 + (b.1 - a.1) * (t - a.0) as f64 / (b.0 - a.0) as f64
}
