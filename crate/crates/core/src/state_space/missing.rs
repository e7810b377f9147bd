use nalgebra::DVector;
use rand::Rng;

use crate::dist::{ConstrainedSampler, FactoredPrecision, PrecisionGaussian};
use crate::error::{Error, Result};
use crate::linalg::BandedSymmetric;
use crate::state_space::{AggregationConstraints, SelectionMatrices, StackedSystem};

/// Law of `y^u` given `y^o`: precision `K_y = M_uᵀ𝐁ᵀ𝚺⁻¹𝐁M_u` and
/// right-hand side `M_uᵀ𝐁ᵀ𝚺⁻¹(𝐛 − 𝐁M_o y^o)`.
pub fn conditional_missing_distribution(
    sys: &StackedSystem,
    sel: &SelectionMatrices,
    y_obs: &DVector<f64>,
) -> Result<PrecisionGaussian> {
    if sel.cells() != sys.cells() {
        return Err(Error::Dimension(format!("selection over {} cells for a {}-cell system", sel.cells(), sys.cells())));
    }
    let missing = sel.missing();
    if missing.is_empty() {
        return Err(Error::Domain("no missing cells to draw".into()));
    }
    let full = sys.precision();
    let bw = full.bandwidth();
    let mut k = BandedSymmetric::zeros(missing.len(), bw);
    for (a, &ca) in missing.iter().enumerate() {
        for b in (a.saturating_sub(bw)..=a).rev() {
            let cb = missing[b];
            if ca - cb > bw {
                break;
            }
            k.add(a, b, full.get(ca, cb));
        }
    }
    for a in 0..missing.len() {
        if !(k.get(a, a) > 0.0) {
            return Err(Error::Singular { cell: sel.label(a).to_string() });
        }
    }
    let known = sel.combine(&DVector::zeros(missing.len()), y_obs)?;
    let r = sys.bigb() - sys.apply(&known)?;
    let rhs = sel.take_missing(&sys.weighted_transpose(&r)?);
    PrecisionGaussian::new(rhs, k)
}

/// Factorises the conditional, naming the first unidentified cell on failure.
pub fn factor_missing(dist: &PrecisionGaussian, sel: &SelectionMatrices) -> Result<FactoredPrecision> {
    dist.factor().map_err(|e| match e {
        Error::NotPositiveDefinite { minor } => Error::Singular { cell: sel.label(minor - 1).to_string() },
        other => other,
    })
}

/// Sampler for `y^u` given `y^o` under `M_a y^u = ỹ^u`.
pub fn missing_sampler(
    sys: &StackedSystem,
    sel: &SelectionMatrices,
    agg: &AggregationConstraints,
    y_obs: &DVector<f64>,
) -> Result<ConstrainedSampler> {
    let dist = conditional_missing_distribution(sys, sel, y_obs)?;
    let base = factor_missing(&dist, sel)?;
    ConstrainedSampler::from_factored(base, agg.ma(sel)?, agg.ytilde())
}

pub fn draw_missing<R: Rng + ?Sized>(
    sys: &StackedSystem,
    sel: &SelectionMatrices,
    agg: &AggregationConstraints,
    y_obs: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    Ok(missing_sampler(sys, sel, agg, y_obs)?.sample(rng))
}
