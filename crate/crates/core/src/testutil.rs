use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::model::QvarParams;

/// Small random QVAR with shrunk lag matrices and a well-conditioned scale.
pub(crate) fn random_params(n: usize, p: usize, rng: &mut impl Rng) -> QvarParams {
    let b0 = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let lags = (0..p)
        .map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.3..0.3)))
        .collect();
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let sigma = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
    QvarParams::new(b0, lags, sigma).unwrap()
}
