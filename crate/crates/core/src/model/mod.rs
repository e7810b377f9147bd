//! Quantile-VAR parametrisation and likelihood.

mod likelihood;
mod params;
mod quantile;

pub use likelihood::complete_data_loglik;
pub use params::{beta_pack, beta_unpack, design_matrix, location, regressor, BetaVector, QvarParams};
pub(crate) use quantile::check_tau;
pub use quantile::{make_quantile_config, theta1, theta2, QuantileConfig};
