//! Priors, the four-step Gibbs sampler, chain storage and convergence
//! diagnostics.
//!
//! Each iteration draws, in order, the missing cells under the quarterly
//! constraints, the coefficients `β`, the mixing weights `w` and the scale
//! matrix `Σ`.

mod chain;
mod diagnostics;
mod prior;
mod settings;
mod steps;

pub use chain::{panel_digest, run_chain, run_chain_indexed, run_chains, ChainHeader, PosteriorChain};
pub use diagnostics::{diagnostics, effective_sample_size, split_rhat, Diagnostics, ParameterSummary};
pub use prior::{default_prior, default_prior_from_data, PriorSpec};
pub use settings::SamplerSettings;
pub use steps::{
    beta_conditional, draw_beta, draw_sigma, draw_w, pack_log_cholesky, unpack_log_cholesky, SigmaTarget,
};
