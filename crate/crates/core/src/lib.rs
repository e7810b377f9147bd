pub mod config;
pub mod data;
pub mod dist;
pub mod error;
pub mod gibbs;
pub mod linalg;
pub mod model;
pub mod nowcast;
pub mod rng;
pub mod special;
pub mod state_space;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
