//! The book's chapters, one module each, so `cargo test --doc` runs every
//! listing against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/quantiles.md")]
pub mod quantiles {}
#[doc = include_str!("../../../book/src/mixed-frequency.md")]
pub mod mixed_frequency {}
#[doc = include_str!("../../../book/src/sampling.md")]
pub mod sampling {}
#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}
#[doc = include_str!("../../../book/src/nowcasting.md")]
pub mod nowcasting {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
