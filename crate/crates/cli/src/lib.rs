//! Command implementations behind the `mfqvar` binary.

pub mod args;
mod manifest;
mod run;

pub use args::Cli;
pub use manifest::Manifest;
pub use run::{run, MINIATURE_CONFIG};

use mfqvar::Error;

/// 0 on success, 3 for numerical or sampler failures, 2 for everything else.
pub fn exit_code(result: &Result<(), Error>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_numerical() => 3,
        Err(_) => 2,
    }
}
