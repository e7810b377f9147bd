//! Random streams.
//!
//! Everything random flows from one 64-bit root seed. A stream is the ChaCha8
//! generator keyed by `seed_from_u64(root)` with its 64-bit stream id set to a
//! purpose-specific value, so streams never overlap and do not depend on the
//! order in which they are created:
//!
//! | stream id            | use                                          |
//! |----------------------|----------------------------------------------|
//! | `chain`              | Gibbs chain number `chain` (0, 1, ...)       |
//! | `1 << 32 \| chain`   | forecast-path simulation for that chain      |
//! | `2 << 32`            | synthetic data generation                    |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const FORECAST_STREAM_BASE: u64 = 1 << 32;
pub const SIMULATION_STREAM: u64 = 2 << 32;

pub fn stream(root_seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(id);
    rng
}
