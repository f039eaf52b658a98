//! Deterministic random streams keyed by (seed, chunk index).
//!
//! Every Monte Carlo operation in this crate takes an explicit stream. A
//! campaign of `trials` draws is partitioned into `chunks` contiguous blocks;
//! block `c` is served by the ChaCha12 stream derived from `(seed, c)`. The
//! derivation is a pure function of those two integers, so any degree of
//! worker parallelism replays the identical draw sequence block by block.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Domain-separation tag mixed into every derived stream seed.
const STREAM_TAG: u64 = 0x9e37_79b9_7f4a_7c15;

/// A single deterministic random stream.
pub struct Stream {
    rng: ChaCha12Rng,
}

impl Stream {
    /// Stream for one chunk of a campaign. `(seed, chunk)` fully determines
    /// the sequence.
    pub fn for_chunk(seed: u64, chunk: u64) -> Self {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&chunk.to_le_bytes());
        key[16..24].copy_from_slice(&STREAM_TAG.to_le_bytes());
        Stream {
            rng: ChaCha12Rng::from_seed(key),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1); 52-bit resolution, never 0 or 1,
    /// so logs and reciprocals are always finite.
    #[inline]
    pub fn u01_open(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    #[inline]
    pub fn u01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard exponential via inversion.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.u01_open().ln()
    }

    /// Standard normal via the Marsaglia polar method.
    pub fn standard_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.u01_open() - 1.0;
            let v = 2.0 * self.u01_open() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    /// An unbiased random sign.
    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Sizes of the `chunks` blocks that partition `trials` draws. Chunk `c`
/// receives `trials / chunks` draws plus one extra when `c < trials % chunks`.
pub fn chunk_sizes(trials: u64, chunks: u64) -> Vec<u64> {
    assert!(chunks >= 1, "at least one chunk required");
    let base = trials / chunks;
    let rem = trials % chunks;
    (0..chunks)
        .map(|c| base + u64::from(c < rem))
        .collect()
}
