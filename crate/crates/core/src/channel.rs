//! Reproducible Rayleigh fading draws.
//!
//! Every Monte Carlo trial owns one ChaCha8 stream: the key is expanded from
//! the master seed and the 64-bit stream number is the trial index. Draws
//! for a trial therefore never depend on how trials are scheduled, on the
//! number of workers, or on how many trials are requested in total.
//!
//! Within a stream the fading powers are interleaved per relay
//! (`h2[0], g2[0], h2[1], g2[1], ...`), so the draws of relay `i` are the
//! same whether the network has `i + 1` relays or more.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Streams at the top of the 64-bit range are reserved for configuration
/// draws (CPU frequencies); trial indices never reach them.
const CONFIG_STREAM_BASE: u64 = u64::MAX;

/// Address of one substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Reserved substream for the `k`-th configuration draw of an experiment.
    pub fn config_stream(master_seed: u64, k: u64) -> Self {
        Self::new(master_seed, CONFIG_STREAM_BASE - k)
    }

    /// Uniform generator positioned at the start of this substream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(expand_key(self.master_seed));
        rng.set_stream(self.stream_id);
        rng
    }
}

fn expand_key(master_seed: u64) -> [u8; 32] {
    ChaCha8Rng::seed_from_u64(master_seed).get_seed()
}

/// Fading powers `|h_i|^2` and `|g_i|^2` of one realization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelDraw {
    pub h2: Vec<f64>,
    pub g2: Vec<f64>,
}

impl ChannelDraw {
    pub fn n_relays(&self) -> usize {
        self.h2.len()
    }
}

/// Uniform variate on the open interval (0, 1): the midpoint of one of 2^52
/// equal cells, so neither endpoint is reachable after rounding.
pub fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Exp(1) variate by inversion.
pub fn standard_exponential(rng: &mut impl RngCore) -> f64 {
    -open_unit(rng).ln()
}

/// Fading sampler with the key expansion hoisted out of the trial loop.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    key: [u8; 32],
}

impl ChannelSampler {
    pub fn new(master_seed: u64) -> Self {
        Self {
            key: expand_key(master_seed),
        }
    }

    /// Overwrite `draw` with the realization of `stream_id` for `n_relays`.
    pub fn fill(&self, stream_id: u64, n_relays: usize, draw: &mut ChannelDraw) {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream_id);
        draw.h2.clear();
        draw.g2.clear();
        for _ in 0..n_relays {
            draw.h2.push(standard_exponential(&mut rng));
            draw.g2.push(standard_exponential(&mut rng));
        }
    }

    pub fn draw(&self, stream_id: u64, n_relays: usize) -> ChannelDraw {
        let mut d = ChannelDraw::default();
        self.fill(stream_id, n_relays, &mut d);
        d
    }
}

/// One realization of `2 * n_relays` independent Exp(1) fading powers.
pub fn draw(seed: SeedSpec, n_relays: usize) -> ChannelDraw {
    assert!(n_relays >= 1, "a draw needs at least one relay");
    ChannelSampler::new(seed.master_seed).draw(seed.stream_id, n_relays)
}
