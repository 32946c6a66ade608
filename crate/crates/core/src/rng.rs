//! Counter-based deterministic noise streams.
//!
//! Every stochastic draw in the simulator comes from a stream addressed by
//! `(master_seed, batch_id, row_index, node_id)`. Streams for distinct
//! addresses are independent, and a stream's output depends only on its
//! address, never on evaluation order or thread layout. That makes sampling
//! bit-reproducible under any parallel schedule.

/// Row index used when drawing batch-level parameter values (one draw per
/// batch rather than per row).
pub const PARAM_DRAW_ROW: u64 = u64::MAX;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic stream of pseudo-random values for one (seed, batch, row,
/// node) address.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    state: u64,
}

impl NoiseStream {
    /// Derive the stream for a node draw. Each component is absorbed through
    /// a splitmix round so that nearby addresses decorrelate.
    pub fn for_node(master_seed: u64, batch_id: u64, row: u64, node: u64) -> Self {
        let mut s = splitmix(master_seed);
        s = splitmix(s ^ batch_id);
        s = splitmix(s ^ row);
        s = splitmix(s ^ node);
        NoiseStream { state: s }
    }

    /// Derive an auxiliary stream from a seed and a domain-separation tag.
    pub fn tagged(seed: u64, tag: u64) -> Self {
        let mut s = splitmix(seed);
        s = splitmix(s ^ tag);
        NoiseStream { state: s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a log argument.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    #[inline]
    pub fn next_standard_normal(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
