//! Deterministic seed derivation.
//!
//! Every stochastic step (shot sampling, quasiprobability draws, shuffles,
//! initialization) takes a `u64` seed derived by pure mixing from a run seed
//! and a structural index, so results are independent of scheduling and
//! parallelism.

/// SplitMix64 step; a full-period mixer with good avalanche behavior.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive an independent stream seed from a parent seed and a stream index.
pub fn derive(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0xa076_1d64_78bd_642f)))
}

/// Hands out one derived seed per expectation evaluation, in call order.
#[derive(Debug, Clone)]
pub struct SeedSequence {
    base: u64,
    counter: u64,
}

impl SeedSequence {
    pub fn new(base: u64) -> Self {
        Self { base, counter: 0 }
    }

    pub fn next_seed(&mut self) -> u64 {
        let s = derive(self.base, self.counter);
        self.counter += 1;
        s
    }

    /// Pre-assign a block of seeds so the evaluations they feed can run in
    /// parallel without touching shared state.
    pub fn next_block(&mut self, n: usize) -> Vec<u64> {
        (0..n).map(|_| self.next_seed()).collect()
    }
}
