use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::WienerPath;
use crate::grid::Grid;
use crate::scalar::Scalar;

pub const DEFAULT_BATCH: usize = 1024;

/// Seeded source of Brownian increments.
///
/// Every `(slot, batch)` pair owns the ChaCha8 stream `slot << 40 | batch`
/// under the common seed, so a sample's draws depend only on the seed, its
/// slot and its index — never on thread count or scheduling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSampler<S: Scalar> {
    grid: Grid<S>,
    seed: u64,
    batch: usize,
    antithetic: bool,
    slot_base: u64,
}

impl<S: Scalar> PathSampler<S> {
    pub fn new(grid: Grid<S>, seed: u64) -> Self {
        Self { grid, seed, batch: DEFAULT_BATCH, antithetic: false, slot_base: 0 }
    }

    pub fn with_batch(mut self, batch: usize) -> Self {
        self.batch = batch.max(1);
        self
    }

    /// Pair every draw with its negation and average the two evaluations.
    pub fn with_antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Offsets every slot, so independent estimates can share one seed.
    pub fn with_slot_base(mut self, base: u64) -> Self {
        self.slot_base = base;
        self
    }

    pub fn slot_base(&self) -> u64 {
        self.slot_base
    }

    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn antithetic(&self) -> bool {
        self.antithetic
    }

    #[inline]
    pub fn stream_id(slot: u64, batch_index: usize) -> u64 {
        (slot << 40) | batch_index as u64
    }

    /// Stream of relative `slot` (offset by the slot base) in batch `batch_index`.
    pub fn stream_of(&self, slot: u64, batch_index: usize) -> u64 {
        Self::stream_id(self.slot_base + slot, batch_index)
    }

    pub fn rng(&self, slot: u64, batch_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_of(slot, batch_index));
        rng
    }

    /// Fills `out` with i.i.d. `N(0, T/M)` increments.
    #[inline]
    pub fn fill_increments(&self, rng: &mut ChaCha8Rng, out: &mut [S]) {
        let sd = self.grid.dt().sqrt();
        for d in out.iter_mut() {
            *d = sd * S::standard_normal(rng);
        }
    }

    /// The first `n` paths of `slot`, identical to the draws the estimators see.
    pub fn paths(&self, slot: u64, n: usize) -> Vec<WienerPath<S>> {
        let mut out = Vec::with_capacity(n);
        let mut dx = vec![S::zero(); self.grid.steps()];
        for b in 0..n.div_ceil(self.batch) {
            let mut rng = self.rng(slot, b);
            for _ in 0..self.batch.min(n - b * self.batch) {
                self.fill_increments(&mut rng, &mut dx);
                let path = WienerPath::from_increments(&dx, self.grid).expect("grid-sized increments");
                out.push(path.with_stream(self.stream_of(slot, b)));
            }
        }
        out
    }
}
