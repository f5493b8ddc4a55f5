use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent ChaCha8 substreams indexed by symbol, so that each symbol's
/// draws depend only on `(seed, domain, index)` and not on evaluation order.
#[derive(Debug, Clone)]
pub(crate) struct Substreams {
    key: [u8; 32],
}

impl Substreams {
    pub(crate) fn new(seed: u64, domain: u64) -> Self {
        let mut root = ChaCha8Rng::seed_from_u64(seed);
        root.set_stream(domain);
        Self { key: root.random() }
    }

    pub(crate) fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}

pub(crate) const CODEBOOK_DOMAIN: u64 = 1;
pub(crate) const TRANSMISSION_DOMAIN: u64 = 2;
