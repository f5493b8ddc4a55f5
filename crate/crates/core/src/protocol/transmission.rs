use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::codebook::{uniform_basis, Codebook};
use super::rng::{Substreams, TRANSMISSION_DOMAIN};
use crate::device::{bob_response, Basis, BobResponse, ChannelParams, DeviceChainParams};
use crate::error::{ensure, Result};
use crate::exec::Execution;

/// How Bob picks his amplification basis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisMode {
    /// Independent uniform choice; mismatches are discarded by [`sift`].
    #[default]
    Sift,
    /// Bob uses Alice's basis for every symbol.
    Announced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyEntry {
    pub index: usize,
    pub alice_basis: Basis,
    pub bob_basis: Basis,
    pub alpha: f64,
    pub beta: f64,
    pub matched: bool,
}

/// Alice's symbols paired with Bob's single-shot outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRecord {
    pub entries: Vec<KeyEntry>,
    pub seed: u64,
    pub mode: BasisMode,
}

/// A sifted `(alpha, beta)` pair in a common basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyPair {
    pub basis: Basis,
    pub alpha: f64,
    pub beta: f64,
}

impl KeyRecord {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn matched_count(&self) -> usize {
        self.entries.iter().filter(|e| e.matched).count()
    }

    /// Pairs whose bases disagree, reported in Alice's basis.
    pub fn mismatched(&self) -> Vec<KeyPair> {
        self.entries
            .iter()
            .filter(|e| !e.matched)
            .map(|e| KeyPair {
                basis: e.alice_basis,
                alpha: e.alpha,
                beta: e.beta,
            })
            .collect()
    }
}

/// Readout models for every `(alice_basis, bob_basis)` combination.
#[derive(Debug, Clone, Copy)]
struct Responses([[BobResponse; 2]; 2]);

impl Responses {
    fn new(chain: &DeviceChainParams, channel: &ChannelParams) -> Result<Self> {
        let r = |a, b| bob_response(chain, channel, a, b);
        Ok(Self([
            [r(Basis::Q, Basis::Q)?, r(Basis::Q, Basis::P)?],
            [r(Basis::P, Basis::Q)?, r(Basis::P, Basis::P)?],
        ]))
    }

    fn get(&self, alice: Basis, bob: Basis) -> BobResponse {
        self.0[alice.offset()][bob.offset()]
    }
}

/// One single-shot readout per symbol, drawn from Bob's output Gaussian.
pub fn simulate_transmission(
    codebook: &Codebook,
    chain: &DeviceChainParams,
    channel: &ChannelParams,
    seed: u64,
    mode: BasisMode,
    exec: Execution,
) -> Result<KeyRecord> {
    ensure(codebook.symbols.len() == codebook.bases.len(), || {
        "codebook symbols and bases differ in length".into()
    })?;
    let responses = Responses::new(chain, channel)?;
    let streams = Substreams::new(seed, TRANSMISSION_DOMAIN);
    let entries = exec.map_range(codebook.len(), |i| {
        let mut rng = streams.stream(i as u64);
        let alice_basis = codebook.bases[i];
        // Draw Bob's basis in both modes to keep the noise stream aligned.
        let drawn = uniform_basis(&mut rng);
        let bob_basis = match mode {
            BasisMode::Sift => drawn,
            BasisMode::Announced => alice_basis,
        };
        let resp = responses.get(alice_basis, bob_basis);
        let alpha = codebook.symbols[i];
        let z: f64 = rng.sample(StandardNormal);
        KeyEntry {
            index: i,
            alice_basis,
            bob_basis,
            alpha,
            beta: resp.gain * alpha + resp.noise_variance.sqrt() * z,
            matched: alice_basis == bob_basis,
        }
    });
    Ok(KeyRecord {
        entries,
        seed,
        mode,
    })
}

/// Matched-basis pairs, in record order.
pub fn sift(record: &KeyRecord) -> Vec<KeyPair> {
    record
        .entries
        .iter()
        .filter(|e| e.matched)
        .map(|e| KeyPair {
            basis: e.alice_basis,
            alpha: e.alpha,
            beta: e.beta,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Preset;
    use crate::protocol::generate_codebook;

    #[test]
    fn announced_mode_matches_everything() {
        let chain = DeviceChainParams::preset(Preset::Run1);
        let ch = ChannelParams::experiment(0.0).unwrap();
        let cb = generate_codebook(1000, 1.17, 3).unwrap();
        let rec = simulate_transmission(&cb, &chain, &ch, 4, BasisMode::Announced, Execution::default()).unwrap();
        assert_eq!(sift(&rec).len(), 1000);
    }

    #[test]
    fn sift_yield_is_binomial() {
        let chain = DeviceChainParams::preset(Preset::Run1);
        let ch = ChannelParams::experiment(0.0).unwrap();
        let n = 16665;
        let cb = generate_codebook(n, 1.17, 5).unwrap();
        let rec = simulate_transmission(&cb, &chain, &ch, 6, BasisMode::Sift, Execution::default()).unwrap();
        let y = sift(&rec).len() as f64;
        assert!((y - n as f64 / 2.0).abs() < 3.0 * (n as f64 / 4.0).sqrt());
        assert_eq!(y as usize + rec.mismatched().len(), n);
        assert!(rec.entries.iter().all(|e| e.beta.is_finite() && e.matched == (e.alice_basis == e.bob_basis)));
    }

    #[test]
    fn empty_record_sifts_to_nothing() {
        let rec = KeyRecord {
            entries: vec![],
            seed: 0,
            mode: BasisMode::Sift,
        };
        assert!(sift(&rec).is_empty());
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let chain = DeviceChainParams::preset(Preset::Run2);
        let ch = ChannelParams::experiment(0.01).unwrap();
        let cb = generate_codebook(2000, chain.codebook_variance().unwrap(), 9).unwrap();
        let a = simulate_transmission(&cb, &chain, &ch, 10, BasisMode::Sift, Execution::Sequential).unwrap();
        let b = simulate_transmission(&cb, &chain, &ch, 10, BasisMode::Sift, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
