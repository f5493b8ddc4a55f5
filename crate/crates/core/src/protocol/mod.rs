//! Prepare-and-measure protocol: codebook sampling, single-shot readout
//! simulation, sifting and channel estimation.

mod codebook;
mod estimate;
mod export;
mod rng;
mod transmission;

pub use codebook::{generate_codebook, generate_codebook_with, Codebook};
pub use estimate::{estimate_channel, ChannelEstimate, MIN_ESTIMATION_SAMPLES};
pub use export::{write_key_record_csv, RunManifest, KEY_RECORD_COLUMNS};
pub use transmission::{sift, simulate_transmission, BasisMode, KeyEntry, KeyPair, KeyRecord};
