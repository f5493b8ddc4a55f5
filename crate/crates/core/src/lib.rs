//! Simulation and security analysis for continuous-variable QKD with
//! displaced squeezed microwave states.
//!
//! The crate is organised bottom-up:
//!
//! * [`gaussian`] – Gaussian states, symplectic maps, entropies.
//! * [`device`] – Alice's preparation chain, the untrusted channel and Bob's
//!   phase-sensitive single-shot detection, expressed as [`gaussian`] ops.
//! * [`protocol`] – codebook sampling, Monte Carlo transmission, sifting and
//!   channel estimation.
//! * [`security`] – mutual information, Holevo bound under an entangling
//!   cloner, asymptotic and finite-size secret keys.
//! * [`link_budget`] – tolerable loss, distance and raw key rate.
//! * [`stats`] – histograms, Bhattacharyya / Hellinger diagnostics.
//!
//! Quadrature variances use the convention where the vacuum variance is 0.25.

pub mod device;
pub mod error;
pub mod exec;
pub mod gaussian;
pub mod link_budget;
pub mod protocol;
pub mod security;
pub mod stats;

pub use device::{Basis, ChannelParams, DeviceChainParams, Preset};
pub use error::{Error, Result};
pub use exec::Execution;
pub use gaussian::{GaussianState, SymplecticOp};
pub use protocol::{ChannelEstimate, Codebook, KeyRecord};
pub use security::SecurityReport;
