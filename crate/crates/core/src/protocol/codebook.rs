use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::{Substreams, CODEBOOK_DOMAIN};
use crate::device::Basis;
use crate::error::{ensure, Result};
use crate::exec::Execution;

/// Alice's Gaussian codebook: one symbol and one encoding basis per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub symbols: Vec<f64>,
    pub bases: Vec<Basis>,
    pub variance: f64,
    pub seed: u64,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

pub(crate) fn uniform_basis<R: Rng>(rng: &mut R) -> Basis {
    if rng.random::<bool>() {
        Basis::P
    } else {
        Basis::Q
    }
}

/// `n` i.i.d. `N(0, variance)` symbols with i.i.d. uniform bases.
pub fn generate_codebook(n: usize, variance: f64, seed: u64) -> Result<Codebook> {
    generate_codebook_with(n, variance, seed, Execution::default())
}

pub fn generate_codebook_with(
    n: usize,
    variance: f64,
    seed: u64,
    exec: Execution,
) -> Result<Codebook> {
    ensure(n >= 1, || "codebook length must be >= 1".into())?;
    ensure(variance.is_finite() && variance >= 0.0, || {
        format!("codebook variance {variance} must be >= 0")
    })?;
    let streams = Substreams::new(seed, CODEBOOK_DOMAIN);
    let sd = variance.sqrt();
    let slots = exec.map_range(n, |i| {
        let mut rng = streams.stream(i as u64);
        let basis = uniform_basis(&mut rng);
        let z: f64 = rng.sample(StandardNormal);
        (sd * z, basis)
    });
    let (symbols, bases) = slots.into_iter().unzip();
    Ok(Codebook {
        symbols,
        bases,
        variance,
        seed,
    })
}
