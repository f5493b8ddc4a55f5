use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::device::ChannelParams;
use crate::error::{ensure, Result};
use crate::protocol::ChannelEstimate;

pub const DEFAULT_EPS_SMOOTH: f64 = 1e-10;
pub const DEFAULT_EPS_PA: f64 = 1e-10;
pub const DEFAULT_E_EC: f64 = 1e-10;

/// Lower floor on the worst-case channel loss used in the Holevo bound.
///
/// The cloner occupation `2n/eps` diverges as `eps -> 0` at fixed `n`; the
/// Holevo quantity has a finite limit there, which this floor approximates
/// to better than 1e-5 bits.
pub const MIN_CLONER_LOSS: f64 = 1e-6;

/// Confidence factor `w = sqrt(2) erfinv(1 - 2 e_ec)` for failure
/// probability `e_ec`.
///
/// Evaluated as `sqrt(2) erfc^-1(2 e_ec)` to keep precision for tiny
/// `e_ec`, then polished with Newton steps on `erfc`.
pub fn confidence_w(e_ec: f64) -> Result<f64> {
    ensure(e_ec > 0.0 && e_ec < 0.5, || format!("e_ec = {e_ec} outside (0, 0.5)"))?;
    let y = 2.0 * e_ec;
    let mut x = erfc_inv(y);
    for _ in 0..3 {
        let slope = -2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp();
        let step = (erfc(x) - y) / slope;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    Ok(std::f64::consts::SQRT_2 * x)
}

/// Finite-size penalty `7 sqrt(log2(2/eps_smooth)/n) + (2/n) log2(1/eps_pa)`.
pub fn finite_size_delta(n_exp: f64, eps_smooth: f64, eps_pa: f64) -> Result<f64> {
    ensure(n_exp >= 1.0, || format!("effective key length {n_exp} must be >= 1"))?;
    ensure(eps_smooth > 0.0 && eps_smooth < 1.0, || {
        format!("smoothing epsilon {eps_smooth} outside (0, 1)")
    })?;
    ensure(eps_pa > 0.0 && eps_pa < 1.0, || {
        format!("privacy amplification epsilon {eps_pa} outside (0, 1)")
    })?;
    Ok(7.0 * ((2.0 / eps_smooth).log2() / n_exp).sqrt() + 2.0 / n_exp * (1.0 / eps_pa).log2())
}

/// Worst-case channel `(eps_hat - w sigma_eps, n_hat + w sigma_n)`, clamped
/// to `eps in [0, 1)` and `n >= 0`.
pub fn worst_case_params(estimate: &ChannelEstimate, w: f64) -> Result<(f64, f64)> {
    ensure(w.is_finite() && w >= 0.0, || format!("confidence factor {w} must be >= 0"))?;
    let eps = (estimate.loss - w * estimate.loss_std).clamp(0.0, 1.0 - f64::EPSILON);
    let n = (estimate.noise_photons + w * estimate.noise_std).max(0.0);
    Ok((eps, n))
}

/// Clamp a (possibly worst-case) channel into the domain of the cloner
/// model.
pub(crate) fn cloner_channel(loss: f64, noise: f64) -> Result<ChannelParams> {
    // Sampling noise can push the loss estimate below zero.
    let loss = loss.clamp(0.0, 1.0 - 1e-12);
    let loss = if noise > 0.0 { loss.max(MIN_CLONER_LOSS) } else { loss };
    ChannelParams::new(loss, noise.max(0.0))
}

/// Finite-size settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSizeParams {
    /// Raw symbols `N` sent by Alice.
    pub total_symbols: usize,
    /// Symbols surviving basis sifting.
    pub sifted_symbols: usize,
    /// Sifted symbols used for the key (`n_ec`); the rest feed parameter
    /// estimation.
    pub key_symbols: usize,
    /// Reconciliation efficiency.
    pub beta: f64,
    /// Error-correction success probability.
    pub p_ec: f64,
    /// Failure probability of the parameter estimation.
    pub e_ec: f64,
    pub eps_smooth: f64,
    pub eps_pa: f64,
    pub include_delta: bool,
    pub include_pe: bool,
}

impl FiniteSizeParams {
    /// Defaults for `total` raw symbols with independent uniform bases
    /// (half survive sifting) and the sifted block split
    /// `key_fraction : 1 - key_fraction` between key and estimation.
    pub fn new(total: usize, key_fraction: f64) -> Result<Self> {
        let sifted = total / 2;
        Self::with_counts(total, sifted, key_count(sifted, key_fraction)?)
    }

    pub fn with_counts(total: usize, sifted: usize, key_symbols: usize) -> Result<Self> {
        let p = Self {
            total_symbols: total,
            sifted_symbols: sifted,
            key_symbols,
            beta: 1.0,
            p_ec: 1.0,
            e_ec: DEFAULT_E_EC,
            eps_smooth: DEFAULT_EPS_SMOOTH,
            eps_pa: DEFAULT_EPS_PA,
            include_delta: true,
            include_pe: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.total_symbols >= 1, || "total symbol count must be >= 1".into())?;
        ensure(self.sifted_symbols <= self.total_symbols, || {
            format!(
                "sifted count {} exceeds total {}",
                self.sifted_symbols, self.total_symbols
            )
        })?;
        ensure(self.key_symbols <= self.sifted_symbols, || {
            format!(
                "n_ec = {} exceeds the {} available sifted symbols",
                self.key_symbols, self.sifted_symbols
            )
        })?;
        ensure(self.beta > 0.0 && self.beta <= 1.0, || format!("beta {} outside (0, 1]", self.beta))?;
        ensure(self.p_ec > 0.0 && self.p_ec <= 1.0, || format!("p_ec {} outside (0, 1]", self.p_ec))?;
        confidence_w(self.e_ec)?;
        finite_size_delta(1.0, self.eps_smooth, self.eps_pa).map(|_| ())
    }

    /// Sifted symbols left for parameter estimation.
    pub fn estimation_symbols(&self) -> usize {
        self.sifted_symbols - self.key_symbols
    }

    /// Rescaling prefactor `r = n_ec p_ec / N`.
    pub fn prefactor(&self) -> f64 {
        self.key_symbols as f64 * self.p_ec / self.total_symbols as f64
    }

    /// Same settings with `key_symbols` replaced.
    pub fn with_key_symbols(&self, key_symbols: usize) -> Result<Self> {
        let mut p = self.clone();
        p.key_symbols = key_symbols;
        p.validate()?;
        Ok(p)
    }
}

/// `round(fraction * sifted)`.
pub fn key_count(sifted: usize, fraction: f64) -> Result<usize> {
    ensure((0.0..=1.0).contains(&fraction), || {
        format!("key fraction {fraction} outside [0, 1]")
    })?;
    Ok((fraction * sifted as f64).round() as usize)
}

/// Finite-size evaluation of the secret key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSizeReport {
    pub delta: f64,
    pub r: f64,
    pub beta: f64,
    pub p_ec: f64,
    pub n_ec: usize,
    pub e_ec: f64,
    pub w: f64,
    pub eps_star: f64,
    pub n_star: f64,
    pub pe_symbols: usize,
    pub include_delta: bool,
    pub include_pe: bool,
    /// Holevo bound evaluated at `(eps_star, n_star)`.
    pub holevo_star: f64,
    /// `beta I - chi(eps*, n*) - delta` in bits per key symbol.
    pub key_bits_per_symbol: f64,
    /// `r` times the above, in bits per raw symbol.
    pub composite_key: f64,
}
