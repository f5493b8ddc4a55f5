//! Tolerable channel loss, reach and raw key rate.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::device::{ChannelParams, DeviceChainParams};
use crate::error::{ensure, Result};
use crate::exec::Execution;
use crate::security::{asymptotic_key, bisect, composite_key, ChannelSource, FiniteSizeParams};

const PLANCK: f64 = 6.626_070_15e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Carrier frequency used for the medium presets.
pub const CARRIER_FREQUENCY_HZ: f64 = 5.0e9;

/// Loss tolerance below which a link is treated as unusable.
const MIN_LOSS: f64 = 1e-9;
const MAX_LOSS: f64 = 1.0 - 1e-9;

/// Mean thermal occupation `1 / (exp(h f / k T) - 1)`.
pub fn bose_einstein_occupation(temperature_k: f64, frequency_hz: f64) -> Result<f64> {
    ensure(temperature_k.is_finite() && temperature_k >= 0.0, || {
        format!("temperature {temperature_k} K must be >= 0")
    })?;
    ensure(frequency_hz.is_finite() && frequency_hz > 0.0, || {
        format!("frequency {frequency_hz} Hz must be > 0")
    })?;
    if temperature_k == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (PLANCK * frequency_hz / (BOLTZMANN * temperature_k)).exp_m1())
}

/// A transmission medium: absorption and background thermal photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    pub label: String,
    /// Attenuation `gamma` in dB per meter.
    pub attenuation_db_per_m: f64,
    /// Thermal occupation `n_th` at the carrier frequency.
    pub background_photons: f64,
}

impl MediumSpec {
    pub fn new(label: impl Into<String>, attenuation_db_per_m: f64, background_photons: f64) -> Result<Self> {
        let m = Self {
            label: label.into(),
            attenuation_db_per_m,
            background_photons,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.attenuation_db_per_m.is_finite() && self.attenuation_db_per_m > 0.0, || {
            format!("attenuation {} dB/m must be > 0", self.attenuation_db_per_m)
        })?;
        ensure(self.background_photons.is_finite() && self.background_photons >= 0.0, || {
            format!("background photons {} must be >= 0", self.background_photons)
        })
    }

    /// Superconducting cable at 15 mK.
    pub fn cryo_15mk() -> Self {
        Self {
            label: "cryo-15mK".into(),
            attenuation_db_per_m: 1.0e-3,
            background_photons: bose_einstein_occupation(0.015, CARRIER_FREQUENCY_HZ)
                .expect("valid constants"),
        }
    }

    /// Open air at room temperature.
    pub fn openair_300k() -> Self {
        Self {
            label: "openair-300K".into(),
            attenuation_db_per_m: 6.3e-6,
            background_photons: 1250.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "cryo-15mK" => Some(Self::cryo_15mk()),
            "openair-300K" => Some(Self::openair_300k()),
            _ => None,
        }
    }
}

/// `-10 log10(1 - eps) / gamma`.
pub fn loss_to_distance(loss: f64, attenuation_db_per_m: f64) -> Result<f64> {
    ensure((0.0..1.0).contains(&loss), || format!("loss {loss} outside [0, 1)"))?;
    ensure(attenuation_db_per_m > 0.0, || format!("attenuation {attenuation_db_per_m} must be > 0"))?;
    Ok(-10.0 * (-loss).ln_1p() / std::f64::consts::LN_10 / attenuation_db_per_m)
}

pub fn distance_to_loss(distance_m: f64, attenuation_db_per_m: f64) -> Result<f64> {
    ensure(distance_m.is_finite() && distance_m >= 0.0, || {
        format!("distance {distance_m} m must be >= 0")
    })?;
    ensure(attenuation_db_per_m > 0.0, || format!("attenuation {attenuation_db_per_m} must be > 0"))?;
    Ok(-(-attenuation_db_per_m * distance_m * std::f64::consts::LN_10 / 10.0).exp_m1())
}

/// Channel with loss `eps` coupling `n = n_th eps / 2` noise photons.
pub fn thermal_channel(loss: f64, background_photons: f64) -> Result<ChannelParams> {
    ChannelParams::new(loss, 0.5 * background_photons * loss)
}

/// Largest channel loss with a positive asymptotic key when the channel
/// couples in a background of `n_th` photons. Zero if no loss is tolerable.
pub fn max_tolerable_loss(chain: &DeviceChainParams, background_photons: f64) -> Result<f64> {
    chain.validate()?;
    ensure(background_photons.is_finite() && background_photons >= 0.0, || {
        format!("background photons {background_photons} must be >= 0")
    })?;
    let key = |eps: f64| asymptotic_key(chain, &thermal_channel(eps, background_photons)?);
    if key(MIN_LOSS)? <= 0.0 {
        return Ok(0.0);
    }
    if key(MAX_LOSS)? > 0.0 {
        return Ok(MAX_LOSS);
    }
    bisect(key, MIN_LOSS, MAX_LOSS, 1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetPoint {
    pub background_photons: f64,
    pub max_loss: f64,
    pub distance_m: f64,
}

/// Tolerable loss and reach for a medium.
pub fn reach(chain: &DeviceChainParams, medium: &MediumSpec) -> Result<LinkBudgetPoint> {
    medium.validate()?;
    let max_loss = max_tolerable_loss(chain, medium.background_photons)?;
    Ok(LinkBudgetPoint {
        background_photons: medium.background_photons,
        max_loss,
        distance_m: loss_to_distance(max_loss, medium.attenuation_db_per_m)?,
    })
}

/// [`reach`] over a grid of background occupations, in grid order.
pub fn sweep_background(
    chain: &DeviceChainParams,
    attenuation_db_per_m: f64,
    backgrounds: &[f64],
    exec: Execution,
) -> Result<Vec<LinkBudgetPoint>> {
    exec.try_map_slice(backgrounds, |&n_th| {
        let medium = MediumSpec::new("sweep", attenuation_db_per_m, n_th)?;
        reach(chain, &medium)
    })
}

pub const LINK_BUDGET_COLUMNS: [&str; 3] = ["n_th", "eps_max", "distance_m"];

pub fn write_link_budget_csv<W: Write>(
    points: &[LinkBudgetPoint],
    comments: &[String],
    mut out: W,
) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{}", LINK_BUDGET_COLUMNS.join(","))?;
    for p in points {
        writeln!(out, "{:e},{:e},{:e}", p.background_photons, p.max_loss, p.distance_m)?;
    }
    Ok(())
}

/// Shannon-Hartley style raw key rate `bandwidth * K` in bit/s, with the
/// asymptotic key. Negative keys give zero.
pub fn raw_key_rate(chain: &DeviceChainParams, channel: &ChannelParams, bandwidth_hz: f64) -> Result<f64> {
    ensure(bandwidth_hz.is_finite() && bandwidth_hz > 0.0, || {
        format!("bandwidth {bandwidth_hz} Hz must be > 0")
    })?;
    Ok(bandwidth_hz * asymptotic_key(chain, channel)?.max(0.0))
}

/// As [`raw_key_rate`] with the finite-size key per raw symbol.
pub fn raw_key_rate_composite(
    chain: &DeviceChainParams,
    channel: &ChannelParams,
    fs: &FiniteSizeParams,
    bandwidth_hz: f64,
) -> Result<f64> {
    ensure(bandwidth_hz.is_finite() && bandwidth_hz > 0.0, || {
        format!("bandwidth {bandwidth_hz} Hz must be > 0")
    })?;
    let rep = composite_key(chain, ChannelSource::Exact(*channel), fs)?;
    Ok(bandwidth_hz * rep.composite_key.max(0.0))
}
