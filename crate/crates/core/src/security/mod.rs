//! Secret-key analysis: SNR, mutual information, Holevo bound under an
//! entangling cloner (direct reconciliation), asymptotic and finite-size
//! keys.

mod finite_size;
mod holevo;

pub use finite_size::{
    confidence_w, finite_size_delta, key_count, worst_case_params, FiniteSizeParams,
    FiniteSizeReport, DEFAULT_EPS_PA, DEFAULT_EPS_SMOOTH, DEFAULT_E_EC, MIN_CLONER_LOSS,
};
pub use holevo::{cloner_output, eve_states, holevo_dr, EveStates};

use serde::{Deserialize, Serialize};

use crate::device::{bob_response, Basis, ChannelParams, DeviceChainParams};
use crate::error::{ensure, Error, Result};
use crate::protocol::ChannelEstimate;

/// Matched-basis signal-to-noise ratio `k^2 sigma_A^2 / sigma_noise^2`.
pub fn snr(chain: &DeviceChainParams, channel: &ChannelParams) -> Result<f64> {
    let resp = bob_response(chain, channel, Basis::Q, Basis::Q)?;
    Ok(resp.snr(chain.codebook_variance()?))
}

/// `1/2 log2(1 + snr)`.
pub fn mutual_information(snr: f64) -> Result<f64> {
    ensure(snr.is_finite() && snr >= 0.0, || format!("SNR {snr} must be finite and >= 0"))?;
    Ok(0.5 * snr.ln_1p() / std::f64::consts::LN_2)
}

/// `I - chi_E`; negative values mean no secure key.
pub fn asymptotic_key(chain: &DeviceChainParams, channel: &ChannelParams) -> Result<f64> {
    Ok(mutual_information(snr(chain, channel)?)? - holevo_dr(chain, channel)?)
}

/// Where channel parameters for the finite-size bound come from.
#[derive(Debug, Clone, Copy)]
pub enum ChannelSource<'a> {
    /// Known channel. With parameter estimation enabled, the estimator's
    /// expected uncertainties for the available sample count are used.
    Exact(ChannelParams),
    /// Estimates from data.
    Estimated(&'a ChannelEstimate),
}

/// Finite-size key `r [beta I - chi(eps*, n*) - delta(n_ec)]`.
///
/// `I` is evaluated at the point channel, `chi` at the worst-case channel
/// when parameter estimation is enabled. With both penalties off and an
/// exact channel this equals [`asymptotic_key`] times `r`.
pub fn composite_key(
    chain: &DeviceChainParams,
    source: ChannelSource<'_>,
    fs: &FiniteSizeParams,
) -> Result<FiniteSizeReport> {
    fs.validate()?;
    let w = confidence_w(fs.e_ec)?;
    let (point, estimate) = match source {
        ChannelSource::Exact(channel) => {
            let est = if fs.include_pe {
                Some(ChannelEstimate::expected(chain, &channel, fs.estimation_symbols())?)
            } else {
                None
            };
            (channel, est)
        }
        ChannelSource::Estimated(est) => (
            finite_size::cloner_channel(est.loss, est.noise_photons)?,
            fs.include_pe.then(|| est.clone()),
        ),
    };
    let mi = mutual_information(snr(chain, &point)?)?;
    let (eps_star, n_star, holevo_star) = match &estimate {
        Some(est) => {
            let (e, n) = worst_case_params(est, w)?;
            (e, n, holevo_dr(chain, &finite_size::cloner_channel(e, n)?)?)
        }
        None => (point.loss, point.coupled_noise_photons, holevo_dr(chain, &point)?),
    };
    let delta = if fs.include_delta {
        if fs.key_symbols == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        finite_size_delta(fs.key_symbols as f64, fs.eps_smooth, fs.eps_pa)?
    } else {
        0.0
    };
    let key_bits_per_symbol = fs.beta * mi - holevo_star - delta;
    let r = fs.prefactor();
    Ok(FiniteSizeReport {
        delta,
        r,
        beta: fs.beta,
        p_ec: fs.p_ec,
        n_ec: fs.key_symbols,
        e_ec: fs.e_ec,
        w,
        eps_star,
        n_star,
        pe_symbols: fs.estimation_symbols(),
        include_delta: fs.include_delta,
        include_pe: fs.include_pe,
        holevo_star,
        key_bits_per_symbol,
        composite_key: r * key_bits_per_symbol,
    })
}

/// Key fractions `0.01, 0.02, ..., 0.99` of the sifted block.
pub fn default_split_grid() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

/// [`composite_key`] maximised over the key/estimation split of the sifted
/// block. Splits that leave too few estimation symbols are skipped.
///
/// When no split yields a positive key, the split with the largest key per
/// symbol is returned instead, since a less negative composite key only
/// reflects a smaller prefactor.
pub fn optimize_key_split(
    chain: &DeviceChainParams,
    channel: &ChannelParams,
    fs: &FiniteSizeParams,
    fractions: &[f64],
) -> Result<FiniteSizeReport> {
    let mut best: Option<FiniteSizeReport> = None;
    let mut last_err = None;
    for &f in fractions {
        let candidate = fs.with_key_symbols(key_count(fs.sifted_symbols, f)?)?;
        match composite_key(chain, ChannelSource::Exact(*channel), &candidate) {
            Ok(rep) => {
                if best.as_ref().is_none_or(|b| split_score(&rep) > split_score(b)) {
                    best = Some(rep);
                }
            }
            Err(e @ Error::InsufficientData { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| crate::error::invalid("empty split grid")))
}

fn split_score(rep: &FiniteSizeReport) -> (bool, f64) {
    if rep.composite_key > 0.0 {
        (true, rep.composite_key)
    } else {
        (false, rep.key_bits_per_symbol)
    }
}

/// Bracketed bisection for a sign change of `f` on `[lo, hi]`, to absolute
/// tolerance `tol` in the argument.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    ensure(f_lo.signum() != f_hi.signum(), || {
        format!("no sign change on [{lo}, {hi}] ({f_lo}, {f_hi})")
    })?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest coupled noise `n` in `(0, n_max)` with `key(n) > 0`, assuming a
/// single crossing. `None` if the key is already non-positive at `n = 0`;
/// `Some(n_max)` if it never crosses.
pub fn noise_tolerance<F>(mut key: F, n_max: f64, tol: f64) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if key(0.0)? <= 0.0 {
        return Ok(None);
    }
    if key(n_max)? > 0.0 {
        return Ok(Some(n_max));
    }
    bisect(key, 0.0, n_max, tol).map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Estimated,
}

/// Security figures for one operating point, with its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub chain: DeviceChainParams,
    /// Channel the asymptotic figures are evaluated at (the point estimate
    /// for estimated reports).
    pub channel: ChannelParams,
    pub codebook_variance: f64,
    pub snr: f64,
    pub mi_bits: f64,
    pub holevo_bits: f64,
    pub asymptotic_key_bits: f64,
    pub finite_size: Option<FiniteSizeReport>,
    pub finite_size_params: Option<FiniteSizeParams>,
    pub provenance: Provenance,
    pub estimate: Option<ChannelEstimate>,
}

impl SecurityReport {
    pub fn exact(
        chain: &DeviceChainParams,
        channel: &ChannelParams,
        fs: Option<&FiniteSizeParams>,
    ) -> Result<Self> {
        let finite_size = fs
            .map(|p| composite_key(chain, ChannelSource::Exact(*channel), p))
            .transpose()?;
        Self::assemble(chain, *channel, finite_size, fs, Provenance::Exact, None)
    }

    pub fn estimated(
        chain: &DeviceChainParams,
        estimate: &ChannelEstimate,
        fs: Option<&FiniteSizeParams>,
    ) -> Result<Self> {
        let point = finite_size::cloner_channel(estimate.loss, estimate.noise_photons)?;
        let finite_size = fs
            .map(|p| composite_key(chain, ChannelSource::Estimated(estimate), p))
            .transpose()?;
        Self::assemble(
            chain,
            point,
            finite_size,
            fs,
            Provenance::Estimated,
            Some(estimate.clone()),
        )
    }

    fn assemble(
        chain: &DeviceChainParams,
        channel: ChannelParams,
        finite_size: Option<FiniteSizeReport>,
        fs: Option<&FiniteSizeParams>,
        provenance: Provenance,
        estimate: Option<ChannelEstimate>,
    ) -> Result<Self> {
        let snr = snr(chain, &channel)?;
        let mi_bits = mutual_information(snr)?;
        let holevo_bits = holevo_dr(chain, &channel)?;
        Ok(Self {
            chain: chain.clone(),
            channel,
            codebook_variance: chain.codebook_variance()?,
            snr,
            mi_bits,
            holevo_bits,
            asymptotic_key_bits: mi_bits - holevo_bits,
            finite_size,
            finite_size_params: fs.cloned(),
            provenance,
            estimate,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Preset;
    use approx::assert_relative_eq;

    fn run(p: Preset) -> DeviceChainParams {
        DeviceChainParams::preset(p)
    }

    #[test]
    fn mutual_information_values() {
        assert_eq!(mutual_information(0.0).unwrap(), 0.0);
        assert_relative_eq!(mutual_information(3.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(mutual_information(2.16).unwrap(), 0.8300, epsilon = 1e-4);
        assert!(mutual_information(-0.1).is_err());
    }

    #[test]
    fn no_leakage_without_channel() {
        let ch = ChannelParams::new(0.0, 0.0).unwrap();
        assert_eq!(holevo_dr(&run(Preset::Run1), &ch).unwrap(), 0.0);
        assert!(holevo_dr(&run(Preset::Run1), &ChannelParams::new(0.0, 0.01).unwrap()).is_err());
    }

    #[test]
    fn nothing_encoded_nothing_leaked() {
        let mut chain = run(Preset::Run1);
        chain.squeezing_db = 0.0;
        chain.antisqueezing_db = 0.0;
        let ch = ChannelParams::experiment(0.03).unwrap();
        assert!(holevo_dr(&chain, &ch).unwrap().abs() < 1e-12);
        assert_eq!(snr(&chain, &ch).unwrap(), 0.0);
    }

    #[test]
    fn run2_low_noise_operating_point() {
        let ch = ChannelParams::experiment(1.7e-6).unwrap();
        let s = snr(&run(Preset::Run2), &ch).unwrap();
        let k = asymptotic_key(&run(Preset::Run2), &ch).unwrap();
        assert!((s - 2.16).abs() < 0.35, "snr {s}");
        assert!((k - 0.74).abs() < 0.1, "key {k}");
    }

    #[test]
    fn confidence_factor() {
        assert_relative_eq!(confidence_w(1e-10).unwrap(), 6.361340902, epsilon = 1e-8);
        assert_relative_eq!(confidence_w(0.158655253931457).unwrap(), 1.0, epsilon = 1e-9);
        assert!(confidence_w(0.4999999).unwrap() < 1e-5);
        assert!(confidence_w(0.0).is_err());
        assert!(confidence_w(0.5).is_err());
    }

    #[test]
    fn delta_values() {
        let d = finite_size_delta(8332.0, 1e-10, 1e-10).unwrap();
        assert_relative_eq!(d, 7.0 * ((2e10f64).log2() / 8332.0).sqrt() + 2.0 / 8332.0 * (1e10f64).log2());
        assert!((d - 0.45).abs() < 0.01);
        assert!((finite_size_delta(1e6, 1e-10, 1e-10).unwrap() - 0.041).abs() < 0.001);
        assert!(finite_size_delta(0.5, 1e-10, 1e-10).is_err());
    }

    #[test]
    fn composite_without_penalties_is_asymptotic() {
        let chain = run(Preset::Run1);
        let ch = ChannelParams::experiment(0.02).unwrap();
        let mut fs = FiniteSizeParams::new(16665, 1.0).unwrap();
        fs.include_delta = false;
        fs.include_pe = false;
        let rep = composite_key(&chain, ChannelSource::Exact(ch), &fs).unwrap();
        assert_relative_eq!(rep.key_bits_per_symbol, asymptotic_key(&chain, &ch).unwrap(), epsilon = 1e-15);
        assert_relative_eq!(rep.r, 8332.0 / 16665.0);
    }

    #[test]
    fn composite_rejects_oversized_key_block() {
        let mut fs = FiniteSizeParams::new(16665, 0.5).unwrap();
        fs.key_symbols = 9000;
        let ch = ChannelParams::experiment(0.0).unwrap();
        assert!(composite_key(&run(Preset::Run1), ChannelSource::Exact(ch), &fs).is_err());
    }

    #[test]
    fn bisection_finds_root() {
        let x = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(x, 2f64.sqrt(), epsilon = 1e-11);
        assert!(bisect(|x| Ok(x * x + 1.0), 0.0, 2.0, 1e-6).is_err());
    }

    #[test]
    fn report_serializes_inputs() {
        let ch = ChannelParams::experiment(0.01).unwrap();
        let fs = FiniteSizeParams::new(16665, 0.5).unwrap();
        let rep = SecurityReport::exact(&run(Preset::Run2), &ch, Some(&fs)).unwrap();
        let json = rep.to_json().unwrap();
        let back: SecurityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
        assert!(json.contains("\"antisqueezing_db\": 7.6"));
        assert!(json.contains("\"provenance\": \"exact\""));
    }

    #[test]
    fn negative_loss_estimate_is_usable() {
        let est = ChannelEstimate {
            loss: -0.006,
            loss_std: 0.02,
            noise_photons: 0.0,
            noise_photons_raw: -0.004,
            noise_std: 0.01,
            noise_clamped: true,
            samples: 1000,
        };
        let fs = FiniteSizeParams::new(2000, 0.5).unwrap();
        let rep = SecurityReport::estimated(&run(Preset::Run1), &est, Some(&fs)).unwrap();
        assert_eq!(rep.channel.loss, 0.0);
        assert_eq!(rep.holevo_bits, 0.0);
    }

    #[test]
    fn split_without_key_prefers_the_least_penalized_block() {
        let ch = ChannelParams::experiment(1.7e-6).unwrap();
        let fs = FiniteSizeParams::new(16665, 0.5).unwrap();
        let rep = optimize_key_split(&run(Preset::Run2), &ch, &fs, &default_split_grid()).unwrap();
        assert!(rep.composite_key <= 0.0);
        for f in [0.1, 0.5, 0.9] {
            let other = composite_key(
                &run(Preset::Run2),
                ChannelSource::Exact(ch),
                &fs.with_key_symbols(key_count(fs.sifted_symbols, f).unwrap()).unwrap(),
            )
            .unwrap();
            assert!(rep.key_bits_per_symbol >= other.key_bits_per_symbol);
        }
        let big = FiniteSizeParams::new(100_000_000, 0.5).unwrap();
        let rep = optimize_key_split(&run(Preset::Run2), &ch, &big, &default_split_grid()).unwrap();
        assert!(rep.composite_key > 0.0);
    }
}
