use serde::{Deserialize, Serialize};

use super::transmission::KeyPair;
use crate::device::{Basis, ChannelParams, DeviceChainParams, TrustedChain};
use crate::error::{Error, Result};
use crate::gaussian::VACUUM_VARIANCE;

/// Minimum number of pairs for channel estimation.
pub const MIN_ESTIMATION_SAMPLES: usize = 30;

/// Channel loss and coupled noise inferred from `(alpha, beta)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    pub loss: f64,
    pub loss_std: f64,
    /// Noise estimate clamped at zero.
    pub noise_photons: f64,
    /// Noise estimate before clamping.
    pub noise_photons_raw: f64,
    pub noise_std: f64,
    pub noise_clamped: bool,
    pub samples: usize,
}

/// Moments of `y = beta / g` regressed on `x = s alpha`, which removes the
/// trusted scales so that `y = sqrt(tau) x + noise`.
struct Normalized {
    slope: f64,
    slope_var: f64,
    residual_var: f64,
    samples: usize,
    prep_variance: f64,
    detection_noise: f64,
}

impl Normalized {
    fn into_estimate(self) -> ChannelEstimate {
        let m = self.samples as f64;
        let tau = self.slope * self.slope;
        let loss = 1.0 - tau;
        let loss_std = 2.0 * self.slope.abs() * self.slope_var.sqrt();
        let output_var = self.residual_var - self.detection_noise;
        let output_var_std = self.residual_var * (2.0 / (m - 2.0)).sqrt();
        // n = C - V + eps (V - 1/4)
        let raw = output_var - tau * self.prep_variance - VACUUM_VARIANCE * loss;
        let lever = self.prep_variance - VACUUM_VARIANCE;
        let noise_std = (output_var_std.powi(2) + (lever * loss_std).powi(2)).sqrt();
        ChannelEstimate {
            loss,
            loss_std,
            noise_photons: raw.max(0.0),
            noise_photons_raw: raw,
            noise_std,
            noise_clamped: raw < 0.0,
            samples: self.samples,
        }
    }
}

fn trusted_pair(chain: &DeviceChainParams) -> Result<[TrustedChain; 2]> {
    Ok([chain.trusted_chain(Basis::Q)?, chain.trusted_chain(Basis::P)?])
}

fn require_samples(m: usize) -> Result<()> {
    if m < MIN_ESTIMATION_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_ESTIMATION_SAMPLES,
            got: m,
        });
    }
    Ok(())
}

/// Method-of-moments estimate of `(eps_E, n)` with the trusted devices taken
/// as exactly known.
///
/// The OLS slope gives `sqrt(1 - eps)`; the residual variance minus the
/// trusted detection noise gives the channel-output variance, from which
/// the transmitted preparation noise and the loss vacuum are subtracted.
/// Standard errors use the asymptotic slope error and the chi-square
/// variance error.
pub fn estimate_channel(pairs: &[KeyPair], chain: &DeviceChainParams) -> Result<ChannelEstimate> {
    require_samples(pairs.len())?;
    let tc = trusted_pair(chain)?;
    let m = pairs.len() as f64;
    let xy: Vec<(f64, f64)> = pairs
        .iter()
        .map(|p| {
            let t = &tc[p.basis.offset()];
            (t.prep_scale * p.alpha, p.beta / t.detection_gain)
        })
        .collect();
    let (mx, my) = xy
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let (sxx, sxy) = xy.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx).powi(2), b + (x - mx) * (y - my))
    });
    if sxx <= 0.0 {
        return Err(crate::error::invalid("symbols have zero spread; slope is undefined"));
    }
    let slope = sxy / sxx;
    let ssr: f64 = xy
        .iter()
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let residual_var = ssr / (m - 2.0);
    // Averages over the bases present; the two bases are symmetric for the
    // models built by `DeviceChainParams`.
    let q_frac = pairs.iter().filter(|p| p.basis == Basis::Q).count() as f64 / m;
    let mix = |f: fn(&TrustedChain) -> f64| q_frac * f(&tc[0]) + (1.0 - q_frac) * f(&tc[1]);
    Ok(Normalized {
        slope,
        slope_var: residual_var / sxx,
        residual_var,
        samples: pairs.len(),
        prep_variance: mix(|t| t.prep_variance),
        detection_noise: mix(|t| t.detection_noise / (t.detection_gain * t.detection_gain)),
    }
    .into_estimate())
}

impl ChannelEstimate {
    /// The estimate an ideal run with `m` pairs would return: point values at
    /// the true channel and the estimator's asymptotic standard errors.
    pub fn expected(chain: &DeviceChainParams, channel: &ChannelParams, m: usize) -> Result<Self> {
        require_samples(m)?;
        channel.validate()?;
        let t = chain.trusted_chain(Basis::Q)?;
        let g2 = t.detection_gain * t.detection_gain;
        let residual_var = t.channel_output_variance(channel) + t.detection_noise / g2;
        let sxx = m as f64 * t.prep_scale * t.prep_scale * t.codebook_variance;
        let mut est = Normalized {
            slope: channel.transmissivity().sqrt(),
            slope_var: residual_var / sxx,
            residual_var,
            samples: m,
            prep_variance: t.prep_variance,
            detection_noise: t.detection_noise / g2,
        }
        .into_estimate();
        // Remove rounding in 1 - (sqrt(tau))^2 and the noise subtraction.
        est.loss = channel.loss;
        est.noise_photons = channel.coupled_noise_photons;
        est.noise_photons_raw = channel.coupled_noise_photons;
        est.noise_clamped = false;
        Ok(est)
    }

    pub fn point_channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.loss.clamp(0.0, 1.0 - 1e-12), self.noise_photons)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Preset;
    use crate::exec::Execution;
    use crate::protocol::{generate_codebook, sift, simulate_transmission, BasisMode};

    fn pairs(channel: &ChannelParams, n: usize, seed: u64) -> Vec<KeyPair> {
        let chain = DeviceChainParams::preset(Preset::Run1);
        let cb = generate_codebook(n, chain.codebook_variance().unwrap(), seed).unwrap();
        let rec = simulate_transmission(&cb, &chain, channel, seed + 1, BasisMode::Sift, Execution::default()).unwrap();
        sift(&rec)
    }

    #[test]
    fn recovers_generating_parameters() {
        let ch = ChannelParams::experiment(0.02).unwrap();
        let p = pairs(&ch, 16000, 11);
        let est = estimate_channel(&p, &DeviceChainParams::preset(Preset::Run1)).unwrap();
        assert!((est.loss - 0.0115).abs() < 3.0 * est.loss_std, "{est:?}");
        assert!((est.noise_photons_raw - 0.02).abs() < 3.0 * est.noise_std, "{est:?}");
    }

    #[test]
    fn expected_errors_match_simulation_scale() {
        let chain = DeviceChainParams::preset(Preset::Run1);
        let ch = ChannelParams::experiment(0.02).unwrap();
        let p = pairs(&ch, 16000, 12);
        let est = estimate_channel(&p, &chain).unwrap();
        let exp = ChannelEstimate::expected(&chain, &ch, p.len()).unwrap();
        assert!((est.loss_std / exp.loss_std - 1.0).abs() < 0.05);
        assert!((est.noise_std / exp.noise_std - 1.0).abs() < 0.05);
    }

    #[test]
    fn doubling_samples_shrinks_noise_error() {
        let chain = DeviceChainParams::preset(Preset::Run1);
        let ch = ChannelParams::experiment(0.02).unwrap();
        let a = ChannelEstimate::expected(&chain, &ch, 4000).unwrap();
        let b = ChannelEstimate::expected(&chain, &ch, 8000).unwrap();
        assert!((a.noise_std / b.noise_std - 2f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn too_few_pairs() {
        let chain = DeviceChainParams::preset(Preset::Run1);
        let ch = ChannelParams::experiment(0.0).unwrap();
        let p = pairs(&ch, 40, 13);
        assert!(matches!(
            estimate_channel(&p[..p.len().min(29)], &chain),
            Err(Error::InsufficientData { needed: 30, .. })
        ));
    }

    #[test]
    fn clamps_negative_noise() {
        let ch = ChannelParams::experiment(0.0).unwrap();
        let chain = DeviceChainParams::preset(Preset::Run1);
        let mut seen = false;
        for seed in 0..10 {
            let est = estimate_channel(&pairs(&ch, 4000, 100 + seed), &chain).unwrap();
            assert!(est.noise_photons >= 0.0);
            assert!(est.noise_photons_raw.abs() < 4.0 * est.noise_std);
            if est.noise_clamped {
                assert_eq!(est.noise_photons, 0.0);
                seen = true;
            }
        }
        assert!(seen, "a zero-noise channel should produce some negative raw estimates");
    }
}
