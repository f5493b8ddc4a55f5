//! Device models: Alice's squeezed-state preparation, the untrusted channel
//! and Bob's phase-sensitive single-shot detection.
//!
//! The full chain, acting on the signal mode, is
//!
//! ```text
//! squeeze -> L1 -> displacement coupler -> L2 -> channel -> L3
//!         -> measurement amplifier -> L4 -> HEMT
//! ```
//!
//! The displacement coupler is a pure displacement of unit scale (its
//! through-port transmissivity only attenuates the squeezed state). Before
//! displacement the prepared state carries `(sigma_s^2, sigma_as^2)` in
//! `(encoded, conjugate)` quadratures; the symbol ensemble of variance
//! `sigma_as^2 - sigma_s^2` then covers it into a thermal state.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Result};
use crate::gaussian::{
    ClassicalModulation, GaussianState, ModulatedState, Quadrature, SymplecticOp, VACUUM_VARIANCE,
};

/// Encoding / amplification basis.
pub type Basis = Quadrature;

/// Channel loss of the cryogenic directional coupler used as the channel.
pub const EXPERIMENT_CHANNEL_LOSS: f64 = 0.0115;

/// Lowest coupled noise (sample-stage coupling at ~15 mK).
pub const LOWEST_COUPLED_NOISE: f64 = 1.7e-6;

/// Trusted loss between the displacement coupler and the channel (`L2`).
pub const DEFAULT_PREPARATION_LOSS: f64 = 0.13;

/// Trusted loss between the channel and the measurement amplifier (`L3`).
pub const DEFAULT_DETECTION_LOSS: f64 = 0.435;

pub const DEFAULT_MEASUREMENT_GAIN_DB: f64 = 19.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 3.6 dB squeezing, 7.1 dB anti-squeezing, 65 % quantum efficiency.
    Run1,
    /// 3.6 dB squeezing, 7.6 dB anti-squeezing, 68 % quantum efficiency.
    Run2,
}

impl std::str::FromStr for Preset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "run1" => Ok(Preset::Run1),
            "run2" => Ok(Preset::Run2),
            other => Err(invalid(format!("unknown preset `{other}` (expected run1 or run2)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    Squeezed,
    Antisqueezed,
}

/// Quadrature variance for a squeezing (below vacuum) or anti-squeezing
/// (above vacuum) level in dB.
pub fn level_to_variance(level_db: f64, kind: LevelKind) -> Result<f64> {
    ensure(level_db.is_finite(), || format!("level {level_db} dB is not finite"))?;
    let exponent = match kind {
        LevelKind::Squeezed => -level_db / 10.0,
        LevelKind::Antisqueezed => level_db / 10.0,
    };
    Ok(VACUUM_VARIANCE * 10f64.powf(exponent))
}

/// Amplifier noise photons for quantum efficiency `eta = 1/(1 + 2 n_x)`.
pub fn efficiency_to_noise(eta: f64) -> Result<f64> {
    ensure(eta > 0.0 && eta <= 1.0, || format!("quantum efficiency {eta} outside (0, 1]"))?;
    Ok(0.5 * (1.0 / eta - 1.0))
}

pub fn noise_to_efficiency(n_x: f64) -> Result<f64> {
    ensure(n_x.is_finite() && n_x >= 0.0, || format!("noise photons {n_x} must be >= 0"))?;
    Ok(1.0 / (1.0 + 2.0 * n_x))
}

/// Codebook variance `sigma_A^2 = sigma_as^2 - sigma_s^2` that turns the
/// ensemble of displaced squeezed states into a thermal state.
pub fn codebook_variance(squeezing_db: f64, antisqueezing_db: f64) -> Result<f64> {
    ensure(antisqueezing_db >= squeezing_db, || {
        format!(
            "anti-squeezing {antisqueezing_db} dB below squeezing {squeezing_db} dB: no covering codebook"
        )
    })?;
    Ok(level_to_variance(antisqueezing_db, LevelKind::Antisqueezed)?
        - level_to_variance(squeezing_db, LevelKind::Squeezed)?)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Trusted hardware of Alice and Bob.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceChainParams {
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
    /// Through-port transmissivity of the displacement coupler.
    pub displacement_coupler_transmissivity: f64,
    pub measurement_gain_db: f64,
    pub quantum_efficiency: f64,
    pub hemt_gain_db: f64,
    /// Input-referred HEMT noise photons (on top of the quantum limit).
    pub hemt_noise_photons: f64,
    /// Losses `L1..L4`.
    pub path_losses: [f64; 4],
    /// Thermal photons of the environment coupled through each path loss.
    pub path_loss_photons: [f64; 4],
}

impl DeviceChainParams {
    pub fn preset(preset: Preset) -> Self {
        let (antisqueezing_db, quantum_efficiency) = match preset {
            Preset::Run1 => (7.1, 0.65),
            Preset::Run2 => (7.6, 0.68),
        };
        Self {
            squeezing_db: 3.6,
            antisqueezing_db,
            displacement_coupler_transmissivity: 1.0,
            measurement_gain_db: DEFAULT_MEASUREMENT_GAIN_DB,
            quantum_efficiency,
            hemt_gain_db: 0.0,
            hemt_noise_photons: 0.0,
            path_losses: [0.0, DEFAULT_PREPARATION_LOSS, DEFAULT_DETECTION_LOSS, 0.0],
            path_loss_photons: [0.0; 4],
        }
    }

    /// A chain with no losses, unit gain and unit efficiency.
    pub fn ideal(squeezing_db: f64, antisqueezing_db: f64) -> Self {
        Self {
            squeezing_db,
            antisqueezing_db,
            displacement_coupler_transmissivity: 1.0,
            measurement_gain_db: 0.0,
            quantum_efficiency: 1.0,
            hemt_gain_db: 0.0,
            hemt_noise_photons: 0.0,
            path_losses: [0.0; 4],
            path_loss_photons: [0.0; 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.squeezing_db.is_finite() && self.squeezing_db >= 0.0, || {
            format!("squeezing level {} dB must be >= 0", self.squeezing_db)
        })?;
        ensure(self.antisqueezing_db >= self.squeezing_db, || {
            format!(
                "anti-squeezing {} dB must be >= squeezing {} dB",
                self.antisqueezing_db, self.squeezing_db
            )
        })?;
        let tau_a = self.displacement_coupler_transmissivity;
        ensure(tau_a > 0.0 && tau_a <= 1.0, || {
            format!("displacement coupler transmissivity {tau_a} outside (0, 1]")
        })?;
        ensure(self.measurement_gain_db.is_finite() && self.measurement_gain_db >= 0.0, || {
            format!("measurement gain {} dB must be >= 0", self.measurement_gain_db)
        })?;
        efficiency_to_noise(self.quantum_efficiency)?;
        ensure(self.hemt_gain_db.is_finite() && self.hemt_gain_db >= 0.0, || {
            format!("HEMT gain {} dB must be >= 0", self.hemt_gain_db)
        })?;
        ensure(self.hemt_noise_photons.is_finite() && self.hemt_noise_photons >= 0.0, || {
            format!("HEMT noise {} must be >= 0", self.hemt_noise_photons)
        })?;
        for (i, (&l, &n)) in self.path_losses.iter().zip(&self.path_loss_photons).enumerate() {
            ensure((0.0..1.0).contains(&l), || format!("path loss L{} = {l} outside [0, 1)", i + 1))?;
            ensure(n.is_finite() && n >= 0.0, || {
                format!("path loss L{} environment photons {n} must be >= 0", i + 1)
            })?;
        }
        Ok(())
    }

    pub fn squeezed_variance(&self) -> f64 {
        VACUUM_VARIANCE * 10f64.powf(-self.squeezing_db / 10.0)
    }

    pub fn antisqueezed_variance(&self) -> f64 {
        VACUUM_VARIANCE * 10f64.powf(self.antisqueezing_db / 10.0)
    }

    pub fn codebook_variance(&self) -> Result<f64> {
        codebook_variance(self.squeezing_db, self.antisqueezing_db)
    }

    pub fn measurement_gain(&self) -> f64 {
        db_to_linear(self.measurement_gain_db)
    }

    pub fn amplifier_noise_photons(&self) -> Result<f64> {
        efficiency_to_noise(self.quantum_efficiency)
    }

    /// Squeezed (possibly impure) state with `sigma_s^2` along `basis` and
    /// `sigma_as^2` along the conjugate quadrature.
    pub fn squeezed_state(&self, basis: Basis) -> Result<GaussianState> {
        self.validate()?;
        let (vs, vas) = (self.squeezed_variance(), self.antisqueezed_variance());
        let nu = 4.0 * (vs * vas).sqrt();
        let r = 0.25 * (vas / vs).ln();
        let angle = match basis {
            Quadrature::Q => 0.0,
            Quadrature::P => std::f64::consts::FRAC_PI_2,
        };
        GaussianState::thermal(0.5 * (nu - 1.0).max(0.0))?.squeeze(0, r, angle)
    }

    /// Alice's signal at the channel input for a zero symbol, with the
    /// response of its mean to the symbol and the codebook variance.
    pub fn prepared_signal(&self, basis: Basis) -> Result<ModulatedState> {
        let state = self.squeezed_state(basis)?;
        let state = state
            .apply(&self.path_loss_op(0)?)?
            .apply(&SymplecticOp::loss(1, 0, 1.0 - self.displacement_coupler_transmissivity, 0.0)?)?;
        let modulation = ClassicalModulation::new(1, 0, basis, self.codebook_variance()?)?;
        ModulatedState::new(state, modulation)?.apply(&self.path_loss_op(1)?)
    }

    fn path_loss_op(&self, i: usize) -> Result<SymplecticOp> {
        SymplecticOp::loss(1, 0, self.path_losses[i], self.path_loss_photons[i])
    }

    /// Single-mode ops from the channel output to the digitizer, for
    /// amplification along `bob_basis`.
    ///
    /// The measurement amplifier adds isotropic output-referred noise
    /// `G n_x / 2`, so the amplified quadrature sees `n_x / 2` referred to the
    /// input while the deamplified one is swamped.
    pub fn detection_ops(&self, bob_basis: Basis) -> Result<Vec<SymplecticOp>> {
        self.validate()?;
        let g = self.measurement_gain();
        let n_amp = 0.5 * g * self.amplifier_noise_photons()?;
        Ok(vec![
            self.path_loss_op(2)?,
            SymplecticOp::phase_sensitive_amp(1, 0, g, bob_basis, [[n_amp, 0.0], [0.0, n_amp]])?,
            self.path_loss_op(3)?,
            SymplecticOp::phase_insensitive_amp(
                1,
                0,
                db_to_linear(self.hemt_gain_db),
                self.hemt_noise_photons,
            )?,
        ])
    }

    /// Linear decomposition of the trusted parts of the chain for `basis`
    /// with matched amplification.
    pub fn trusted_chain(&self, basis: Basis) -> Result<TrustedChain> {
        let prepared = self.prepared_signal(basis)?;
        let det = SymplecticOp::compose(1, &self.detection_ops(basis)?)?;
        let i = basis.offset();
        Ok(TrustedChain {
            prep_scale: prepared.modulation.direction()[i],
            prep_variance: prepared.state.quadrature_variance(0, basis),
            detection_gain: det.matrix()[(i, i)],
            detection_noise: det.added_noise()[(i, i)],
            codebook_variance: prepared.modulation.variance(),
        })
    }
}

/// Parameters of the untrusted channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Power loss `eps_E`; transmissivity is `1 - eps_E`.
    pub loss: f64,
    /// Coupled noise photons `n`.
    pub coupled_noise_photons: f64,
}

impl ChannelParams {
    pub fn new(loss: f64, coupled_noise_photons: f64) -> Result<Self> {
        let c = Self {
            loss,
            coupled_noise_photons,
        };
        c.validate()?;
        Ok(c)
    }

    /// The experimental channel with `n` coupled noise photons.
    pub fn experiment(coupled_noise_photons: f64) -> Result<Self> {
        Self::new(EXPERIMENT_CHANNEL_LOSS, coupled_noise_photons)
    }

    pub fn validate(&self) -> Result<()> {
        ensure((0.0..1.0).contains(&self.loss), || {
            format!("channel loss {} outside [0, 1)", self.loss)
        })?;
        ensure(
            self.coupled_noise_photons.is_finite() && self.coupled_noise_photons >= 0.0,
            || format!("coupled noise {} must be >= 0", self.coupled_noise_photons),
        )
    }

    pub fn transmissivity(&self) -> f64 {
        1.0 - self.loss
    }

    /// Thermal occupation `2 n / eps_E` of the cloner's environment mode.
    pub fn cloner_occupation(&self) -> Result<f64> {
        self.validate()?;
        if self.coupled_noise_photons == 0.0 {
            return Ok(0.0);
        }
        ensure(self.loss > 0.0, || {
            "coupled noise requires a non-zero channel loss (n_th = 2n/eps is singular)".into()
        })?;
        Ok(2.0 * self.coupled_noise_photons / self.loss)
    }

    pub fn op(&self) -> Result<SymplecticOp> {
        SymplecticOp::loss(1, 0, self.loss, self.cloner_occupation()?)
    }
}

/// Trusted-device constants for one basis. With these, Bob's matched
/// readout is `beta = g sqrt(tau) s alpha + noise` with noise variance
/// `g^2 (tau V + eps/4 + n) + B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustedChain {
    /// Mean at the channel input per unit symbol (`s`).
    pub prep_scale: f64,
    /// Conditional variance of the encoded quadrature at the channel input (`V`).
    pub prep_variance: f64,
    /// Amplitude gain from channel output to readout (`g`).
    pub detection_gain: f64,
    /// Added readout variance (`B`).
    pub detection_noise: f64,
    pub codebook_variance: f64,
}

impl TrustedChain {
    /// Channel-output variance of the encoded quadrature for a fixed symbol.
    pub fn channel_output_variance(&self, channel: &ChannelParams) -> f64 {
        channel.transmissivity() * self.prep_variance
            + VACUUM_VARIANCE * channel.loss
            + channel.coupled_noise_photons
    }

    pub fn response(&self, channel: &ChannelParams) -> BobResponse {
        let g2 = self.detection_gain * self.detection_gain;
        BobResponse {
            gain: self.detection_gain * channel.transmissivity().sqrt() * self.prep_scale,
            noise_variance: g2 * self.channel_output_variance(channel) + self.detection_noise,
        }
    }
}

/// Mean and variance of Bob's readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputDistribution {
    pub mean: f64,
    pub variance: f64,
}

/// Affine readout model `beta = gain * alpha + N(0, noise_variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BobResponse {
    pub gain: f64,
    pub noise_variance: f64,
}

impl BobResponse {
    pub fn snr(&self, codebook_variance: f64) -> f64 {
        self.gain * self.gain * codebook_variance / self.noise_variance
    }
}

/// Distribution of Bob's readout of Alice's encoding quadrature `basis` for
/// a symbol `alpha`, when Bob amplifies `bob_basis`.
///
/// When the bases differ, the encoded quadrature is the deamplified one.
/// The chain is applied op by op on the signal mode.
pub fn bob_output_distribution(
    chain: &DeviceChainParams,
    channel: &ChannelParams,
    alpha: f64,
    basis: Basis,
    bob_basis: Basis,
) -> Result<OutputDistribution> {
    chain.validate()?;
    channel.validate()?;
    let g = chain.measurement_gain();
    let n_amp = 0.5 * g * chain.amplifier_noise_photons()?;
    let [l1, l2, l3, l4] = chain.path_losses;
    let [n1, n2, n3, n4] = chain.path_loss_photons;
    let out = chain
        .squeezed_state(basis)?
        .loss(0, l1, n1)?
        .loss(0, 1.0 - chain.displacement_coupler_transmissivity, 0.0)?
        .displace(0, basis, alpha)?
        .loss(0, l2, n2)?
        .loss(0, channel.loss, channel.cloner_occupation()?)?
        .loss(0, l3, n3)?
        .phase_sensitive_amp(0, g, bob_basis, [[n_amp, 0.0], [0.0, n_amp]])?
        .loss(0, l4, n4)?
        .apply(&SymplecticOp::phase_insensitive_amp(
            1,
            0,
            db_to_linear(chain.hemt_gain_db),
            chain.hemt_noise_photons,
        )?)?;
    Ok(OutputDistribution {
        mean: out.quadrature_mean(0, basis),
        variance: out.quadrature_variance(0, basis),
    })
}

/// Affine decomposition of [`bob_output_distribution`].
pub fn bob_response(
    chain: &DeviceChainParams,
    channel: &ChannelParams,
    basis: Basis,
    bob_basis: Basis,
) -> Result<BobResponse> {
    let zero = bob_output_distribution(chain, channel, 0.0, basis, bob_basis)?;
    let one = bob_output_distribution(chain, channel, 1.0, basis, bob_basis)?;
    Ok(BobResponse {
        gain: one.mean - zero.mean,
        noise_variance: zero.variance,
    })
}
