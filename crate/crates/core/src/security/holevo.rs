use crate::device::{Basis, ChannelParams, DeviceChainParams};
use crate::error::Result;
use crate::gaussian::{GaussianState, ModulatedState, SymplecticOp};

/// Eve's state for the entangling cloner, before and after averaging over
/// Alice's symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct EveStates {
    /// Eve's two modes with the symbol known.
    pub conditional: GaussianState,
    /// Eve's two modes averaged over the codebook.
    pub unconditional: GaussianState,
}

/// Alice's channel-input signal tensored with the cloner pair, after the
/// channel beamsplitter. Mode 0 goes to Bob, modes 1 and 2 stay with Eve.
pub fn cloner_output(
    chain: &DeviceChainParams,
    channel: &ChannelParams,
    basis: Basis,
) -> Result<ModulatedState> {
    let n_th = channel.cloner_occupation()?;
    let joint = chain
        .prepared_signal(basis)?
        .tensor(&GaussianState::two_mode_squeezed_thermal(n_th)?);
    joint.apply(&SymplecticOp::beamsplitter(3, 0, 1, channel.transmissivity())?)
}

pub fn eve_states(chain: &DeviceChainParams, channel: &ChannelParams) -> Result<EveStates> {
    let (conditional, unconditional) = cloner_output(chain, channel, Basis::Q)?.condition(&[1, 2])?;
    Ok(EveStates {
        conditional,
        unconditional,
    })
}

/// Holevo information between Alice's symbol and Eve under an entangling
/// cloner, direct reconciliation, with trusted preparation and detection
/// noise.
///
/// Eve's conditional state does not depend on the symbol value, so the
/// ensemble integral reduces to `S(unconditional) - S(conditional)`.
pub fn holevo_dr(chain: &DeviceChainParams, channel: &ChannelParams) -> Result<f64> {
    channel.validate()?;
    if channel.loss == 0.0 && channel.coupled_noise_photons == 0.0 {
        chain.validate()?;
        return Ok(0.0);
    }
    let eve = eve_states(chain, channel)?;
    let chi = eve.unconditional.entropy()? - eve.conditional.entropy()?;
    // Rounding can leave a tiny negative difference when nothing is encoded.
    Ok(chi.max(0.0))
}
