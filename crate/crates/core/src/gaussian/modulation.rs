use nalgebra::{DMatrix, DVector};

use super::state::quadrature_indices;
use super::{GaussianState, Quadrature, SymplecticOp};
use crate::error::{ensure, Result};

/// A classical Gaussian displacement of variance `variance` along
/// `direction`, tracked through the linear maps applied after it.
///
/// For an input modulation `alpha * u` with `alpha ~ N(0, sigma^2)`, after a
/// map `X` the state mean is shifted by `alpha * X u`; `direction` stores
/// `X u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalModulation {
    direction: DVector<f64>,
    variance: f64,
}

impl ClassicalModulation {
    pub fn new(modes: usize, mode: usize, quad: Quadrature, variance: f64) -> Result<Self> {
        ensure(mode < modes, || format!("mode {mode} out of range"))?;
        ensure(variance.is_finite() && variance >= 0.0, || {
            format!("modulation variance must be >= 0, got {variance}")
        })?;
        let mut direction = DVector::zeros(2 * modes);
        direction[2 * mode + quad.offset()] = 1.0;
        Ok(Self { direction, variance })
    }

    pub fn from_direction(direction: DVector<f64>, variance: f64) -> Result<Self> {
        ensure(variance.is_finite() && variance >= 0.0, || {
            format!("modulation variance must be >= 0, got {variance}")
        })?;
        Ok(Self { direction, variance })
    }

    pub fn direction(&self) -> &DVector<f64> {
        &self.direction
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn propagate(&self, op: &SymplecticOp) -> Result<Self> {
        ensure(op.dim() == self.direction.len(), || "modulation/op size mismatch".into())?;
        Ok(Self {
            direction: op.matrix() * &self.direction,
            variance: self.variance,
        })
    }

    /// Extend with zero response on appended modes.
    pub fn extended(&self, extra_modes: usize) -> Self {
        let n = self.direction.len();
        let mut direction = DVector::zeros(n + 2 * extra_modes);
        direction.rows_mut(0, n).copy_from(&self.direction);
        Self {
            direction,
            variance: self.variance,
        }
    }
}

/// A Gaussian state conditioned on a known classical symbol, together with
/// the response of its mean to that symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedState {
    pub state: GaussianState,
    pub modulation: ClassicalModulation,
}

impl ModulatedState {
    pub fn new(state: GaussianState, modulation: ClassicalModulation) -> Result<Self> {
        ensure(state.mean().len() == modulation.direction.len(), || {
            "modulation/state size mismatch".into()
        })?;
        Ok(Self { state, modulation })
    }

    pub fn apply(&self, op: &SymplecticOp) -> Result<Self> {
        Ok(Self {
            state: self.state.apply(op)?,
            modulation: self.modulation.propagate(op)?,
        })
    }

    /// Append uncorrelated modes (e.g. an attacker's ancilla).
    pub fn tensor(&self, other: &GaussianState) -> Self {
        Self {
            state: self.state.tensor(other),
            modulation: self.modulation.extended(other.modes()),
        }
    }

    pub fn condition(&self, rest: &[usize]) -> Result<(GaussianState, GaussianState)> {
        condition_on_classical_gaussian(&self.state, &self.modulation, rest)
    }
}

/// Covariances of the `rest` modes with the symbol known (conditional) and
/// averaged over the Gaussian symbol ensemble (unconditional).
///
/// `state` is the joint state for a fixed symbol. The unconditional state is
/// the Gaussian mixture with covariance `V_rest + sigma^2 d_rest d_rest^T` and
/// the same mean as the zero-symbol state.
pub fn condition_on_classical_gaussian(
    state: &GaussianState,
    modulation: &ClassicalModulation,
    rest: &[usize],
) -> Result<(GaussianState, GaussianState)> {
    ensure(state.mean().len() == modulation.direction.len(), || {
        "modulation/state size mismatch".into()
    })?;
    let conditional = state.reduced(rest)?;
    let idx = quadrature_indices(rest);
    let d = DVector::from_iterator(idx.len(), idx.iter().map(|&i| modulation.direction[i]));
    let extra: DMatrix<f64> = &d * d.transpose() * modulation.variance;
    let unconditional = GaussianState::from_parts_unchecked(
        conditional.mean().clone(),
        conditional.cov() + extra,
    );
    Ok((conditional, unconditional))
}
