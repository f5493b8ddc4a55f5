use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{SymplecticOp, VACUUM_VARIANCE};
use crate::error::{ensure, invalid, Result};

/// One of the two field quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    pub fn conjugate(self) -> Self {
        match self {
            Quadrature::Q => Quadrature::P,
            Quadrature::P => Quadrature::Q,
        }
    }

    /// Offset of this quadrature inside a mode's `(q, p)` pair.
    pub fn offset(self) -> usize {
        match self {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrature::Q => "q",
            Quadrature::P => "p",
        }
    }
}

impl std::fmt::Display for Quadrature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// First and second moments of an `M`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validates dimensions and symmetry. Physicality is checked separately by
    /// [`GaussianState::check_physical`].
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        ensure(n >= 2 && n.is_multiple_of(2), || {
            format!("mean length {n} is not 2 x modes")
        })?;
        ensure(cov.nrows() == n && cov.ncols() == n, || {
            format!("covariance is {}x{}, expected {n}x{n}", cov.nrows(), cov.ncols())
        })?;
        ensure(mean.iter().chain(cov.iter()).all(|x| x.is_finite()), || {
            "non-finite moment".to_string()
        })?;
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        let asym = (&cov - cov.transpose()).amax();
        ensure(asym <= 1e-12 * scale, || {
            format!("covariance not symmetric (max |V - V^T| = {asym:.3e})")
        })?;
        Ok(Self::from_parts_unchecked(mean, cov))
    }

    pub(crate) fn from_parts_unchecked(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        let cov = symmetrize(cov);
        Self { mean, cov }
    }

    pub fn vacuum(modes: usize) -> Result<Self> {
        ensure(modes >= 1, || "vacuum needs at least one mode".into())?;
        let n = 2 * modes;
        Ok(Self {
            mean: DVector::zeros(n),
            cov: DMatrix::identity(n, n) * VACUUM_VARIANCE,
        })
    }

    /// Single-mode thermal state with mean photon number `n_photons`.
    pub fn thermal(n_photons: f64) -> Result<Self> {
        ensure(n_photons.is_finite() && n_photons >= 0.0, || {
            format!("thermal photon number must be >= 0, got {n_photons}")
        })?;
        Ok(Self {
            mean: DVector::zeros(2),
            cov: DMatrix::identity(2, 2) * ((1.0 + 2.0 * n_photons) * VACUUM_VARIANCE),
        })
    }

    /// Two-mode squeezed vacuum whose marginals are thermal with `n_th`
    /// photons: the purification used by an entangling cloner.
    pub fn two_mode_squeezed_thermal(n_th: f64) -> Result<Self> {
        ensure(n_th.is_finite() && n_th >= 0.0, || {
            format!("two-mode squeezed occupation must be >= 0, got {n_th}")
        })?;
        let nu = 1.0 + 2.0 * n_th;
        // (nu - 1)(nu + 1) avoids cancellation for small n_th
        let c = ((nu - 1.0) * (nu + 1.0)).sqrt();
        let mut cov = DMatrix::identity(4, 4) * nu;
        cov[(0, 2)] = c;
        cov[(2, 0)] = c;
        cov[(1, 3)] = -c;
        cov[(3, 1)] = -c;
        Ok(Self {
            mean: DVector::zeros(4),
            cov: cov * VACUUM_VARIANCE,
        })
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn quadrature_mean(&self, mode: usize, quad: Quadrature) -> f64 {
        self.mean[2 * mode + quad.offset()]
    }

    pub fn quadrature_variance(&self, mode: usize, quad: Quadrature) -> f64 {
        let i = 2 * mode + quad.offset();
        self.cov[(i, i)]
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        ensure(mode < self.modes(), || {
            format!("mode {mode} out of range for {}-mode state", self.modes())
        })
    }

    /// Direct sum with `other` (other's modes are appended).
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let n1 = self.mean.len();
        let n2 = other.mean.len();
        let mut mean = DVector::zeros(n1 + n2);
        mean.rows_mut(0, n1).copy_from(&self.mean);
        mean.rows_mut(n1, n2).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n1 + n2, n1 + n2);
        cov.view_mut((0, 0), (n1, n1)).copy_from(&self.cov);
        cov.view_mut((n1, n1), (n2, n2)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Partial trace keeping `modes` in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<GaussianState> {
        ensure(!modes.is_empty(), || "reduced state needs at least one mode".into())?;
        for &m in modes {
            self.check_mode(m)?;
        }
        let idx = quadrature_indices(modes);
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        Ok(GaussianState { mean, cov })
    }

    pub fn apply(&self, op: &SymplecticOp) -> Result<GaussianState> {
        ensure(op.dim() == self.mean.len(), || {
            format!(
                "operation acts on {} quadratures, state has {}",
                op.dim(),
                self.mean.len()
            )
        })?;
        let x = op.matrix();
        let mean = x * &self.mean;
        let cov = x * &self.cov * x.transpose() + op.added_noise();
        Ok(GaussianState::from_parts_unchecked(mean, cov))
    }

    /// Squeeze `mode` by factor `r` along the axis at `angle` radians from q:
    /// the variance along that axis is multiplied by `exp(-2r)` and the
    /// orthogonal one by `exp(2r)`.
    pub fn squeeze(&self, mode: usize, r: f64, angle: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        self.apply(&SymplecticOp::squeeze(self.modes(), mode, r, angle)?)
    }

    /// Beamsplitter of power transmissivity `tau` between modes `a` and `b`.
    /// See [`SymplecticOp::beamsplitter`] for the sign convention.
    pub fn beamsplitter(&self, a: usize, b: usize, tau: f64) -> Result<GaussianState> {
        self.apply(&SymplecticOp::beamsplitter(self.modes(), a, b, tau)?)
    }

    /// `V' = J^T V J + N` on `mode`.
    pub fn phase_sensitive_amp(
        &self,
        mode: usize,
        gain: f64,
        amplified: Quadrature,
        noise: [[f64; 2]; 2],
    ) -> Result<GaussianState> {
        self.apply(&SymplecticOp::phase_sensitive_amp(
            self.modes(),
            mode,
            gain,
            amplified,
            noise,
        )?)
    }

    /// Loss `epsilon` against a thermal environment with `n_env` photons.
    pub fn loss(&self, mode: usize, epsilon: f64, n_env: f64) -> Result<GaussianState> {
        self.apply(&SymplecticOp::loss(self.modes(), mode, epsilon, n_env)?)
    }

    pub fn displace(&self, mode: usize, quad: Quadrature, amplitude: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        if !amplitude.is_finite() {
            return Err(invalid(format!("displacement {amplitude} is not finite")));
        }
        let mut out = self.clone();
        out.mean[2 * mode + quad.offset()] += amplitude;
        Ok(out)
    }
}

pub(crate) fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
