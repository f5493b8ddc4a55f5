use nalgebra::DMatrix;

use super::{Quadrature, VACUUM_VARIANCE};
use crate::error::{ensure, Result};

/// An affine Gaussian map `V -> X V X^T + N`, `mean -> X mean` acting on all
/// `2M` quadratures.
///
/// For unitary operations `N = 0` and `X` preserves the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
    added_noise: DMatrix<f64>,
}

impl SymplecticOp {
    pub fn identity(modes: usize) -> Self {
        let n = 2 * modes;
        Self {
            matrix: DMatrix::identity(n, n),
            added_noise: DMatrix::zeros(n, n),
        }
    }

    /// Build from an explicit matrix and noise. No physicality check is made.
    pub fn from_parts(matrix: DMatrix<f64>, added_noise: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        ensure(n.is_multiple_of(2) && n > 0 && matrix.is_square(), || {
            format!("matrix must be 2M x 2M, got {}x{}", n, matrix.ncols())
        })?;
        ensure(added_noise.shape() == (n, n), || "noise shape mismatch".into())?;
        Ok(Self {
            matrix,
            added_noise: super::state::symmetrize(added_noise),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn modes(&self) -> usize {
        self.dim() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn added_noise(&self) -> &DMatrix<f64> {
        &self.added_noise
    }

    fn embed(modes: usize, target: usize, block: [[f64; 2]; 2], noise: [[f64; 2]; 2]) -> Self {
        let mut op = Self::identity(modes);
        let o = 2 * target;
        for r in 0..2 {
            for c in 0..2 {
                op.matrix[(o + r, o + c)] = block[r][c];
                op.added_noise[(o + r, o + c)] = noise[r][c];
            }
        }
        op
    }

    fn check_target(modes: usize, target: usize) -> Result<()> {
        ensure(target < modes, || {
            format!("mode {target} out of range for {modes}-mode operation")
        })
    }

    /// Single-mode squeezer `R(angle) diag(e^-r, e^r) R(angle)^T`.
    pub fn squeeze(modes: usize, target: usize, r: f64, angle: f64) -> Result<Self> {
        Self::check_target(modes, target)?;
        ensure(r.is_finite() && angle.is_finite(), || {
            format!("squeeze parameters must be finite (r = {r}, angle = {angle})")
        })?;
        let (s, c) = angle.sin_cos();
        let (a, b) = ((-r).exp(), r.exp());
        let block = [
            [a * c * c + b * s * s, (a - b) * c * s],
            [(a - b) * c * s, a * s * s + b * c * c],
        ];
        Ok(Self::embed(modes, target, block, [[0.0; 2]; 2]))
    }

    /// Beamsplitter with power transmissivity `tau`:
    /// `a' = sqrt(tau) a + sqrt(1-tau) b`, `b' = -sqrt(1-tau) a + sqrt(tau) b`
    /// for both quadratures. At `tau = 0` this swaps the modes with a sign
    /// flip on the second output.
    pub fn beamsplitter(modes: usize, a: usize, b: usize, tau: f64) -> Result<Self> {
        Self::check_target(modes, a)?;
        Self::check_target(modes, b)?;
        ensure(a != b, || "beamsplitter needs two distinct modes".into())?;
        ensure((0.0..=1.0).contains(&tau), || {
            format!("transmissivity {tau} outside [0, 1]")
        })?;
        let (t, e) = (tau.sqrt(), (1.0 - tau).sqrt());
        let mut op = Self::identity(modes);
        for k in 0..2 {
            let (ia, ib) = (2 * a + k, 2 * b + k);
            op.matrix[(ia, ia)] = t;
            op.matrix[(ia, ib)] = e;
            op.matrix[(ib, ia)] = -e;
            op.matrix[(ib, ib)] = t;
        }
        Ok(op)
    }

    /// Degenerate parametric gain: `J = diag(sqrt(G), 1/sqrt(G))` for
    /// q-amplification (swapped for p) plus the output-referred noise `noise`.
    pub fn phase_sensitive_amp(
        modes: usize,
        target: usize,
        gain: f64,
        amplified: Quadrature,
        noise: [[f64; 2]; 2],
    ) -> Result<Self> {
        Self::check_target(modes, target)?;
        ensure(gain.is_finite() && gain >= 1.0, || {
            format!("phase-sensitive gain must be >= 1, got {gain}")
        })?;
        ensure(is_psd_2x2(&noise), || {
            format!("amplifier noise {noise:?} is not symmetric positive semidefinite")
        })?;
        let (gq, gp) = match amplified {
            Quadrature::Q => (gain.sqrt(), 1.0 / gain.sqrt()),
            Quadrature::P => (1.0 / gain.sqrt(), gain.sqrt()),
        };
        Ok(Self::embed(modes, target, [[gq, 0.0], [0.0, gp]], noise))
    }

    /// Loss `epsilon` against a thermal bath of `n_env` photons, with the
    /// environment traced out.
    pub fn loss(modes: usize, target: usize, epsilon: f64, n_env: f64) -> Result<Self> {
        Self::check_target(modes, target)?;
        ensure((0.0..=1.0).contains(&epsilon), || {
            format!("loss {epsilon} outside [0, 1]")
        })?;
        ensure(n_env.is_finite() && n_env >= 0.0, || {
            format!("environment photons must be >= 0, got {n_env}")
        })?;
        let t = (1.0 - epsilon).sqrt();
        let v = epsilon * (1.0 + 2.0 * n_env) * VACUUM_VARIANCE;
        Ok(Self::embed(modes, target, [[t, 0.0], [0.0, t]], [[v, 0.0], [0.0, v]]))
    }

    /// Phase-insensitive amplifier with power gain `gain >= 1` and
    /// `noise_photons` of input-referred added noise on top of the quantum
    /// limit.
    pub fn phase_insensitive_amp(
        modes: usize,
        target: usize,
        gain: f64,
        noise_photons: f64,
    ) -> Result<Self> {
        Self::check_target(modes, target)?;
        ensure(gain.is_finite() && gain >= 1.0, || {
            format!("phase-insensitive gain must be >= 1, got {gain}")
        })?;
        ensure(noise_photons.is_finite() && noise_photons >= 0.0, || {
            format!("amplifier noise photons must be >= 0, got {noise_photons}")
        })?;
        let g = gain.sqrt();
        let v = (gain - 1.0) * VACUUM_VARIANCE + gain * 2.0 * noise_photons * VACUUM_VARIANCE;
        Ok(Self::embed(modes, target, [[g, 0.0], [0.0, g]], [[v, 0.0], [0.0, v]]))
    }

    /// `next` applied after `self`.
    pub fn then(&self, next: &SymplecticOp) -> Result<SymplecticOp> {
        ensure(self.dim() == next.dim(), || "cannot compose ops of different size".into())?;
        let matrix = &next.matrix * &self.matrix;
        let added_noise = &next.matrix * &self.added_noise * next.matrix.transpose() + &next.added_noise;
        Ok(SymplecticOp {
            matrix,
            added_noise: super::state::symmetrize(added_noise),
        })
    }

    /// Sequential composition of `ops` (first element acts first).
    pub fn compose<'a>(modes: usize, ops: impl IntoIterator<Item = &'a SymplecticOp>) -> Result<Self> {
        ops.into_iter()
            .try_fold(Self::identity(modes), |acc, op| acc.then(op))
    }

    /// Max-norm deviation of `X Omega X^T` from `Omega`.
    pub fn symplectic_defect(&self) -> f64 {
        let om = omega(self.modes());
        (&self.matrix * &om * self.matrix.transpose() - om).amax()
    }
}

/// Symplectic form `block_diag([[0, 1], [-1, 0]], ...)`.
pub fn omega(modes: usize) -> DMatrix<f64> {
    let n = 2 * modes;
    let mut om = DMatrix::zeros(n, n);
    for k in 0..modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

fn is_psd_2x2(n: &[[f64; 2]; 2]) -> bool {
    let sym = (n[0][1] - n[1][0]).abs() <= 1e-12 * (n[0][0].abs() + n[1][1].abs()).max(1e-300);
    let finite = n.iter().flatten().all(|x| x.is_finite());
    let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
    finite && sym && n[0][0] >= 0.0 && n[1][1] >= 0.0 && det >= -1e-15
}
