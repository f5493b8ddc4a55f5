use nalgebra::linalg::SymmetricEigen;

use super::symplectic::omega;
use super::{GaussianState, PHYSICALITY_TOLERANCE};
use crate::error::{Error, Result};

/// Vacuum-normalized symplectic eigenvalues, sorted descending.
///
/// With `4V = L L^T`, the antisymmetric `A = L^T Omega L` is similar to
/// `4 Omega V`; its singular values are the symplectic eigenvalues, each
/// appearing twice. Taking singular values of `A` directly (rather than
/// eigenvalues of `A^T A`) keeps the small eigenvalues accurate for
/// strongly squeezed or amplified states.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<Vec<f64>> {
    let m = state.modes();
    let v4 = state.cov() * 4.0;
    let chol = match v4.clone().cholesky() {
        Some(c) => c,
        None => {
            let min_eig = SymmetricEigen::new(v4).eigenvalues.min();
            return Err(Error::PhysicalityViolation { min_nu: min_eig.min(0.0) });
        }
    };
    let l = chol.l();
    let a = l.transpose() * omega(m) * &l;
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    let nus: Vec<f64> = sv.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect();
    debug_assert_eq!(nus.len(), m);
    let min_nu = nus.iter().copied().fold(f64::INFINITY, f64::min);
    if min_nu < 1.0 - PHYSICALITY_TOLERANCE {
        return Err(Error::PhysicalityViolation { min_nu });
    }
    Ok(nus)
}

/// `g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2)`, the
/// entropy in bits of a thermal mode with symplectic eigenvalue `nu`.
pub fn entropy_function(nu: f64) -> f64 {
    let x = 0.5 * (nu - 1.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x < 0.5e-8 {
        // (1+x)log2(1+x) = x/ln2 + O(x^2)
        return x * (std::f64::consts::LOG2_E - x.log2());
    }
    (1.0 + x) * (1.0 + x).log2() - x * x.log2()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(state: &GaussianState) -> Result<f64> {
    Ok(symplectic_eigenvalues(state)?
        .into_iter()
        .map(entropy_function)
        .sum())
}

impl GaussianState {
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(self)
    }

    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(self)
    }

    pub fn check_physical(&self) -> Result<()> {
        symplectic_eigenvalues(self).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn eigenvalues_of_reference_states() {
        let vac = GaussianState::vacuum(1).unwrap();
        assert_relative_eq!(vac.symplectic_eigenvalues().unwrap()[0], 1.0, epsilon = 1e-12);
        let th = GaussianState::thermal(1.0).unwrap();
        assert_relative_eq!(th.symplectic_eigenvalues().unwrap()[0], 3.0, epsilon = 1e-12);
        let tm = GaussianState::two_mode_squeezed_thermal(1.0).unwrap();
        for nu in tm.symplectic_eigenvalues().unwrap() {
            assert_relative_eq!(nu, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn eigenvalues_sorted_descending() {
        let s = GaussianState::thermal(0.5)
            .unwrap()
            .tensor(&GaussianState::thermal(3.0).unwrap());
        let nus = s.symplectic_eigenvalues().unwrap();
        assert_relative_eq!(nus[0], 7.0, epsilon = 1e-12);
        assert_relative_eq!(nus[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_closed_forms() {
        assert_eq!(entropy_function(1.0), 0.0);
        assert_relative_eq!(entropy_function(3.0), 2.0, epsilon = 1e-14);
        let g2 = 1.5 * 1.5f64.log2() - 0.5 * 0.5f64.log2();
        assert_relative_eq!(entropy_function(2.0), g2, epsilon = 1e-14);
        assert_relative_eq!(g2, 1.377, epsilon = 1e-3);
        assert_relative_eq!(GaussianState::thermal(1.0).unwrap().entropy().unwrap(), 2.0, epsilon = 1e-10);
        assert_relative_eq!(GaussianState::vacuum(1).unwrap().entropy().unwrap(), 0.0);
        assert!(GaussianState::two_mode_squeezed_thermal(1.0).unwrap().entropy().unwrap() < 1e-8);
    }

    #[test]
    fn series_branch_is_continuous() {
        let below = entropy_function(1.0 + 0.99e-8);
        let above = entropy_function(1.0 + 1.01e-8);
        assert!(below < above);
        assert!((above - below) / above < 0.05);
    }

    #[test]
    fn entropy_function_is_monotone() {
        let mut last = 0.0;
        for i in 1..2000 {
            let nu = 1.0 + i as f64 * 0.01;
            let g = entropy_function(nu);
            assert!(g > last);
            last = g;
        }
    }

    #[test]
    fn sub_vacuum_state_is_rejected() {
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![0.1, 0.1]));
        let s = GaussianState::new(DVector::zeros(2), cov).unwrap();
        assert!(matches!(
            s.symplectic_eigenvalues(),
            Err(Error::PhysicalityViolation { .. })
        ));
        let neg = DMatrix::from_diagonal(&DVector::from_vec(vec![-0.1, 1.0]));
        let s = GaussianState::new(DVector::zeros(2), neg).unwrap();
        assert!(s.check_physical().is_err());
    }

    #[test]
    fn squeezing_preserves_purity() {
        let s = GaussianState::vacuum(1).unwrap().squeeze(0, 1.3, 0.4).unwrap();
        let nu = s.symplectic_eigenvalues().unwrap()[0];
        assert_relative_eq!(nu, 1.0, epsilon = 1e-10);
        let det = s.cov().determinant();
        assert_relative_eq!(det, 1.0 / 16.0, epsilon = 1e-12);
    }
}
