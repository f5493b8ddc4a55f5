//! Gaussian-state mechanics in quadrature units where the vacuum variance is
//! 0.25 (`[q, ip] = 1/2`).
//!
//! Quadratures are ordered `q1, p1, q2, p2, ...`. Symplectic eigenvalues are
//! reported vacuum-normalized (vacuum has `nu = 1`), i.e. they are the moduli of
//! the eigenvalues of `4 i Omega V`.

mod entropy;
mod modulation;
mod state;
mod symplectic;

pub use entropy::{entropy_function, symplectic_eigenvalues, von_neumann_entropy};
pub use modulation::{condition_on_classical_gaussian, ClassicalModulation, ModulatedState};
pub use state::{GaussianState, Quadrature};
pub use symplectic::SymplecticOp;

/// Vacuum quadrature variance.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Tolerance on `nu >= 1` before a state is reported non-physical.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;
