//! Numerical laboratory for the Timoshenko beam with thermo-viscoelastic
//! damping and a delayed internal feedback.
//!
//! The crate simulates the coupled system
//!
//! ```text
//! rho1 Phi_tt - K (Phi_x + Psi)_x                          = 0
//! rho2 Psi_tt - b Psi_xx + K (Phi_x + Psi) + beta theta_tx = 0
//! rho3 theta_tt - delta theta_xx + gamma Psi_tx
//!      + int_0^t g(t-s) theta_xx(s) ds
//!      + mu1 theta_t(t) + mu2 theta_t(t - tau)             = 0
//! ```
//!
//! on `(0, 1)` with Dirichlet conditions for `Phi`, `Psi` and Neumann
//! conditions for `theta`, using a modal Galerkin discretization. It evaluates
//! the energy, its dissipation balance, the auxiliary Lyapunov functionals and
//! fits the decay law `E(t) <= A exp(-omega int_{t0}^t zeta)`.

pub mod coefficients;
pub mod discretization;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod integrator;
pub mod kernels;
pub mod quadrature;

pub use coefficients::{Coefficients, DampingCase};
pub use error::{Error, Result};
pub use kernels::{KernelFamily, RelaxationKernel, ScalarHistory};
