//! Modal Galerkin realization of the beam system.
//!
//! With `a`, `p` the sine coefficients of `Phi`, `Psi`, `h` the cosine
//! coefficients of `theta`, `C[j][k] = <c_j, s_k>`, `m_j = (g * h_j)(t)` and
//! `z_j` the delayed `theta_t` coefficients, the projected equations read
//!
//! ```text
//! rho1 a_j''  = -K j pi (j pi a_j + sum_k C[j][k] p_k)
//! rho2 p_j''  = -b (j pi)^2 p_j - K (sum_k k pi a_k C[k][j] + p_j) + beta j pi h_j'
//! rho3 h_j''  = -delta (j pi)^2 h_j + (j pi)^2 m_j - gamma j pi p_j'
//!               - mu1 h_j' - mu2 z_j                                  (j >= 1)
//! rho3 h_0''  = -mu1 h_0' - mu2 z_0
//! ```
//!
//! `Phi_x` lives in the cosine span and `Psi` in the sine span, so the shear
//! coupling `K (Phi_x + Psi)` links every pair of wavenumbers of opposite
//! parity through `C`. The `beta` and `gamma` couplings are diagonal.

pub mod basis;
pub mod delay;
pub mod dirichlet;
pub mod history;
pub mod initial;
pub mod state;

pub use basis::Basis;
pub use delay::{DelayBackend, DelayField};
pub use dirichlet::{solve_w, DirichletSolution};
pub use history::{HistoryTrace, MemoryTerms};
pub use initial::{project_initial, DelayLayout, InitialData};
pub use state::ModalState;

use basis::wavenumber;

use crate::coefficients::Coefficients;
use crate::kernels::RelaxationKernel;

/// Coefficients, kernel and basis tables of one Galerkin system.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub coeffs: Coefficients,
    pub kernel: RelaxationKernel,
    pub basis: Basis,
}

/// Modal accelerations.
#[derive(Debug, Clone, PartialEq)]
pub struct Accelerations {
    pub phi_tt: Vec<f64>,
    pub psi_tt: Vec<f64>,
    pub theta_tt: Vec<f64>,
}

impl GalerkinSystem {
    pub fn new(coeffs: Coefficients, kernel: RelaxationKernel, n: usize) -> Self {
        Self {
            coeffs,
            kernel,
            basis: Basis::new(n),
        }
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    /// Time derivative of the flat state `[a, p, h, a', p', h']` given the
    /// memory convolutions `m` and delayed slice `z` at the same time.
    pub fn derivative(&self, y: &[f64], memory: &[f64], delayed: &[f64], dy: &mut [f64]) {
        let n = self.n();
        let c = &self.coeffs;
        let off = 3 * n + 1;
        let (pos, vel) = y.split_at(off);
        let (a, rest) = pos.split_at(n);
        let (p, h) = rest.split_at(n);
        let (_a_t, rest) = vel.split_at(n);
        let (p_t, h_t) = rest.split_at(n);
        dy[..off].copy_from_slice(vel);
        let (_, acc) = dy.split_at_mut(off);
        let (a_tt, rest) = acc.split_at_mut(n);
        let (p_tt, h_tt) = rest.split_at_mut(n);

        // cosine coefficients of Psi and sine coefficients of Phi_x
        let mut psi_cos = vec![0.0; n + 1];
        self.basis.sin_to_cos(p, &mut psi_cos);
        let mut phix = vec![0.0; n + 1];
        for k in 1..=n {
            phix[k] = wavenumber(k) * a[k - 1];
        }
        let mut phix_sin = vec![0.0; n];
        self.basis.cos_to_sin(&phix, &mut phix_sin);

        for j in 1..=n {
            let kj = wavenumber(j);
            a_tt[j - 1] = -c.k * kj * (phix[j] + psi_cos[j]) / c.rho1;
            p_tt[j - 1] = (-c.b * kj * kj * p[j - 1] - c.k * (phix_sin[j - 1] + p[j - 1]) + c.beta * kj * h_t[j])
                / c.rho2;
            h_tt[j] = (-c.delta * kj * kj * h[j] + kj * kj * memory[j]
                - c.gamma * kj * p_t[j - 1]
                - c.mu1 * h_t[j]
                - c.mu2 * delayed[j])
                / c.rho3;
        }
        h_tt[0] = (-c.mu1 * h_t[0] - c.mu2 * delayed[0]) / c.rho3;
    }

    /// Accelerations at a full step, with the memory and delay read from the
    /// history and the delay field.
    pub fn rhs(&self, state: &ModalState, delay: &DelayField, hist: &HistoryTrace) -> Accelerations {
        let n = self.n();
        let mut memory = vec![0.0; n + 1];
        hist.stage_memory(0.0, &state.theta, &mut memory);
        let mut delayed = vec![0.0; n + 1];
        delay.delay_value(0.0, hist.dt(), &mut delayed);
        let y = state.to_flat();
        let mut dy = vec![0.0; y.len()];
        self.derivative(&y, &memory, &delayed, &mut dy);
        let acc = &dy[3 * n + 1..];
        Accelerations {
            phi_tt: acc[..n].to_vec(),
            psi_tt: acc[n..2 * n].to_vec(),
            theta_tt: acc[2 * n..].to_vec(),
        }
    }
}
