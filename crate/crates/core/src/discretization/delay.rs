//! The delayed slice `z(x, rho, t) = theta_t(x, t - rho tau)`.
//!
//! Two realizations are provided. The ring buffer stores exact `theta_t`
//! snapshots one step apart and requires `tau / dt` to be an integer. The
//! transport backend solves `tau z_t + z_rho = 0` on a uniform `rho` grid with
//! first-order upwinding and inflow `z(rho = 0) = theta_t`. At unit Courant
//! number (`dt = tau / m_rho`) both coincide.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DelayBackend {
    #[default]
    Ringbuffer,
    Transport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DelayField {
    /// `buf[i]` holds `theta_t` at `t - tau + i dt`, `i = 0..=m`.
    Ring { buf: VecDeque<Vec<f64>>, dt: f64 },
    /// `z[i]` holds the cosine coefficients at `rho_i = i / m_rho`.
    Transport { z: Vec<Vec<f64>>, tau: f64 },
}

impl DelayField {
    /// Ring buffer from the `m + 1` snapshots on `[t - tau, t]`.
    pub fn ring(samples: Vec<Vec<f64>>, dt: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Arity {
                needed: 2,
                got: samples.len(),
            });
        }
        Ok(DelayField::Ring {
            buf: samples.into(),
            dt,
        })
    }

    /// Transport field from samples on `rho_i = i / m_rho`, `i = 0..=m_rho`.
    pub fn transport(z: Vec<Vec<f64>>, tau: f64) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::Arity { needed: 2, got: z.len() });
        }
        Ok(DelayField::Transport { z, tau })
    }

    pub fn backend(&self) -> DelayBackend {
        match self {
            DelayField::Ring { .. } => DelayBackend::Ringbuffer,
            DelayField::Transport { .. } => DelayBackend::Transport,
        }
    }

    /// Number of `rho` intervals.
    pub fn m(&self) -> usize {
        match self {
            DelayField::Ring { buf, .. } => buf.len() - 1,
            DelayField::Transport { z, .. } => z.len() - 1,
        }
    }

    pub fn d_rho(&self) -> f64 {
        1.0 / self.m() as f64
    }

    /// Coefficients of `z(., rho_i, t)`, `i = 0..=m`.
    pub fn rho_slice(&self, i: usize) -> &[f64] {
        match self {
            DelayField::Ring { buf, .. } => &buf[buf.len() - 1 - i],
            DelayField::Transport { z, .. } => &z[i],
        }
    }

    /// `z(., 1, t)`, the delayed `theta_t`.
    pub fn z_end(&self) -> &[f64] {
        self.rho_slice(self.m())
    }

    /// `z(., 1, t + c dt)` for `c` in `[0, 1]`, by linear interpolation of the
    /// stored slices.
    pub fn delay_value(&self, c: f64, dt: f64, out: &mut [f64]) {
        let m = self.m();
        let nu = match self {
            DelayField::Ring { .. } => c,
            DelayField::Transport { tau, .. } => c * dt * m as f64 / tau,
        };
        let (a, b) = (self.rho_slice(m), self.rho_slice(m - 1));
        for ((o, za), zb) in out.iter_mut().zip(a).zip(b) {
            *o = (1.0 - nu) * za + nu * zb;
        }
    }

    /// Advances the field by one step with new inflow `theta_t(t + dt)`.
    pub fn advect_z(&mut self, theta_t_new: &[f64], dt: f64) -> Result<()> {
        match self {
            DelayField::Ring { buf, dt: ring_dt } => {
                if (dt - *ring_dt).abs() > 1e-12 * ring_dt.abs() {
                    return Err(Error::StepSize(format!(
                        "ring buffer built for dt = {ring_dt}, stepped with {dt}"
                    )));
                }
                let mut slot = buf.pop_front().expect("ring buffer is non-empty");
                slot.copy_from_slice(theta_t_new);
                buf.push_back(slot);
            }
            DelayField::Transport { z, tau } => {
                let m = z.len() - 1;
                let nu = dt * m as f64 / *tau;
                if nu > 1.0 + 1e-12 {
                    return Err(Error::StepSize(format!(
                        "CFL violated: dt = {dt} exceeds tau * d_rho = {}",
                        *tau / m as f64
                    )));
                }
                if (nu - 1.0).abs() <= 1e-12 {
                    // unit Courant number: exact shift
                    z.rotate_right(1);
                    z[0].copy_from_slice(theta_t_new);
                    return Ok(());
                }
                for i in (1..=m).rev() {
                    let (lo, hi) = z.split_at_mut(i);
                    for (zi, zl) in hi[0].iter_mut().zip(&lo[i - 1]) {
                        *zi -= nu * (*zi - zl);
                    }
                }
                z[0].copy_from_slice(theta_t_new);
            }
        }
        Ok(())
    }

    /// `sum_i w_i e^{-2 tau rho_i} ||z(rho_i)||^2` with trapezoid weights, or
    /// the unweighted integral when `tau_weight` is zero.
    pub fn weighted_norm(&self, tau_weight: f64) -> f64 {
        let m = self.m();
        let d = self.d_rho();
        (0..=m)
            .map(|i| {
                let w = if i == 0 || i == m { 0.5 * d } else { d };
                let rho = i as f64 * d;
                let zz: f64 = self.rho_slice(i).iter().map(|v| v * v).sum();
                w * (-2.0 * tau_weight * rho).exp() * zz
            })
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        (0..=self.m()).all(|i| self.rho_slice(i).iter().all(|v| v.is_finite()))
    }
}
