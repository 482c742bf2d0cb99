//! Initial data and its projection onto the modal state, the delay field and
//! the history trace.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::basis::Projector;
use super::delay::{DelayBackend, DelayField};
use super::history::HistoryTrace;
use super::state::ModalState;
use crate::error::{Error, Result};
use crate::kernels::RelaxationKernel;

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// `f0(x, s)` for `s` in `[-tau, 0]`.
pub type HistoryProfile = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `(Phi0, Phi1, Psi0, Psi1, theta0, theta1, f0)`.
#[derive(Clone)]
pub struct InitialData {
    pub phi0: Profile,
    pub phi1: Profile,
    pub psi0: Profile,
    pub psi1: Profile,
    pub theta0: Profile,
    pub theta1: Profile,
    pub f0: HistoryProfile,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("InitialData { .. }")
    }
}

fn zero() -> Profile {
    Arc::new(|_| 0.0)
}

impl InitialData {
    pub fn zero() -> Self {
        Self {
            phi0: zero(),
            phi1: zero(),
            psi0: zero(),
            psi1: zero(),
            theta0: zero(),
            theta1: zero(),
            f0: Arc::new(|_, _| 0.0),
        }
    }

    /// `Phi0 = Psi0 = A sqrt2 sin(m pi x)`, everything else at rest.
    pub fn sine_bump(amplitude: f64, mode: usize) -> Self {
        Self::mode_pair(amplitude, mode, mode)
    }

    /// `Phi0 = A sqrt2 sin(j pi x)`, `Psi0 = A sqrt2 sin(k pi x)`; mode 0
    /// leaves the field at zero.
    pub fn mode_pair(amplitude: f64, phi_mode: usize, psi_mode: usize) -> Self {
        let bump = |m: usize| -> Profile {
            let k = m as f64 * std::f64::consts::PI;
            Arc::new(move |x| amplitude * SQRT_2 * (k * x).sin())
        };
        Self {
            phi0: bump(phi_mode),
            psi0: bump(psi_mode),
            ..Self::zero()
        }
    }

    /// `Phi0 = Psi0 = 4 A x (1 - x)`.
    pub fn poly_bump(amplitude: f64) -> Self {
        let bump: Profile = Arc::new(move |x| 4.0 * amplitude * x * (1.0 - x));
        Self {
            phi0: bump.clone(),
            psi0: bump,
            ..Self::zero()
        }
    }

    /// Seeded random low-mode displacements with a `k^-2` spectrum.
    pub fn random_modes(amplitude: f64, modes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (1..=modes)
                .map(|k| amplitude * rng.random_range(-1.0..1.0) / (k * k) as f64)
                .collect()
        };
        let (a, p) = (draw(&mut rng), draw(&mut rng));
        let series = |c: Vec<f64>| -> Profile {
            Arc::new(move |x| {
                c.iter()
                    .enumerate()
                    .map(|(i, v)| v * SQRT_2 * ((i + 1) as f64 * std::f64::consts::PI * x).sin())
                    .sum()
            })
        };
        Self {
            phi0: series(a),
            psi0: series(p),
            ..Self::zero()
        }
    }
}

/// Piecewise-linear interpolant through uniformly spaced samples on `[0, 1]`.
pub fn sampled_profile(values: Vec<f64>) -> Result<Profile> {
    if values.len() < 2 {
        return Err(Error::Input("a sampled profile needs at least 2 points".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("sampled profile contains non-finite values".into()));
    }
    let m = (values.len() - 1) as f64;
    Ok(Arc::new(move |x: f64| {
        let s = (x.clamp(0.0, 1.0)) * m;
        let i = (s.floor() as usize).min(values.len() - 2);
        let f = s - i as f64;
        values[i] + f * (values[i + 1] - values[i])
    }))
}

/// Delay-field layout requested by the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayLayout {
    pub backend: DelayBackend,
    /// `rho` intervals for the transport backend; the ring buffer always uses
    /// `tau / dt`.
    pub m_rho: usize,
}

/// Projects the data onto `n` modes and seeds the delay field and history.
pub fn project_initial(
    data: &InitialData,
    n: usize,
    layout: DelayLayout,
    tau: f64,
    dt: f64,
    kernel: &RelaxationKernel,
) -> Result<(ModalState, DelayField, HistoryTrace)> {
    if n == 0 {
        return Err(Error::Input("Galerkin dimension must be positive".into()));
    }
    let p = Projector::new(n);
    let sample = |f: &Profile| -> Result<Vec<f64>> {
        let s: Vec<f64> = p.nodes().iter().map(|x| f(*x)).collect();
        if s.iter().all(|v| v.is_finite()) {
            Ok(s)
        } else {
            Err(Error::Input("initial datum is not finite on the quadrature grid".into()))
        }
    };
    let mut state = ModalState::zeros(n);
    state.phi = p.sine_from_samples(&sample(&data.phi0)?);
    state.phi_t = p.sine_from_samples(&sample(&data.phi1)?);
    state.psi = p.sine_from_samples(&sample(&data.psi0)?);
    state.psi_t = p.sine_from_samples(&sample(&data.psi1)?);
    state.theta = p.cosine_from_samples(&sample(&data.theta0)?);
    state.theta_t = p.cosine_from_samples(&sample(&data.theta1)?);

    let history_slice = |s: f64| -> Result<Vec<f64>> {
        let f0 = data.f0.clone();
        let prof: Profile = Arc::new(move |x| f0(x, s));
        Ok(p.cosine_from_samples(&sample(&prof)?))
    };
    let steps = delay_steps(tau, dt)?;
    let delay = match layout.backend {
        DelayBackend::Ringbuffer => {
            let mut buf = Vec::with_capacity(steps + 1);
            for i in 0..steps {
                buf.push(history_slice(-tau + i as f64 * dt)?);
            }
            buf.push(state.theta_t.clone());
            DelayField::ring(buf, dt)?
        }
        DelayBackend::Transport => {
            let m = layout.m_rho.max(1);
            let mut z = Vec::with_capacity(m + 1);
            z.push(state.theta_t.clone());
            for i in 1..=m {
                z.push(history_slice(-tau * i as f64 / m as f64)?);
            }
            DelayField::transport(z, tau)?
        }
    };
    let mut hist = HistoryTrace::new(kernel, dt, n + 1);
    hist.push(&state.theta, &state.theta_t);
    Ok((state, delay, hist))
}

/// `tau / dt` as an exact integer.
pub fn delay_steps(tau: f64, dt: f64) -> Result<usize> {
    let r = tau / dt;
    let m = r.round();
    if m < 1.0 || (r - m).abs() > 1e-9 * r.max(1.0) {
        let suggested = tau / r.ceil().max(1.0);
        return Err(Error::StepSize(format!(
            "tau / dt = {r} is not an integer; try dt = {suggested}"
        )));
    }
    Ok(m as usize)
}
