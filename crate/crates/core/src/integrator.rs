//! Fixed-step classical Runge-Kutta advancement of the modal system.
//!
//! Memory and delay terms at the stage times `t_n + c dt`, `c` in
//! `{0, 1/2, 1}`, come from the full-step history: the convolution closes its
//! last trapezoid panel with the stage value of `theta`, and the delayed slice
//! is interpolated linearly between stored samples. History and the delay
//! field are advanced only at full steps.

use serde::{Deserialize, Serialize};

use crate::discretization::{
    project_initial, DelayBackend, DelayField, DelayLayout, GalerkinSystem, HistoryTrace, InitialData,
    MemoryTerms, ModalState,
};
use crate::discretization::initial::delay_steps;
use crate::error::{Error, Result};

/// Values above this magnitude are treated as divergence.
const BLOWUP: f64 = 1e150;
/// RK4 stability limit along the imaginary axis, with a small margin.
const RK4_IMAG_LIMIT: f64 = 2.8;
/// RK4 stability limit along the negative real axis, with a small margin.
const RK4_REAL_LIMIT: f64 = 2.7;

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub backend: DelayBackend,
    /// `rho` intervals of the transport backend; defaults to `tau / dt`.
    #[serde(default)]
    pub m_rho: Option<usize>,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub seed: u64,
    /// Simulated time between progress lines on stderr; none when absent.
    #[serde(default)]
    pub progress_interval: Option<f64>,
}

impl SimConfig {
    pub fn new(n: usize, dt: f64, t_end: f64) -> Self {
        Self {
            n,
            dt,
            t_end,
            backend: DelayBackend::Ringbuffer,
            m_rho: None,
            record_stride: default_stride(),
            seed: 0,
            progress_interval: None,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Checks the step against `tau` and the transport CFL condition.
    pub fn validate(&self, tau: f64) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Input("n must be positive".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::StepSize(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Input(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.record_stride == 0 {
            return Err(Error::Input("record_stride must be positive".into()));
        }
        let m = delay_steps(tau, self.dt)?;
        if let Some(m_rho) = self.m_rho {
            if m_rho == 0 || m_rho > m {
                return Err(Error::StepSize(format!(
                    "m_rho = {m_rho} must lie in 1..={m} so that dt <= tau d_rho"
                )));
            }
        }
        Ok(())
    }

    pub fn layout(&self, tau: f64) -> Result<DelayLayout> {
        Ok(DelayLayout {
            backend: self.backend,
            m_rho: self.m_rho.unwrap_or(delay_steps(tau, self.dt)?),
        })
    }
}

/// Everything the functionals need at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: ModalState,
    pub memory: MemoryTerms,
    /// `z(., 1, t)`.
    pub z_end: Vec<f64>,
    /// `int int z^2 drho dx`.
    pub z_norm: f64,
    /// `int int e^{-2 tau rho} z^2 drho dx`.
    pub z_weighted: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    /// Set when stepping stopped early; the snapshots up to that point stay.
    pub failure: Option<Error>,
}

impl RunTrace {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.state.t).collect()
    }
}

/// Single-owner stepper.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub system: GalerkinSystem,
    pub state: ModalState,
    pub delay: DelayField,
    pub hist: HistoryTrace,
    dt: f64,
    steps_taken: usize,
    y: Vec<f64>,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    memory: Vec<f64>,
    delayed: Vec<f64>,
}

impl Simulator {
    pub fn new(sim: &SimConfig, system: GalerkinSystem, data: &InitialData) -> Result<Self> {
        let tau = system.coeffs.tau;
        sim.validate(tau)?;
        if sim.n != system.n() {
            return Err(Error::Input(format!(
                "system has {} modes but the run asks for {}",
                system.n(),
                sim.n
            )));
        }
        let (state, delay, hist) = project_initial(data, sim.n, sim.layout(tau)?, tau, sim.dt, &system.kernel)?;
        Self::from_parts(system, state, delay, hist, sim.dt)
    }

    pub fn from_parts(
        system: GalerkinSystem,
        state: ModalState,
        delay: DelayField,
        hist: HistoryTrace,
        dt: f64,
    ) -> Result<Self> {
        probe_stability(&system, dt)?;
        let len = ModalState::flat_len(system.n());
        let modes = system.n() + 1;
        Ok(Self {
            system,
            state,
            delay,
            hist,
            dt,
            steps_taken: 0,
            y: vec![0.0; len],
            k: [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            stage: vec![0.0; len],
            memory: vec![0.0; modes],
            delayed: vec![0.0; modes],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }

    fn eval(&mut self, c: f64, which: usize) {
        let n = self.system.n();
        let theta = &self.stage[2 * n..3 * n + 1];
        self.hist.stage_memory(c, theta, &mut self.memory);
        self.delay.delay_value(c, self.dt, &mut self.delayed);
        self.system
            .derivative(&self.stage, &self.memory, &self.delayed, &mut self.k[which]);
    }

    /// One RK4 step; on divergence the state is left at the last finite step.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let n = self.system.n();
        self.y = self.state.to_flat();
        self.stage.copy_from_slice(&self.y);
        self.eval(0.0, 0);
        for (which, (c, scale)) in [(0.5, 0.5), (0.5, 0.5), (1.0, 1.0)].into_iter().enumerate() {
            for i in 0..self.y.len() {
                self.stage[i] = self.y[i] + scale * dt * self.k[which][i];
            }
            self.eval(c, which + 1);
        }
        let mut next = self.y.clone();
        let mut bad = false;
        for (i, v) in next.iter_mut().enumerate() {
            *v += dt / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
            bad |= !v.is_finite() || v.abs() > BLOWUP;
        }
        if bad {
            return Err(Error::Divergence {
                last_finite_t: self.state.t,
            });
        }
        self.steps_taken += 1;
        self.state.load_flat(&next);
        self.state.t = self.steps_taken as f64 * dt;
        let theta_t = &next[3 * n + 1 + 2 * n..];
        self.hist.push(&next[2 * n..3 * n + 1], theta_t);
        self.delay.advect_z(theta_t, dt)?;
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            state: self.state.clone(),
            memory: self.hist.memory_terms(),
            z_end: self.delay.z_end().to_vec(),
            z_norm: self.delay.weighted_norm(0.0),
            z_weighted: self.delay.weighted_norm(self.system.coeffs.tau),
        }
    }
}

/// Rejects steps beyond the RK4 stability region of the undamped stiffness
/// and of the frictional damping.
pub fn probe_stability(system: &GalerkinSystem, dt: f64) -> Result<()> {
    let n = system.n();
    let len = ModalState::flat_len(n);
    let off = 3 * n + 1;
    let zeros = vec![0.0; n + 1];
    // power iteration on positions -> accelerations
    let mut x: Vec<f64> = (0..off).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
    let mut y = vec![0.0; len];
    let mut dy = vec![0.0; len];
    let mut lambda = 0.0;
    for _ in 0..60 {
        y[..off].copy_from_slice(&x);
        y[off..].iter_mut().for_each(|v| *v = 0.0);
        system.derivative(&y, &zeros, &zeros, &mut dy);
        let ax = &dy[off..];
        let norm = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || xn == 0.0 {
            break;
        }
        lambda = norm / xn;
        x.iter_mut().zip(ax).for_each(|(xi, a)| *xi = a / norm);
    }
    // the power estimate approaches the top eigenvalue from below
    let omega = (1.1 * lambda).sqrt();
    let c = &system.coeffs;
    let friction = (c.mu1 + c.mu2) / c.rho3;
    if omega * dt > RK4_IMAG_LIMIT || friction * dt > RK4_REAL_LIMIT {
        let limit = (RK4_IMAG_LIMIT / omega).min(RK4_REAL_LIMIT / friction.max(1e-300));
        return Err(Error::StepSize(format!(
            "dt = {dt} exceeds the RK4 stability bound {limit:.3e} for n = {n}"
        )));
    }
    Ok(())
}

/// Runs to `t_end`, recording every `record_stride` steps. Stepping errors
/// are returned in [`RunTrace::failure`] alongside the partial trace.
pub fn run(sim: &SimConfig, system: &GalerkinSystem, data: &InitialData) -> Result<RunTrace> {
    let mut s = Simulator::new(sim, system.clone(), data)?;
    let mut trace = RunTrace {
        dt: sim.dt,
        snapshots: vec![s.snapshot()],
        failure: None,
    };
    let mut next_progress = sim.progress_interval;
    for i in 1..=sim.steps() {
        if let Err(e) = s.step() {
            trace.failure = Some(e);
            break;
        }
        if i % sim.record_stride == 0 {
            trace.snapshots.push(s.snapshot());
        }
        if let (Some(at), Some(every)) = (next_progress, sim.progress_interval) {
            if s.t() >= at {
                let snap = s.snapshot();
                match crate::functionals::energy(&snap, &s.system.basis, &s.system.coeffs) {
                    Ok(e) => eprintln!("t = {:.4}  E = {e:.6e}", s.t()),
                    Err(_) => eprintln!("t = {:.4}", s.t()),
                }
                next_progress = Some(at + every);
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Coefficients;
    use crate::kernels::RelaxationKernel;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use std::sync::Arc;

    fn coeffs() -> Coefficients {
        Coefficients {
            rho1: 1.0,
            rho2: 1.0,
            rho3: 1.0,
            k: 1.0,
            b: 2.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 2.0,
            mu1: 2.0,
            mu2: 1.0,
            tau: 0.5,
            xi: 1.0,
            lambda: 1.5,
            exploratory: false,
        }
    }

    fn conservative() -> Coefficients {
        Coefficients {
            mu1: 0.0,
            mu2: 0.0,
            beta: 0.0,
            gamma: 0.0,
            ..coeffs()
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let sys = GalerkinSystem::new(coeffs(), RelaxationKernel::exponential(1.0, 2.0).unwrap(), 4);
        let tr = run(&SimConfig::new(4, 0.01, 1.0), &sys, &InitialData::zero()).unwrap();
        for s in &tr.snapshots {
            assert!(s.state.to_flat().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn mean_mode_exponential_decay() {
        let mut c = coeffs();
        c.mu2 = 0.0;
        let sys = GalerkinSystem::new(c, RelaxationKernel::exponential(1.0, 2.0).unwrap(), 3);
        let mut data = InitialData::zero();
        data.theta1 = Arc::new(|_| 0.7);
        let mut sim = SimConfig::new(3, 1e-3, 1.0);
        sim.record_stride = 1000;
        let tr = run(&sim, &sys, &data).unwrap();
        let last = tr.snapshots.last().unwrap();
        assert_abs_diff_eq!(last.state.t, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(last.state.theta_t[0], 0.7 * (-2.0f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn conservative_subsystem_matches_modal_oracle() {
        let n = 4;
        let sys = GalerkinSystem::new(conservative(), RelaxationKernel::none(), n);
        let data = InitialData::sine_bump(0.3, 1);
        let mut sim = SimConfig::new(n, 2e-3, 10.0);
        sim.record_stride = 5000;
        let tr = run(&sim, &sys, &data).unwrap();
        let end = &tr.snapshots.last().unwrap().state;

        // a'' = -M a with M symmetric for unit densities
        let len = ModalState::flat_len(n);
        let zeros = vec![0.0; n + 1];
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for col in 0..2 * n {
            let mut y = vec![0.0; len];
            y[col] = 1.0;
            let mut dy = vec![0.0; len];
            sys.derivative(&y, &zeros, &zeros, &mut dy);
            for row in 0..2 * n {
                m[(row, col)] = -dy[3 * n + 1 + row];
            }
        }
        let eig = m.symmetric_eigen();
        let mut q0 = DVector::zeros(2 * n);
        q0[0] = 0.3;
        q0[n] = 0.3;
        let modal = eig.eigenvectors.transpose() * q0;
        let evolved = DVector::from_iterator(
            2 * n,
            modal.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| c * (l.sqrt() * 10.0).cos()),
        );
        let exact = &eig.eigenvectors * evolved;
        for i in 0..n {
            assert_abs_diff_eq!(end.phi[i], exact[i], epsilon = 1e-6);
            assert_abs_diff_eq!(end.psi[i], exact[n + i], epsilon = 1e-6);
        }
    }

    #[test]
    fn deterministic_and_stride_passive() {
        let sys = GalerkinSystem::new(coeffs(), RelaxationKernel::power(1.0, 3.0).unwrap(), 4);
        let data = InitialData::sine_bump(0.5, 1);
        let mut sim = SimConfig::new(4, 0.01, 2.0);
        sim.record_stride = 1;
        let a = run(&sim, &sys, &data).unwrap();
        let b = run(&sim, &sys, &data).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
        sim.record_stride = 2;
        let c = run(&sim, &sys, &data).unwrap();
        assert_eq!(c.snapshots.len(), 101);
        assert_eq!(a.snapshots.len(), 201);
        assert_eq!(c.snapshots[50], a.snapshots[100]);
    }

    #[test]
    fn zero_horizon_gives_initial_snapshot() {
        let sys = GalerkinSystem::new(coeffs(), RelaxationKernel::none(), 2);
        let tr = run(&SimConfig::new(2, 0.01, 0.0), &sys, &InitialData::sine_bump(1.0, 1)).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
    }

    #[test]
    fn unstable_delay_is_flagged() {
        let mut c = coeffs();
        c.mu1 = 0.1;
        c.mu2 = 20.0;
        c.tau = 1.0;
        let sys = GalerkinSystem::new(c, RelaxationKernel::none(), 2);
        let mut data = InitialData::zero();
        data.theta1 = Arc::new(|_| 1.0);
        let tr = run(&SimConfig::new(2, 0.01, 400.0), &sys, &data).unwrap();
        assert!(matches!(tr.failure, Some(Error::Divergence { .. })));
        assert!(tr.snapshots.iter().all(|s| s.state.is_finite()));
    }

    #[test]
    fn oversized_step_rejected() {
        let sys = GalerkinSystem::new(coeffs(), RelaxationKernel::none(), 32);
        let err = run(&SimConfig::new(32, 0.05, 1.0), &sys, &InitialData::zero()).unwrap_err();
        assert!(matches!(err, Error::StepSize(_)));
    }

    #[test]
    fn second_order_in_dt() {
        // damped, memory-coupled problem against a fine reference
        let sys = GalerkinSystem::new(coeffs(), RelaxationKernel::power(1.0, 3.0).unwrap(), 4);
        let data = InitialData::sine_bump(0.5, 1);
        let end_state = |dt: f64| {
            let mut sim = SimConfig::new(4, dt, 2.0);
            sim.record_stride = usize::MAX;
            let mut s = Simulator::new(&sim, sys.clone(), &data).unwrap();
            for _ in 0..sim.steps() {
                s.step().unwrap();
            }
            s.state.to_flat()
        };
        let reference = end_state(0.5 / 400.0);
        let err = |dt: f64| {
            end_state(dt)
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.5 / 25.0), err(0.5 / 50.0));
        let p = (e1 / e2).log2();
        assert!(p >= 1.9, "order {p}");
    }
}
