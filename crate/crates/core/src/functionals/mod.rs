//! Energy, dissipation balance, Lyapunov functionals, constant selection and
//! decay fits, evaluated along a recorded run.

pub mod constants;
pub mod energy;
pub mod fit;
pub mod lyapunov;

pub use constants::{braces, poincare, select_constants, upsilon, LyapunovConstants};
pub use energy::{
    balance_rhs, bound_rhs, centered_derivative, dissipation_bound_slack, energy, energy_of, energy_rate_residual,
    monotone_violations, Norms,
};
pub use fit::{equivalence_estimate, fit_decay, linear_fit, DecayFit, Equivalence};
pub use lyapunov::{lyapunov_components, lyapunov_l, Components};

use crate::discretization::GalerkinSystem;
use crate::error::Result;
use crate::integrator::RunTrace;

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalRow {
    pub t: f64,
    pub e: f64,
    pub dedt: f64,
    pub balance_residual: f64,
    pub bound_slack: f64,
    pub comp: Components,
    pub l: f64,
    pub l_over_e: f64,
}

impl FunctionalRow {
    pub const HEADER: [&'static str; 16] = [
        "t",
        "E",
        "dEdt",
        "balance_residual",
        "bound_slack",
        "I1",
        "I2",
        "I3",
        "I4",
        "I5",
        "I6",
        "I7",
        "J1",
        "J2",
        "L",
        "L_over_E",
    ];

    pub fn values(&self) -> [f64; 16] {
        let c = &self.comp;
        [
            self.t,
            self.e,
            self.dedt,
            self.balance_residual,
            self.bound_slack,
            c.i1,
            c.i2,
            c.i3,
            c.i4,
            c.i5,
            c.i6,
            c.i7,
            c.j1,
            c.j2,
            self.l,
            self.l_over_e,
        ]
    }
}

/// Functionals along a run, plus the per-row memory integral needed by the
/// derivative estimate of `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalTrace {
    pub rows: Vec<FunctionalRow>,
    /// `int (g o theta_x) dx` per row.
    pub circle: Vec<f64>,
}

/// Evaluates every functional on the recorded snapshots. Derivative columns
/// are NaN when fewer than three rows exist; `L` is NaN without constants.
pub fn functional_trace(
    trace: &RunTrace,
    system: &GalerkinSystem,
    constants: Option<&LyapunovConstants>,
) -> Result<FunctionalTrace> {
    let c = &system.coeffs;
    let len = trace.snapshots.len();
    let mut rows = Vec::with_capacity(len);
    let mut circle = Vec::with_capacity(len);
    let (mut balance, mut bound) = (Vec::with_capacity(len), Vec::with_capacity(len));
    for snap in &trace.snapshots {
        let t = snap.state.t;
        let nm = Norms::of(snap, &system.basis);
        let e = energy_of(&nm, c)?;
        let comp = lyapunov_components(snap, &system.basis, c);
        let l = match constants {
            Some(k) => lyapunov_l(e, &comp, k, c)?,
            None => f64::NAN,
        };
        balance.push(balance_rhs(&nm, c, &system.kernel, t));
        bound.push(bound_rhs(&nm, c, &system.kernel, t));
        circle.push(nm.circle);
        rows.push(FunctionalRow {
            t,
            e,
            dedt: f64::NAN,
            balance_residual: f64::NAN,
            bound_slack: f64::NAN,
            comp,
            l,
            l_over_e: if e > 0.0 { l / e } else { f64::NAN },
        });
    }
    if len >= 3 {
        let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
        let e: Vec<f64> = rows.iter().map(|r| r.e).collect();
        let d = centered_derivative(&t, &e)?;
        for (i, r) in rows.iter_mut().enumerate() {
            r.dedt = d[i];
            r.balance_residual = (d[i] - balance[i]).abs();
            r.bound_slack = bound[i] - d[i];
        }
    }
    Ok(FunctionalTrace { rows, circle })
}

impl FunctionalTrace {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.e).collect()
    }

    pub fn lyapunov(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.l).collect()
    }

    pub fn max_balance_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.balance_residual).fold(0.0, f64::max)
    }

    pub fn min_bound_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.bound_slack).fold(f64::INFINITY, f64::min)
    }

    /// Count of recorded steps where `E` rises by more than `rel * E(0)`.
    pub fn monotone_violations(&self, rel: f64) -> usize {
        let e = self.energies();
        let tol = rel * e.first().copied().unwrap_or(0.0);
        monotone_violations(&e, tol)
    }

    /// Smallest `-C E + C3 int (g o theta_x) - dL/dt` over rows with
    /// `t >= t0`, with `dL/dt` by centered differences.
    pub fn lyapunov_derivative_slack(&self, k: &LyapunovConstants) -> Result<f64> {
        let t = self.times();
        let d = centered_derivative(&t, &self.lyapunov())?;
        Ok(self
            .rows
            .iter()
            .zip(&d)
            .zip(&self.circle)
            .filter(|((r, _), _)| r.t >= k.t0)
            .map(|((r, dl), circ)| -k.big_c * r.e + k.c3 * circ - dl)
            .fold(f64::INFINITY, f64::min))
    }
}
