//! Energy, its exact dissipation balance and the upper bound of the
//! monotonicity lemma, all from modal coefficients.

use crate::coefficients::Coefficients;
use crate::discretization::basis::wavenumber;
use crate::discretization::Basis;
use crate::error::{Error, Result};
use crate::integrator::Snapshot;
use crate::kernels::RelaxationKernel;

/// Squared norms and memory integrals of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub phi_t: f64,
    pub psi_t: f64,
    /// `||Phi_x + Psi||^2`.
    pub shear: f64,
    pub psi_x: f64,
    pub phi_x: f64,
    pub theta_t: f64,
    pub theta_x: f64,
    /// Trapezoid mass `G(t)` of the kernel.
    pub mass: f64,
    /// `int (g o theta_x) dx`.
    pub circle: f64,
    /// `int (g' o theta_x) dx`.
    pub dcircle: f64,
    /// `int int z^2 drho dx`.
    pub z_norm: f64,
    /// `||z(., 1)||^2`.
    pub z_end: f64,
    /// `int theta_t z(., 1) dx`.
    pub theta_t_z_end: f64,
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `k pi a_k` as a cosine vector (entry 0 is zero).
pub(crate) fn phi_x_cos(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + 1];
    for (k, v) in a.iter().enumerate() {
        out[k + 1] = wavenumber(k + 1) * v;
    }
    out
}

impl Norms {
    pub fn of(snap: &Snapshot, basis: &Basis) -> Self {
        let s = &snap.state;
        let m = &snap.memory;
        let phix = phi_x_cos(&s.phi);
        let phi_x = sq(&phix);
        let psi = sq(&s.psi);
        let shear = phi_x + psi + 2.0 * basis.pair(&phix, &s.psi);
        let (mut psi_x, mut theta_x, mut circle, mut dcircle) = (0.0, 0.0, 0.0, 0.0);
        for (i, p) in s.psi.iter().enumerate() {
            psi_x += (wavenumber(i + 1) * p).powi(2);
        }
        for j in 1..s.theta.len() {
            let k2 = wavenumber(j).powi(2);
            theta_x += k2 * s.theta[j].powi(2);
            circle += k2 * m.circle(j, s.theta[j]);
            dcircle += k2 * m.dcircle(j, s.theta[j]);
        }
        Self {
            phi_t: sq(&s.phi_t),
            psi_t: sq(&s.psi_t),
            shear,
            psi_x,
            phi_x,
            theta_t: sq(&s.theta_t),
            theta_x,
            mass: m.mass,
            circle,
            dcircle,
            z_norm: snap.z_norm,
            z_end: sq(&snap.z_end),
            theta_t_z_end: s.theta_t.iter().zip(&snap.z_end).map(|(a, b)| a * b).sum(),
        }
    }
}

/// Energy from precomputed norms.
pub fn energy_of(n: &Norms, c: &Coefficients) -> Result<f64> {
    let stiff = c.delta - n.mass;
    if stiff < 0.0 {
        return Err(Error::H1Violation { lambda: stiff });
    }
    let mech = c.rho1 * n.phi_t + c.rho2 * n.psi_t + c.k * n.shear + c.b * n.psi_x;
    let therm = c.rho3 * n.theta_t + stiff * n.theta_x + n.circle + c.xi * n.z_norm;
    Ok(0.5 * c.gamma * mech + 0.5 * c.beta * therm)
}

pub fn energy(snap: &Snapshot, basis: &Basis, c: &Coefficients) -> Result<f64> {
    energy_of(&Norms::of(snap, basis), c)
}

/// Exact `dE/dt` of the continuous system at time `t`.
pub fn balance_rhs(n: &Norms, c: &Coefficients, kernel: &RelaxationKernel, t: f64) -> f64 {
    let h = c.xi / (2.0 * c.tau);
    -0.5 * c.beta * kernel.g(t) * n.theta_x + 0.5 * c.beta * n.dcircle - c.beta * c.mu1 * n.theta_t
        - c.beta * c.mu2 * n.theta_t_z_end
        + c.beta * h * (n.theta_t - n.z_end)
}

/// Upper bound on `dE/dt` after Young's inequality on the delay product.
/// With `mu1 = mu2` and `xi = tau mu` both frictional terms vanish.
pub fn bound_rhs(n: &Norms, c: &Coefficients, kernel: &RelaxationKernel, t: f64) -> f64 {
    -0.5 * c.beta * kernel.g(t) * n.theta_x + 0.5 * c.beta * n.dcircle - c.theta_t_dissipation() * n.theta_t
        - c.delay_dissipation() * n.z_end
}

/// Centered differences of `y` on the grid `t`, with one-sided three-point
/// formulas at the ends.
pub fn centered_derivative(t: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let len = t.len();
    if len < 3 || y.len() != len {
        return Err(Error::Arity { needed: 3, got: len.min(y.len()) });
    }
    let mut d = vec![0.0; len];
    for i in 1..len - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
    }
    let h0 = t[1] - t[0];
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h0);
    let hn = t[len - 1] - t[len - 2];
    d[len - 1] = (3.0 * y[len - 1] - 4.0 * y[len - 2] + y[len - 3]) / (2.0 * hn);
    Ok(d)
}

/// Largest `|dE/dt - RHS|` over a window of recorded rows.
pub fn energy_rate_residual(t: &[f64], e: &[f64], rhs: &[f64]) -> Result<f64> {
    let d = centered_derivative(t, e)?;
    Ok(d.iter().zip(rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Smallest `bound - dE/dt` over a window; nonnegative when the bound holds.
pub fn dissipation_bound_slack(t: &[f64], e: &[f64], bound: &[f64]) -> Result<f64> {
    let d = centered_derivative(t, e)?;
    Ok(d.iter().zip(bound).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min))
}

/// Number of steps where `E` grows by more than `tol`.
pub fn monotone_violations(e: &[f64], tol: f64) -> usize {
    e.windows(2).filter(|w| w[1] - w[0] > tol).count()
}
