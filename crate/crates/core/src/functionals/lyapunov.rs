//! Auxiliary functionals `I1..I7`, `J1`, `J2` and their weighted sum `L`.
//!
//! Every integral is evaluated in closed form: products within one basis by
//! Parseval, products across bases through the tables `<c_j, s_k>` and
//! `<(2 - 4x) c_j, s_k>`. `I2` and `I7` use the zero-mean part of `theta`,
//! which is all the Neumann problem determines and all the energy controls.

use serde::{Deserialize, Serialize};

use super::constants::LyapunovConstants;
use super::energy::phi_x_cos;
use crate::coefficients::{Coefficients, DampingCase};
use crate::discretization::basis::{wavenumber, x_moment};
use crate::discretization::{solve_w, Basis};
use crate::error::{Error, Result};
use crate::integrator::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Components {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5: f64,
    pub i6: f64,
    pub i7: f64,
    pub j1: f64,
    pub j2: f64,
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn lyapunov_components(snap: &Snapshot, basis: &Basis, c: &Coefficients) -> Components {
    let s = &snap.state;
    let m = &snap.memory;
    let n = s.n;
    let phix = phi_x_cos(&s.phi);
    let psix = phi_x_cos(&s.psi);
    // sine coefficients of theta_x and (g * theta_x), sign dropped
    let v: Vec<f64> = (1..=n).map(|k| wavenumber(k) * s.theta[k]).collect();
    let vm: Vec<f64> = (1..=n).map(|k| wavenumber(k) * m.conv[k]).collect();

    let w = solve_w(&s.psi).sine_coefficients(basis);
    let i1 = c.rho2 * dot(&s.psi_t, &s.psi) + c.rho1 * dot(&s.phi_t, &w) - c.beta * dot(&v, &s.psi);

    let i2 = (1..=n)
        .map(|k| {
            let h = s.theta[k];
            c.rho3 * s.theta_t[k] * h + c.gamma * wavenumber(k) * s.psi[k - 1] * h + 0.5 * c.mu1 * h * h
        })
        .sum();

    let i3 = -c.rho1 * dot(&s.phi_t, &s.phi) - c.rho2 * dot(&s.psi_t, &s.psi);

    let i4 = c.rho2 * (basis.pair(&phix, &s.psi_t) + dot(&s.psi_t, &s.psi))
        + (c.rho2 + c.gamma) * basis.pair(&psix, &s.phi_t)
        + c.rho3 * basis.pair(&s.theta_t, &s.phi_t)
        - (c.k * c.rho3 / c.rho1 + c.beta) * basis.pair(&phix, &v)
        + basis.pair(&phix, &vm);

    // int_0^x theta_t = h_0' x + sum h_k' s_k / (k pi)
    let i5 = c.rho2
        * c.rho3
        * (1..=n)
            .map(|k| s.psi_t[k - 1] * (s.theta_t[0] * x_moment(k) + s.theta_t[k] / wavenumber(k)))
            .sum::<f64>();

    let i6 = snap.z_weighted;

    let i7 = -c.rho3 * (1..=n).map(|j| s.theta_t[j] * m.diamond(j, s.theta[j])).sum::<f64>();

    let j1 = c.rho1 * basis.pair_q(&phix, &s.phi_t);

    let mut u: Vec<f64> = s.theta_t.iter().map(|h| c.rho3 * h).collect();
    for k in 1..=n {
        u[k] += c.gamma * psix[k];
    }
    let vd: Vec<f64> = (1..=n).map(|k| -wavenumber(k) * (c.delta * s.theta[k] - m.conv[k])).collect();
    let j2 = c.gamma * c.rho2 * c.b * basis.pair_q(&psix, &s.psi_t) + c.beta * c.b / c.delta * basis.pair_q(&u, &vd);

    Components { i1, i2, i3, i4, i5, i6, i7, j1, j2 }
}

/// Weight of `J1` in `L`.
pub fn j1_weight(k: &LyapunovConstants, c: &Coefficients) -> f64 {
    k.upsilon * k.eps4 * (1.0 / c.k + c.rho3 * c.k / (c.rho1 * c.rho1 * c.b))
}

/// `L = N E + N1 I1 + N2 I2 + (u/4) I3 + u I4 + N5 I5 + N6 I6 + N7 I7 + ...`,
/// with `N6 = 1`, `N7 = 0` in the strict case.
pub fn lyapunov_l(energy: f64, comp: &Components, k: &LyapunovConstants, c: &Coefficients) -> Result<f64> {
    if c.case() != k.case {
        return Err(Error::Config(format!(
            "constants were selected for the {:?} case, coefficients are {:?}",
            k.case,
            c.case()
        )));
    }
    let (n6, n7) = match k.case {
        DampingCase::Equal => (k.n6, k.n7),
        _ => (1.0, 0.0),
    };
    Ok(k.n * energy
        + k.n1 * comp.i1
        + k.n2 * comp.i2
        + 0.25 * k.upsilon * comp.i3
        + k.upsilon * comp.i4
        + k.n5 * comp.i5
        + n6 * comp.i6
        + n7 * comp.i7
        + j1_weight(k, c) * comp.j1
        + comp.j2 / (2.0 * k.eps4))
}

#[cfg(test)]
mod tests {
    use super::super::energy::tests::{blank, coeffs};
    use super::*;
    use crate::discretization::basis::{eval_cosine, eval_sine};
    use crate::quadrature::{simpson, CompositeGauss};
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_state_gives_zero() {
        let comp = lyapunov_components(&blank(4), &Basis::new(4), &coeffs());
        assert_eq!(comp, Components::default());
    }

    #[test]
    fn i3_single_mode() {
        let mut s = blank(3);
        s.state.phi[0] = 1.0;
        s.state.phi_t[0] = 1.0;
        let comp = lyapunov_components(&s, &Basis::new(3), &coeffs());
        assert_abs_diff_eq!(comp.i3, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn i6_is_the_weighted_delay_norm() {
        use crate::discretization::DelayField;
        let f = DelayField::transport(vec![vec![1.0]; 2001], 0.5).unwrap();
        let mut s = blank(1);
        s.z_weighted = f.weighted_norm(0.5);
        let comp = lyapunov_components(&s, &Basis::new(1), &coeffs());
        assert_abs_diff_eq!(comp.i6, 1.0 - (-1.0f64).exp(), epsilon = 1e-7);
    }

    #[test]
    fn j1_against_fine_simpson() {
        // Phi = sqrt2 sin(pi x) / pi so Phi_x = sqrt2 cos(pi x); Phi_t = sqrt2 sin(pi x)
        let mut s = blank(2);
        s.state.phi[0] = 1.0 / std::f64::consts::PI;
        s.state.phi_t[0] = 1.0;
        let c = coeffs();
        let comp = lyapunov_components(&s, &Basis::new(2), &c);
        let f = |x: f64| c.rho1 * (2.0 - 4.0 * x) * eval_sine(&s.state.phi_t, x) * eval_cosine(&phi_x_cos(&s.state.phi), x);
        let coarse = simpson(0.0, 1.0, 129, f);
        let fine = simpson(0.0, 1.0, 1025, f);
        // 129 points carry an O(h^4) error near 2e-8 for this integrand
        assert_abs_diff_eq!(coarse, fine, epsilon = 1e-7);
        assert_abs_diff_eq!(comp.j1, fine, epsilon = 1e-10);
        assert_abs_diff_eq!(comp.j1, 2.0 / std::f64::consts::PI, epsilon = 1e-14);
    }

    fn generic_snapshot(n: usize) -> Snapshot {
        let mut s = blank(n);
        let f = |i: usize, a: f64| (a * (i + 1) as f64).sin() / (i + 1) as f64;
        for i in 0..n {
            s.state.phi[i] = f(i, 0.7);
            s.state.phi_t[i] = f(i, 1.3);
            s.state.psi[i] = f(i, 2.1);
            s.state.psi_t[i] = f(i, 0.4);
        }
        for j in 0..=n {
            s.state.theta[j] = f(j, 1.7);
            s.state.theta_t[j] = f(j, 2.9);
            s.memory.conv[j] = 0.3 * f(j, 0.8);
        }
        s.memory.mass = 0.4;
        s
    }

    #[test]
    fn components_match_physical_space_quadrature() {
        let n = 5;
        let s = generic_snapshot(n);
        let c = coeffs();
        let basis = Basis::new(n);
        let comp = lyapunov_components(&s, &basis, &c);
        let st = &s.state;
        let q = CompositeGauss::for_wavenumber(8 * n);
        let phix = phi_x_cos(&st.phi);
        let psix = phi_x_cos(&st.psi);
        let mut th0 = st.theta.clone();
        th0[0] = 0.0;
        let mut tht0 = st.theta_t.clone();
        tht0[0] = 0.0;
        // theta_x and (g * theta_x) as sine series
        let thx: Vec<f64> = (1..=n).map(|k| -wavenumber(k) * st.theta[k]).collect();
        let mx: Vec<f64> = (1..=n).map(|k| -wavenumber(k) * s.memory.conv[k]).collect();
        let mut diamond = vec![0.0; n + 1];
        for j in 1..=n {
            diamond[j] = s.memory.diamond(j, st.theta[j]);
        }
        let w = solve_w(&st.psi);
        let x = |x: f64| {
            (
                eval_sine(&st.phi, x),
                eval_sine(&st.phi_t, x),
                eval_sine(&st.psi, x),
                eval_sine(&st.psi_t, x),
                eval_cosine(&phix, x),
                eval_cosine(&psix, x),
            )
        };
        let i1 = q.integrate(|y| {
            let (_, pt, ps, pst, _, _) = x(y);
            c.rho2 * pst * ps + c.rho1 * pt * w.eval(y) + c.beta * eval_sine(&thx, y) * ps
        });
        assert_abs_diff_eq!(comp.i1, i1, epsilon = 1e-11);
        let i2 = q.integrate(|y| {
            let (_, _, _, _, _, psx) = x(y);
            let th = eval_cosine(&th0, y);
            c.rho3 * eval_cosine(&tht0, y) * th + c.gamma * psx * th + 0.5 * c.mu1 * th * th
        });
        assert_abs_diff_eq!(comp.i2, i2, epsilon = 1e-11);
        let i4 = q.integrate(|y| {
            let (_, pt, ps, pst, phx, psx) = x(y);
            c.rho2 * pst * (phx + ps) + (c.rho2 + c.gamma) * psx * pt + c.rho3 * eval_cosine(&st.theta_t, y) * pt
                + (c.k * c.rho3 / c.rho1 + c.beta) * eval_sine(&thx, y) * phx
                - eval_sine(&mx, y) * phx
        });
        assert_abs_diff_eq!(comp.i4, i4, epsilon = 1e-11);
        // inner antiderivative by its own Gauss rule
        let i5 = q.integrate(|y| {
            let inner = CompositeGauss::for_wavenumber(4 * n);
            let anti = y * inner.integrate(|r| eval_cosine(&st.theta_t, r * y));
            c.rho2 * c.rho3 * anti * x(y).3
        });
        assert_abs_diff_eq!(comp.i5, i5, epsilon = 1e-11);
        let i7 = q.integrate(|y| -c.rho3 * eval_cosine(&tht0, y) * eval_cosine(&diamond, y));
        assert_abs_diff_eq!(comp.i7, i7, epsilon = 1e-11);
        let j2 = q.integrate(|y| {
            let (_, _, _, pst, _, psx) = x(y);
            let qq = 2.0 - 4.0 * y;
            c.gamma * c.rho2 * c.b * pst * qq * psx
                + c.beta * c.b / c.delta
                    * (c.rho3 * eval_cosine(&st.theta_t, y) + c.gamma * psx)
                    * qq
                    * (c.delta * eval_sine(&thx, y) - eval_sine(&mx, y))
        });
        assert_abs_diff_eq!(comp.j2, j2, epsilon = 1e-11);
    }

    #[test]
    fn mean_of_theta_does_not_enter() {
        let n = 3;
        let mut s = generic_snapshot(n);
        let c = coeffs();
        let basis = Basis::new(n);
        let a = lyapunov_components(&s, &basis, &c);
        s.state.theta[0] += 5.0;
        let b = lyapunov_components(&s, &basis, &c);
        assert_eq!(a, b);
    }

    #[test]
    fn l_is_linear_in_n() {
        use crate::coefficients::build_theorem_coeffs;
        use crate::functionals::{energy, select_constants};
        use crate::kernels::RelaxationKernel;
        let kern = RelaxationKernel::exponential_with_zeta(1.0, 2.0, 2.0).unwrap();
        let c = build_theorem_coeffs(&c_inputs(), &kern).unwrap();
        let mut k = select_constants(&c, &kern, 0.0).unwrap();
        let s = generic_snapshot(4);
        let basis = Basis::new(4);
        let e = energy(&s, &basis, &c).unwrap();
        let comp = lyapunov_components(&s, &basis, &c);
        let l0 = lyapunov_l(e, &comp, &k, &c).unwrap();
        k.n += 1.0;
        let l1 = lyapunov_l(e, &comp, &k, &c).unwrap();
        assert_abs_diff_eq!(l1 - l0, e, epsilon = 1e-9 * l0.abs());
        assert_eq!(lyapunov_l(0.0, &Components::default(), &k, &c).unwrap(), 0.0);
        let mut eq = c;
        eq.mu2 = eq.mu1;
        assert!(matches!(lyapunov_l(e, &comp, &k, &eq), Err(Error::Config(_))));
    }

    #[test]
    fn delay_only_state() {
        use crate::coefficients::build_theorem_coeffs;
        use crate::functionals::{energy, select_constants};
        use crate::kernels::RelaxationKernel;
        let kern = RelaxationKernel::exponential_with_zeta(1.0, 2.0, 2.0).unwrap();
        let c = build_theorem_coeffs(&c_inputs(), &kern).unwrap();
        let k = select_constants(&c, &kern, 0.0).unwrap();
        let mut s = blank(2);
        s.z_norm = 1.0;
        s.z_weighted = 1.0 - (-1.0f64).exp();
        let basis = Basis::new(2);
        let e = energy(&s, &basis, &c).unwrap();
        assert_abs_diff_eq!(e, 0.5 * c.beta * c.xi, epsilon = 1e-15);
        let l = lyapunov_l(e, &lyapunov_components(&s, &basis, &c), &k, &c).unwrap();
        assert_abs_diff_eq!(l, k.n * e + s.z_weighted, epsilon = 1e-12 * l);
    }

    fn c_inputs() -> crate::coefficients::TheoremInputs {
        crate::coefficients::TheoremInputs {
            rho1: 1.0,
            rho2: 1.0,
            rho3: 1.0,
            k: 1.0,
            b: 2.0,
            delta: 2.0,
            mu1: 2.0,
            mu2: 1.0,
            tau: 0.5,
        }
    }
}
