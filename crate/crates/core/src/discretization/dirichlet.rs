//! Closed-form solution of `-w_xx = Psi_x`, `w(0) = w(1) = 0`.
//!
//! With `Psi = sum p_k s_k`, the particular part `P = sum p_k c_k / (k pi)`
//! satisfies `-P'' = Psi_x`, and the affine correction
//! `w = P + alpha x + beta0` with `beta0 = -P(0)`, `alpha = P(0) - P(1)`
//! restores the boundary values.

use std::f64::consts::SQRT_2;

use super::basis::{cosine, unit_moment, wavenumber, x_moment, Basis};

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSolution {
    /// Cosine coefficients of the particular part, index `k`, entry 0 unused.
    pub particular: Vec<f64>,
    pub alpha: f64,
    pub beta0: f64,
    p0: f64,
    p1: f64,
}

pub fn solve_w(psi: &[f64]) -> DirichletSolution {
    let n = psi.len();
    let mut particular = vec![0.0; n + 1];
    for (i, p) in psi.iter().enumerate() {
        particular[i + 1] = p / wavenumber(i + 1);
    }
    // c_k(0) = sqrt2, c_k(1) = (-1)^k sqrt2
    let p0: f64 = particular.iter().skip(1).map(|c| c * SQRT_2).sum();
    let p1: f64 = particular
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| if k % 2 == 0 { c * SQRT_2 } else { -c * SQRT_2 })
        .sum();
    DirichletSolution {
        particular,
        alpha: p0 - p1,
        beta0: -p0,
        p0,
        p1,
    }
}

impl DirichletSolution {
    fn particular_at(&self, x: f64) -> f64 {
        self.particular.iter().enumerate().skip(1).map(|(k, c)| c * cosine(k, x)).sum()
    }

    /// `w(x)`, written as `P(x) - P(0)(1-x) - P(1)x` so the endpoint values
    /// vanish exactly.
    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 || x == 1.0 {
            return 0.0;
        }
        self.particular_at(x) - self.p0 * (1.0 - x) - self.p1 * x
    }

    pub fn dxx(&self, x: f64) -> f64 {
        self.particular
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| -c * wavenumber(k).powi(2) * cosine(k, x))
            .sum()
    }

    /// Sine coefficients `<w, s_j>`, `j = 1..=n`.
    pub fn sine_coefficients(&self, basis: &Basis) -> Vec<f64> {
        let n = basis.n();
        (1..=n)
            .map(|j| {
                let p: f64 = (1..self.particular.len()).map(|k| basis.c(k, j) * self.particular[k]).sum();
                p + self.alpha * x_moment(j) + self.beta0 * unit_moment(j)
            })
            .collect()
    }
}

/// `Psi_x(x)` for sine coefficients `psi`.
pub fn psi_x(psi: &[f64], x: f64) -> f64 {
    psi.iter().enumerate().map(|(i, p)| p * wavenumber(i + 1) * cosine(i + 1, x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::CompositeGauss;
    use approx::assert_abs_diff_eq;
    use crate::discretization::basis::sine;
    use std::f64::consts::PI;

    /// Second-order finite differences with Richardson extrapolation.
    fn fd_solve(psi: &[f64], x: f64) -> f64 {
        let solve = |m: usize| -> f64 {
            let h = 1.0 / m as f64;
            // -w'' = f on interior nodes, Thomas algorithm
            let f: Vec<f64> = (1..m).map(|i| psi_x(psi, i as f64 * h)).collect();
            let len = m - 1;
            let (mut c, mut d) = (vec![0.0; len], vec![0.0; len]);
            for i in 0..len {
                let (a, b, cc) = (-1.0, 2.0, -1.0);
                let rhs = f[i] * h * h;
                if i == 0 {
                    c[i] = cc / b;
                    d[i] = rhs / b;
                } else {
                    let den = b - a * c[i - 1];
                    c[i] = cc / den;
                    d[i] = (rhs - a * d[i - 1]) / den;
                }
            }
            let mut w = vec![0.0; len];
            for i in (0..len).rev() {
                w[i] = d[i] - if i + 1 < len { c[i] * w[i + 1] } else { 0.0 };
            }
            w[(x * m as f64).round() as usize - 1]
        };
        let (coarse, fine) = (solve(512), solve(1024));
        (4.0 * fine - coarse) / 3.0
    }

    #[test]
    fn zero_psi_gives_zero() {
        let w = solve_w(&[0.0; 4]);
        assert!((0..=10).all(|i| w.eval(i as f64 / 10.0) == 0.0));
    }

    #[test]
    fn second_mode_closed_form() {
        let w = solve_w(&[0.0, 1.0, 0.0]);
        assert_abs_diff_eq!(w.eval(0.5), -SQRT_2 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(w.eval(0.3), SQRT_2 * ((2.0 * PI * 0.3).cos() - 1.0) / (2.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn first_mode_against_finite_differences() {
        let psi = [1.0, 0.0, 0.0];
        let w = solve_w(&psi);
        assert_abs_diff_eq!(w.alpha, 2.0 * SQRT_2 / PI, epsilon = 1e-15);
        for x in [0.25, 0.5, 0.75] {
            assert_abs_diff_eq!(w.eval(x), fd_solve(&psi, x), epsilon = 1e-8);
        }
    }

    #[test]
    fn residual_and_boundary_values() {
        let psi = [0.3, -1.2, 0.5, 0.05, -0.4];
        let w = solve_w(&psi);
        assert_eq!(w.eval(0.0), 0.0);
        assert_eq!(w.eval(1.0), 0.0);
        let worst = (0..257)
            .map(|i| i as f64 / 256.0)
            .map(|x| (-w.dxx(x) - psi_x(&psi, x)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{worst}");
        for x in [0.125, 0.5, 0.875] {
            assert_abs_diff_eq!(w.eval(x), fd_solve(&psi, x), epsilon = 1e-8);
        }
    }

    #[test]
    fn sine_coefficients_match_projection() {
        let psi = [0.3, -1.2, 0.5, 0.05];
        let w = solve_w(&psi);
        let basis = Basis::new(4);
        let q = CompositeGauss::for_wavenumber(16);
        let coeffs = w.sine_coefficients(&basis);
        for (j, c) in coeffs.iter().enumerate() {
            assert_abs_diff_eq!(*c, q.integrate(|x| w.eval(x) * sine(j + 1, x)), epsilon = 1e-13);
        }
    }
}
