//! Orthonormal sine and cosine bases on `(0, 1)` and their closed-form
//! pairings.
//!
//! Sine modes `s_k = sqrt2 sin(k pi x)`, `k = 1..=n`, carry `Phi` and `Psi`
//! (Dirichlet). Cosine modes `c_0 = 1`, `c_k = sqrt2 cos(k pi x)`, `k = 1..=n`,
//! carry `theta` (Neumann). Derivatives map the two families into each other:
//! `s_k' = k pi c_k` and `c_k' = -k pi s_k`.
//!
//! Sine coefficient arrays have length `n` with index `i` holding mode
//! `k = i + 1`. Cosine arrays have length `n + 1` with index `k`.

use std::f64::consts::{PI, SQRT_2};

use crate::quadrature::CompositeGauss;

/// `int_0^1 sin(m pi x) dx`, odd in `m`.
fn sin_integral(m: i64) -> f64 {
    if m == 0 || m % 2 == 0 {
        0.0
    } else {
        2.0 / (m as f64 * PI)
    }
}

/// `int_0^1 x sin(m pi x) dx`, odd in `m`.
fn x_sin_integral(m: i64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let sign = if m.rem_euclid(2) == 0 { -1.0 } else { 1.0 };
    sign / (m as f64 * PI)
}

/// `<c_j, s_k>` for `j >= 0`, `k >= 1`.
pub fn cross(j: usize, k: usize) -> f64 {
    let (j, k) = (j as i64, k as i64);
    if j == 0 {
        SQRT_2 * sin_integral(k)
    } else {
        sin_integral(k + j) + sin_integral(k - j)
    }
}

/// `<x c_j, s_k>` for `j >= 0`, `k >= 1`.
pub fn weighted_cross(j: usize, k: usize) -> f64 {
    let (j, k) = (j as i64, k as i64);
    if j == 0 {
        SQRT_2 * x_sin_integral(k)
    } else {
        x_sin_integral(k + j) + x_sin_integral(k - j)
    }
}

/// `<x, s_k>`.
pub fn x_moment(k: usize) -> f64 {
    SQRT_2 * x_sin_integral(k as i64)
}

/// `<1, s_k>`.
pub fn unit_moment(k: usize) -> f64 {
    SQRT_2 * sin_integral(k as i64)
}

pub fn wavenumber(k: usize) -> f64 {
    k as f64 * PI
}

pub fn sine(k: usize, x: f64) -> f64 {
    SQRT_2 * (wavenumber(k) * x).sin()
}

pub fn cosine(k: usize, x: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        SQRT_2 * (wavenumber(k) * x).cos()
    }
}

/// Dense pairing tables for a Galerkin dimension `n`.
#[derive(Debug, Clone)]
pub struct Basis {
    n: usize,
    /// `cross[j * n + (k-1)] = <c_j, s_k>`.
    cross: Vec<f64>,
    /// `q_cross[j * n + (k-1)] = <(2 - 4x) c_j, s_k>`.
    q_cross: Vec<f64>,
}

impl Basis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Galerkin dimension must be positive");
        let mut c = vec![0.0; (n + 1) * n];
        let mut q = vec![0.0; (n + 1) * n];
        for j in 0..=n {
            for k in 1..=n {
                let cj = cross(j, k);
                c[j * n + k - 1] = cj;
                q[j * n + k - 1] = 2.0 * cj - 4.0 * weighted_cross(j, k);
            }
        }
        Self { n, cross: c, q_cross: q }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `<c_j, s_k>` with `k` the sine wavenumber (1-based).
    #[inline]
    pub fn c(&self, j: usize, k: usize) -> f64 {
        self.cross[j * self.n + k - 1]
    }

    /// `<q c_j, s_k>` with `q = 2 - 4x`.
    #[inline]
    pub fn q(&self, j: usize, k: usize) -> f64 {
        self.q_cross[j * self.n + k - 1]
    }

    /// `sum_{j,k} u_j <c_j, s_k> v_k` for cosine `u` (length `n+1`) and sine
    /// `v` (length `n`).
    pub fn pair(&self, u: &[f64], v: &[f64]) -> f64 {
        bilinear(&self.cross, self.n, u, v)
    }

    /// As [`Basis::pair`] with the weight `q = 2 - 4x`.
    pub fn pair_q(&self, u: &[f64], v: &[f64]) -> f64 {
        bilinear(&self.q_cross, self.n, u, v)
    }

    /// Sine coefficients of the cosine-expanded function `u`, truncated.
    pub fn cos_to_sin(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, uj) in u.iter().enumerate() {
            if *uj == 0.0 {
                continue;
            }
            let row = &self.cross[j * self.n..(j + 1) * self.n];
            for (o, c) in out.iter_mut().zip(row) {
                *o += uj * c;
            }
        }
    }

    /// Cosine coefficients of the sine-expanded function `v`, truncated.
    pub fn sin_to_cos(&self, v: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let row = &self.cross[j * self.n..(j + 1) * self.n];
            *o = row.iter().zip(v).map(|(c, x)| c * x).sum();
        }
    }
}

fn bilinear(m: &[f64], n: usize, u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (j, uj) in u.iter().enumerate() {
        if *uj == 0.0 {
            continue;
        }
        let row = &m[j * n..(j + 1) * n];
        acc += uj * row.iter().zip(v).map(|(c, x)| c * x).sum::<f64>();
    }
    acc
}

/// `sum_i v_i s_{i+1}(x)`.
pub fn eval_sine(v: &[f64], x: f64) -> f64 {
    v.iter().enumerate().map(|(i, c)| c * sine(i + 1, x)).sum()
}

/// `sum_k u_k c_k(x)`.
pub fn eval_cosine(u: &[f64], x: f64) -> f64 {
    u.iter().enumerate().map(|(k, c)| c * cosine(k, x)).sum()
}

/// L2 projection onto both bases with a composite Gauss rule.
#[derive(Debug, Clone)]
pub struct Projector {
    n: usize,
    quad: CompositeGauss,
}

impl Projector {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            quad: CompositeGauss::for_wavenumber(2 * n + 2),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.quad.nodes
    }

    /// Projects samples taken at [`Projector::nodes`] onto the sine modes.
    pub fn sine_from_samples(&self, samples: &[f64]) -> Vec<f64> {
        (1..=self.n)
            .map(|k| {
                self.quad
                    .nodes
                    .iter()
                    .zip(&self.quad.weights)
                    .zip(samples)
                    .map(|((x, w), f)| w * f * sine(k, *x))
                    .sum()
            })
            .collect()
    }

    pub fn cosine_from_samples(&self, samples: &[f64]) -> Vec<f64> {
        (0..=self.n)
            .map(|k| {
                self.quad
                    .nodes
                    .iter()
                    .zip(&self.quad.weights)
                    .zip(samples)
                    .map(|((x, w), f)| w * f * cosine(k, *x))
                    .sum()
            })
            .collect()
    }

    pub fn sine<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let s: Vec<f64> = self.quad.nodes.iter().map(|x| f(*x)).collect();
        self.sine_from_samples(&s)
    }

    pub fn cosine<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let s: Vec<f64> = self.quad.nodes.iter().map(|x| f(*x)).collect();
        self.cosine_from_samples(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::CompositeGauss;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gram_matrices_are_identity() {
        let n = 12;
        let q = CompositeGauss::for_wavenumber(2 * n);
        for j in 0..=n {
            for k in 0..=n {
                let cc = q.integrate(|x| cosine(j, x) * cosine(k, x));
                assert_abs_diff_eq!(cc, if j == k { 1.0 } else { 0.0 }, epsilon = 1e-12);
                if j >= 1 && k >= 1 {
                    let ss = q.integrate(|x| sine(j, x) * sine(k, x));
                    assert_abs_diff_eq!(ss, if j == k { 1.0 } else { 0.0 }, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_form_pairings_match_quadrature() {
        let n = 10;
        let q = CompositeGauss::for_wavenumber(2 * n);
        let b = Basis::new(n);
        for j in 0..=n {
            for k in 1..=n {
                let c = q.integrate(|x| cosine(j, x) * sine(k, x));
                let xw = q.integrate(|x| x * cosine(j, x) * sine(k, x));
                let qw = q.integrate(|x| (2.0 - 4.0 * x) * cosine(j, x) * sine(k, x));
                assert_abs_diff_eq!(b.c(j, k), c, epsilon = 1e-13);
                assert_abs_diff_eq!(weighted_cross(j, k), xw, epsilon = 1e-13);
                assert_abs_diff_eq!(b.q(j, k), qw, epsilon = 1e-13);
            }
        }
        for k in 1..=n {
            assert_abs_diff_eq!(x_moment(k), q.integrate(|x| x * sine(k, x)), epsilon = 1e-13);
            assert_abs_diff_eq!(unit_moment(k), q.integrate(|x| sine(k, x)), epsilon = 1e-13);
        }
    }

    #[test]
    fn cross_pairing_is_not_block_diagonal() {
        // <c_2, s_1> = 4*1/(pi (1 - 4)) != 0
        let b = Basis::new(3);
        assert_abs_diff_eq!(b.c(2, 1), -4.0 / (3.0 * PI), epsilon = 1e-15);
        assert_eq!(b.c(1, 1), 0.0);
        assert_eq!(b.c(3, 1), 0.0);
    }

    #[test]
    fn projection_of_basis_elements() {
        let p = Projector::new(6);
        let phi = p.sine(|x| sine(1, x));
        assert_abs_diff_eq!(phi[0], 1.0, epsilon = 1e-14);
        assert!(phi[1..].iter().all(|c| c.abs() < 1e-14));
        let th = p.cosine(|_| 1.0);
        assert_abs_diff_eq!(th[0], 1.0, epsilon = 1e-14);
        assert!(th[1..].iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn projection_of_parabola() {
        let n = 9;
        let p = Projector::new(n);
        let c = p.sine(|x| x * (1.0 - x));
        for k in 1..=n {
            let expected = if k % 2 == 1 {
                4.0 * SQRT_2 / wavenumber(k).powi(3)
            } else {
                0.0
            };
            assert_abs_diff_eq!(c[k - 1], expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn conversions_round_trip_pairing() {
        let b = Basis::new(5);
        let u = [0.3, -1.0, 0.5, 0.0, 2.0, 0.1];
        let v = [1.0, 0.2, -0.7, 0.4, 0.0];
        let mut s = vec![0.0; 5];
        b.cos_to_sin(&u, &mut s);
        let via_sine: f64 = s.iter().zip(&v).map(|(a, b)| a * b).sum();
        let mut c = vec![0.0; 6];
        b.sin_to_cos(&v, &mut c);
        let via_cos: f64 = c.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(via_sine, b.pair(&u, &v), epsilon = 1e-14);
        assert_abs_diff_eq!(via_cos, b.pair(&u, &v), epsilon = 1e-14);
    }
}
