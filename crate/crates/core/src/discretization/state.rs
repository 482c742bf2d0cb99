use serde::{Deserialize, Serialize};

/// Modal coefficients of `(Phi, Psi, theta)` and their time derivatives.
///
/// `phi*`, `psi*` hold sine coefficients (length `n`, index `i` is mode
/// `i+1`); `theta*` hold cosine coefficients (length `n+1`, index `0` is the
/// mean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalState {
    pub n: usize,
    pub t: f64,
    pub phi: Vec<f64>,
    pub phi_t: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi_t: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_t: Vec<f64>,
}

impl ModalState {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            t: 0.0,
            phi: vec![0.0; n],
            phi_t: vec![0.0; n],
            psi: vec![0.0; n],
            psi_t: vec![0.0; n],
            theta: vec![0.0; n + 1],
            theta_t: vec![0.0; n + 1],
        }
    }

    /// Length of the flattened first-order state.
    pub fn flat_len(n: usize) -> usize {
        2 * (3 * n + 1)
    }

    /// Layout `[phi, psi, theta, phi_t, psi_t, theta_t]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(Self::flat_len(self.n));
        for part in [&self.phi, &self.psi, &self.theta, &self.phi_t, &self.psi_t, &self.theta_t] {
            y.extend_from_slice(part);
        }
        y
    }

    pub fn from_flat(n: usize, t: f64, y: &[f64]) -> Self {
        let mut s = Self::zeros(n);
        s.t = t;
        s.load_flat(y);
        s
    }

    pub fn load_flat(&mut self, y: &[f64]) {
        let n = self.n;
        let (pos, vel) = y.split_at(3 * n + 1);
        self.phi.copy_from_slice(&pos[..n]);
        self.psi.copy_from_slice(&pos[n..2 * n]);
        self.theta.copy_from_slice(&pos[2 * n..]);
        self.phi_t.copy_from_slice(&vel[..n]);
        self.psi_t.copy_from_slice(&vel[n..2 * n]);
        self.theta_t.copy_from_slice(&vel[2 * n..]);
    }

    pub fn is_finite(&self) -> bool {
        [&self.phi, &self.phi_t, &self.psi, &self.psi_t, &self.theta, &self.theta_t]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Field values `(Phi, Psi, theta)` at a point.
    pub fn fields_at(&self, x: f64) -> (f64, f64, f64) {
        use super::basis::{eval_cosine, eval_sine};
        (eval_sine(&self.phi, x), eval_sine(&self.psi, x), eval_cosine(&self.theta, x))
    }
}
