//! Full-step modal history of `theta` and the memory sums built on it.
//!
//! For every cosine mode `h_j` the trace provides, at the latest full step
//! `t_n`, the trapezoid sums `g*h_j`, `g*h_j^2`, `g'*h_j`, `g'*h_j^2` and the
//! trapezoid masses of `g` and `g'`. Exponential kernels use O(1)
//! accumulators; other kernels sum over the whole history against a kernel
//! table sampled every half step.

use crate::kernels::{ExponentialAccumulator, RelaxationKernel};

/// Memory sums at a full step.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryTerms {
    pub mass: f64,
    pub dmass: f64,
    pub conv: Vec<f64>,
    pub conv_sq: Vec<f64>,
    pub dconv: Vec<f64>,
    pub dconv_sq: Vec<f64>,
}

impl MemoryTerms {
    pub fn zeros(modes: usize) -> Self {
        Self {
            mass: 0.0,
            dmass: 0.0,
            conv: vec![0.0; modes],
            conv_sq: vec![0.0; modes],
            dconv: vec![0.0; modes],
            dconv_sq: vec![0.0; modes],
        }
    }

    /// `(g ⋄ h_j)` for mode `j` given the current coefficient.
    pub fn diamond(&self, j: usize, h: f64) -> f64 {
        self.mass * h - self.conv[j]
    }

    /// `(g ∘ h_j)` through the expansion.
    pub fn circle(&self, j: usize, h: f64) -> f64 {
        self.mass * h * h - 2.0 * h * self.conv[j] + self.conv_sq[j]
    }

    /// `(g' ∘ h_j)` through the expansion.
    pub fn dcircle(&self, j: usize, h: f64) -> f64 {
        self.dmass * h * h - 2.0 * h * self.dconv[j] + self.dconv_sq[j]
    }
}

#[derive(Debug, Clone)]
enum Sums {
    Exponential { rate: f64, acc: Vec<ExponentialAccumulator> },
    /// `base[h]` holds the closed-panel sums at offset `h dt / 2`.
    Table { g_half: Vec<f64>, dg_full: Vec<f64>, base: [Vec<f64>; 3] },
}

#[derive(Debug, Clone)]
pub struct HistoryTrace {
    dt: f64,
    modes: usize,
    kernel: RelaxationKernel,
    theta: Vec<f64>,
    theta_t: Vec<f64>,
    sums: Sums,
}

impl HistoryTrace {
    pub fn new(kernel: &RelaxationKernel, dt: f64, modes: usize) -> Self {
        Self::with_mode(kernel, dt, modes, true)
    }

    /// `recursive = false` forces the table path for any kernel.
    pub fn with_mode(kernel: &RelaxationKernel, dt: f64, modes: usize, recursive: bool) -> Self {
        let sums = match kernel.exponential_rate() {
            Some(rate) if recursive => Sums::Exponential {
                rate,
                acc: vec![ExponentialAccumulator::new(kernel.g0(), rate, dt); modes],
            },
            _ => Sums::Table {
                g_half: Vec::new(),
                dg_full: Vec::new(),
                base: [vec![0.0; modes], vec![0.0; modes], vec![0.0; modes]],
            },
        };
        Self {
            dt,
            modes,
            kernel: kernel.clone(),
            theta: Vec::new(),
            theta_t: Vec::new(),
            sums,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.theta.len() / self.modes.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self, i: usize) -> &[f64] {
        &self.theta[i * self.modes..(i + 1) * self.modes]
    }

    pub fn theta_t(&self, i: usize) -> &[f64] {
        &self.theta_t[i * self.modes..(i + 1) * self.modes]
    }

    /// Appends the full-step snapshot at `t_{len}`.
    pub fn push(&mut self, theta: &[f64], theta_t: &[f64]) {
        debug_assert_eq!(theta.len(), self.modes);
        self.theta.extend_from_slice(theta);
        self.theta_t.extend_from_slice(theta_t);
        let len = self.len();
        match &mut self.sums {
            Sums::Exponential { acc, .. } => {
                for (a, h) in acc.iter_mut().zip(theta) {
                    a.push(*h);
                }
            }
            Sums::Table { g_half, dg_full, base } => {
                // half-step table must reach (2 (len-1) + 2) dt/2
                while g_half.len() < 2 * len + 1 {
                    let s = g_half.len() as f64 * 0.5 * self.dt;
                    g_half.push(self.kernel.g(s));
                }
                while dg_full.len() < len {
                    let s = dg_full.len() as f64 * self.dt;
                    dg_full.push(self.kernel.dg(s));
                }
                let last = len - 1;
                base.iter_mut().for_each(|b| b.iter_mut().for_each(|v| *v = 0.0));
                if last > 0 {
                    let m = self.modes;
                    for i in 0..=last {
                        let w = if i == 0 || i == last { 0.5 * self.dt } else { self.dt };
                        let at = 2 * (last - i);
                        let (w0, w1, w2) = (w * g_half[at], w * g_half[at + 1], w * g_half[at + 2]);
                        let h = &self.theta[i * m..(i + 1) * m];
                        for j in 0..m {
                            base[0][j] += w0 * h[j];
                            base[1][j] += w1 * h[j];
                            base[2][j] += w2 * h[j];
                        }
                    }
                }
            }
        }
    }

    fn trapezoid_weight(&self, i: usize, last: usize) -> f64 {
        if last == 0 {
            0.0
        } else if i == 0 || i == last {
            0.5 * self.dt
        } else {
            self.dt
        }
    }

    /// Memory convolution `(g * h_j)(t_n + c dt)` for `c` in `{0, 1/2, 1}`,
    /// with `stage[j]` the stage value of `h_j` at `t_n + c dt` closing the
    /// partial trapezoid panel.
    pub fn stage_memory(&self, c: f64, stage: &[f64], out: &mut [f64]) {
        let len = self.len();
        assert!(len >= 1, "history must hold the current step");
        let last = len - 1;
        let dt = self.dt;
        match &self.sums {
            Sums::Exponential { rate, acc } => {
                let shift = (-rate * c * dt).exp();
                for (o, a) in out.iter_mut().zip(acc) {
                    *o = shift * a.conv();
                }
            }
            Sums::Table { base, .. } => {
                let half = (2.0 * c).round() as usize;
                out.copy_from_slice(&base[half]);
            }
        }
        if c > 0.0 {
            let gc = self.kernel.g(c * dt);
            let g0 = self.kernel.g0();
            let part = 0.5 * c * dt;
            for ((o, hn), hs) in out.iter_mut().zip(self.theta(last)).zip(stage) {
                *o += part * (gc * hn + g0 * hs);
            }
        }
    }

    /// Memory sums at the latest full step.
    pub fn memory_terms(&self) -> MemoryTerms {
        let mut m = MemoryTerms::zeros(self.modes);
        let len = self.len();
        if len == 0 {
            return m;
        }
        let last = len - 1;
        match &self.sums {
            Sums::Exponential { rate, acc } => {
                m.mass = acc.first().map_or(0.0, |a| a.mass());
                m.dmass = -rate * m.mass;
                for (j, a) in acc.iter().enumerate() {
                    m.conv[j] = a.conv();
                    m.conv_sq[j] = a.conv_sq();
                    m.dconv[j] = -rate * a.conv();
                    m.dconv_sq[j] = -rate * a.conv_sq();
                }
            }
            Sums::Table { g_half, dg_full, .. } => {
                for i in 0..=last {
                    let w = self.trapezoid_weight(i, last);
                    if w == 0.0 {
                        continue;
                    }
                    let g = w * g_half[2 * (last - i)];
                    let dg = w * dg_full[last - i];
                    m.mass += g;
                    m.dmass += dg;
                    for (j, h) in self.theta(i).iter().enumerate() {
                        let hh = h * h;
                        m.conv[j] += g * h;
                        m.conv_sq[j] += g * hh;
                        m.dconv[j] += dg * h;
                        m.dconv_sq[j] += dg * hh;
                    }
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{circle, circle_derivative, convolve, ScalarHistory};
    use approx::assert_abs_diff_eq;

    fn fill(trace: &mut HistoryTrace, steps: usize) {
        let dt = trace.dt();
        for i in 0..=steps {
            let t = i as f64 * dt;
            trace.push(&[1.0, t.sin(), (2.0 * t).cos()], &[0.0, t.cos(), -2.0 * (2.0 * t).sin()]);
        }
    }

    #[test]
    fn recursive_and_table_paths_agree() {
        let k = RelaxationKernel::exponential(1.5, 2.0).unwrap();
        let mut a = HistoryTrace::with_mode(&k, 0.01, 3, true);
        let mut b = HistoryTrace::with_mode(&k, 0.01, 3, false);
        fill(&mut a, 300);
        fill(&mut b, 300);
        let (ma, mb) = (a.memory_terms(), b.memory_terms());
        assert_abs_diff_eq!(ma.mass, mb.mass, epsilon = 1e-12);
        assert_abs_diff_eq!(ma.dmass, mb.dmass, epsilon = 1e-12);
        for j in 0..3 {
            assert_abs_diff_eq!(ma.conv[j], mb.conv[j], epsilon = 1e-12);
            assert_abs_diff_eq!(ma.conv_sq[j], mb.conv_sq[j], epsilon = 1e-12);
            assert_abs_diff_eq!(ma.dconv[j], mb.dconv[j], epsilon = 1e-12);
        }
        let stage = [0.9, 0.2, -0.1];
        for c in [0.0, 0.5, 1.0] {
            let (mut oa, mut ob) = ([0.0; 3], [0.0; 3]);
            a.stage_memory(c, &stage, &mut oa);
            b.stage_memory(c, &stage, &mut ob);
            for j in 0..3 {
                assert_abs_diff_eq!(oa[j], ob[j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn matches_scalar_operators() {
        let k = RelaxationKernel::power(1.0, 3.0).unwrap();
        let dt = 0.01;
        let mut tr = HistoryTrace::new(&k, dt, 3);
        fill(&mut tr, 250);
        let m = tr.memory_terms();
        let h = ScalarHistory::new(dt, (0..=250).map(|i| (i as f64 * dt).sin()).collect()).unwrap();
        let t: f64 = 2.5;
        let ht = t.sin();
        assert_abs_diff_eq!(m.conv[1], convolve(&k, &h, t).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.circle(1, ht), circle(&k, &h, t).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.dcircle(1, ht), circle_derivative(&k, &h, t).unwrap(), epsilon = 1e-12);
        // constant mode carries no memory energy
        assert_abs_diff_eq!(m.circle(0, 1.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn stage_memory_at_full_step_closes_panel() {
        // value at c = 1 with the true next sample equals the full sum one step later
        let k = RelaxationKernel::power(2.0, 1.5).unwrap();
        let dt = 0.02;
        let mut tr = HistoryTrace::new(&k, dt, 3);
        fill(&mut tr, 40);
        let t = 41.0 * dt;
        let next = [1.0, t.sin(), (2.0 * t).cos()];
        let mut out = [0.0; 3];
        tr.stage_memory(1.0, &next, &mut out);
        tr.push(&next, &[0.0; 3]);
        let m = tr.memory_terms();
        for j in 0..3 {
            assert_abs_diff_eq!(out[j], m.conv[j], epsilon = 1e-13);
        }
    }
}
