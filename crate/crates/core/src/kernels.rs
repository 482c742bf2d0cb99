//! Relaxation kernels and the memory operators built on them.
//!
//! For a kernel `g` and a scalar history `h` sampled on a uniform grid starting
//! at `t = 0`:
//!
//! ```text
//! (g * h)(t) = int_0^t g(t-s) h(s) ds
//! (g ⋄ h)(t) = int_0^t g(t-s) (h(t) - h(s)) ds
//! (g ∘ h)(t) = int_0^t g(t-s) (h(t) - h(s))^2 ds
//! ```
//!
//! All integrals use the composite trapezoid on the history grid. `G(t)`
//! denotes the trapezoid mass of `g` on the same grid, so that the algebraic
//! identities between the three operators hold to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `g' + zeta g <= tol` used by [`check_hypotheses`].
pub const H2_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Exponential,
    PowerZeta,
    Tabulated,
}

/// Total mass declaration for tabulated kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TabulatedMass {
    Finite(f64),
    Infinite,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
enum Law {
    /// `g0 exp(-rate t)`, `zeta = zeta_rate`.
    Exponential { rate: f64, zeta_rate: f64 },
    /// `g0 (1+t)^(-rate)`, `zeta = zeta_rate / (1+t)`.
    PowerZeta { rate: f64, zeta_rate: f64 },
    /// Piecewise-linear through strictly decreasing samples, zero past the
    /// last sample; `zeta` constant.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
        mass: TabulatedMass,
        zeta: f64,
    },
}

/// A relaxation kernel `g` together with its decay-rate function `zeta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationKernel {
    g0: f64,
    law: Law,
}

impl RelaxationKernel {
    /// `g(t) = g0 e^{-rate t}` with `zeta = rate` (equality in (H2)).
    pub fn exponential(g0: f64, rate: f64) -> Result<Self> {
        Self::exponential_with_zeta(g0, rate, rate)
    }

    pub fn exponential_with_zeta(g0: f64, rate: f64, zeta_rate: f64) -> Result<Self> {
        check_nonneg("g0", g0)?;
        check_pos("rate", rate)?;
        check_nonneg("zeta_rate", zeta_rate)?;
        Ok(Self {
            g0,
            law: Law::Exponential { rate, zeta_rate },
        })
    }

    /// The identically zero kernel (memory switched off).
    pub fn none() -> Self {
        Self {
            g0: 0.0,
            law: Law::Exponential {
                rate: 1.0,
                zeta_rate: 1.0,
            },
        }
    }

    /// `g(t) = g0 (1+t)^{-rate}` with `zeta(t) = rate/(1+t)`.
    pub fn power(g0: f64, rate: f64) -> Result<Self> {
        Self::power_with_zeta(g0, rate, rate)
    }

    pub fn power_with_zeta(g0: f64, rate: f64, zeta_rate: f64) -> Result<Self> {
        check_nonneg("g0", g0)?;
        check_pos("rate", rate)?;
        check_nonneg("zeta_rate", zeta_rate)?;
        Ok(Self {
            g0,
            law: Law::PowerZeta { rate, zeta_rate },
        })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>, mass: TabulatedMass, zeta: f64) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::InvalidKernel(
                "tabulated kernel needs >= 2 (t, g) rows of equal length".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidKernel("tabulated kernel must start at t = 0".into()));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidKernel("tabulated times must increase".into()));
            }
        }
        for w in values.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidKernel(
                    "tabulated g must strictly decrease (flat segments violate (H2))".into(),
                ));
            }
        }
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidKernel("tabulated g must be finite and nonnegative".into()));
        }
        if let TabulatedMass::Finite(m) = mass {
            check_nonneg("gbar", m)?;
        }
        check_nonneg("zeta", zeta)?;
        Ok(Self {
            g0: values[0],
            law: Law::Tabulated {
                times,
                values,
                mass,
                zeta,
            },
        })
    }

    pub fn family(&self) -> KernelFamily {
        match self.law {
            Law::Exponential { .. } => KernelFamily::Exponential,
            Law::PowerZeta { .. } => KernelFamily::PowerZeta,
            Law::Tabulated { .. } => KernelFamily::Tabulated,
        }
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    /// Decay exponent of the kernel (`rate` for the closed-form families).
    pub fn rate(&self) -> Option<f64> {
        match self.law {
            Law::Exponential { rate, .. } | Law::PowerZeta { rate, .. } => Some(rate),
            Law::Tabulated { .. } => None,
        }
    }

    /// Rate of the exponential family, used for recursive convolution.
    pub fn exponential_rate(&self) -> Option<f64> {
        match self.law {
            Law::Exponential { rate, .. } => Some(rate),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.g0 == 0.0
    }

    pub fn g(&self, t: f64) -> f64 {
        match &self.law {
            Law::Exponential { rate, .. } => self.g0 * (-rate * t).exp(),
            Law::PowerZeta { rate, .. } => self.g0 * (1.0 + t).powf(-rate),
            Law::Tabulated { times, values, .. } => {
                let (i, frac) = match locate(times, t) {
                    Some(v) => v,
                    None => return 0.0,
                };
                values[i] + frac * (values[i + 1] - values[i])
            }
        }
    }

    pub fn dg(&self, t: f64) -> f64 {
        match &self.law {
            Law::Exponential { rate, .. } => -rate * self.g(t),
            Law::PowerZeta { rate, .. } => -rate * self.g0 * (1.0 + t).powf(-rate - 1.0),
            Law::Tabulated { times, values, .. } => match locate(times, t) {
                Some((i, _)) => (values[i + 1] - values[i]) / (times[i + 1] - times[i]),
                None => 0.0,
            },
        }
    }

    pub fn zeta(&self, t: f64) -> f64 {
        match &self.law {
            Law::Exponential { zeta_rate, .. } => *zeta_rate,
            Law::PowerZeta { zeta_rate, .. } => zeta_rate / (1.0 + t),
            Law::Tabulated { zeta, .. } => *zeta,
        }
    }

    /// `int_{t0}^{t} zeta(s) ds` in closed form.
    pub fn zeta_integral(&self, t0: f64, t: f64) -> f64 {
        match &self.law {
            Law::Exponential { zeta_rate, .. } => zeta_rate * (t - t0),
            Law::PowerZeta { zeta_rate, .. } => zeta_rate * ((1.0 + t) / (1.0 + t0)).ln(),
            Law::Tabulated { zeta, .. } => zeta * (t - t0),
        }
    }

    /// Exact cumulative mass `int_0^t g(s) ds`.
    pub fn cumulative(&self, t: f64) -> f64 {
        match &self.law {
            Law::Exponential { rate, .. } => self.g0 / rate * (1.0 - (-rate * t).exp()),
            Law::PowerZeta { rate, .. } => {
                if (rate - 1.0).abs() < 1e-14 {
                    self.g0 * (1.0 + t).ln()
                } else {
                    self.g0 / (rate - 1.0) * (1.0 - (1.0 + t).powf(1.0 - rate))
                }
            }
            Law::Tabulated { times, values, .. } => {
                let mut acc = 0.0;
                for i in 0..times.len() - 1 {
                    let (a, b) = (times[i], times[i + 1]);
                    if t <= a {
                        break;
                    }
                    let hi = t.min(b);
                    let gb = values[i] + (hi - a) / (b - a) * (values[i + 1] - values[i]);
                    acc += 0.5 * (values[i] + gb) * (hi - a);
                }
                acc
            }
        }
    }

    /// Total mass `gbar = int_0^inf g`.
    pub fn gbar(&self) -> Result<f64> {
        match &self.law {
            Law::Exponential { rate, .. } => Ok(self.g0 / rate),
            Law::PowerZeta { rate, .. } => {
                if *rate > 1.0 {
                    Ok(self.g0 / (rate - 1.0))
                } else if self.g0 == 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::InfiniteMass)
                }
            }
            Law::Tabulated { mass, .. } => match mass {
                TabulatedMass::Finite(m) => Ok(*m),
                TabulatedMass::Infinite => Err(Error::InfiniteMass),
                TabulatedMass::Unknown => Err(Error::UnknownMass),
            },
        }
    }

    /// Serializable echo of the kernel parameters.
    pub fn echo(&self) -> serde_json::Value {
        match &self.law {
            Law::Exponential { rate, zeta_rate } => serde_json::json!({
                "family": "exponential", "g0": self.g0, "rate": rate, "zeta_rate": zeta_rate,
            }),
            Law::PowerZeta { rate, zeta_rate } => serde_json::json!({
                "family": "power-zeta", "g0": self.g0, "rate": rate, "zeta_rate": zeta_rate,
            }),
            Law::Tabulated { times, mass, zeta, .. } => serde_json::json!({
                "family": "tabulated",
                "g0": self.g0,
                "rows": times.len(),
                "gbar": match mass { TabulatedMass::Finite(m) => serde_json::json!(m), _ => serde_json::Value::Null },
                "zeta": zeta,
            }),
        }
    }
}

fn locate(times: &[f64], t: f64) -> Option<(usize, f64)> {
    let last = *times.last()?;
    if t < 0.0 || t >= last {
        return None;
    }
    let i = match times.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
        Ok(i) => i,
        Err(i) => i - 1,
    };
    let i = i.min(times.len() - 2);
    Some((i, (t - times[i]) / (times[i + 1] - times[i])))
}

fn check_pos(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidCoefficient {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidCoefficient {
            name,
            reason: format!("must be nonnegative and finite, got {v}"),
        })
    }
}

/// Uniformly sampled scalar history starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarHistory {
    dt: f64,
    samples: Vec<f64>,
}

impl ScalarHistory {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        check_pos("dt", dt)?;
        if samples.is_empty() {
            return Err(Error::Arity { needed: 1, got: 0 });
        }
        Ok(Self { dt, samples })
    }

    /// Samples `f` on `0, dt, ..., t_end` (rounded to the nearest whole step).
    pub fn from_fn<F: Fn(f64) -> f64>(dt: f64, t_end: f64, f: F) -> Result<Self> {
        let steps = (t_end / dt).round() as usize;
        Self::new(dt, (0..=steps).map(|i| f(i as f64 * dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn span(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    /// Linear interpolation of the history at `t`.
    pub fn value(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        let x = t / self.dt;
        let i = (x.floor() as usize).min(self.samples.len() - 1);
        let frac = x - i as f64;
        if frac <= 1e-12 || i + 1 >= self.samples.len() {
            Ok(self.samples[i])
        } else {
            Ok(self.samples[i] + frac * (self.samples[i + 1] - self.samples[i]))
        }
    }

    fn check_range(&self, t: f64) -> Result<()> {
        let end = self.span();
        if !(t >= 0.0) || t > end * (1.0 + 1e-12) + 1e-14 {
            return Err(Error::OutOfRange { t, start: 0.0, end });
        }
        Ok(())
    }

    /// Trapezoid nodes `(s, weight, h(s))` covering `[0, t]`.
    fn nodes(&self, t: f64) -> Result<Vec<(f64, f64, f64)>> {
        self.check_range(t)?;
        let x = t / self.dt;
        let mut full = x.floor() as usize;
        let mut frac = x - full as f64;
        if (1.0 - frac) < 1e-9 {
            full += 1;
            frac = 0.0;
        } else if frac < 1e-9 {
            frac = 0.0;
        }
        let full = full.min(self.samples.len() - 1);
        let mut out = Vec::with_capacity(full + 2);
        for i in 0..=full {
            let w = if full == 0 {
                0.0
            } else if i == 0 || i == full {
                0.5 * self.dt
            } else {
                self.dt
            };
            out.push((i as f64 * self.dt, w, self.samples[i]));
        }
        if frac > 0.0 {
            let part = frac * self.dt;
            let h_end = self.value(t)?;
            out.last_mut().unwrap().1 += 0.5 * part;
            out.push((t, 0.5 * part, h_end));
        }
        Ok(out)
    }
}

fn quad<F: Fn(f64, f64) -> f64>(h: &ScalarHistory, t: f64, f: F) -> Result<f64> {
    Ok(h.nodes(t)?.into_iter().map(|(s, w, hs)| w * f(s, hs)).sum())
}

/// Trapezoid mass `G(t)` of the kernel on the history grid.
pub fn kernel_mass(kernel: &RelaxationKernel, h: &ScalarHistory, t: f64) -> Result<f64> {
    quad(h, t, |s, _| kernel.g(t - s))
}

/// `(g * h)(t)`.
pub fn convolve(kernel: &RelaxationKernel, h: &ScalarHistory, t: f64) -> Result<f64> {
    quad(h, t, |s, hs| kernel.g(t - s) * hs)
}

/// `(g ⋄ h)(t) = G(t) h(t) - (g * h)(t)`.
pub fn diamond(kernel: &RelaxationKernel, h: &ScalarHistory, t: f64) -> Result<f64> {
    let ht = h.value(t)?;
    Ok(kernel_mass(kernel, h, t)? * ht - convolve(kernel, h, t)?)
}

/// `(g ∘ h)(t)` by direct quadrature of `g(t-s)(h(t)-h(s))^2`.
pub fn circle(kernel: &RelaxationKernel, h: &ScalarHistory, t: f64) -> Result<f64> {
    let ht = h.value(t)?;
    quad(h, t, |s, hs| kernel.g(t - s) * (ht - hs).powi(2))
}

/// `(g ∘ h)(t)` through the expansion `G h^2 - 2 h (g*h) + (g * h^2)`.
pub fn circle_expansion(kernel: &RelaxationKernel, h: &ScalarHistory, t: f64) -> Result<f64> {
    let ht = h.value(t)?;
    let mass = kernel_mass(kernel, h, t)?;
    let conv = convolve(kernel, h, t)?;
    let conv_sq = quad(h, t, |s, hs| kernel.g(t - s) * hs * hs)?;
    Ok(mass * ht * ht - 2.0 * ht * conv + conv_sq)
}

/// Same as [`circle`] with `g'` in place of `g`.
pub fn circle_derivative(kernel: &RelaxationKernel, h: &ScalarHistory, t: f64) -> Result<f64> {
    let ht = h.value(t)?;
    quad(h, t, |s, hs| kernel.dg(t - s) * (ht - hs).powi(2))
}

/// Discrete residual of the memory identity
///
/// ```text
/// (g*h) h' = -1/2 g h^2 + 1/2 (g'∘h) - 1/2 d/dt [ (g∘h) - G h^2 ]
/// ```
///
/// evaluated on the grid point `t` with centered differences for `h'` and
/// the time derivative. Vanishes at second order in `dt`.
pub fn identity_residual(kernel: &RelaxationKernel, h: &ScalarHistory, t: f64) -> Result<f64> {
    let len = h.samples.len();
    if len < 3 {
        return Err(Error::Arity { needed: 3, got: len });
    }
    let dt = h.dt;
    let i = (t / dt).round() as usize;
    if i == 0 || i + 1 >= len || (t - i as f64 * dt).abs() > 1e-9 * dt.max(t) {
        return Err(Error::OutOfRange {
            t,
            start: dt,
            end: (len - 2) as f64 * dt,
        });
    }
    let ht = h.samples[i];
    let dh = (h.samples[i + 1] - h.samples[i - 1]) / (2.0 * dt);
    let bracket = |tt: f64| -> Result<f64> {
        let hv = h.value(tt)?;
        Ok(circle(kernel, h, tt)? - kernel_mass(kernel, h, tt)? * hv * hv)
    };
    let d_bracket = (bracket(t + dt)? - bracket(t - dt)?) / (2.0 * dt);
    let lhs = convolve(kernel, h, t)? * dh;
    let r = lhs + 0.5 * kernel.g(t) * ht * ht - 0.5 * circle_derivative(kernel, h, t)? + 0.5 * d_bracket;
    Ok(r.abs())
}

/// `G(t) (g∘h)(t) - [(g⋄h)(t)]^2`, nonnegative by Cauchy-Schwarz.
pub fn cauchy_schwarz_slack(kernel: &RelaxationKernel, h: &ScalarHistory, t: f64) -> Result<f64> {
    let mass = kernel_mass(kernel, h, t)?;
    let d = diamond(kernel, h, t)?;
    Ok(mass * circle(kernel, h, t)? - d * d)
}

/// Outcome of [`check_hypotheses`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub lambda: f64,
    pub h1_ok: bool,
    pub h2_ok: bool,
    /// `max_t g'(t) + zeta(t) g(t)` over the grid.
    pub worst_h2_slack: f64,
    /// `zeta >= 0` and non-increasing on the grid.
    pub zeta_ok: bool,
}

/// Checks (H1) and (H2) on a sampling grid.
pub fn check_hypotheses(kernel: &RelaxationKernel, delta: f64, t_grid: &[f64]) -> Result<HypothesisReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidCoefficient {
            name: "delta",
            reason: format!("must be positive, got {delta}"),
        });
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] < 0.0 {
        return Err(Error::Input("t_grid must be non-empty, increasing and nonnegative".into()));
    }
    let lambda = match kernel.gbar() {
        Ok(m) => delta - m,
        Err(Error::InfiniteMass) => f64::NEG_INFINITY,
        Err(e) => return Err(e),
    };
    let worst = t_grid
        .iter()
        .map(|&t| kernel.dg(t) + kernel.zeta(t) * kernel.g(t))
        .fold(f64::NEG_INFINITY, f64::max);
    let zetas: Vec<f64> = t_grid.iter().map(|&t| kernel.zeta(t)).collect();
    let zeta_ok = zetas.iter().all(|z| *z >= 0.0) && zetas.windows(2).all(|w| w[1] <= w[0]);
    Ok(HypothesisReport {
        lambda,
        h1_ok: kernel.g0() > 0.0 && lambda > 0.0,
        h2_ok: worst <= H2_TOLERANCE && zeta_ok,
        worst_h2_slack: worst,
        zeta_ok,
    })
}

/// O(1)-per-step trapezoid accumulators for an exponential kernel.
///
/// After pushing samples `h_0, ..., h_n` at spacing `dt` the accumulators hold
/// the trapezoid values of `g*h`, `g*h^2` and `G` at `t_n`, identical (up to
/// rounding) to the direct sums.
#[derive(Debug, Clone)]
pub struct ExponentialAccumulator {
    g0: f64,
    g_dt: f64,
    decay: f64,
    dt: f64,
    conv: f64,
    conv_sq: f64,
    mass: f64,
    last: Option<f64>,
}

impl ExponentialAccumulator {
    pub fn new(g0: f64, rate: f64, dt: f64) -> Self {
        let decay = (-rate * dt).exp();
        Self {
            g0,
            g_dt: g0 * decay,
            decay,
            dt,
            conv: 0.0,
            conv_sq: 0.0,
            mass: 0.0,
            last: None,
        }
    }

    pub fn push(&mut self, h: f64) {
        if let Some(prev) = self.last {
            let half = 0.5 * self.dt;
            self.conv = self.decay * self.conv + half * (self.g_dt * prev + self.g0 * h);
            self.conv_sq = self.decay * self.conv_sq + half * (self.g_dt * prev * prev + self.g0 * h * h);
            self.mass = self.decay * self.mass + half * (self.g_dt + self.g0);
        }
        self.last = Some(h);
    }

    pub fn conv(&self) -> f64 {
        self.conv
    }

    pub fn conv_sq(&self) -> f64 {
        self.conv_sq
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// History part of the convolution at `t_n + c dt`, i.e. the trapezoid
    /// sum on `[0, t_n]` with the kernel shifted by `c dt`.
    pub fn shifted_conv(&self, c: f64, rate: f64) -> f64 {
        (-rate * c * self.dt).exp() * self.conv
    }
}
