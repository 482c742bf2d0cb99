//! Decay-law regression and the `L ~ E` equivalence estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::RelaxationKernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(rename = "A")]
    pub a: f64,
    pub omega: f64,
    pub r2: f64,
    pub t0: f64,
}

/// Least squares for `y = intercept + slope x`; returns
/// `(intercept, slope, r2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Arity { needed: 2, got: n.min(y.len()) });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::FitDomain("regressor is constant on the window".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok((intercept, slope, r2))
}

/// Fits `log E = log A - omega X(t)` with `X(t) = int_{t0}^t zeta` on the
/// rows with `t >= t0`.
pub fn fit_decay(times: &[f64], energy: &[f64], kernel: &RelaxationKernel, t0: f64) -> Result<DecayFit> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (t, e) in times.iter().zip(energy) {
        if *t < t0 {
            continue;
        }
        if !(*e > 0.0) || !e.is_finite() {
            return Err(Error::FitDomain(format!("E({t}) = {e} is not positive")));
        }
        x.push(kernel.zeta_integral(t0, *t));
        y.push(e.ln());
    }
    let (intercept, slope, r2) = linear_fit(&x, &y)?;
    Ok(DecayFit {
        a: intercept.exp(),
        omega: -slope,
        r2,
        t0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub m_hat: f64,
    #[serde(rename = "M_hat")]
    pub big_m_hat: f64,
}

/// Extremes of `L / E` over the rows with `E > 0`.
pub fn equivalence_estimate(l: &[f64], energy: &[f64]) -> Result<Equivalence> {
    let ratios: Vec<f64> = l.iter().zip(energy).filter(|(_, e)| **e > 0.0).map(|(l, e)| l / e).collect();
    if ratios.is_empty() {
        return Err(Error::UndefinedRatio);
    }
    Ok(Equivalence {
        m_hat: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        big_m_hat: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
