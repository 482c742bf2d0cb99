//! Constant selection for the Lyapunov functional.
//!
//! The recipe fixes `eps4`, `N1`, `eps1`, `N5`, `N2`, `eps2` in that order,
//! then `N6`, `N7`, `eta2`, `eps7` in the equal-damping case, and finally
//! `N`. Bounds stated as "sufficiently large" are met with a factor 1.05,
//! "sufficiently small" ones with 0.5, and `eps4`, `eps1` take their bound.
//! Each brace of the derivative estimate is then recomputed and checked.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coefficients::{Coefficients, DampingCase};
use crate::error::{Error, Result};
use crate::kernels::RelaxationKernel;

pub const LARGE: f64 = 1.05;
pub const SMALL: f64 = 0.5;

/// Sharp Poincare constant on the unit interval.
pub fn poincare() -> f64 {
    1.0 / (PI * PI)
}

pub fn upsilon(c: &Coefficients) -> f64 {
    c.gamma.min(c.beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConstants {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "N1")]
    pub n1: f64,
    #[serde(rename = "N2")]
    pub n2: f64,
    #[serde(rename = "N5")]
    pub n5: f64,
    #[serde(rename = "N6")]
    pub n6: f64,
    #[serde(rename = "N7")]
    pub n7: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps4: f64,
    pub eps7: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub upsilon: f64,
    #[serde(rename = "Cp")]
    pub cp: f64,
    pub g0_cut: f64,
    pub t0: f64,
    pub case: DampingCase,
    /// The constant `e^{-2 tau}` bounding the delay weight from below.
    pub c_delay: f64,
    /// Rate `C` in `L' <= -C E + C3 int (g o theta_x)`.
    #[serde(rename = "C")]
    pub big_c: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    /// `M_I` with `|L - N E| <= M_I E`.
    pub equivalence_margin: f64,
}

/// Inputs shared by all braces.
struct Env<'a> {
    c: &'a Coefficients,
    q: f64,
    ups: f64,
    cp: f64,
    g00: f64,
    gbar: f64,
    cd: f64,
}

impl<'a> Env<'a> {
    fn new(c: &'a Coefficients, kernel: &RelaxationKernel) -> Result<Self> {
        Ok(Self {
            c,
            q: 1.0 / c.k + c.rho3 * c.k / (c.rho1 * c.rho1 * c.b),
            ups: upsilon(c),
            cp: poincare(),
            g00: kernel.g0(),
            gbar: kernel.gbar()?,
            cd: (-2.0 * c.tau).exp(),
        })
    }

    fn eps4(&self) -> f64 {
        let c = self.c;
        let a = c.rho1 / 16.0 / (1.0 + c.rho1 * self.q);
        let b = 3.0 * self.ups * c.k / 8.0 / (6.0 * self.ups * c.k * self.q + 2.0 * self.ups + 0.5 * c.k * c.k);
        a.min(b)
    }

    /// Right side of the `N1` condition.
    fn r41(&self, e4: f64) -> f64 {
        let (c, u, cp) = (self.c, self.ups, self.cp);
        (2.0 * c.b * c.b * c.gamma + c.gamma * c.gamma * c.b * c.b / (4.0 * e4 * e4) + e4) / (2.0 * e4)
            + e4 * c.k * u * (1.0 + 6.0 * cp) * self.q
            + 3.0 * c.b * u / 8.0
            + e4 * u * (1.0 + 2.0 * cp)
    }

    /// `C1(eps4)` with `int_0^t g` replaced by its supremum `gbar`.
    fn c1(&self, e4: f64) -> f64 {
        let c = self.c;
        let (d, gb) = (c.delta, self.gbar);
        4.0 * c.beta * c.b / d * (2.0 * gb * gb + d * d)
            + 2.0 * (c.beta * c.b).powi(2) / e4
                * (self.g00 * self.g00 * (c.gamma * c.gamma + c.rho3 * c.rho3) / (d * d)
                    + (c.mu1 * c.mu1 + c.mu2 * c.mu2) * (1.0 + gb * gb / (d * d)))
    }

    /// `mu1^2`, which is `mu^2` in the equal case.
    fn mu_sq(&self) -> f64 {
        self.c.mu1 * self.c.mu1
    }

    /// `N5` multiplier in the `theta_t` brace.
    fn p5(&self, k: &LyapunovConstants) -> f64 {
        let c = self.c;
        let fric = match k.case {
            DampingCase::Equal => 2.0 * c.rho2 * self.mu_sq() / c.gamma,
            _ => c.rho2 * c.mu1 * c.mu1 / c.gamma,
        };
        c.beta * c.rho3
            + fric
            + c.rho3 * c.rho3 / (4.0 * k.eps2) * (2.0 * c.k * c.k + c.b * c.b)
            + k.eta1 * (c.rho3 * c.rho3 + c.rho3 * c.beta * c.beta / c.b)
    }

    /// Everything in the `theta_t` brace except the leading `N m0` or
    /// `N7 (rho3 g0 - eta2)` term.
    fn theta_t_load(&self, k: &LyapunovConstants) -> f64 {
        let c = self.c;
        let e4 = k.eps4;
        let tail = match k.case {
            DampingCase::Equal => k.n6 / c.tau,
            _ => 1.0 / c.tau,
        };
        k.n2 * (c.rho3 + c.gamma * c.gamma / (4.0 * k.eps2))
            + self.ups / (4.0 * e4) * (c.delta * c.delta + self.mu_sq())
            + c.beta * c.b * c.rho3 / e4
            + 1.25
            + c.beta * c.beta * self.ups / (8.0 * c.b)
            + k.n5 * self.p5(k)
            + tail
    }

    /// Delay-slice load without the `N m0`, `c/tau` or `N6 c/tau` credit.
    fn z_load(&self, k: &LyapunovConstants) -> f64 {
        let c = self.c;
        let mu2 = match k.case {
            DampingCase::Equal => self.mu_sq(),
            _ => c.mu2 * c.mu2,
        };
        mu2 * k.n2 * self.cp / c.lambda + mu2 * self.ups / (4.0 * k.eps4) + 0.75 + 2.0 * c.rho2 * mu2 * k.n5 / c.gamma
    }

    /// Load of the `g' o theta_x` brace without `beta N / 2`.
    fn dcircle_load(&self, k: &LyapunovConstants) -> f64 {
        let c = self.c;
        let e4 = k.eps4;
        let base = self.ups * self.g00 / (2.0 * e4)
            + self.g00 * (c.b * c.beta).powi(2) * (c.gamma * c.gamma + c.rho3 * c.rho3) / (e4 * e4 * c.delta * c.delta);
        match k.case {
            DampingCase::Equal => base + c.rho3 * c.rho3 * self.g00 * self.cp * k.n7 / (2.0 * k.eta2),
            _ => base,
        }
    }

    /// `M_I` with `|L - N E| <= M_I E`, from Cauchy-Schwarz, Poincare and the
    /// energy weights.
    fn equivalence_margin(&self, k: &LyapunovConstants) -> f64 {
        let c = self.c;
        let cp = self.cp;
        let pt = (2.0 / (c.gamma * c.rho1)).sqrt();
        let pst = (2.0 / (c.gamma * c.rho2)).sqrt();
        let sh = (2.0 / (c.gamma * c.k)).sqrt();
        let psx = (2.0 / (c.gamma * c.b)).sqrt();
        let ps = cp.sqrt() * psx;
        let phx = (2.0 * sh * sh + 2.0 * cp * psx * psx).sqrt();
        let ph = cp.sqrt() * phx;
        let tht = (2.0 / (c.beta * c.rho3)).sqrt();
        let thx = (2.0 / (c.beta * c.lambda)).sqrt();
        let th = cp.sqrt() * thx;
        let circ = 2.0 / c.beta;
        let zz = 2.0 / (c.beta * c.xi);
        let w = cp * psx;
        let gconv = self.gbar * thx + (self.gbar * circ).sqrt();
        let gdiam = (self.gbar * cp * circ).sqrt();

        let i1 = c.rho2 * pst * ps + c.rho1 * pt * w + c.beta * thx * ps;
        let i2 = c.rho3 * tht * th + c.gamma * psx * th + 0.5 * c.mu1 * th * th;
        let i3 = c.rho1 * pt * ph + c.rho2 * pst * ps;
        let i4 = c.rho2 * pst * sh
            + (c.rho2 + c.gamma) * psx * pt
            + c.rho3 * tht * pt
            + (c.k * c.rho3 / c.rho1 + c.beta) * thx * phx
            + gconv * phx;
        let i5 = c.rho2 * c.rho3 * tht * pst;
        let i7 = c.rho3 * tht * gdiam;
        let j1 = 2.0 * c.rho1 * pt * phx;
        let j2 = 2.0 * c.gamma * c.rho2 * c.b * pst * psx
            + 2.0 * c.beta * c.b / c.delta * (c.rho3 * tht + c.gamma * psx) * (c.delta * thx + gconv);
        let (n6, n7) = match k.case {
            DampingCase::Equal => (k.n6, k.n7),
            _ => (1.0, 0.0),
        };
        k.n1 * i1
            + k.n2 * i2
            + 0.25 * k.upsilon * i3
            + k.upsilon * i4
            + k.n5 * i5
            + n6 * zz
            + n7 * i7
            + super::lyapunov::j1_weight(k, c) * j1
            + j2 / (2.0 * k.eps4)
    }
}

/// Named braces of the derivative estimate. Every entry must be
/// nonnegative; `equivalence` is `N - M_I` and must be positive.
pub fn braces(k: &LyapunovConstants, c: &Coefficients, kernel: &RelaxationKernel) -> Result<Vec<(&'static str, f64)>> {
    let env = Env::new(c, kernel)?;
    let (q, u, cp, gb) = (env.q, env.ups, env.cp, env.gbar);
    let e4 = k.eps4;
    let equal = k.case == DampingCase::Equal;
    let (n7e7, m0) = if equal { (k.n7 * k.eps7, 0.0) } else { (0.0, c.m0()) };

    let phi_t = c.rho1 * u / 4.0 - k.n1 * k.eps1 - 2.0 * e4 * u * (1.0 + c.rho1 * q);
    let psi_t = c.rho2 * c.gamma * k.n5 / 4.0
        - k.n1 * (1.5 * c.rho2 + c.rho1 * c.rho1 * cp / (4.0 * k.eps1))
        - n7e7
        - 0.75 * c.rho2 * u
        - c.gamma * c.rho2 * c.b / e4;
    let shear = 0.75 * u * c.k - 2.0 * k.eps2 * cp * k.n5 - e4 * (6.0 * u * c.k * q + 2.0 * u + 0.5 * c.k * c.k);
    let psi_x = k.n1 * c.b - k.eps2 * (k.n2 + k.n5 * (1.0 + cp + 2.0 * cp * cp)) - env.r41(e4);
    let lead = if equal { k.n7 * (c.rho3 * k.g0_cut - k.eta2) } else { k.n * m0 };
    let theta_t = lead - env.theta_t_load(k);
    let theta_x = c.lambda * k.n2 / 2.0
        - k.n1 * c.beta * c.beta / (2.0 * c.rho2)
        - n7e7 * (1.0 + gb * gb)
        - (u * env.g00 * env.g00 + env.c1(e4)) / (2.0 * e4)
        - k.n5 * c.rho2 / c.gamma * (c.delta * c.delta + 2.0 * gb * gb);
    let dcircle = c.beta * k.n / 2.0 - env.dcircle_load(k);
    let z_credit = if equal { k.n6 * env.cd / c.tau - n7e7 } else { k.n * m0 + env.cd / c.tau };
    let z_end = z_credit - env.z_load(k);
    let equivalence = k.n - env.equivalence_margin(k);
    Ok(vec![
        ("phi_t", phi_t),
        ("psi_t", psi_t),
        ("shear", shear),
        ("psi_x", psi_x),
        ("theta_t", theta_t),
        ("theta_x", theta_x),
        ("dcircle", dcircle),
        ("z_end", z_end),
        ("equivalence", equivalence),
    ])
}

/// Coefficient of `int (g o theta_x)` in the derivative estimate.
fn c2(env: &Env, k: &LyapunovConstants) -> f64 {
    let c = env.c;
    let (gb, e4, cp) = (env.gbar, k.eps4, env.cp);
    let common = 2.0 * c.rho2 * gb * k.n5 / c.gamma;
    let pre = c.beta * c.b * gb / (e4 * e4 * c.delta * c.delta);
    match k.case {
        DampingCase::Equal => {
            let mu2 = c.mu1 * c.mu1;
            let c2e7 = gb / (4.0 * k.eps7)
                * (c.delta * c.delta + c.gamma * c.gamma + 4.0 * k.eps7 * k.eps7 + 2.0 + c.mu2 * c.mu2 * cp)
                + c.mu1 * c.mu1 * cp * gb / (2.0 * k.eta2);
            k.n2 * gb / (2.0 * c.lambda) + c2e7 + pre * (4.0 * c.delta * e4 + 2.0 * c.beta * c.b * mu2) + common
        }
        _ => {
            k.n2 * gb / c.lambda
                + pre * (4.0 * c.delta * e4 + c.beta * c.b * (c.mu1 * c.mu1 + c.mu2 * c.mu2))
                + common
        }
    }
}

/// Largest energy weight, so that `E <= c_E (sum of squares) + (beta/2) int g o theta_x`.
fn energy_weight(c: &Coefficients) -> f64 {
    [
        c.gamma * c.rho1,
        c.gamma * c.rho2,
        c.gamma * c.k,
        c.gamma * c.b,
        c.beta * c.rho3,
        c.beta * c.delta,
        c.beta * c.xi,
    ]
    .into_iter()
    .fold(0.0, f64::max)
        / 2.0
}

/// Runs the selection recipe and verifies the braces.
///
/// `t0` only matters in the equal case, where `g0_cut = int_0^{t0} g` must be
/// positive.
pub fn select_constants(c: &Coefficients, kernel: &RelaxationKernel, t0: f64) -> Result<LyapunovConstants> {
    let case = c.case();
    if case == DampingCase::Exploratory {
        return Err(Error::OutsideTheorem { mu1: c.mu1, mu2: c.mu2 });
    }
    let env = Env::new(c, kernel)?;
    let (u, cp) = (env.ups, env.cp);
    let g0_cut = kernel.cumulative(t0);
    if case == DampingCase::Equal && !(g0_cut > 0.0) {
        return Err(Error::Input(format!(
            "equal damping needs int_0^t0 g > 0, got {g0_cut} at t0 = {t0}"
        )));
    }

    let eps4 = env.eps4();
    let n1 = LARGE * 2.0 / c.b * env.r41(eps4);
    let eps1 = c.rho1 * u / (16.0 * n1);
    let n5 = LARGE * 8.0 / (c.rho2 * c.gamma)
        * (n1 * (1.5 * c.rho2 + c.rho1 * c.rho1 * cp / (4.0 * eps1)) + c.gamma * c.rho2 * c.b / eps4 + 0.75 * c.rho2 * u);
    let eta1 = n5 * eps4 / u;
    let n2 = LARGE * 4.0 / c.lambda
        * (n1 * c.beta * c.beta / (2.0 * c.rho2)
            + (u * env.g00 * env.g00 + env.c1(eps4)) / (2.0 * eps4)
            + n5 * c.rho2 / c.gamma * (c.delta * c.delta + 2.0 * env.gbar * env.gbar));
    let eps2 = SMALL
        * (n1 * c.b / (2.0 * (n2 + n5 * (1.0 + cp + 2.0 * cp * cp)))).min(3.0 * c.k * u / (16.0 * n5 * cp));

    let mut k = LyapunovConstants {
        n: 0.0,
        n1,
        n2,
        n5,
        n6: 1.0,
        n7: 0.0,
        eps1,
        eps2,
        eps4,
        eps7: 0.0,
        eta1,
        eta2: 0.0,
        upsilon: u,
        cp,
        g0_cut,
        t0,
        case,
        c_delay: env.cd,
        big_c: 0.0,
        c3: 0.0,
        equivalence_margin: 0.0,
    };

    let mut thresholds = Vec::new();
    match case {
        DampingCase::Equal => {
            k.n6 = LARGE * 2.0 * c.tau / env.cd * env.z_load(&k);
            // N7 appears on the right only through N6 / tau
            k.n7 = LARGE * 2.0 / (c.rho3 * g0_cut) * (env.theta_t_load(&k) + 0.125);
            k.eta2 = 1.0 / (4.0 * k.n7);
            k.eps7 = SMALL
                * (k.n6 * env.cd / (2.0 * c.tau * k.n7))
                    .min(c.rho2 * c.gamma * n5 / (8.0 * k.n7))
                    .min(c.lambda * n2 / (4.0 * k.n7 * (1.0 + env.gbar * env.gbar)));
        }
        _ => {
            let m0 = c.m0();
            thresholds.push(env.theta_t_load(&k) / m0);
            thresholds.push((env.z_load(&k) - env.cd / c.tau) / m0);
        }
    }
    thresholds.push(2.0 / c.beta * env.dcircle_load(&k));
    let margin = env.equivalence_margin(&k);
    thresholds.push(margin);
    k.n = LARGE * thresholds.into_iter().fold(0.0, f64::max);
    k.equivalence_margin = margin;

    let values = braces(&k, c, kernel)?;
    for (name, v) in &values {
        let bad = if *name == "equivalence" { !(*v > 0.0) } else { !(*v >= 0.0) };
        if bad {
            return Err(Error::SelectionFailure {
                brace: (*name).to_string(),
                value: *v,
            });
        }
    }

    let z_rate = if case == DampingCase::Equal { 2.0 * k.n6 * env.cd } else { 2.0 * env.cd };
    let c1 = values[..6].iter().map(|(_, v)| *v).fold(z_rate, f64::min);
    k.big_c = c1 / energy_weight(c);
    k.c3 = c2(&env, &k) + k.big_c * c.beta / 2.0;
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{build_theorem_coeffs, TheoremInputs};
    use approx::assert_relative_eq;

    fn inputs(mu1: f64, mu2: f64) -> TheoremInputs {
        TheoremInputs {
            rho1: 1.0,
            rho2: 1.0,
            rho3: 1.0,
            k: 1.0,
            b: 2.0,
            delta: 2.0,
            mu1,
            mu2,
            tau: 0.5,
        }
    }

    fn kernel() -> RelaxationKernel {
        RelaxationKernel::exponential_with_zeta(1.0, 2.0, 2.0).unwrap()
    }

    #[test]
    fn upsilon_is_the_smaller_coupling() {
        let mut c = build_theorem_coeffs(&inputs(2.0, 1.0), &kernel()).unwrap();
        c.gamma = 1.0;
        c.beta = 2.0;
        assert_eq!(upsilon(&c), 1.0);
    }

    #[test]
    fn poincare_constant() {
        assert_relative_eq!(poincare(), 0.101321183642338, max_relative = 1e-12);
        // first Dirichlet eigenvalue oracle: Rayleigh quotient of sin(pi x)
        let q = crate::quadrature::CompositeGauss::for_wavenumber(8);
        let num = q.integrate(|x| (PI * x).sin().powi(2));
        let den = q.integrate(|x| (PI * (PI * x).cos()).powi(2));
        assert_relative_eq!(poincare(), num / den, max_relative = 1e-12);
    }

    #[test]
    fn strict_case_braces_nonnegative() {
        let c = build_theorem_coeffs(&inputs(2.0, 1.0), &kernel()).unwrap();
        let k = select_constants(&c, &kernel(), 0.0).unwrap();
        assert_eq!(k.case, DampingCase::Strict);
        for (name, v) in braces(&k, &c, &kernel()).unwrap() {
            assert!(v >= 0.0, "{name} = {v}");
        }
        assert!(k.big_c > 0.0 && k.c3 > 0.0);
        assert_relative_eq!(k.eta1, k.n5 * k.eps4 / k.upsilon, max_relative = 1e-15);
        assert!(k.eps1 <= c.rho1 * k.upsilon / (16.0 * k.n1) * (1.0 + 1e-15));
    }

    #[test]
    fn equal_case_braces_nonnegative() {
        let c = build_theorem_coeffs(&inputs(1.0, 1.0), &kernel()).unwrap();
        assert!(select_constants(&c, &kernel(), 0.0).is_err());
        let k = select_constants(&c, &kernel(), 1.0).unwrap();
        assert_eq!(k.case, DampingCase::Equal);
        assert_relative_eq!(k.eta2, 1.0 / (4.0 * k.n7), max_relative = 1e-15);
        for (name, v) in braces(&k, &c, &kernel()).unwrap() {
            assert!(v >= 0.0, "{name} = {v}");
        }
    }

    #[test]
    fn shrinking_n_breaks_a_brace() {
        let c = build_theorem_coeffs(&inputs(2.0, 1.0), &kernel()).unwrap();
        let mut k = select_constants(&c, &kernel(), 0.0).unwrap();
        k.n *= 0.5;
        assert!(braces(&k, &c, &kernel()).unwrap().iter().any(|(_, v)| *v < 0.0));
    }

    #[test]
    fn zero_memory_kernel_is_accepted_in_strict_case() {
        let k0 = RelaxationKernel::none();
        let c = build_theorem_coeffs(&inputs(2.0, 0.0), &k0).unwrap();
        assert!(select_constants(&c, &k0, 0.0).is_ok());
    }
}
