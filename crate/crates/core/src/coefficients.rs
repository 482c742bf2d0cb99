//! Physical constants, the structural conditions of the decay theorem and the
//! choice of the delay-energy weight `xi`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::RelaxationKernel;

const REL_TOL: f64 = 1e-12;

/// Which of the two damping regimes the coefficients fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampingCase {
    /// `mu2 < mu1`: exponential decay with an explicit rate.
    Strict,
    /// `mu2 = mu1`: decay governed by `zeta`.
    Equal,
    /// `mu2 > mu1`: outside the theorem; simulation only.
    Exploratory,
}

/// Inputs from which the builder derives `gamma`, `beta`, `xi` and `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremInputs {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub b: f64,
    pub delta: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub b: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub tau: f64,
    pub xi: f64,
    pub lambda: f64,
    /// Set when `mu2 > mu1` was accepted outside the theorem.
    #[serde(default)]
    pub exploratory: bool,
}

/// Midpoint of `(tau mu2, tau (2 mu1 - mu2))`, which is `tau mu1`, or
/// `tau mu2` in the equal case.
pub fn select_xi(mu1: f64, mu2: f64, tau: f64) -> Result<f64> {
    positive("mu1", mu1)?;
    nonnegative("mu2", mu2)?;
    positive("tau", tau)?;
    match classify(mu1, mu2) {
        DampingCase::Strict => Ok(tau * mu1),
        DampingCase::Equal => Ok(tau * mu2),
        DampingCase::Exploratory => Err(Error::OutsideTheorem { mu1, mu2 }),
    }
}

fn classify(mu1: f64, mu2: f64) -> DampingCase {
    if (mu1 - mu2).abs() <= REL_TOL * mu1.abs().max(mu2.abs()) {
        DampingCase::Equal
    } else if mu2 < mu1 {
        DampingCase::Strict
    } else {
        DampingCase::Exploratory
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidCoefficient {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

fn nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidCoefficient {
            name,
            reason: format!("must be nonnegative and finite, got {v}"),
        })
    }
}

fn kernel_lambda(delta: f64, kernel: &RelaxationKernel) -> Result<f64> {
    match kernel.gbar() {
        Ok(m) => Ok(delta - m),
        Err(Error::InfiniteMass) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// Builds coefficients satisfying the structural conditions by deriving
/// `gamma = b rho1/K - rho2` and `beta = delta - K rho3/rho1`.
pub fn build_theorem_coeffs(inputs: &TheoremInputs, kernel: &RelaxationKernel) -> Result<Coefficients> {
    build(inputs, kernel, false)
}

/// As [`build_theorem_coeffs`] but accepts `mu2 > mu1`, setting
/// `xi = tau mu2` and flagging the result.
pub fn build_exploratory(inputs: &TheoremInputs, kernel: &RelaxationKernel) -> Result<Coefficients> {
    build(inputs, kernel, true)
}

fn build(i: &TheoremInputs, kernel: &RelaxationKernel, allow_exploratory: bool) -> Result<Coefficients> {
    for (name, v) in [
        ("rho1", i.rho1),
        ("rho2", i.rho2),
        ("rho3", i.rho3),
        ("K", i.k),
        ("b", i.b),
        ("delta", i.delta),
        ("mu1", i.mu1),
        ("tau", i.tau),
    ] {
        positive(name, v)?;
    }
    nonnegative("mu2", i.mu2)?;
    let gamma = i.b * i.rho1 / i.k - i.rho2;
    let beta = i.delta - i.k * i.rho3 / i.rho1;
    if !(gamma > 0.0) {
        return Err(Error::Structural(format!("gamma = b rho1/K - rho2 = {gamma} must be positive")));
    }
    if !(beta > 0.0) {
        return Err(Error::Structural(format!("beta = delta - K rho3/rho1 = {beta} must be positive")));
    }
    let lambda = kernel_lambda(i.delta, kernel)?;
    if !(lambda > 0.0) {
        return Err(Error::H1Violation { lambda });
    }
    let (xi, exploratory) = match select_xi(i.mu1, i.mu2, i.tau) {
        Ok(xi) => (xi, false),
        Err(Error::OutsideTheorem { .. }) if allow_exploratory => (i.tau * i.mu2, true),
        Err(e) => return Err(e),
    };
    Ok(Coefficients {
        rho1: i.rho1,
        rho2: i.rho2,
        rho3: i.rho3,
        k: i.k,
        b: i.b,
        beta,
        gamma,
        delta: i.delta,
        mu1: i.mu1,
        mu2: i.mu2,
        tau: i.tau,
        xi,
        lambda,
        exploratory,
    })
}

impl Coefficients {
    pub fn case(&self) -> DampingCase {
        classify(self.mu1, self.mu2)
    }

    /// Re-checks every invariant. With `theorem_mode` the structural relations
    /// must hold to relative `1e-12` and `xi` must lie in its admissible set.
    pub fn validate(&self, kernel: &RelaxationKernel, theorem_mode: bool) -> Result<()> {
        for (name, v) in [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho3", self.rho3),
            ("K", self.k),
            ("b", self.b),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("mu1", self.mu1),
            ("tau", self.tau),
            ("xi", self.xi),
        ] {
            positive(name, v)?;
        }
        nonnegative("mu2", self.mu2)?;
        let lambda = kernel_lambda(self.delta, kernel)?;
        if !close(lambda, self.lambda) {
            return Err(Error::InvalidCoefficient {
                name: "lambda",
                reason: format!("expected delta - gbar = {lambda}, got {}", self.lambda),
            });
        }
        if !theorem_mode {
            return Ok(());
        }
        let gamma = self.b * self.rho1 / self.k - self.rho2;
        let beta = self.delta - self.k * self.rho3 / self.rho1;
        if !close(gamma, self.gamma) || !close(beta, self.beta) {
            return Err(Error::Structural(format!(
                "expected gamma = {gamma}, beta = {beta}; got {}, {}",
                self.gamma, self.beta
            )));
        }
        if !(lambda > 0.0) {
            return Err(Error::H1Violation { lambda });
        }
        let (lo, hi) = (self.tau * self.mu2, self.tau * (2.0 * self.mu1 - self.mu2));
        match self.case() {
            DampingCase::Exploratory => Err(Error::OutsideTheorem {
                mu1: self.mu1,
                mu2: self.mu2,
            }),
            DampingCase::Equal if !close(self.xi, lo) => Err(Error::InvalidCoefficient {
                name: "xi",
                reason: format!("equal damping requires xi = tau mu2 = {lo}"),
            }),
            DampingCase::Strict if !(self.xi > lo && self.xi < hi) => Err(Error::InvalidCoefficient {
                name: "xi",
                reason: format!("xi must lie in ({lo}, {hi})"),
            }),
            _ => Ok(()),
        }
    }

    /// `beta (mu1 - xi/(2 tau) - mu2/2)`, the coefficient of `||theta_t||^2`.
    pub fn theta_t_dissipation(&self) -> f64 {
        self.beta * (self.mu1 - self.xi / (2.0 * self.tau) - self.mu2 / 2.0)
    }

    /// `beta (xi/(2 tau) - mu2/2)`, the coefficient of `||z(1)||^2`.
    pub fn delay_dissipation(&self) -> f64 {
        self.beta * (self.xi / (2.0 * self.tau) - self.mu2 / 2.0)
    }

    pub fn m0(&self) -> f64 {
        m0(self)
    }

    pub fn inputs(&self) -> TheoremInputs {
        TheoremInputs {
            rho1: self.rho1,
            rho2: self.rho2,
            rho3: self.rho3,
            k: self.k,
            b: self.b,
            delta: self.delta,
            mu1: self.mu1,
            mu2: self.mu2,
            tau: self.tau,
        }
    }
}

/// `min{beta(mu1 - xi/2tau - mu2/2), beta(xi/2tau - mu2/2)}`.
pub fn m0(c: &Coefficients) -> f64 {
    c.theta_t_dissipation().min(c.delay_dissipation())
}

fn close(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_inputs(mu1: f64, mu2: f64) -> TheoremInputs {
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
        RelaxationKernel::exponential(1.0, 2.0).unwrap()
    }

    #[test]
    fn xi_midpoint_and_equal() {
        assert_eq!(select_xi(2.0, 1.0, 0.5).unwrap(), 1.0);
        assert_eq!(select_xi(1.0, 1.0, 0.5).unwrap(), 0.5);
        assert!(matches!(select_xi(1.0, 2.0, 0.5), Err(Error::OutsideTheorem { .. })));
    }

    #[test]
    fn builder_derives_structure() {
        let c = build_theorem_coeffs(&unit_inputs(2.0, 1.0), &kernel()).unwrap();
        assert_eq!(c.gamma, 1.0);
        assert_eq!(c.beta, 1.0);
        assert_abs_diff_eq!(c.lambda, 1.5, epsilon = 1e-15);
        assert_eq!(c.xi, 1.0);
        assert_eq!(c.theta_t_dissipation(), 0.5);
        assert_eq!(c.delay_dissipation(), 0.5);
        assert_eq!(m0(&c), 0.5);
        assert_eq!(c.case(), DampingCase::Strict);
    }

    #[test]
    fn builder_rejects_degenerate_gamma() {
        let mut i = unit_inputs(2.0, 1.0);
        i.b = 1.0;
        assert!(matches!(build_theorem_coeffs(&i, &kernel()), Err(Error::Structural(_))));
    }

    #[test]
    fn builder_rejects_h1_failure() {
        let mut i = unit_inputs(2.0, 1.0);
        i.delta = 1.2;
        i.rho3 = 0.1;
        let k = RelaxationKernel::exponential(3.0, 2.0).unwrap();
        assert!(matches!(build_theorem_coeffs(&i, &k), Err(Error::H1Violation { .. })));
        let p = RelaxationKernel::power(1.0, 0.5).unwrap();
        assert!(matches!(build_theorem_coeffs(&i, &p), Err(Error::H1Violation { .. })));
    }

    #[test]
    fn equal_case_has_zero_m0() {
        let c = build_theorem_coeffs(&unit_inputs(1.0, 1.0), &kernel()).unwrap();
        assert_eq!(c.case(), DampingCase::Equal);
        assert_eq!(m0(&c), 0.0);
    }

    #[test]
    fn m0_linear_in_beta() {
        let mut i = unit_inputs(2.0, 1.0);
        i.delta = 3.0;
        let c = build_theorem_coeffs(&i, &kernel()).unwrap();
        assert_eq!(c.beta, 2.0);
        assert_eq!(m0(&c), 1.0);
    }

    #[test]
    fn exploratory_mode_flags() {
        let i = unit_inputs(1.0, 2.0);
        assert!(build_theorem_coeffs(&i, &kernel()).is_err());
        let c = build_exploratory(&i, &kernel()).unwrap();
        assert!(c.exploratory);
        assert_eq!(c.xi, 1.0);
        assert!(c.validate(&kernel(), false).is_ok());
        assert!(c.validate(&kernel(), true).is_err());
    }

    #[test]
    fn mu2_zero_allowed() {
        let c = build_theorem_coeffs(&unit_inputs(1.0, 0.0), &kernel()).unwrap();
        assert_eq!(c.xi, 0.5);
        assert!(c.validate(&kernel(), true).is_ok());
    }

    proptest! {
        #[test]
        fn xi_satisfies_dissipation_conditions(mu1 in 0.01f64..10.0, frac in 0.0f64..=1.0, tau in 0.01f64..5.0) {
            let mu2 = mu1 * frac;
            let xi = select_xi(mu1, mu2, tau).unwrap();
            prop_assert!(mu1 - xi / (2.0 * tau) - mu2 / 2.0 >= -1e-12 * mu1);
            prop_assert!(xi / (2.0 * tau) - mu2 / 2.0 >= -1e-12 * mu1);
        }

        #[test]
        fn builder_is_idempotent(
            rho1 in 0.2f64..3.0, rho2 in 0.2f64..3.0, rho3 in 0.2f64..3.0, k in 0.2f64..3.0,
            mu1 in 0.1f64..3.0, frac in 0.0f64..=1.0, tau in 0.05f64..2.0,
        ) {
            let b = (rho2 + 1.0) * k / rho1;
            let delta = k * rho3 / rho1 + 1.0;
            let i = TheoremInputs { rho1, rho2, rho3, k, b, delta, mu1, mu2: mu1 * frac, tau };
            let kern = RelaxationKernel::exponential(0.5, 1.0).unwrap();
            let c = build_theorem_coeffs(&i, &kern).unwrap();
            prop_assert!(c.validate(&kern, true).is_ok());
            let again = build_theorem_coeffs(&c.inputs(), &kern).unwrap();
            prop_assert_eq!(c, again);
        }
    }
}
