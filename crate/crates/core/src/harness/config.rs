//! The JSON run configuration and its validation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coefficients::{build_exploratory, build_theorem_coeffs, Coefficients, DampingCase, TheoremInputs};
use crate::discretization::initial::sampled_profile;
use crate::discretization::{GalerkinSystem, InitialData};
use crate::error::{Error, Result};
use crate::integrator::{probe_stability, SimConfig};
use crate::kernels::{check_hypotheses, RelaxationKernel, TabulatedMass};

/// Raw configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem_inputs: Option<TheoremInputs>,
    /// Accept `mu2 > mu1` for simulation only.
    #[serde(default)]
    pub exploratory: bool,
    pub kernel: KernelSpec,
    pub sim: SimConfig,
    pub initial: InitialSpec,
    #[serde(default)]
    pub experiment: ExperimentSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    None,
    Exponential {
        g0: f64,
        rate: f64,
        #[serde(default)]
        zeta_rate: Option<f64>,
    },
    PowerZeta {
        g0: f64,
        rate: f64,
        #[serde(default)]
        zeta_rate: Option<f64>,
    },
    /// Two-column CSV `t,g`, path relative to the config file.
    Tabulated {
        csv: PathBuf,
        #[serde(default)]
        gbar: Option<f64>,
        #[serde(default)]
        infinite_mass: bool,
        zeta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    SineBump {
        amplitude: f64,
        #[serde(default = "one")]
        mode: usize,
    },
    PolyBump {
        amplitude: f64,
    },
    ModePair {
        amplitude: f64,
        phi_mode: usize,
        psi_mode: usize,
    },
    /// Seeded by `sim.seed`.
    RandomModes {
        amplitude: f64,
        modes: usize,
    },
    /// CSV with columns `x,phi0,phi1,psi0,psi1,theta0,theta1` on a uniform
    /// grid of `[0, 1]`; the delay history repeats `theta1`.
    Sampled {
        csv: PathBuf,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Simulate,
    Refine,
    Sweep,
    VerifyKernels,
}

fn default_monotone_rel() -> f64 {
    1e-6
}

fn default_lyapunov_t0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub kind: ExperimentKind,
    /// Start of the decay-fit window; defaults to a tenth of `t_end`.
    #[serde(default)]
    pub fit_t0: Option<f64>,
    /// `t0` handed to the constant selection.
    #[serde(default = "default_lyapunov_t0")]
    pub lyapunov_t0: f64,
    /// Per-step growth allowed before counting a violation, relative to `E(0)`.
    #[serde(default = "default_monotone_rel")]
    pub monotone_rel: f64,
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub param: Option<String>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub trials: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Simulate,
            fit_t0: None,
            lyapunov_t0: default_lyapunov_t0(),
            monotone_rel: default_monotone_rel(),
            levels: None,
            param: None,
            values: None,
            trials: None,
        }
    }
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            ok,
            detail: detail.into(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.ok { "ok" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// A validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub raw: RunConfig,
    /// Canonical JSON (sorted keys) the digest is computed over.
    pub canonical: String,
    pub digest: String,
    pub coeffs: Coefficients,
    pub kernel: RelaxationKernel,
    pub sim: SimConfig,
    pub initial: InitialData,
    pub experiment: ExperimentSpec,
    pub report: ValidationReport,
    /// Directory relative paths in the config resolve against.
    pub base: PathBuf,
}

impl LoadedConfig {
    pub fn fit_t0(&self) -> f64 {
        self.experiment.fit_t0.unwrap_or(0.1 * self.sim.t_end)
    }

    pub fn system(&self) -> GalerkinSystem {
        GalerkinSystem::new(self.coeffs, self.kernel.clone(), self.sim.n)
    }

    pub fn theorem_mode(&self) -> bool {
        !self.coeffs.exploratory && self.coeffs.case() != DampingCase::Exploratory
    }
}

/// Parses a JSON document, reporting the offending field path on schema errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config(format!("at `{}`: {}", e.path(), e.inner())))
}

/// Reads, parses and validates the config at `path`.
pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let raw = parse_config(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    resolve(raw, &base)
}

/// Canonical form: serde_json maps keep keys sorted.
pub fn canonical_json(raw: &RunConfig) -> Result<String> {
    let v: Value = serde_json::to_value(raw)?;
    Ok(serde_json::to_string(&v)?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs every validator on a parsed config. The first hard failure is
/// returned as an error; otherwise the report lists each check.
pub fn resolve(raw: RunConfig, base: &Path) -> Result<LoadedConfig> {
    let mut report = ValidationReport::default();
    let kernel = build_kernel(&raw.kernel, base)?;
    report.push("kernel", true, format!("{}", kernel.echo()));

    let coeffs = match (&raw.coefficients, &raw.theorem_inputs) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("give either `coefficients` or `theorem_inputs`, not both".into()))
        }
        (None, None) => return Err(Error::Config("missing `coefficients` or `theorem_inputs`".into())),
        (None, Some(inp)) if raw.exploratory => build_exploratory(inp, &kernel)?,
        (None, Some(inp)) => build_theorem_coeffs(inp, &kernel)?,
        (Some(c), None) => {
            c.validate(&kernel, !raw.exploratory)?;
            *c
        }
    };
    report.push(
        "coefficients",
        true,
        format!("case {:?}, lambda {}, xi {}", coeffs.case(), coeffs.lambda, coeffs.xi),
    );

    let horizon = raw.sim.t_end.max(1.0);
    let grid: Vec<f64> = (0..=200).map(|i| horizon * i as f64 / 200.0).collect();
    if !kernel.is_zero() {
        let h = check_hypotheses(&kernel, coeffs.delta, &grid)?;
        report.push("H1", h.h1_ok, format!("lambda = {:e}", h.lambda));
        report.push("H2", h.h2_ok, format!("max g' + zeta g = {:e}", h.worst_h2_slack));
    }

    raw.sim.validate(coeffs.tau)?;
    report.push("sim", true, format!("tau/dt integral, {} steps", raw.sim.steps()));
    let system = GalerkinSystem::new(coeffs, kernel.clone(), raw.sim.n);
    probe_stability(&system, raw.sim.dt)?;
    report.push("stability", true, format!("dt = {} inside the RK4 region", raw.sim.dt));

    let initial = build_initial(&raw.initial, raw.sim.seed, base)?;
    report.push("initial", true, serde_json::to_string(&raw.initial)?);

    let canonical = canonical_json(&raw)?;
    let digest = sha256_hex(canonical.as_bytes());
    Ok(LoadedConfig {
        experiment: raw.experiment.clone(),
        sim: raw.sim.clone(),
        raw,
        canonical,
        digest,
        coeffs,
        kernel,
        initial,
        report,
        base: base.to_path_buf(),
    })
}

pub fn build_kernel(spec: &KernelSpec, base: &Path) -> Result<RelaxationKernel> {
    match spec {
        KernelSpec::None => Ok(RelaxationKernel::none()),
        KernelSpec::Exponential { g0, rate, zeta_rate } => {
            RelaxationKernel::exponential_with_zeta(*g0, *rate, zeta_rate.unwrap_or(*rate))
        }
        KernelSpec::PowerZeta { g0, rate, zeta_rate } => {
            RelaxationKernel::power_with_zeta(*g0, *rate, zeta_rate.unwrap_or(*rate))
        }
        KernelSpec::Tabulated {
            csv,
            gbar,
            infinite_mass,
            zeta,
        } => {
            let cols = read_columns(&base.join(csv), 2)?;
            let mass = match (gbar, infinite_mass) {
                (Some(_), true) => {
                    return Err(Error::Config("tabulated kernel: `gbar` and `infinite_mass` conflict".into()))
                }
                (Some(m), false) => TabulatedMass::Finite(*m),
                (None, true) => TabulatedMass::Infinite,
                (None, false) => TabulatedMass::Unknown,
            };
            RelaxationKernel::tabulated(cols[0].clone(), cols[1].clone(), mass, *zeta)
        }
    }
}

pub fn build_initial(spec: &InitialSpec, seed: u64, base: &Path) -> Result<InitialData> {
    let amp = |a: f64| {
        if a.is_finite() {
            Ok(a)
        } else {
            Err(Error::Input(format!("amplitude must be finite, got {a}")))
        }
    };
    Ok(match spec {
        InitialSpec::Zero => InitialData::zero(),
        InitialSpec::SineBump { amplitude, mode } => InitialData::sine_bump(amp(*amplitude)?, *mode),
        InitialSpec::PolyBump { amplitude } => InitialData::poly_bump(amp(*amplitude)?),
        InitialSpec::ModePair {
            amplitude,
            phi_mode,
            psi_mode,
        } => InitialData::mode_pair(amp(*amplitude)?, *phi_mode, *psi_mode),
        InitialSpec::RandomModes { amplitude, modes } => InitialData::random_modes(amp(*amplitude)?, *modes, seed),
        InitialSpec::Sampled { csv } => {
            let cols = read_columns(&base.join(csv), 7)?;
            let m = cols[0].len() - 1;
            for (i, x) in cols[0].iter().enumerate() {
                if (x - i as f64 / m as f64).abs() > 1e-9 {
                    return Err(Error::Input("sampled initial data needs a uniform x grid on [0, 1]".into()));
                }
            }
            let p = |i: usize| sampled_profile(cols[i].clone());
            let theta1 = p(6)?;
            let history = theta1.clone();
            InitialData {
                phi0: p(1)?,
                phi1: p(2)?,
                psi0: p(3)?,
                psi1: p(4)?,
                theta0: p(5)?,
                theta1,
                f0: Arc::new(move |x, _| history(x)),
            }
        }
    })
}

/// Reads a headed numeric CSV and returns its first `want` columns.
pub fn read_columns(path: &Path, want: usize) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cols = vec![Vec::new(); want];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < want {
            return Err(Error::Input(format!(
                "{}: row {} has {} columns, need {want}",
                path.display(),
                line + 2,
                rec.len()
            )));
        }
        for (j, col) in cols.iter_mut().enumerate() {
            let v: f64 = rec[j]
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("{}: row {} column {}: not a number", path.display(), line + 2, j + 1)))?;
            col.push(v);
        }
    }
    if cols[0].len() < 2 {
        return Err(Error::Arity {
            needed: 2,
            got: cols[0].len(),
        });
    }
    Ok(cols)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"{
        "theorem_inputs": {"rho1": 1, "rho2": 1, "rho3": 1, "K": 1, "b": 2, "delta": 2, "mu1": 2, "mu2": 1, "tau": 0.5},
        "kernel": {"family": "exponential", "g0": 1, "rate": 2},
        "sim": {"n": 4, "dt": 0.01, "t_end": 1},
        "initial": {"preset": "sine-bump", "amplitude": 1}
    }"#;

    fn patched(f: impl FnOnce(&mut Value)) -> String {
        let mut v: Value = serde_json::from_str(MINIMAL).unwrap();
        f(&mut v);
        v.to_string()
    }

    fn load(text: &str) -> Result<LoadedConfig> {
        resolve(parse_config(text)?, Path::new("."))
    }

    #[test]
    fn minimal_config_passes() {
        let c = load(MINIMAL).unwrap();
        assert!(c.report.all_pass(), "{}", c.report);
        assert_eq!(c.coeffs.gamma, 1.0);
        assert_eq!(c.coeffs.lambda, 1.5);
        assert_eq!(c.digest.len(), 64);
        assert!(c.theorem_mode());
    }

    #[test]
    fn digest_ignores_formatting_and_key_order() {
        let a = load(MINIMAL).unwrap();
        let b = load(&patched(|_| {})).unwrap();
        assert_eq!(a.digest, b.digest);
        let c = load(&patched(|v| v["sim"]["t_end"] = 2.into())).unwrap();
        assert_ne!(a.digest, c.digest);
    }

    #[test]
    fn delay_over_friction_rejected() {
        let text = patched(|v| v["theorem_inputs"]["mu2"] = 3.into());
        assert!(matches!(load(&text), Err(Error::OutsideTheorem { .. })));
        let text = patched(|v| {
            v["theorem_inputs"]["mu2"] = 3.into();
            v["exploratory"] = true.into();
        });
        assert!(load(&text).unwrap().coeffs.exploratory);
    }

    #[test]
    fn fractional_delay_suggests_dt() {
        let text = patched(|v| v["sim"]["dt"] = 0.03.into());
        match load(&text) {
            Err(Error::StepSize(m)) => assert!(m.contains("try dt")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        let text = patched(|v| v["sim"]["n"] = "four".into());
        match load(&text) {
            Err(Error::Config(m)) => assert!(m.contains("sim.n"), "{m}"),
            other => panic!("{other:?}"),
        }
        let text = patched(|v| v["kernel"]["family"] = "gaussian".into());
        assert!(matches!(load(&text), Err(Error::Config(_))));
    }

    #[test]
    fn sampled_initial_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = String::from("x,phi0,phi1,psi0,psi1,theta0,theta1\n");
        for i in 0..=4 {
            let x = i as f64 / 4.0;
            s += &format!("{x},{},0,0,0,0,0\n", x * (1.0 - x));
        }
        std::fs::write(dir.path().join("init.csv"), s).unwrap();
        let d = build_initial(&InitialSpec::Sampled { csv: "init.csv".into() }, 0, dir.path()).unwrap();
        assert!(((d.phi0)(0.5) - 0.25).abs() < 1e-15);
        assert!(((d.phi0)(0.125) - 0.09375).abs() < 1e-15);
    }
}
