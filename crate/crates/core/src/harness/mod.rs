//! Configuration loading, experiment orchestration and output files.
//!
//! Every run is keyed by the SHA-256 of its canonical configuration. Output
//! files carry that digest and a `manifest.json` listing them is written last.

pub mod config;
pub mod output;
pub mod simulate;
pub mod study;
pub mod verify;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{load_config, parse_config, resolve, ExperimentKind, ExperimentSpec, LoadedConfig, RunConfig, ValidationReport};
pub use simulate::{simulate, SimulateOutcome, Summary};
pub use study::{refine, sweep, with_param, RefineReport, SweepCell};
pub use verify::{verify_kernels, KernelSuiteReport};

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::functionals::{fit_decay, DecayFit};
use crate::kernels::RelaxationKernel;
use output::{read_trace_energy, write_json, write_table};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub digest: String,
    pub code_version: String,
    pub experiment: ExperimentKind,
    pub coefficients: Coefficients,
    pub kernel: serde_json::Value,
    pub validation: ValidationReport,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
}

/// Command-line overrides of the experiment block.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kind: Option<ExperimentKind>,
    pub levels: Option<usize>,
    pub param: Option<String>,
    pub values: Option<Vec<f64>>,
}

/// Runs the experiment named by the config (or the overrides), writes its
/// files into `out` and the manifest last.
pub fn run_experiment(cfg: &LoadedConfig, over: &Overrides, out: &Path) -> Result<RunManifest> {
    std::fs::create_dir_all(out)?;
    let spec = &cfg.experiment;
    let kind = over.kind.unwrap_or(spec.kind);
    let outputs = match kind {
        ExperimentKind::Simulate => simulate::write_outcome(&simulate(cfg)?, out)?,
        ExperimentKind::Refine => {
            let levels = over.levels.or(spec.levels).unwrap_or(3);
            let report = refine(cfg, levels)?;
            let rows: Vec<Vec<String>> = report.rows.iter().map(|r| r.record()).collect();
            write_table(&out.join("refine.csv"), &cfg.digest, &study::RefineRow::HEADER, &rows)?;
            write_json(&out.join("refine.json"), &report)?;
            vec!["refine.csv".into(), "refine.json".into()]
        }
        ExperimentKind::Sweep => {
            let param = over
                .param
                .clone()
                .or_else(|| spec.param.clone())
                .ok_or_else(|| Error::Config("sweep needs a parameter name".into()))?;
            let values = over
                .values
                .clone()
                .or_else(|| spec.values.clone())
                .ok_or_else(|| Error::Config("sweep needs values".into()))?;
            let cells = sweep(cfg, &param, &values, Some(out))?;
            let rows: Vec<Vec<String>> = cells.iter().map(|c| c.record()).collect();
            write_table(&out.join("sweep.csv"), &cfg.digest, &SweepCell::HEADER, &rows)?;
            let mut files: Vec<String> = cells
                .iter()
                .enumerate()
                .flat_map(|(i, c)| {
                    let names: &[&str] = if c.summary.is_some() {
                        &["trace.csv", "summary.json"]
                    } else {
                        &["error.json"]
                    };
                    names.iter().map(move |n| format!("cell-{i}/{n}"))
                })
                .collect();
            files.push("sweep.csv".into());
            files
        }
        ExperimentKind::VerifyKernels => {
            let report = verify_kernels(cfg.sim.seed, spec.trials.unwrap_or(100))?;
            write_json(&out.join("verify-kernels.json"), &report)?;
            vec!["verify-kernels.json".into()]
        }
    };
    let manifest = RunManifest {
        digest: cfg.digest.clone(),
        code_version: CODE_VERSION.into(),
        experiment: kind,
        coefficients: cfg.coeffs,
        kernel: cfg.kernel.echo(),
        validation: cfg.report.clone(),
        outputs,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Fits a trace CSV. Without a kernel the regressor is `t - t0`.
pub fn fit_trace_file(path: &Path, t0: f64, kernel: Option<&RelaxationKernel>) -> Result<DecayFit> {
    let (t, e) = read_trace_energy(path)?;
    let unit = RelaxationKernel::exponential_with_zeta(1.0, 1.0, 1.0)?;
    fit_decay(&t, &e, kernel.unwrap_or(&unit), t0)
}

/// Default output directory for a config: `runs/<first 12 digest chars>`.
pub fn default_out_dir(cfg: &LoadedConfig) -> PathBuf {
    PathBuf::from("runs").join(&cfg.digest[..12])
}

#[cfg(test)]
mod tests {
    use super::*;
    use config::tests::MINIMAL;

    fn cfg() -> LoadedConfig {
        resolve(parse_config(MINIMAL).unwrap(), Path::new(".")).unwrap()
    }

    fn read_all(dir: &Path, m: &RunManifest) -> Vec<Vec<u8>> {
        let mut v: Vec<Vec<u8>> = m.outputs.iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect();
        v.push(std::fs::read(dir.join("manifest.json")).unwrap());
        v
    }

    #[test]
    fn simulate_files_are_byte_identical() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let c = cfg();
        let ma = run_experiment(&c, &Overrides::default(), a.path()).unwrap();
        let mb = run_experiment(&c, &Overrides::default(), b.path()).unwrap();
        assert_eq!(ma, mb);
        assert_eq!(read_all(a.path(), &ma), read_all(b.path(), &mb));
        let csv = String::from_utf8(std::fs::read(a.path().join("trace.csv")).unwrap()).unwrap();
        assert!(csv.starts_with(&format!("# digest {}\nt,E,dEdt,", c.digest)));
        let fit = fit_trace_file(&a.path().join("trace.csv"), c.fit_t0(), Some(&c.kernel)).unwrap();
        let summary: serde_json::Value =
            serde_json::from_slice(&std::fs::read(a.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["fit"]["omega"].as_f64().unwrap(), fit.omega);
    }

    #[test]
    fn sweep_writes_per_cell_files() {
        let d = tempfile::tempdir().unwrap();
        let over = Overrides {
            kind: Some(ExperimentKind::Sweep),
            param: Some("mu2".into()),
            values: Some(vec![0.0, 9.0]),
            ..Default::default()
        };
        let m = run_experiment(&cfg(), &over, d.path()).unwrap();
        assert_eq!(m.outputs, ["cell-0/trace.csv", "cell-0/summary.json", "cell-1/error.json", "sweep.csv"]);
        for f in &m.outputs {
            assert!(d.path().join(f).exists());
        }
    }
}
