//! Single runs: trace, functional columns, constants and fits.

use std::path::Path;

use serde::Serialize;

use super::config::LoadedConfig;
use super::output::{write_json, write_trace_csv};
use crate::coefficients::DampingCase;
use crate::error::Result;
use crate::functionals::{
    equivalence_estimate, fit_decay, functional_trace, select_constants, DecayFit, Equivalence, FunctionalTrace,
    LyapunovConstants,
};
use crate::integrator::run;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub digest: String,
    pub case: DampingCase,
    pub lambda: f64,
    pub xi: f64,
    pub m0: f64,
    pub constants: Option<LyapunovConstants>,
    pub fit: Option<DecayFit>,
    pub equivalence: Option<Equivalence>,
    pub monotone_violations: usize,
    pub max_balance_residual: f64,
    pub min_bound_slack: f64,
    /// Last recorded time; short of `t_end` when the run failed.
    pub t_last: f64,
    pub failure: Option<String>,
    /// Reasons a summary entry is missing.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub summary: Summary,
    pub functionals: FunctionalTrace,
}

/// Runs the configured simulation and evaluates every functional. Constant
/// selection and fitting failures are recorded as notes, not errors.
pub fn simulate(cfg: &LoadedConfig) -> Result<SimulateOutcome> {
    let system = cfg.system();
    let trace = run(&cfg.sim, &system, &cfg.initial)?;
    let mut notes = Vec::new();
    let constants = if cfg.theorem_mode() {
        select_constants(&cfg.coeffs, &cfg.kernel, cfg.experiment.lyapunov_t0)
            .map_err(|e| notes.push(format!("constants: {e}")))
            .ok()
    } else {
        notes.push("constants: exploratory run".into());
        None
    };
    let ft = functional_trace(&trace, &system, constants.as_ref())?;
    let fit = fit_decay(&ft.times(), &ft.energies(), &cfg.kernel, cfg.fit_t0())
        .map_err(|e| notes.push(format!("fit: {e}")))
        .ok();
    let equivalence = match constants {
        Some(_) => equivalence_estimate(&ft.lyapunov(), &ft.energies())
            .map_err(|e| notes.push(format!("equivalence: {e}")))
            .ok(),
        None => None,
    };
    let summary = Summary {
        digest: cfg.digest.clone(),
        case: cfg.coeffs.case(),
        lambda: cfg.coeffs.lambda,
        xi: cfg.coeffs.xi,
        m0: cfg.coeffs.m0(),
        constants,
        fit,
        equivalence,
        monotone_violations: ft.monotone_violations(cfg.experiment.monotone_rel),
        max_balance_residual: ft.max_balance_residual(),
        min_bound_slack: ft.min_bound_slack(),
        t_last: ft.rows.last().map_or(0.0, |r| r.t),
        failure: trace.failure.as_ref().map(|e| e.to_string()),
        notes,
    };
    Ok(SimulateOutcome { summary, functionals: ft })
}

/// Writes `trace.csv` and `summary.json` into `dir`; returns their names.
pub fn write_outcome(out: &SimulateOutcome, dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    write_trace_csv(&dir.join("trace.csv"), &out.summary.digest, &out.functionals)?;
    write_json(&dir.join("summary.json"), &out.summary)?;
    Ok(vec!["trace.csv".into(), "summary.json".into()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{parse_config, resolve, tests::MINIMAL};

    #[test]
    fn short_run_summary() {
        let cfg = resolve(parse_config(MINIMAL).unwrap(), Path::new(".")).unwrap();
        let out = simulate(&cfg).unwrap();
        let s = &out.summary;
        assert_eq!(s.monotone_violations, 0);
        assert!(s.constants.is_some(), "{:?}", s.notes);
        assert!(s.fit.unwrap().omega > 0.0);
        assert!(s.equivalence.unwrap().m_hat > 0.0);
        assert_eq!(out.functionals.rows.len(), 11);
        assert!(s.failure.is_none());
    }
}
