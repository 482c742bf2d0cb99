//! Refinement ladders and parameter sweeps.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::config::{resolve, LoadedConfig, RunConfig};
use super::output::{fmt_f64, write_json};
use super::simulate::{simulate, write_outcome, Summary};
use crate::error::{Error, Result};
use crate::functionals::fit_decay;
use crate::integrator::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ladder {
    Dt,
    N,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineRow {
    pub ladder: Ladder,
    pub level: usize,
    pub n: usize,
    pub dt: f64,
    pub e_end: f64,
    pub max_balance_residual: f64,
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineReport {
    pub digest: String,
    pub rows: Vec<RefineRow>,
    /// `log2` of successive balance-residual ratios along the dt ladder.
    pub residual_orders: Vec<f64>,
    /// `log2` of successive ratios of `|E_end|` differences along the dt ladder.
    pub energy_orders: Vec<f64>,
    /// Ratios of successive `|E_end|` differences along the n ladder.
    pub cauchy_ratios: Vec<f64>,
}

impl RefineRow {
    pub const HEADER: [&'static str; 7] = ["ladder", "level", "n", "dt", "E_end", "max_balance_residual", "omega"];

    pub fn record(&self) -> Vec<String> {
        vec![
            match self.ladder {
                Ladder::Dt => "dt".into(),
                Ladder::N => "n".into(),
            },
            self.level.to_string(),
            self.n.to_string(),
            fmt_f64(self.dt),
            fmt_f64(self.e_end),
            fmt_f64(self.max_balance_residual),
            self.omega.map_or_else(String::new, fmt_f64),
        ]
    }
}

fn refine_level(cfg: &LoadedConfig, ladder: Ladder, level: usize) -> Result<RefineRow> {
    let mut sim = cfg.sim.clone();
    let scale = 1usize << level;
    match ladder {
        Ladder::Dt => {
            sim.dt /= scale as f64;
            sim.m_rho = sim.m_rho.map(|m| m * scale);
        }
        Ladder::N => sim.n *= scale,
    }
    sim.validate(cfg.coeffs.tau)?;
    let system = crate::discretization::GalerkinSystem::new(cfg.coeffs, cfg.kernel.clone(), sim.n);
    let trace = run(&sim, &system, &cfg.initial)?;
    if let Some(e) = trace.failure {
        return Err(e);
    }
    let ft = crate::functionals::functional_trace(&trace, &system, None)?;
    Ok(RefineRow {
        ladder,
        level,
        n: sim.n,
        dt: sim.dt,
        e_end: ft.rows.last().map_or(f64::NAN, |r| r.e),
        max_balance_residual: ft.max_balance_residual(),
        omega: fit_decay(&ft.times(), &ft.energies(), &cfg.kernel, cfg.fit_t0())
            .ok()
            .map(|f| f.omega),
    })
}

/// Halves `dt` and doubles `n` over `levels` levels each. The record stride
/// is kept, so the centered differences in the balance residual refine too.
pub fn refine(cfg: &LoadedConfig, levels: usize) -> Result<RefineReport> {
    if levels < 2 {
        return Err(Error::Input("refine needs at least 2 levels".into()));
    }
    // level 0 is shared by both ladders
    let jobs: Vec<(Ladder, usize)> = std::iter::once((Ladder::Dt, 0))
        .chain([Ladder::Dt, Ladder::N].into_iter().flat_map(|l| (1..levels).map(move |i| (l, i))))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(l, i)| refine_level(cfg, l, i))
        .collect::<Result<Vec<_>>>()?;
    let base = RefineRow {
        ladder: Ladder::N,
        ..rows[0].clone()
    };
    rows.insert(levels, base);
    let pick = |l: Ladder| rows.iter().filter(move |r| r.ladder == l);
    let diffs = |l: Ladder| -> Vec<f64> {
        let e: Vec<f64> = pick(l).map(|r| r.e_end).collect();
        e.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    };
    let ratios = |v: &[f64]| -> Vec<f64> { v.windows(2).map(|w| w[0] / w[1]).collect() };
    let res: Vec<f64> = pick(Ladder::Dt).map(|r| r.max_balance_residual).collect();
    Ok(RefineReport {
        digest: cfg.digest.clone(),
        residual_orders: ratios(&res).iter().map(|r| r.log2()).collect(),
        energy_orders: ratios(&diffs(Ladder::Dt)).iter().map(|r| r.log2()).collect(),
        cauchy_ratios: ratios(&diffs(Ladder::N)),
        rows,
    })
}

/// Sets `name` in the raw config. Dotted names are paths; a bare name is
/// looked up in `theorem_inputs`, `coefficients`, `kernel`, `sim` and
/// `initial`, in that order.
pub fn with_param(raw: &RunConfig, name: &str, value: f64) -> Result<RunConfig> {
    let mut doc = serde_json::to_value(raw)?;
    let path: Vec<String> = if name.contains('.') {
        name.split('.').map(String::from).collect()
    } else {
        let block = ["theorem_inputs", "coefficients", "kernel", "sim", "initial"]
            .into_iter()
            .find(|b| doc.get(b).and_then(|v| v.get(name)).is_some())
            .ok_or_else(|| Error::Config(format!("no parameter `{name}` in the config")))?;
        vec![block.into(), name.into()]
    };
    let (last, parents) = path.split_last().ok_or_else(|| Error::Config("empty parameter name".into()))?;
    let mut slot = &mut doc;
    for p in parents {
        slot = slot
            .get_mut(p)
            .ok_or_else(|| Error::Config(format!("no block `{p}` for parameter `{name}`")))?;
    }
    let obj = slot
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("`{name}` does not name a field")))?;
    let integral = obj.get(last).is_some_and(Value::is_u64);
    let v = if integral {
        if value.fract() != 0.0 || value < 0.0 {
            return Err(Error::Config(format!("`{name}` takes a nonnegative integer, got {value}")));
        }
        Value::from(value as u64)
    } else {
        serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| Error::Config(format!("`{name}` = {value} is not finite")))?
    };
    obj.insert(last.clone(), v);
    serde_path_to_error::deserialize(doc).map_err(|e| Error::Config(format!("at `{}`: {}", e.path(), e.inner())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub value: f64,
    pub summary: Option<Summary>,
    pub error: Option<String>,
}

impl SweepCell {
    pub const HEADER: [&'static str; 12] = [
        "value",
        "status",
        "lambda",
        "xi",
        "m0",
        "omega",
        "r2",
        "monotone_violations",
        "m_hat",
        "M_hat",
        "digest",
        "error",
    ];

    pub fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_f64);
        match &self.summary {
            Some(s) => vec![
                fmt_f64(self.value),
                "ok".into(),
                fmt_f64(s.lambda),
                fmt_f64(s.xi),
                fmt_f64(s.m0),
                opt(s.fit.map(|f| f.omega)),
                opt(s.fit.map(|f| f.r2)),
                s.monotone_violations.to_string(),
                opt(s.equivalence.map(|q| q.m_hat)),
                opt(s.equivalence.map(|q| q.big_m_hat)),
                s.digest.clone(),
                String::new(),
            ],
            None => {
                let mut r = vec![fmt_f64(self.value), "error".into()];
                r.extend(std::iter::repeat_n(String::new(), 9));
                r.push(self.error.clone().unwrap_or_default());
                r
            }
        }
    }
}

/// One simulation per value, run concurrently. A failing cell records its
/// error and the others proceed. With `out`, each cell writes into
/// `cell-<index>/`.
pub fn sweep(cfg: &LoadedConfig, param: &str, values: &[f64], out: Option<&Path>) -> Result<Vec<SweepCell>> {
    if values.is_empty() {
        return Err(Error::Input("sweep needs at least one value".into()));
    }
    values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let outcome = with_param(&cfg.raw, param, value)
                .and_then(|raw| resolve(raw, &cfg.base))
                .and_then(|c| simulate(&c));
            match outcome {
                Ok(o) => {
                    if let Some(dir) = out {
                        write_outcome(&o, &dir.join(format!("cell-{i}")))?;
                    }
                    Ok(SweepCell {
                        value,
                        summary: Some(o.summary),
                        error: None,
                    })
                }
                Err(e) => {
                    if let Some(dir) = out {
                        let d = dir.join(format!("cell-{i}"));
                        std::fs::create_dir_all(&d)?;
                        write_json(&d.join("error.json"), &serde_json::json!({ "value": value, "error": e.to_string() }))?;
                    }
                    Ok(SweepCell {
                        value,
                        summary: None,
                        error: Some(e.to_string()),
                    })
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{parse_config, tests::MINIMAL};

    fn cfg() -> LoadedConfig {
        resolve(parse_config(MINIMAL).unwrap(), Path::new(".")).unwrap()
    }

    #[test]
    fn bare_and_dotted_names() {
        let c = cfg();
        let a = with_param(&c.raw, "mu2", 0.5).unwrap();
        assert_eq!(a.theorem_inputs.unwrap().mu2, 0.5);
        let b = with_param(&c.raw, "sim.n", 6.0).unwrap();
        assert_eq!(b.sim.n, 6);
        assert!(with_param(&c.raw, "sim.n", 6.5).is_err());
        assert!(with_param(&c.raw, "nonesuch", 1.0).is_err());
    }

    #[test]
    fn delay_sweep_is_monotone_and_isolated() {
        let c = cfg();
        let cells = sweep(&c, "mu2", &[0.0, 1.0, 2.0, 5.0], None).unwrap();
        assert_eq!(cells.len(), 4);
        for cell in &cells[..3] {
            assert_eq!(cell.summary.as_ref().unwrap().monotone_violations, 0, "{cell:?}");
        }
        assert!(cells[3].error.as_ref().unwrap().contains("mu2"));
        let again = sweep(&c, "mu2", &[2.0, 0.0], None).unwrap();
        assert_eq!(again[0], cells[2]);
        assert_eq!(again[1], cells[0]);
    }

    #[test]
    fn refine_reports_orders() {
        let mut c = cfg();
        c.sim.t_end = 0.5;
        c.sim.record_stride = 5;
        let r = refine(&c, 3).unwrap();
        assert_eq!(r.rows.len(), 6);
        assert_eq!(r.residual_orders.len(), 2);
        assert!(r.residual_orders.iter().all(|p| *p > 1.5), "{:?}", r.residual_orders);
    }
}
