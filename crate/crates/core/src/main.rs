use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use timolab::harness::{
    self, default_out_dir, fit_trace_file, load_config, run_experiment, verify_kernels, ExperimentKind, Overrides,
};

#[derive(Parser)]
#[command(name = "timolab", version, about = "Modal Galerkin laboratory for the delayed thermo-viscoelastic Timoshenko beam")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run: trace CSV, summary JSON and manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// dt-halving and n-doubling ladders with an order report.
    Refine {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One run per value of a config parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded property suite for the memory operators.
    VerifyKernels {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Decay fit of a trace CSV; the kernel's zeta comes from `--config`,
    /// otherwise the regressor is `t - t0`.
    Fit {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn experiment(config: &Path, out: Option<PathBuf>, over: Overrides) -> timolab::Result<()> {
    let cfg = load_config(config)?;
    eprint!("{}", cfg.report);
    let out = out.unwrap_or_else(|| default_out_dir(&cfg));
    let m = run_experiment(&cfg, &over, &out)?;
    for f in &m.outputs {
        println!("{}", out.join(f).display());
    }
    println!("{}", out.join("manifest.json").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => experiment(
            &config,
            out,
            Overrides {
                kind: Some(ExperimentKind::Simulate),
                ..Default::default()
            },
        ),
        Command::Refine { config, levels, out } => experiment(
            &config,
            out,
            Overrides {
                kind: Some(ExperimentKind::Refine),
                levels: Some(levels),
                ..Default::default()
            },
        ),
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => experiment(
            &config,
            out,
            Overrides {
                kind: Some(ExperimentKind::Sweep),
                param: Some(param),
                values: Some(values),
                ..Default::default()
            },
        ),
        Command::VerifyKernels { seed, trials } => verify_kernels(seed, trials).and_then(|r| {
            println!("{}", serde_json::to_string_pretty(&r)?);
            if r.all_pass() {
                Ok(())
            } else {
                Err(timolab::Error::Input(format!(
                    "{}/{} Cauchy-Schwarz and {}/{} order checks passed",
                    r.cauchy_schwarz_pass, r.trials, r.identity_pass, r.trials
                )))
            }
        }),
        Command::Fit { trace, t0, config } => (|| {
            let kernel = match config {
                Some(p) => Some(harness::load_config(&p)?.kernel),
                None => None,
            };
            let f = fit_trace_file(&trace, t0, kernel.as_ref())?;
            println!("{}", serde_json::to_string_pretty(&f)?);
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
