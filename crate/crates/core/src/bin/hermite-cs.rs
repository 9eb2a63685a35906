use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hermite_cs::detect::reconstruct;
use hermite_cs::harness::{run_experiment, CsvTable, ExperimentConfig, ExperimentId};
use hermite_cs::sampling::{measure, synthesize, SignalConfig};
use hermite_cs::{build_basis, Error, Result};

/// Defect above which `basis --check` reports a numeric failure.
const CHECK_TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "hermite-cs", version, about = "Hermite-domain compressive sensing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the basis of a given order; optionally check orthonormality.
    Basis {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        check: bool,
        /// Write roots and weights to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded Monte-Carlo campaign and write CSV outputs.
    Experiment {
        /// ex1a | ex1b | ex2 | ex3 | ex4 | ex5 | histograms
        id: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        pnn: Option<f64>,
        #[arg(long)]
        svg: bool,
    },
    /// Reconstruct a signal described by a JSON config from its random samples.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the mask seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = hermite_cs::detect::DEFAULT_P_NN)]
        pnn: f64,
        /// Directory for the reconstructed signal and coefficient CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_config(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Basis { order, check, out } => {
            let basis = build_basis(order)?;
            println!("order {order}: {} roots, t in [{:.6}, {:.6}]", order, basis.roots()[0], basis.roots()[order - 1]);
            if check {
                let defect = basis.orthonormality_defect();
                let dual = basis.dual_orthonormality_defect();
                println!("orthonormality defect {defect:.3e}, dual defect {dual:.3e}");
                if !(defect < CHECK_TOLERANCE && dual < CHECK_TOLERANCE) {
                    return Err(Error::NumericFailure {
                        order,
                        reason: format!("orthonormality defect {defect:.3e} exceeds {CHECK_TOLERANCE:e}"),
                    });
                }
            }
            if let Some(path) = out {
                let mut table = CsvTable::new(&["m", "root", "weight"]);
                for (m, (t, w)) in basis.roots().iter().zip(basis.weights()).enumerate() {
                    table.push(vec![m.to_string(), format!("{t:e}"), format!("{w:e}")]);
                }
                table.write(&path, &format!("hermite-cs {} basis order={order}", env!("CARGO_PKG_VERSION")))?;
            }
        }
        Command::Experiment { id, config, seed, trials, out, pnn, svg } => {
            let id: ExperimentId = id.parse()?;
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_json(&read_config(&path)?, Some(id))?,
                None => ExperimentConfig::defaults(id),
            };
            cfg.experiment = id;
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = trials {
                cfg.trials = v;
            }
            if let Some(v) = out {
                cfg.out = v;
            }
            if let Some(v) = pnn {
                cfg.p_nn = v;
            }
            cfg.svg |= svg;
            cfg.validate()?;
            for file in run_experiment(&cfg)?.files {
                println!("{}", file.display());
            }
        }
        Command::Reconstruct { config, seed, pnn, out } => {
            let mut cfg = SignalConfig::from_json(&read_config(&config)?)
                .map_err(|e| Error::Config(e.to_string()))?;
            if let Some(v) = seed {
                cfg.mask.seed = v;
            }
            let spec = cfg.spec().map_err(|e| Error::Config(e.to_string()))?;
            let mask = cfg.sampling_mask().map_err(|e| Error::Config(e.to_string()))?;
            let basis = build_basis(cfg.length)?;
            let signal = synthesize(&spec, &basis)?;
            let result = reconstruct(&measure(&signal, &mask)?, &basis, pnn)?;
            let summary = serde_json::json!({
                "status": result.status.as_str(),
                "support": result.support,
                "coefficients": result.coefficients,
                "support_exact_match": result.support == spec.support(),
                "threshold": result.threshold_used,
                "sigma_estimate": result.sigma_estimate,
                "residual_norm": result.residual_norm,
                "signal_mse": result.signal_mse(&signal),
                "rank_deficient": result.rank_deficient,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if let Some(dir) = out {
                let meta = format!("hermite-cs {} reconstruct config={}", env!("CARGO_PKG_VERSION"), serde_json::to_string(&cfg)?);
                let mut sig = CsvTable::new(&["m", "original", "reconstructed", "available"]);
                let avail = mask.positions();
                for m in 0..cfg.length {
                    sig.push(vec![
                        m.to_string(),
                        format!("{:e}", signal[m]),
                        format!("{:e}", result.reconstructed_signal[m]),
                        avail.binary_search(&m).is_ok().to_string(),
                    ]);
                }
                sig.write(&dir.join("reconstruct_signal.csv"), &meta)?;
                let mut coef = CsvTable::new(&["p", "original", "reconstructed"]);
                let truth = spec.coefficients();
                for p in 0..cfg.length {
                    coef.push(vec![
                        p.to_string(),
                        format!("{:e}", truth[p]),
                        format!("{:e}", result.full_coefficients[p]),
                    ]);
                }
                coef.write(&dir.join("reconstruct_coefficients.csv"), &meta)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidArgument(_) | Error::Json(_) => 2,
                Error::NumericFailure { .. } => 3,
                Error::Io(_) | Error::Csv(_) => 1,
            })
        }
    }
}
