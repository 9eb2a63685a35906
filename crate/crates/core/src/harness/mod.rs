//! Seeded Monte-Carlo campaigns that reproduce the numerical examples:
//! variance sweeps, misdetection sweeps, threshold demos, end-to-end
//! reconstruction and coefficient histograms.
//!
//! Every trial draws its mask from `mix_seed(master, trial_key)`, trials run
//! in parallel, and all reductions happen in trial order afterwards, so a
//! rerun with the same configuration reproduces every output byte.

mod config;
mod empirical;
mod experiments;
mod output;
pub mod svg;

pub use config::{ExperimentConfig, ExperimentId, MaRange};
pub use empirical::{histogram, ks_statistic, sample_variance, Histogram};
pub use experiments::{
    run_experiment, run_histograms, run_misdetection_sweep, run_reconstruction_demo,
    run_threshold_demo, run_variance_sweep, HistogramClass, HistogramRun, HistogramSetting,
    MisdetectionRow, ReconstructionRow, ReconstructionSummary, ThresholdDemo, ThresholdRow,
    ThresholdSummaryRow, VarianceRow, VarianceSummary, VarianceSweep,
};
pub use output::{CsvTable, RunOutput};

use rayon::prelude::*;

/// Environment variable capping worker threads (0 or unset = all cores).
pub const THREADS_ENV: &str = "HERMITE_CS_THREADS";

/// Runs `f(trial_index)` for every trial and returns the results in trial
/// order, honouring [`THREADS_ENV`].
pub fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    let work = || (0..trials as u64).into_par_iter().map(&f).collect::<Vec<T>>();
    if threads == 0 {
        return work();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}
