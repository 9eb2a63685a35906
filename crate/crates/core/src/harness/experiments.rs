use std::f64::consts::PI;

use super::empirical::{histogram, ks_statistic, sample_variance, Histogram};
use super::output::{fmt, CsvTable, RunOutput};
use super::svg::{Chart, Series, Style};
use super::{run_trials, ExperimentConfig, ExperimentId};
use crate::basis::{build_basis, HermiteBasis};
use crate::detect::{automatic_threshold, reconstruct, threshold_closed_form, ThresholdSpec};
use crate::error::{Error, Result};
use crate::sampling::{initial_estimate, measure, mix_seed, random_mask, synthesize, SamplingMask, SparseSignalSpec};
use crate::special::erf;
use crate::stats::{
    expected_component_stats, folded_normal_cdf, folded_normal_pdf, half_normal_cdf, half_normal_pdf,
    misdetection_probability_approx, misdetection_probability_exact, multi_component_stats, noise_variance,
    signal_variance_estimated, signal_variance_estimated_with, signal_variance_exact, BiasCompensation,
};
use crate::transform::SampleVector;

/// Seed of trial `trial` at the sweep point identified by `keys`.
pub(crate) fn trial_seed(master: u64, keys: &[u64], trial: u64) -> u64 {
    let point = keys.iter().fold(master, |s, &k| mix_seed(s, k));
    mix_seed(point, trial)
}

fn metadata(cfg: &ExperimentConfig) -> String {
    format!(
        "hermite-cs {} experiment={} config={}",
        env!("CARGO_PKG_VERSION"),
        cfg.experiment,
        cfg.echo()
    )
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Runs the experiment named in `cfg` and writes its outputs under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        ExperimentId::Ex1a | ExperimentId::Ex1b | ExperimentId::Ex2 => run_variance_sweep(cfg)?.output,
        ExperimentId::Ex3 => run_misdetection_sweep(cfg)?.1,
        ExperimentId::Ex4 => run_threshold_demo(cfg)?.output,
        ExperimentId::Ex5 => run_reconstruction_demo(cfg)?.output,
        ExperimentId::Histograms => run_histograms(cfg)?.output,
    })
}

// ---------------------------------------------------------------- variance

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRow {
    pub m_a: usize,
    pub p0: usize,
    /// Exact variance from the full-grid component energy.
    pub theoretical_var: f64,
    /// Mean over trials of the per-mask estimate (energy-only compensation).
    pub estimated_var: f64,
    /// Same estimate with the compensation applied to the whole bracket.
    pub estimated_var_whole_bracket: f64,
    pub empirical_var: f64,
    /// Predicted non-signal variance (variance sweep over `M_A` only).
    pub noise_var: Option<f64>,
    /// Empirical variance of the non-signal coefficients, averaged over positions.
    pub empirical_noise_var: Option<f64>,
}

impl VarianceRow {
    pub fn sq_err_theoretical(&self) -> f64 {
        (self.empirical_var - self.theoretical_var).powi(2)
    }

    pub fn sq_err_estimated(&self) -> f64 {
        (self.empirical_var - self.estimated_var).powi(2)
    }

    pub fn sq_err_whole_bracket(&self) -> f64 {
        (self.empirical_var - self.estimated_var_whole_bracket).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceSweep {
    pub rows: Vec<VarianceRow>,
    pub output: RunOutput,
}

/// Mean squared errors over all `p0` at one `M_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSummary {
    pub m_a: usize,
    pub mse_theoretical: f64,
    pub mse_estimated: f64,
    pub mse_whole_bracket: f64,
}

impl VarianceSweep {
    pub fn summary(&self) -> Vec<VarianceSummary> {
        let mut out: Vec<VarianceSummary> = Vec::new();
        let mut start = 0;
        while start < self.rows.len() {
            let m_a = self.rows[start].m_a;
            let end = start + self.rows[start..].iter().take_while(|r| r.m_a == m_a).count();
            let group = &self.rows[start..end];
            let avg = |f: fn(&VarianceRow) -> f64| mean(&group.iter().map(f).collect::<Vec<_>>());
            out.push(VarianceSummary {
                m_a,
                mse_theoretical: avg(VarianceRow::sq_err_theoretical),
                mse_estimated: avg(VarianceRow::sq_err_estimated),
                mse_whole_bracket: avg(VarianceRow::sq_err_whole_bracket),
            });
            start = end;
        }
        out
    }
}

struct VarianceTrial {
    coefficient: f64,
    estimated: f64,
    whole_bracket: f64,
    others: Vec<f64>,
}

fn variance_point(
    cfg: &ExperimentConfig,
    basis: &HermiteBasis,
    m_a: usize,
    p0: usize,
    with_noise: bool,
) -> Result<VarianceRow> {
    let m = basis.order();
    let amplitude = 1.0;
    let w = basis.weights();
    let signal_row = basis.row(p0);
    let trials = collect(run_trials(cfg.trials, |t| -> Result<VarianceTrial> {
        let mask = random_mask(m, m_a, trial_seed(cfg.seed, &[m_a as u64, p0 as u64], t))?;
        let weighted: Vec<(usize, f64)> =
            mask.positions().iter().map(|&i| (i, amplitude * w[i] * signal_row[i])).collect();
        let coefficient = weighted.iter().map(|&(i, z)| z * signal_row[i]).sum();
        let others = if with_noise {
            (0..m)
                .filter(|&p| p != p0)
                .map(|p| {
                    let row = basis.row(p);
                    weighted.iter().map(|&(i, z)| z * row[i]).sum()
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(VarianceTrial {
            coefficient,
            estimated: signal_variance_estimated(p0, basis, &mask, amplitude)?,
            whole_bracket: signal_variance_estimated_with(
                p0,
                basis,
                &mask,
                amplitude,
                BiasCompensation::WholeBracket,
            )?,
            others,
        })
    }))?;

    let coeffs: Vec<f64> = trials.iter().map(|t| t.coefficient).collect();
    let (noise_var, empirical_noise_var) = if with_noise {
        let per_position: Vec<f64> = (0..m - 1)
            .map(|j| sample_variance(&trials.iter().map(|t| t.others[j]).collect::<Vec<_>>()))
            .collect();
        (Some(noise_variance(m, m_a, &[amplitude])?), Some(mean(&per_position)))
    } else {
        (None, None)
    };
    Ok(VarianceRow {
        m_a,
        p0,
        theoretical_var: signal_variance_exact(p0, basis, m_a, amplitude)?,
        estimated_var: mean(&trials.iter().map(|t| t.estimated).collect::<Vec<_>>()),
        estimated_var_whole_bracket: mean(&trials.iter().map(|t| t.whole_bracket).collect::<Vec<_>>()),
        empirical_var: sample_variance(&coeffs),
        noise_var,
        empirical_noise_var,
    })
}

/// Variance of the coefficient at a single unit component's position for
/// every `(M_A, p0)` pair of the configuration, against its predictions.
pub fn run_variance_sweep(cfg: &ExperimentConfig) -> Result<VarianceSweep> {
    cfg.validate()?;
    if cfg.p0.is_empty() {
        return Err(Error::Config("variance sweep needs at least one p0".into()));
    }
    let basis = build_basis(cfg.length)?;
    let with_noise = cfg.experiment == ExperimentId::Ex2;
    let mut rows = Vec::with_capacity(cfg.ma_values.len() * cfg.p0.len());
    for &m_a in &cfg.ma_values {
        for &p0 in &cfg.p0 {
            rows.push(variance_point(cfg, &basis, m_a, p0, with_noise)?);
        }
    }
    let mut sweep = VarianceSweep { rows, output: RunOutput::default() };

    let mut header = vec![
        "M_A",
        "p0",
        "theoretical_var_37",
        "estimated_var_38",
        "empirical_var",
        "mse_37",
        "mse_38",
    ];
    if with_noise {
        header.extend(["noise_var_27", "empirical_noise_var"]);
    }
    let mut table = CsvTable::new(&header);
    for r in &sweep.rows {
        let mut row = vec![
            r.m_a.to_string(),
            r.p0.to_string(),
            fmt(r.theoretical_var),
            fmt(r.estimated_var),
            fmt(r.empirical_var),
            fmt(r.sq_err_theoretical()),
            fmt(r.sq_err_estimated()),
        ];
        if with_noise {
            row.push(fmt(r.noise_var.unwrap_or(f64::NAN)));
            row.push(fmt(r.empirical_noise_var.unwrap_or(f64::NAN)));
        }
        table.push(row);
    }
    let summary = sweep.summary();
    let mut sum_table = CsvTable::new(&["M_A", "mse_37", "mse_38", "mse_38_whole_bracket"]);
    for s in &summary {
        sum_table.push(vec![
            s.m_a.to_string(),
            fmt(s.mse_theoretical),
            fmt(s.mse_estimated),
            fmt(s.mse_whole_bracket),
        ]);
    }
    let max = |f: fn(&VarianceSummary) -> f64| summary.iter().map(f).fold(0.0, f64::max);
    sum_table.push(vec![
        "max".into(),
        fmt(max(|s| s.mse_theoretical)),
        fmt(max(|s| s.mse_estimated)),
        fmt(max(|s| s.mse_whole_bracket)),
    ]);

    let meta = metadata(cfg);
    let id = cfg.experiment.as_str();
    sweep.output.save(&cfg.out, &format!("{id}_variance.csv"), &table, &meta)?;
    sweep.output.save(&cfg.out, &format!("{id}_summary.csv"), &sum_table, &meta)?;

    if cfg.svg {
        let chart = if with_noise {
            cfg.p0.iter().fold(
                Chart::new(format!("{id}: coefficient variance"), "M_A", "variance").log_y(),
                |chart, &p0| {
                    let pick = |f: fn(&VarianceRow) -> f64| {
                        sweep.rows.iter().filter(|r| r.p0 == p0).map(|r| (r.m_a as f64, f(r))).collect()
                    };
                    chart
                        .with(Series::new(format!("p0={p0} empirical"), pick(|r| r.empirical_var), Style::Markers))
                        .with(Series::new(format!("p0={p0} estimated"), pick(|r| r.estimated_var), Style::Line))
                },
            )
        } else {
            let pick = |f: fn(&VarianceSummary) -> f64| summary.iter().map(|s| (s.m_a as f64, f(s))).collect();
            Chart::new(format!("{id}: MSE over p0"), "M_A", "MSE")
                .log_y()
                .with(Series::new("exact", pick(|s| s.mse_theoretical), Style::Line))
                .with(Series::new("estimated", pick(|s| s.mse_estimated), Style::Line))
        };
        sweep.output.save_text(&cfg.out, &format!("{id}_variance.svg"), &chart.render())?;
    }
    Ok(sweep)
}

// ------------------------------------------------------------ misdetection

#[derive(Debug, Clone, PartialEq)]
pub struct MisdetectionRow {
    pub m_a: usize,
    /// 1-based component index.
    pub component: usize,
    pub order: usize,
    pub p_exact: f64,
    pub p_approx: f64,
    pub p_empirical: f64,
    pub trials: usize,
}

impl MisdetectionRow {
    /// Binomial standard deviation of the empirical rate under `p_exact`.
    pub fn binomial_sigma(&self) -> f64 {
        (self.p_exact * (1.0 - self.p_exact) / self.trials as f64).sqrt()
    }
}

fn signal_of(spec: &SparseSignalSpec, basis: &HermiteBasis) -> Result<SampleVector> {
    synthesize(spec, basis)
}

fn zero_filled(
    signal: &SampleVector,
    basis: &HermiteBasis,
    mask: &SamplingMask,
) -> Result<crate::transform::CoefficientVector> {
    initial_estimate(&measure(signal, mask)?, basis)
}

/// Misdetection probability of each component versus `M_A`: numerical
/// integration, closed-form approximation and Monte-Carlo counts of trials
/// where some non-signal coefficient is at least as large as the component.
pub fn run_misdetection_sweep(cfg: &ExperimentConfig) -> Result<(Vec<MisdetectionRow>, RunOutput)> {
    cfg.validate()?;
    let spec = cfg.signal_spec()?;
    let basis = build_basis(cfg.length)?;
    let signal = signal_of(&spec, &basis)?;
    let support = spec.support();
    let k = spec.sparsity();
    let m = cfg.length;
    if k >= m {
        return Err(Error::Config("misdetection sweep needs K < M".into()));
    }

    let mut rows = Vec::new();
    for &m_a in &cfg.ma_values {
        let stats = expected_component_stats(&spec, &basis, m_a)?;
        let misses = collect(run_trials(cfg.trials, |t| -> Result<Vec<bool>> {
            let mask = random_mask(m, m_a, trial_seed(cfg.seed, &[m_a as u64], t))?;
            let c = zero_filled(&signal, &basis, &mask)?;
            let noise_peak = (0..m)
                .filter(|p| support.binary_search(p).is_err())
                .map(|p| c[p].abs())
                .fold(0.0, f64::max);
            Ok(spec.components().iter().map(|comp| noise_peak >= c[comp.p].abs()).collect())
        }))?;
        for (i, comp) in spec.components().iter().enumerate() {
            let count = misses.iter().filter(|row| row[i]).count();
            rows.push(MisdetectionRow {
                m_a,
                component: i + 1,
                order: comp.p,
                p_exact: misdetection_probability_exact(i, &stats, k)?,
                p_approx: misdetection_probability_approx(i, &stats, k, cfg.correction)?,
                p_empirical: count as f64 / cfg.trials as f64,
                trials: cfg.trials,
            });
        }
    }

    let mut table = CsvTable::new(&["M_A", "component", "p_exact_51", "p_approx_52", "p_empirical", "p"]);
    for r in &rows {
        table.push(vec![
            r.m_a.to_string(),
            r.component.to_string(),
            fmt(r.p_exact),
            fmt(r.p_approx),
            fmt(r.p_empirical),
            r.order.to_string(),
        ]);
    }
    let mut output = RunOutput::default();
    let id = cfg.experiment.as_str();
    output.save(&cfg.out, &format!("{id}_misdetection.csv"), &table, &metadata(cfg))?;
    if cfg.svg {
        let mut chart = Chart::new(format!("{id}: misdetection probability"), "M_A", "probability").log_y();
        for i in 1..=k {
            let pick = |f: fn(&MisdetectionRow) -> f64| {
                rows.iter().filter(|r| r.component == i).map(|r| (r.m_a as f64, f(r))).collect()
            };
            chart = chart
                .with(Series::new(format!("component {i}"), pick(|r| r.p_exact), Style::Line))
                .with(Series::new(format!("component {i} MC"), pick(|r| r.p_empirical), Style::Markers));
        }
        output.save_text(&cfg.out, &format!("{id}_misdetection.svg"), &chart.render())?;
    }
    Ok((rows, output))
}

// --------------------------------------------------------------- threshold

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub m_a: usize,
    pub p: usize,
    pub abs_c: f64,
    pub threshold: f64,
    /// 1-based component index, 0 for non-signal positions.
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSummaryRow {
    pub m_a: usize,
    /// 1-based component index; 0 stands for "all components".
    pub component: usize,
    pub p: Option<usize>,
    /// Fraction of realizations where the component exceeds its realization's threshold.
    pub frac_above: f64,
    /// Normal-model probability of exceeding the threshold built from the predicted noise level.
    pub model_above: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdDemo {
    pub realizations: Vec<ThresholdRow>,
    pub summary: Vec<ThresholdSummaryRow>,
    pub output: RunOutput,
}

impl ThresholdDemo {
    pub fn fraction_above(&self, m_a: usize, component: usize) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.m_a == m_a && r.component == component)
            .map(|r| r.frac_above)
    }
}

/// Automatic threshold on the zero-filled coefficients: one stored
/// realization per `M_A` plus detection fractions over `trials` realizations.
pub fn run_threshold_demo(cfg: &ExperimentConfig) -> Result<ThresholdDemo> {
    cfg.validate()?;
    let spec = cfg.signal_spec()?;
    let basis = build_basis(cfg.length)?;
    let signal = signal_of(&spec, &basis)?;
    let m = cfg.length;
    let orders = spec.orders();

    let mut realizations = Vec::new();
    let mut summary = Vec::new();
    for &m_a in &cfg.ma_values {
        let outcomes = collect(run_trials(cfg.trials, |t| -> Result<(Vec<f64>, f64)> {
            let mask = random_mask(m, m_a, trial_seed(cfg.seed, &[m_a as u64], t))?;
            let c = zero_filled(&signal, &basis, &mask)?;
            let (_, threshold) = automatic_threshold(&c, m_a, cfg.p_nn)?;
            Ok((c.into_inner(), threshold))
        }))?;

        let (first, threshold) = &outcomes[0];
        for (p, v) in first.iter().enumerate() {
            realizations.push(ThresholdRow {
                m_a,
                p,
                abs_c: v.abs(),
                threshold: *threshold,
                component: orders.iter().position(|&q| q == p).map_or(0, |i| i + 1),
            });
        }

        let stats = expected_component_stats(&spec, &basis, m_a)?;
        let t_model = threshold_closed_form(&ThresholdSpec::new(cfg.p_nn, m, 0, stats.noise_std())?)?;
        let n = outcomes.len() as f64;
        let mut model_all = 1.0;
        for (i, (comp, st)) in spec.components().iter().zip(&stats.components).enumerate() {
            let above = outcomes.iter().filter(|(c, t)| c[comp.p].abs() > *t).count();
            let model = 1.0 - folded_normal_cdf(t_model, st.mean, st.std_dev());
            model_all *= model;
            summary.push(ThresholdSummaryRow {
                m_a,
                component: i + 1,
                p: Some(comp.p),
                frac_above: above as f64 / n,
                model_above: model,
            });
        }
        let all = outcomes
            .iter()
            .filter(|(c, t)| orders.iter().all(|&p| c[p].abs() > *t))
            .count();
        summary.push(ThresholdSummaryRow {
            m_a,
            component: 0,
            p: None,
            frac_above: all as f64 / n,
            model_above: model_all,
        });
    }

    let mut table = CsvTable::new(&["M_A", "p", "abs_c", "threshold", "component"]);
    for r in &realizations {
        table.push(vec![
            r.m_a.to_string(),
            r.p.to_string(),
            fmt(r.abs_c),
            fmt(r.threshold),
            r.component.to_string(),
        ]);
    }
    let mut sum_table = CsvTable::new(&["M_A", "component", "p", "frac_above_threshold", "model_above_threshold"]);
    for r in &summary {
        sum_table.push(vec![
            r.m_a.to_string(),
            if r.component == 0 { "all".into() } else { r.component.to_string() },
            r.p.map_or(String::new(), |p| p.to_string()),
            fmt(r.frac_above),
            fmt(r.model_above),
        ]);
    }
    let mut output = RunOutput::default();
    let meta = metadata(cfg);
    let id = cfg.experiment.as_str();
    output.save(&cfg.out, &format!("{id}_realizations.csv"), &table, &meta)?;
    output.save(&cfg.out, &format!("{id}_summary.csv"), &sum_table, &meta)?;
    if cfg.svg {
        for &m_a in &cfg.ma_values {
            let rows: Vec<&ThresholdRow> = realizations.iter().filter(|r| r.m_a == m_a).collect();
            let t = rows.first().map_or(0.0, |r| r.threshold);
            let chart = Chart::new(format!("{id}: M_A = {m_a}"), "p", "|c_p|")
                .with(Series::new("|c_p|", rows.iter().map(|r| (r.p as f64, r.abs_c)).collect(), Style::Markers))
                .with(Series::new("threshold", vec![(0.0, t), ((m - 1) as f64, t)], Style::Line));
            output.save_text(&cfg.out, &format!("{id}_ma{m_a}.svg"), &chart.render())?;
        }
    }
    Ok(ThresholdDemo { realizations, summary, output })
}

// ---------------------------------------------------------- reconstruction

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionRow {
    pub trial: u64,
    pub seed: u64,
    pub support_exact_match: bool,
    pub signal_mse: f64,
    pub status: &'static str,
    pub support_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionSummary {
    pub rows: Vec<ReconstructionRow>,
    pub output: RunOutput,
}

impl ReconstructionSummary {
    pub fn successes(&self) -> usize {
        self.rows.iter().filter(|r| r.support_exact_match).count()
    }

    pub fn success_fraction(&self) -> f64 {
        self.successes() as f64 / self.rows.len().max(1) as f64
    }

    pub fn median_mse(&self) -> f64 {
        let mut v: Vec<f64> = self.rows.iter().map(|r| r.signal_mse).collect();
        v.sort_by(f64::total_cmp);
        match v.len() {
            0 => f64::NAN,
            n if n % 2 == 1 => v[n / 2],
            n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
        }
    }

    /// Largest signal MSE among exact-support trials.
    pub fn max_success_mse(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.support_exact_match)
            .map(|r| r.signal_mse)
            .fold(0.0, f64::max)
    }
}

/// Full pipeline (threshold, support, least squares) on independent masks.
pub fn run_reconstruction_demo(cfg: &ExperimentConfig) -> Result<ReconstructionSummary> {
    cfg.validate()?;
    let spec = cfg.signal_spec()?;
    let basis = build_basis(cfg.length)?;
    let signal = signal_of(&spec, &basis)?;
    let truth = spec.support();
    let m_a = cfg.ma_values[0];
    let rows = collect(run_trials(cfg.trials, |t| -> Result<ReconstructionRow> {
        let seed = trial_seed(cfg.seed, &[m_a as u64], t);
        let mask = random_mask(cfg.length, m_a, seed)?;
        let result = reconstruct(&measure(&signal, &mask)?, &basis, cfg.p_nn)?;
        Ok(ReconstructionRow {
            trial: t,
            seed,
            support_exact_match: result.support == truth,
            signal_mse: result.signal_mse(&signal),
            status: result.status.as_str(),
            support_size: result.support.len(),
        })
    }))?;
    let mut summary = ReconstructionSummary { rows, output: RunOutput::default() };

    let mut table = CsvTable::new(&["seed", "support_exact_match", "signal_mse", "status", "support_size"]);
    for r in &summary.rows {
        table.push(vec![
            r.seed.to_string(),
            r.support_exact_match.to_string(),
            fmt(r.signal_mse),
            r.status.to_string(),
            r.support_size.to_string(),
        ]);
    }
    let mut sum_table =
        CsvTable::new(&["trials", "successes", "success_fraction", "median_mse", "max_success_mse"]);
    sum_table.push(vec![
        summary.rows.len().to_string(),
        summary.successes().to_string(),
        fmt(summary.success_fraction()),
        fmt(summary.median_mse()),
        fmt(summary.max_success_mse()),
    ]);
    let meta = metadata(cfg);
    let id = cfg.experiment.as_str();
    summary.output.save(&cfg.out, &format!("{id}_reconstruction.csv"), &table, &meta)?;
    summary.output.save(&cfg.out, &format!("{id}_summary.csv"), &sum_table, &meta)?;
    if cfg.svg {
        let pts = summary.rows.iter().map(|r| (r.trial as f64, r.signal_mse.max(1e-40))).collect();
        let chart = Chart::new(format!("{id}: reconstruction MSE per trial"), "trial", "MSE")
            .log_y()
            .with(Series::new("signal MSE", pts, Style::Markers));
        summary.output.save_text(&cfg.out, &format!("{id}_reconstruction.svg"), &chart.render())?;
    }
    Ok(summary)
}

// -------------------------------------------------------------- histograms

/// Signal configuration whose coefficient magnitudes are histogrammed.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSetting {
    pub label: String,
    pub spec: SparseSignalSpec,
}

impl HistogramSetting {
    /// Unit component at order 20.
    pub fn mono(m: usize) -> Result<Self> {
        Ok(Self { label: "mono".into(), spec: SparseSignalSpec::new(m, vec![(20, 1.0)])? })
    }

    /// Amplitudes `{1, 3, 4, 2}` at orders `{20, 54, 94, 162}`.
    pub fn multi(m: usize) -> Result<Self> {
        Ok(Self {
            label: "multi".into(),
            spec: SparseSignalSpec::new(m, vec![(20, 1.0), (54, 3.0), (94, 4.0), (162, 2.0)])?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramClass {
    pub setting: String,
    /// 1-based component index; 0 for the pooled non-signal class.
    pub component: usize,
    pub p: Option<usize>,
    pub samples: usize,
    /// Mean of the signed coefficients.
    pub mean: f64,
    pub abs_mean: f64,
    pub model_abs_mean: f64,
    /// Model location (0 for non-signal) and spread.
    pub model_mean: f64,
    pub sigma: f64,
    pub ks: f64,
    pub histogram: Histogram,
    pub pdf: Vec<f64>,
}

impl HistogramClass {
    pub fn is_signal(&self) -> bool {
        self.component > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRun {
    pub classes: Vec<HistogramClass>,
    pub output: RunOutput,
}

const HISTOGRAM_BINS: usize = 100;

fn folded_mean(mu: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return mu.abs();
    }
    sigma * (2.0 / PI).sqrt() * (-mu * mu / (2.0 * sigma * sigma)).exp()
        + mu * erf(mu / (sigma * std::f64::consts::SQRT_2))
}

fn histogram_setting(
    cfg: &ExperimentConfig,
    basis: &HermiteBasis,
    setting: &HistogramSetting,
) -> Result<Vec<HistogramClass>> {
    let spec = &setting.spec;
    let m = basis.order();
    let m_a = cfg.ma_values[0];
    let signal = signal_of(spec, basis)?;
    let support = spec.support();
    let key = spec.orders().iter().fold(m_a as u64, |acc, &p| mix_seed(acc, p as u64));
    let trials = collect(run_trials(cfg.trials, |t| -> Result<(Vec<f64>, Vec<f64>)> {
        let mask = random_mask(m, m_a, trial_seed(cfg.seed, &[key], t))?;
        let c = zero_filled(&signal, basis, &mask)?;
        let stats = multi_component_stats(spec, basis, &mask)?;
        Ok((c.into_inner(), stats.components.iter().map(|s| s.variance).collect()))
    }))?;
    let n = trials.len();
    let sigma_n = noise_variance(m, m_a, &spec.amplitudes())?.sqrt();

    let mut classes = Vec::new();
    let build = |component: usize, p: Option<usize>, signed: Vec<f64>, mu: f64, sigma: f64| -> Result<HistogramClass> {
        let abs: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
        let hi = abs.iter().copied().fold(0.0, f64::max);
        let hist = histogram(&abs, 0.0, hi, HISTOGRAM_BINS);
        let (ks, pdf) = if component == 0 {
            let pdf = hist.centers().map(|x| half_normal_pdf(x, sigma)).collect::<Result<Vec<_>>>()?;
            (ks_statistic(&abs, |x| half_normal_cdf(x, sigma)), pdf)
        } else {
            let pdf = hist.centers().map(|x| folded_normal_pdf(x, mu, sigma)).collect::<Result<Vec<_>>>()?;
            (ks_statistic(&abs, |x| folded_normal_cdf(x, mu, sigma)), pdf)
        };
        Ok(HistogramClass {
            setting: setting.label.clone(),
            component,
            p,
            samples: abs.len(),
            mean: mean(&signed),
            abs_mean: mean(&abs),
            model_abs_mean: folded_mean(mu, sigma),
            model_mean: mu,
            sigma,
            ks,
            histogram: hist,
            pdf,
        })
    };
    for (i, comp) in spec.components().iter().enumerate() {
        let signed: Vec<f64> = trials.iter().map(|(c, _)| c[comp.p]).collect();
        let variance = mean(&trials.iter().map(|(_, v)| v[i]).collect::<Vec<_>>());
        let mu = comp.amplitude * m_a as f64 / m as f64;
        classes.push(build(i + 1, Some(comp.p), signed, mu, variance.sqrt())?);
    }
    let mut noise = Vec::with_capacity(n * (m - support.len()));
    for (c, _) in &trials {
        noise.extend((0..m).filter(|p| support.binary_search(p).is_err()).map(|p| c[p]));
    }
    classes.push(build(0, None, noise, 0.0, sigma_n)?);
    Ok(classes)
}

/// Histograms of coefficient magnitudes at signal and non-signal positions
/// against the folded/half-normal model densities, with KS statistics.
///
/// Without configured components both the mono and the four-component
/// settings are run.
pub fn run_histograms(cfg: &ExperimentConfig) -> Result<HistogramRun> {
    cfg.validate()?;
    let basis = build_basis(cfg.length)?;
    let settings = if cfg.components.is_empty() {
        vec![HistogramSetting::mono(cfg.length)?, HistogramSetting::multi(cfg.length)?]
    } else {
        vec![HistogramSetting { label: "custom".into(), spec: cfg.signal_spec()? }]
    };
    let mut classes = Vec::new();
    for setting in &settings {
        classes.extend(histogram_setting(cfg, &basis, setting)?);
    }

    let label = |c: &HistogramClass| if c.is_signal() { "signal" } else { "noise" };
    let mut bins = CsvTable::new(&[
        "setting",
        "class",
        "component",
        "p",
        "bin_center",
        "empirical_density",
        "theoretical_pdf",
    ]);
    let mut summary = CsvTable::new(&[
        "setting",
        "class",
        "component",
        "p",
        "samples",
        "mean",
        "abs_mean",
        "model_abs_mean",
        "sigma",
        "ks_statistic",
    ]);
    for c in &classes {
        let p = c.p.map_or(String::new(), |p| p.to_string());
        for ((x, d), f) in c.histogram.centers().zip(&c.histogram.density).zip(&c.pdf) {
            bins.push(vec![
                c.setting.clone(),
                label(c).into(),
                c.component.to_string(),
                p.clone(),
                fmt(x),
                fmt(*d),
                fmt(*f),
            ]);
        }
        summary.push(vec![
            c.setting.clone(),
            label(c).into(),
            c.component.to_string(),
            p,
            c.samples.to_string(),
            fmt(c.mean),
            fmt(c.abs_mean),
            fmt(c.model_abs_mean),
            fmt(c.sigma),
            fmt(c.ks),
        ]);
    }
    let mut output = RunOutput::default();
    let meta = metadata(cfg);
    let id = cfg.experiment.as_str();
    output.save(&cfg.out, &format!("{id}_bins.csv"), &bins, &meta)?;
    output.save(&cfg.out, &format!("{id}_summary.csv"), &summary, &meta)?;
    if cfg.svg {
        for c in &classes {
            let centers: Vec<f64> = c.histogram.centers().collect();
            let chart = Chart::new(
                format!("{} {} {}", c.setting, label(c), c.component),
                "|c_p|",
                "density",
            )
            .with(Series::new(
                "empirical",
                centers.iter().copied().zip(c.histogram.density.iter().copied()).collect(),
                Style::Bars,
            ))
            .with(Series::new("model", centers.into_iter().zip(c.pdf.iter().copied()).collect(), Style::Line));
            let name = format!("{id}_{}_{}_{}.svg", c.setting, label(c), c.component);
            output.save_text(&cfg.out, &name, &chart.render())?;
        }
    }
    Ok(HistogramRun { classes, output })
}
