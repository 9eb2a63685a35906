use std::fs;
use std::path::Path;

use hermite_cs::harness::{
    run_experiment, run_histograms, run_misdetection_sweep, run_reconstruction_demo, run_threshold_demo,
    run_variance_sweep, ExperimentConfig, ExperimentId, MaRange,
};
use hermite_cs::Error;

fn cfg(id: ExperimentId, dir: &Path) -> ExperimentConfig {
    ExperimentConfig { out: dir.to_path_buf(), ..ExperimentConfig::defaults(id) }
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn variance_sweep_smoke_at_desk_scale() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig {
        length: 100,
        trials: 200,
        ma_values: vec![30, 60, 90],
        p0: (0..100).step_by(9).collect(),
        ..cfg(ExperimentId::Ex1a, dir.path())
    };
    let sweep = run_variance_sweep(&c).unwrap();
    assert_eq!(sweep.rows.len(), 3 * 12);
    for r in &sweep.rows {
        // normal-theory spread of a sample variance
        let sigma = r.theoretical_var * (2.0 / (c.trials as f64 - 1.0)).sqrt();
        assert!(r.empirical_var.is_finite() && r.estimated_var.is_finite());
        assert!(
            (r.empirical_var - r.theoretical_var).abs() <= 5.0 * sigma + 1e-15,
            "M_A={} p0={}: {} vs {}",
            r.m_a,
            r.p0,
            r.empirical_var,
            r.theoretical_var
        );
    }
    let lines = data_lines(&dir.path().join("ex1a_variance.csv"));
    assert!(lines[0].starts_with("# hermite-cs "));
    assert_eq!(lines[1], "M_A,p0,theoretical_var_37,estimated_var_38,empirical_var,mse_37,mse_38");
    assert_eq!(lines.len(), 2 + 36);
    assert!(lines.iter().all(|l| !l.contains("NaN")));
    let summary = data_lines(&dir.path().join("ex1a_summary.csv"));
    assert_eq!(summary[1], "M_A,mse_37,mse_38,mse_38_whole_bracket");
    assert!(summary.last().unwrap().starts_with("max,"));
}

#[test]
fn variance_law_at_ci_scale() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig { ma_values: vec![120], trials: 700, ..cfg(ExperimentId::Ex1a, dir.path()) };
    let s = run_variance_sweep(&c).unwrap().summary()[0];
    assert!(s.mse_theoretical < 1e-6, "{}", s.mse_theoretical);
    assert!(s.mse_estimated < 1e-6, "{}", s.mse_estimated);
    // compensating the whole bracket leaves a bias that dominates the error
    assert!(s.mse_whole_bracket > s.mse_estimated);
}

#[test]
fn estimated_variance_tracks_empirical_over_available_samples() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig {
        ma_values: MaRange { start: 20, end: 380, step: 20 }.values(),
        p0: vec![266],
        trials: 5000,
        ..cfg(ExperimentId::Ex2, dir.path())
    };
    let sweep = run_variance_sweep(&c).unwrap();
    for r in &sweep.rows {
        let sigma = r.estimated_var * (2.0 / (c.trials as f64 - 1.0)).sqrt();
        assert!(
            (r.empirical_var - r.estimated_var).abs() <= 3.0 * sigma,
            "M_A={}: {} vs {}",
            r.m_a,
            r.empirical_var,
            r.estimated_var
        );
    }
    let header = &data_lines(&dir.path().join("ex2_variance.csv"))[1];
    assert!(header.ends_with(",noise_var_27,empirical_noise_var"));
}

#[test]
fn misdetection_sweep_at_desk_scale() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig {
        ma_values: MaRange { start: 10, end: 200, step: 10 }.values(),
        trials: 500,
        ..cfg(ExperimentId::Ex3, dir.path())
    };
    let (rows, _) = run_misdetection_sweep(&c).unwrap();
    assert_eq!(rows.len(), 100);
    let header = &data_lines(&dir.path().join("ex3_misdetection.csv"))[1];
    assert!(header.starts_with("M_A,component,p_exact_51,p_approx_52,p_empirical"));
    let outside: Vec<String> = rows
        .iter()
        .filter(|r| (r.p_empirical - r.p_exact).abs() > 5.0 * r.binomial_sigma())
        .map(|r| format!("M_A={} c{}: {} vs {:.4}", r.m_a, r.component, r.p_empirical, r.p_exact))
        .collect();
    assert!(outside.is_empty(), "outside 5 sigma: {outside:?}");
}

#[test]
fn threshold_demo_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let demo = run_threshold_demo(&cfg(ExperimentId::Ex4, dir.path())).unwrap();
    for m_a in [56, 108, 154, 176] {
        let rows: Vec<_> = demo.realizations.iter().filter(|r| r.m_a == m_a).collect();
        assert_eq!(rows.len(), 200);
        assert!(rows.iter().all(|r| r.threshold == rows[0].threshold));
    }
    let all_176 = demo.fraction_above(176, 0).unwrap();
    let weak_56 = 1.0 - demo.fraction_above(56, 4).unwrap().max(demo.fraction_above(56, 5).unwrap());
    assert!(all_176 >= 0.97, "all components above T at 176 in {all_176}");
    assert!(weak_56 >= 0.99, "components 4, 5 below T at 56 in at most {weak_56}");
}

#[test]
fn reconstruction_failures_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig { ma_values: vec![12], trials: 30, ..cfg(ExperimentId::Ex5, dir.path()) };
    let summary = run_reconstruction_demo(&c).unwrap();
    assert_eq!(summary.rows.len(), 30);
    assert_eq!(summary.successes(), 0);
    let lines = data_lines(&dir.path().join("ex5_reconstruction.csv"));
    assert_eq!(lines[1], "seed,support_exact_match,signal_mse,status,support_size");
    assert!(lines[2..].iter().all(|l| l.contains(",false,")));
}

#[test]
fn reconstruction_rerun_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        run_experiment(&ExperimentConfig { trials: 25, ..cfg(ExperimentId::Ex5, dir.path()) }).unwrap();
    }
    for name in ["ex5_reconstruction.csv", "ex5_summary.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn histogram_class_means() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_histograms(&ExperimentConfig { trials: 4000, ..cfg(ExperimentId::Histograms, dir.path()) }).unwrap();
    let mono_signal = run.classes.iter().find(|c| c.setting == "mono" && c.is_signal()).unwrap();
    let se = mono_signal.sigma / (mono_signal.samples as f64).sqrt();
    assert!((mono_signal.mean - 0.6).abs() < 3.0 * se, "{}", mono_signal.mean);
    for noise in run.classes.iter().filter(|c| !c.is_signal()) {
        let se = noise.sigma / (noise.samples as f64).sqrt();
        assert!(noise.mean.abs() < 3.0 * se, "{}: {}", noise.setting, noise.mean);
    }
    for c in &run.classes {
        assert_eq!(c.histogram.density.len(), 100);
        let mass: f64 = c.histogram.density.iter().sum::<f64>() * c.histogram.width;
        assert!((mass - 1.0).abs() < 1e-9);
    }
    let bins = data_lines(&dir.path().join("histograms_bins.csv"));
    assert_eq!(bins[1], "setting,class,component,p,bin_center,empirical_density,theoretical_pdf");
    assert_eq!(bins.len(), 2 + 100 * run.classes.len());
}

#[test]
fn svg_output_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig { trials: 10, svg: true, ..cfg(ExperimentId::Ex5, dir.path()) };
    let out = run_experiment(&c).unwrap();
    assert!(out.files.iter().any(|f| f.extension().is_some_and(|e| e == "svg")));
    let svg = fs::read_to_string(dir.path().join("ex5_reconstruction.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let c = ExperimentConfig { trials: 2, ..cfg(ExperimentId::Ex5, &blocker.join("sub")) };
    assert!(matches!(run_experiment(&c), Err(Error::Io(_))));
}

#[test]
fn invalid_sweeps_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = ExperimentConfig { ma_values: vec![0], ..cfg(ExperimentId::Ex3, dir.path()) };
    assert!(matches!(run_experiment(&bad), Err(Error::Config(_))));
    let bad = ExperimentConfig { trials: 0, ..cfg(ExperimentId::Ex3, dir.path()) };
    assert!(matches!(run_experiment(&bad), Err(Error::Config(_))));
}
