//! Run a reduced coefficient-histogram experiment and write its CSV files.
//!
//! `cargo run --release --example run_experiment -- [out_dir]`

use hermite_cs::harness::{run_histograms, ExperimentConfig, ExperimentId};

fn main() -> hermite_cs::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/example".into());
    let cfg = ExperimentConfig { trials: 2000, out: out.into(), svg: true, ..ExperimentConfig::defaults(ExperimentId::Histograms) };
    let run = run_histograms(&cfg)?;
    for c in &run.classes {
        let class = c.p.map_or("noise".to_string(), |p| format!("p={p}"));
        println!("{:5} {class:8} mean {:+.4}  sigma {:.4}  KS {:.4}", c.setting, c.mean, c.sigma, c.ks);
    }
    for f in &run.output.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
