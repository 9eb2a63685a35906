//! Mean and variance of zero-filled coefficients versus the
//! finite-population model, for one component and a few mask sizes.

use hermite_cs::sampling::{initial_estimate, measure, mix_seed, random_mask, synthesize, SparseSignalSpec};
use hermite_cs::stats::{noise_variance, signal_variance_exact};
use hermite_cs::build_basis;

fn main() -> hermite_cs::Result<()> {
    let (m, p0, trials) = (200, 20, 4000);
    let basis = build_basis(m)?;
    let x = synthesize(&SparseSignalSpec::new(m, vec![(p0, 1.0)])?, &basis)?;

    println!("{:>4} {:>8} {:>8} {:>11} {:>11} {:>11} {:>11}", "M_A", "mean", "M_A/M", "var", "model", "noise var", "model");
    for m_a in [40, 80, 120, 160] {
        let (mut sig, mut noise) = (Vec::new(), Vec::new());
        for t in 0..trials {
            let mask = random_mask(m, m_a, mix_seed(m_a as u64, t))?;
            let c = initial_estimate(&measure(&x, &mask)?, &basis)?;
            sig.push(c[p0]);
            noise.extend((0..m).filter(|&p| p != p0).map(|p| c[p]));
        }
        let (mu, var) = moments(&sig);
        let (_, nvar) = moments(&noise);
        println!(
            "{m_a:>4} {mu:>8.4} {:>8.4} {var:>11.4e} {:>11.4e} {nvar:>11.4e} {:>11.4e}",
            m_a as f64 / m as f64,
            signal_variance_exact(p0, &basis, m_a, 1.0)?,
            noise_variance(m, m_a, &[1.0])?
        );
    }
    Ok(())
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mu = xs.iter().sum::<f64>() / n;
    (mu, xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0))
}
