//! Detection threshold from the coefficients of one undersampled signal.

use hermite_cs::detect::{automatic_threshold, threshold_closed_form, threshold_exact, ThresholdSpec};
use hermite_cs::sampling::{initial_estimate, measure, random_mask, synthesize, SparseSignalSpec};
use hermite_cs::build_basis;

fn main() -> hermite_cs::Result<()> {
    let spec = ThresholdSpec::new(0.99, 200, 0, 1.0)?;
    println!("unit noise, P=0.99, M=200: exact {:.6}, closed form {:.6}", threshold_exact(&spec)?, threshold_closed_form(&spec)?);

    let basis = build_basis(200)?;
    let signal = SparseSignalSpec::new(200, vec![(20, 1.0), (54, 0.7), (94, 0.5), (162, 0.3), (192, 0.2)])?;
    let x = synthesize(&signal, &basis)?;
    for m_a in [56, 108, 154, 176] {
        let c0 = initial_estimate(&measure(&x, &random_mask(200, m_a, 7)?)?, &basis)?;
        let (sigma, t) = automatic_threshold(&c0, m_a, 0.99)?;
        let above: Vec<usize> = (0..200).filter(|&p| c0[p].abs() > t).collect();
        println!("M_A={m_a:3}  sigma_N={sigma:.4}  T={t:.4}  above: {above:?}");
    }
    Ok(())
}
