//! Probability of missing each component of a five-component signal as the
//! number of available samples grows.

use hermite_cs::sampling::SparseSignalSpec;
use hermite_cs::stats::{expected_component_stats, misdetection_probability_approx, misdetection_probability_exact, DEFAULT_CORRECTION};
use hermite_cs::build_basis;

fn main() -> hermite_cs::Result<()> {
    let basis = build_basis(200)?;
    let spec = SparseSignalSpec::new(200, vec![(20, 1.0), (54, 0.7), (94, 0.5), (162, 0.3), (192, 0.2)])?;
    println!("M_A  component  exact      approx");
    for m_a in (20..=200).step_by(20) {
        let stats = expected_component_stats(&spec, &basis, m_a)?;
        for i in 0..5 {
            let exact = misdetection_probability_exact(i, &stats, 5)?;
            let approx = misdetection_probability_approx(i, &stats, 5, DEFAULT_CORRECTION)?;
            println!("{m_a:>3}  {:>9}  {exact:.3e}  {approx:.3e}", i + 1);
        }
    }
    Ok(())
}
