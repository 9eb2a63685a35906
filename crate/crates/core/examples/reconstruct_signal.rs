//! Recover an eight-component signal from 135 of 200 samples.

use hermite_cs::detect::reconstruct;
use hermite_cs::sampling::{measure, random_mask, synthesize, SparseSignalSpec};
use hermite_cs::build_basis;

fn main() -> hermite_cs::Result<()> {
    let basis = build_basis(200)?;
    let spec = SparseSignalSpec::new(
        200,
        vec![(20, 2.5), (124, 3.3), (84, 2.6), (162, 3.1), (37, 2.7), (44, 3.5), (149, 2.3), (189, 3.4)],
    )?;
    let x = synthesize(&spec, &basis)?;
    let mut hits = 0;
    for seed in 1..=10 {
        let r = reconstruct(&measure(&x, &random_mask(200, 135, seed)?)?, &basis, 0.99)?;
        let exact = r.support == spec.support();
        hits += exact as usize;
        println!(
            "seed {seed:2}: T={:.4} support {:?} mse {:.2e} {:?}",
            r.threshold_used.unwrap_or(f64::NAN),
            r.support,
            r.signal_mse(&x),
            r.status
        );
    }
    println!("{hits}/10 exact supports");
    Ok(())
}
