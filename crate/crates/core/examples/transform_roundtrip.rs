//! Forward and inverse transform of a sparse signal.

use hermite_cs::sampling::{synthesize, SparseSignalSpec};
use hermite_cs::transform::{forward, inverse};
use hermite_cs::build_basis;

fn main() -> hermite_cs::Result<()> {
    let basis = build_basis(200)?;
    let spec = SparseSignalSpec::new(200, vec![(20, 2.5), (124, 3.3), (84, 2.6)])?;
    let x = synthesize(&spec, &basis)?;
    let c = forward(&x, &basis)?;
    let back = inverse(&c, &basis)?;

    let largest: Vec<_> = {
        let mut idx: Vec<usize> = (0..200).collect();
        idx.sort_by(|&a, &b| c[b].abs().total_cmp(&c[a].abs()));
        idx.into_iter().take(4).map(|p| (p, c[p])).collect()
    };
    println!("largest coefficients: {largest:.6?}");
    let err: f64 = x.as_slice().iter().zip(back.as_slice()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 200.0;
    println!("round-trip MSE: {err:.2e}");
    Ok(())
}
