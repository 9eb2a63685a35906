//! Build the discrete Hermite basis for a few lengths and report its accuracy.

use hermite_cs::build_basis;

fn main() -> hermite_cs::Result<()> {
    for m in [50, 200, 400] {
        let basis = build_basis(m)?;
        let roots = basis.roots();
        println!(
            "M={m:3}  roots in [{:+.4}, {:+.4}]  orthonormality defect {:.2e}",
            roots[0],
            roots[m - 1],
            basis.orthonormality_defect()
        );
    }
    Ok(())
}
