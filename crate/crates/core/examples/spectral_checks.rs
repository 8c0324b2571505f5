//! Zero-energy eigenvector, kernel support and spectral gap on one formula.

use nand_walk::formula::{compute_stats, generate, Family, InputAssignment};
use nand_walk::hamiltonian::{build_tree_with_tail, edge_weights, DEFAULT_BETA, DEFAULT_DENSE_THRESHOLD};
use nand_walk::spectral::analyze;

pub fn run_example() -> nand_walk::Result<()> {
    let f = generate(&Family::Balanced(3))?;
    let tree = build_tree_with_tail(&f)?;
    let h0 = edge_weights(&tree, DEFAULT_BETA)?;
    let stats = compute_stats(&f);
    for bits in ["11111111", "00010111"] {
        let x = InputAssignment::parse(bits)?;
        let r = analyze(&tree, &h0, &x, &stats, DEFAULT_DENSE_THRESHOLD)?;
        println!("{bits}: phi={} kernel dimension {} (matching {})", r.phi as u8, r.kernel_dimension, r.kernel_dimension_oracle);
        if let Some(z) = &r.zero_vector {
            println!("  zero vector residual {:.2e}, overlap {:.6}", z.residual, z.overlap);
        }
        if let Some(g) = &r.gap {
            println!("  smallest tail-supported |E| {:.6} vs bound {:.6}", g.min_supported_energy.unwrap_or(f64::NAN), g.bound);
        }
        println!("  passed {}", r.passed());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nand_walk::Result<()> {
    run_example()
}
