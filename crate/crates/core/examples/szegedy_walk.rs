//! Quantize the Hamiltonian into a coined walk and check the eigenvalue
//! correspondence with the discriminant.

use nand_walk::formula::{generate, Family, InputAssignment};
use nand_walk::hamiltonian::{build_tree_with_tail, edge_weights, DEFAULT_BETA};
use nand_walk::szegedy::{quantize_tree, verify_correspondence, NormChoice};

pub fn run_example() -> nand_walk::Result<()> {
    let f = generate(&Family::Balanced(2))?;
    let tree = build_tree_with_tail(&f)?;
    let h0 = edge_weights(&tree, DEFAULT_BETA)?;
    let q = quantize_tree(&tree, &h0, NormChoice::Eigenvalue)?;
    println!(
        "nH = {:.12} after {} power iterations, walk dimension {}",
        q.norm(),
        q.eigen.iterations,
        q.walk.dim()
    );
    println!("max |P o P^t nH - H| = {:.2e}", q.transition.reconstruction_error(&h0));
    let walk = q.walk.with_input(&InputAssignment::parse("1011")?)?;
    let report = verify_correspondence(&walk, &walk.discriminant())?;
    for e in &report.entries {
        let mus: Vec<String> = e.walk_eigenvalues.iter().map(|(re, im)| format!("{re:+.4}{im:+.4}i")).collect();
        println!("  lambda {:+.6} -> {}", e.lambda, mus.join(", "));
    }
    println!("max residual {:.2e}, passed {}", report.max_residual, report.passed());
    Ok(())
}

#[allow(dead_code)]
fn main() -> nand_walk::Result<()> {
    run_example()
}
