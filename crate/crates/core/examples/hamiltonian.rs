//! Weighted adjacency matrix of the tree with its two-vertex tail.

use nand_walk::formula::{generate, Family, InputAssignment};
use nand_walk::hamiltonian::{apply_input, build_tree_with_tail, edge_weights, DEFAULT_BETA};

pub fn run_example() -> nand_walk::Result<()> {
    let f = generate(&Family::Balanced(2))?;
    let tree = build_tree_with_tail(&f)?;
    let h0 = edge_weights(&tree, DEFAULT_BETA)?;
    println!("{} vertices, tail weight {:.6}", tree.vertex_count(), h0.tail_weight());
    for e in h0.edges() {
        println!("  {:>2} - {:>2}: {:.6}", e.lo, e.hi, e.weight);
    }
    let x = InputAssignment::parse("0110")?;
    let hx = apply_input(&h0, &tree, &x)?;
    println!("H(x) for x = {x}, phi = {}:", tree.phi(&x)? as u8);
    print!("{}", hx.to_coordinate_text());
    Ok(())
}

#[allow(dead_code)]
fn main() -> nand_walk::Result<()> {
    run_example()
}
