//! Parse, normalise, generate and evaluate formulas.

use nand_walk::formula::{compute_stats, generate, parse_expr, Family, InputAssignment};

pub fn run_example() -> nand_walk::Result<()> {
    let expr = parse_expr("OR(AND(x1, x2), NOT(x3))")?;
    let f = expr.to_nand();
    println!("{expr}  ->  {f}");
    for x in InputAssignment::all(3) {
        println!("  {x}: {}", f.evaluate(&x)? as u8);
    }
    for family in ["balanced:3", "chain:5", "random:9:1"] {
        let g = generate(&family.parse::<Family>()?)?;
        let s = compute_stats(&g);
        println!(
            "{family}: N={} depth={} sigma-={:.4} sigma+={:.1} gap bound {:.3e}",
            s.leaves,
            s.depth,
            s.sigma_minus,
            s.sigma_plus,
            s.gap_bound()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nand_walk::Result<()> {
    run_example()
}
