//! Classical randomized pruning and its query scaling.

use nand_walk::baseline::{alpha_beta_evaluate, mean_reluctant_queries};
use nand_walk::formula::{generate, Family, InputAssignment};
use nand_walk::report::fit_exponent;

pub fn run_example() -> nand_walk::Result<()> {
    let f = generate(&Family::Balanced(3))?;
    let x = InputAssignment::parse("00010111")?;
    let (value, reads) = alpha_beta_evaluate(&f, &x, 1)?;
    println!("value {} after reading {reads} of 8 leaves", value as u8);
    let sizes: Vec<usize> = (4..=10).map(|d| 1 << d).collect();
    let mut means = Vec::new();
    for &n in &sizes {
        let g = generate(&Family::Balanced(n.trailing_zeros()))?;
        let m = mean_reluctant_queries(&g, 200, 0)?;
        println!("N={n:>5}: {m:.1} leaf reads");
        means.push(m);
    }
    let ns: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    println!("fitted exponent {:.3}", fit_exponent(&ns, &means).unwrap_or(f64::NAN));
    Ok(())
}

#[allow(dead_code)]
fn main() -> nand_walk::Result<()> {
    run_example()
}
