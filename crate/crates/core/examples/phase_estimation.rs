//! Exact and sampled phase estimation on the depth-3 balanced tree.

use nand_walk::formula::{generate, Family, InputAssignment};
use nand_walk::walksim::{EvaluatorOptions, Mode, QuantumEvaluator};

pub fn run_example() -> nand_walk::Result<()> {
    let f = generate(&Family::Balanced(3))?;
    let ev = QuantumEvaluator::new(&f)?;
    println!("T = {}, queries per run {}", ev.config().counter, ev.config().counter - 1);
    for bits in ["00010111", "11111111", "01010101"] {
        let x = InputAssignment::parse(bits)?;
        let r = ev.run(&x)?;
        println!(
            "{bits}: phi={} acceptance {:.6} (0: {:.6}, T/2: {:.6}) decision {}",
            f.evaluate(&x)? as u8,
            r.acceptance,
            r.mass_zero,
            r.mass_half,
            r.decision as u8
        );
    }
    let sampled = QuantumEvaluator::with_options(
        &f,
        &EvaluatorOptions {
            mode: Mode::Sampled,
            seed: 7,
            ..Default::default()
        },
    )?;
    let x = InputAssignment::parse("11111111")?;
    println!("sampled decision on 11111111: {}", sampled.evaluate(&x)? as u8);
    Ok(())
}

#[allow(dead_code)]
fn main() -> nand_walk::Result<()> {
    run_example()
}
