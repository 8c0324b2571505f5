//! Depth reduction of a skewed formula.

use nand_walk::formula::{generate, rebalance, rebalance_bounds, Family};

pub fn run_example() -> nand_walk::Result<()> {
    for n in [8, 16, 32, 64] {
        let chain = generate(&Family::Chain(n))?;
        for k in [2, 4] {
            let b = rebalance(&chain, k)?;
            let bounds = rebalance_bounds(n, k);
            println!(
                "N={n:>2} k={k}: depth {:>2} -> {:>2} (bound {:.1}), size {} (bound {:.0})",
                chain.depth(),
                b.depth(),
                bounds.depth,
                b.size(),
                bounds.size
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nand_walk::Result<()> {
    run_example()
}
