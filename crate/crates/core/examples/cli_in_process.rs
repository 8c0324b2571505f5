//! Drives the command-line front end in-process.

use std::io::Write;

pub fn run_example() -> nand_walk::Result<()> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    for args in [
        "nandwalk eval --generate balanced:2 --input 0110",
        "nandwalk bench --sizes 1,4,16,64 --trials 100",
    ] {
        let code = nand_walk::cli::run(args.split_whitespace(), &mut out, &mut err);
        writeln!(out, "exit code {code}")?;
    }
    std::io::stdout().write_all(&out)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> nand_walk::Result<()> {
    run_example()
}
