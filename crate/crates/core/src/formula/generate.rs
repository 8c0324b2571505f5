use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Formula;
use crate::error::{Error, Result};

/// Upper limit on generated leaf counts.
pub const MAX_GENERATED_LEAVES: usize = 1 << 20;

/// Probability that a generated random subtree is wrapped in a NOT gate.
const RANDOM_NOT_PROBABILITY: f64 = 0.2;

/// Formula families. Random trees use ChaCha8 seeded with `seed`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// Perfect binary NAND tree with `2^n` leaves at depth `n`.
    Balanced(u32),
    /// `x1 NAND (x2 NAND (... NAND xN))`.
    Chain(usize),
    /// Random tree with `leaves` leaves and gate fan-in 1 or 2.
    Random { leaves: usize, seed: u64 },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Balanced(n) => write!(f, "balanced:{n}"),
            Family::Chain(n) => write!(f, "chain:{n}"),
            Family::Random { leaves, seed } => write!(f, "random:{leaves}:{seed}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// `balanced:N`, `chain:N` or `random:N[:SEED]` (seed defaults to 0).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unrecognised family {s:?}"));
        let mut parts = s.split(':');
        let name = parts.next().ok_or_else(bad)?;
        let param: usize = parts
            .next()
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?;
        let family = match name.trim() {
            "balanced" => Family::Balanced(u32::try_from(param).map_err(|_| bad())?),
            "chain" => Family::Chain(param),
            "random" => {
                let seed = match parts.next() {
                    Some(p) => p.trim().parse().map_err(|_| bad())?,
                    None => 0,
                };
                Family::Random {
                    leaves: param,
                    seed,
                }
            }
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(family)
    }
}

pub fn generate(family: &Family) -> Result<Formula> {
    match *family {
        Family::Balanced(n) => {
            let leaves = 1usize
                .checked_shl(n)
                .filter(|&l| n < usize::BITS && l <= MAX_GENERATED_LEAVES)
                .ok_or(Error::TooLarge {
                    requested: if n < usize::BITS { 1 << n } else { usize::MAX },
                    limit: MAX_GENERATED_LEAVES,
                })?;
            let mut next = 1u32;
            let f = balanced(n, &mut next);
            debug_assert_eq!(f.size(), leaves);
            Ok(f)
        }
        Family::Chain(n) => {
            check_leaves(n)?;
            let mut f = Formula::leaf(n as u32);
            for i in (1..n as u32).rev() {
                f = Formula::nand(vec![Formula::leaf(i), f]);
            }
            Ok(f)
        }
        Family::Random { leaves, seed } => {
            check_leaves(leaves)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut next = 1u32;
            Ok(random_tree(leaves, &mut rng, &mut next))
        }
    }
}

fn check_leaves(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig("a formula needs at least one leaf".into()));
    }
    if n > MAX_GENERATED_LEAVES {
        return Err(Error::TooLarge {
            requested: n,
            limit: MAX_GENERATED_LEAVES,
        });
    }
    Ok(())
}

fn balanced(n: u32, next: &mut u32) -> Formula {
    if n == 0 {
        let f = Formula::leaf(*next);
        *next += 1;
        return f;
    }
    let left = balanced(n - 1, next);
    let right = balanced(n - 1, next);
    Formula::nand(vec![left, right])
}

fn random_tree(leaves: usize, rng: &mut ChaCha8Rng, next: &mut u32) -> Formula {
    let core = if leaves == 1 {
        let f = Formula::leaf(*next);
        *next += 1;
        f
    } else {
        let split = rng.random_range(1..leaves);
        let left = random_tree(split, rng, next);
        let right = random_tree(leaves - split, rng, next);
        Formula::nand(vec![left, right])
    };
    if rng.random_bool(RANDOM_NOT_PROBABILITY) {
        Formula::not(core)
    } else {
        core
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn balanced_three_shape() {
        let f = generate(&Family::Balanced(3)).unwrap();
        let expected =
            parse_formula("NAND(NAND(NAND(x1,x2),NAND(x3,x4)),NAND(NAND(x5,x6),NAND(x7,x8)))")
                .unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn chain_shapes() {
        assert_eq!(generate(&Family::Chain(1)).unwrap(), Formula::leaf(1));
        assert_eq!(
            generate(&Family::Chain(3)).unwrap().to_string(),
            "NAND(x1,NAND(x2,x3))"
        );
    }

    #[test]
    fn random_is_deterministic() {
        let fam = Family::Random { leaves: 8, seed: 7 };
        let a = generate(&fam).unwrap();
        let b = generate(&fam).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.size(), 8);
        assert!(a.max_fanin() <= 2);
        assert_eq!(a.leaf_vars(), (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn random_never_stacks_two_nots() {
        fn no_double_not(f: &Formula) -> bool {
            match f {
                Formula::Leaf(_) => true,
                Formula::Nand(c) if c.len() == 1 => {
                    !matches!(&c[0], Formula::Nand(g) if g.len() == 1) && no_double_not(&c[0])
                }
                Formula::Nand(c) => c.iter().all(no_double_not),
            }
        }
        for seed in 0..50 {
            let f = generate(&Family::Random { leaves: 12, seed }).unwrap();
            assert!(no_double_not(&f), "seed {seed}: {f}");
        }
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            generate(&Family::Balanced(40)),
            Err(Error::TooLarge { .. })
        ));
        assert!(generate(&Family::Chain(0)).is_err());
        assert!(generate(&Family::Chain(MAX_GENERATED_LEAVES + 1)).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("balanced:3".parse::<Family>().unwrap(), Family::Balanced(3));
        assert_eq!("chain:4".parse::<Family>().unwrap(), Family::Chain(4));
        assert_eq!(
            "random:8:7".parse::<Family>().unwrap(),
            Family::Random { leaves: 8, seed: 7 }
        );
        assert!("tree:3".parse::<Family>().is_err());
        assert!("chain".parse::<Family>().is_err());
        assert_eq!(
            Family::Random { leaves: 5, seed: 2 }.to_string(),
            "random:5:2"
        );
    }
}
