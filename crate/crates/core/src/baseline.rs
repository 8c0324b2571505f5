//! Classical evaluators: exhaustive truth tables and randomized
//! alpha-beta pruning with leaf-read counting.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formula::{Formula, InputAssignment};

/// Largest variable count accepted by [`brute_force_truth_table`].
pub const MAX_TRUTH_TABLE_VARS: usize = 20;

/// Zero-error randomized evaluation. Inputs of every gate are visited in a
/// uniformly random order and the gate stops at the first input that is 0.
/// Returns the value and the number of leaves read.
pub fn alpha_beta_evaluate(formula: &Formula, x: &InputAssignment, seed: u64) -> Result<(bool, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    alpha_beta_with_rng(formula, x, &mut rng)
}

pub fn alpha_beta_with_rng<R: Rng>(formula: &Formula, x: &InputAssignment, rng: &mut R) -> Result<(bool, usize)> {
    x.check_covers(formula)?;
    let mut reads = 0;
    let value = visit(formula, x, rng, &mut reads)?;
    Ok((value, reads))
}

fn visit<R: Rng>(f: &Formula, x: &InputAssignment, rng: &mut R, reads: &mut usize) -> Result<bool> {
    match f {
        Formula::Leaf(i) => {
            *reads += 1;
            x.get(*i)
        }
        Formula::Nand(children) => {
            let mut order: Vec<&Formula> = children.iter().collect();
            order.shuffle(rng);
            for c in order {
                if !visit(c, x, rng, reads)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// `phi` on all `2^V` inputs, indexed with `x1` as the most significant bit.
pub fn brute_force_truth_table(formula: &Formula) -> Result<Vec<bool>> {
    let vars = formula.num_vars();
    if vars > MAX_TRUTH_TABLE_VARS {
        return Err(Error::TooLarge {
            requested: vars,
            limit: MAX_TRUTH_TABLE_VARS,
        });
    }
    InputAssignment::all(vars).map(|x| formula.evaluate(&x)).collect()
}

/// Draws an input on which pruning helps least: the root value is a fair
/// coin, every gate that must output 1 has exactly one 0-input (chosen
/// uniformly), and every gate that must output 0 has all inputs 1.
///
/// Variables must occur once each.
pub fn reluctant_input<R: Rng>(formula: &Formula, rng: &mut R) -> Result<InputAssignment> {
    let vars = formula.leaf_vars();
    let mut sorted = vars.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != vars.len() {
        return Err(Error::InvalidFormula("reluctant inputs need distinct variables".into()));
    }
    let mut bits = vec![false; formula.num_vars()];
    let root = rng.random_bool(0.5);
    assign(formula, root, rng, &mut bits);
    Ok(InputAssignment::new(bits))
}

fn assign<R: Rng>(f: &Formula, target: bool, rng: &mut R, bits: &mut [bool]) {
    match f {
        Formula::Leaf(i) => bits[*i as usize - 1] = target,
        Formula::Nand(children) => {
            let zero = if target { Some(rng.random_range(0..children.len())) } else { None };
            for (k, c) in children.iter().enumerate() {
                assign(c, zero != Some(k), rng, bits);
            }
        }
    }
}

/// Mean leaf reads over `trials` reluctant inputs, each with its own
/// child ordering. Deterministic in `seed`.
pub fn mean_reluctant_queries(formula: &Formula, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidConfig("at least one trial is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0usize;
    for _ in 0..trials {
        let x = reluctant_input(formula, &mut rng)?;
        let (value, reads) = alpha_beta_with_rng(formula, &x, &mut rng)?;
        debug_assert_eq!(value, formula.evaluate(&x)?);
        total += reads;
    }
    Ok(total as f64 / trials as f64)
}

/// Mean leaf reads over `trials` uniformly random inputs.
pub fn mean_uniform_queries(formula: &Formula, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidConfig("at least one trial is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = formula.num_vars();
    let mut total = 0usize;
    for _ in 0..trials {
        let x = InputAssignment::new((0..vars).map(|_| rng.random_bool(0.5)).collect());
        total += alpha_beta_with_rng(formula, &x, &mut rng)?.1;
    }
    Ok(total as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{generate, parse_formula, Family};

    #[test]
    fn not_truth_table() {
        let f = parse_formula("NAND(x1)").unwrap();
        assert_eq!(brute_force_truth_table(&f).unwrap(), vec![true, false]);
    }

    #[test]
    fn balanced3_sample_entry() {
        let f = generate(&Family::Balanced(3)).unwrap();
        let table = brute_force_truth_table(&f).unwrap();
        assert_eq!(table.len(), 256);
        assert!(table[0b0001_0111]);
    }

    #[test]
    fn balanced2_table_against_hand_recursion() {
        let f = generate(&Family::Balanced(2)).unwrap();
        let table = brute_force_truth_table(&f).unwrap();
        for idx in 0..16usize {
            let b = |k: usize| (idx >> (3 - k)) & 1 == 1;
            let left = !(b(0) && b(1));
            let right = !(b(2) && b(3));
            assert_eq!(table[idx], !(left && right), "index {idx}");
        }
    }

    #[test]
    fn too_many_vars() {
        let f = generate(&Family::Chain(21)).unwrap();
        assert!(matches!(brute_force_truth_table(&f), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn nand2_expected_reads() {
        // x = (0, 1): reads 1 if x1 comes first, 2 otherwise; mean 1.5.
        let f = parse_formula("NAND(x1,x2)").unwrap();
        let x = InputAssignment::parse("01").unwrap();
        let mean: f64 = (0..4000)
            .map(|s| alpha_beta_evaluate(&f, &x, s).unwrap().1 as f64)
            .sum::<f64>()
            / 4000.0;
        assert!((mean - 1.5).abs() < 0.05, "{mean}");
        let (v, reads) = alpha_beta_evaluate(&f, &InputAssignment::ones(2), 3).unwrap();
        assert!(!v);
        assert_eq!(reads, 2);
    }

    #[test]
    fn alpha_beta_is_exact_and_bounded() {
        for family in [Family::Balanced(3), Family::Chain(6), Family::Random { leaves: 9, seed: 4 }] {
            let f = generate(&family).unwrap();
            let table = brute_force_truth_table(&f).unwrap();
            for (i, x) in InputAssignment::all(f.num_vars()).enumerate() {
                let (v, reads) = alpha_beta_evaluate(&f, &x, i as u64).unwrap();
                assert_eq!(v, table[i]);
                assert!(reads <= f.size());
            }
        }
    }

    #[test]
    fn reluctant_inputs_hit_the_target_value() {
        let f = generate(&Family::Balanced(4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut seen = [false; 2];
        for _ in 0..20 {
            let x = reluctant_input(&f, &mut rng).unwrap();
            seen[f.evaluate(&x).unwrap() as usize] = true;
        }
        assert_eq!(seen, [true, true]);
        let repeated = parse_formula("NAND(x1,x1)").unwrap();
        assert!(reluctant_input(&repeated, &mut rng).is_err());
    }

    #[test]
    fn means_are_deterministic() {
        let f = generate(&Family::Balanced(4)).unwrap();
        let a = mean_reluctant_queries(&f, 50, 1).unwrap();
        assert_eq!(a, mean_reluctant_queries(&f, 50, 1).unwrap());
        assert!(a <= 16.0);
        assert!(mean_uniform_queries(&f, 50, 1).unwrap() <= a + 3.0);
    }
}
