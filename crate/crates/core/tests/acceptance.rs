//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nand_walk::baseline::{brute_force_truth_table, mean_reluctant_queries};
use nand_walk::cli;
use nand_walk::formula::{compute_stats, generate, rebalance, rebalance_bounds, Family, Formula, InputAssignment};
use nand_walk::hamiltonian::{apply_input, build_tree_with_tail, edge_weights, GateTree, WeightedAdjacency, DEFAULT_BETA};
use nand_walk::report::fit_exponent;
use nand_walk::spectral::construct_zero_eigenvector;
use nand_walk::szegedy::{predicted_discriminant, quantize_tree, verify_correspondence, NormChoice};
use nand_walk::walksim::QuantumEvaluator;

const ACCEPT_ZERO_MIN: f64 = 0.24;
const ACCEPT_ONE_MAX: f64 = 0.2;
const ZERO_RESIDUAL: f64 = 1e-10;
const OVERLAP_SLACK: f64 = 1e-9;
const GAP_SLACK: f64 = 1e-10;
const SUPPORT_THRESHOLD: f64 = 1e-8;
const WALK_RESIDUAL: f64 = 1e-9;
const ROW_NORM_TOL: f64 = 1e-12;
const RECONSTRUCTION_TOL: f64 = 1e-12;
const QUANTUM_EXPONENT: (f64, f64) = (0.50, 0.02);
const CLASSICAL_EXPONENT: (f64, f64) = (0.754, 0.05);
const CLASSICAL_TRIALS: usize = 200;
const SYMMETRY_TOL: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-12;
const KERNEL_REL: f64 = 1e-9;
const KERNEL_SUPPORT_TOL: f64 = 1e-8;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn random_trees() -> Vec<Family> {
    (0..20u64)
        .map(|seed| Family::Random {
            leaves: 3 + (seed as usize % 10),
            seed,
        })
        .collect()
}

/// Formulas with at most 16 leaves used by the spectral sweeps.
fn small_formulas() -> Vec<Family> {
    let mut v: Vec<Family> = (0..=4).map(Family::Balanced).collect();
    v.extend((1..=10).map(Family::Chain));
    v.extend(random_trees());
    v
}

fn dense(h: &WeightedAdjacency) -> DMatrix<f64> {
    h.to_dense(usize::MAX).unwrap()
}

/// Ascending eigenvalues with matching eigenvector columns.
fn eigen(h: &WeightedAdjacency) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(dense(h));
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let cols: Vec<_> = order.iter().map(|&i| e.eigenvectors.column(i).into_owned()).collect();
    let vectors = DMatrix::from_columns(&cols);
    (values, vectors)
}

fn row_sum_bound(h: &WeightedAdjacency) -> f64 {
    h.adjacency()
        .iter()
        .map(|row| row.iter().map(|(_, w)| w).sum::<f64>())
        .fold(0.0, f64::max)
}

fn root_component(h: &WeightedAdjacency) -> Vec<bool> {
    let adj = h.adjacency();
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(w, _) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

fn setup(f: &Formula) -> (GateTree, WeightedAdjacency) {
    let tree = build_tree_with_tail(f).unwrap();
    let h0 = edge_weights(&tree, DEFAULT_BETA).unwrap();
    (tree, h0)
}

fn correctness_sweep() -> Outcome {
    let mut families: Vec<Family> = (1..=3).map(Family::Balanced).collect();
    families.extend((2..=4).map(Family::Chain));
    families.extend(random_trees());
    let (mut inputs, mut mismatches) = (0usize, 0usize);
    for fam in &families {
        let f = generate(fam).unwrap();
        let table = brute_force_truth_table(&f).unwrap();
        let ev = QuantumEvaluator::new(&f).unwrap();
        for (i, x) in InputAssignment::all(f.num_vars()).enumerate() {
            inputs += 1;
            if ev.evaluate(&x).unwrap() != table[i] {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{inputs} inputs on {} formulas, {mismatches} mismatches", families.len()),
    )
}

fn probability_separation() -> Outcome {
    let f = generate(&Family::Balanced(3)).unwrap();
    let ev = QuantumEvaluator::new(&f).unwrap();
    let mut min_zero = f64::INFINITY;
    let mut max_one = 0.0f64;
    for x in InputAssignment::all(8) {
        let acc = ev.run_acceptance(&x).unwrap().acceptance;
        if f.evaluate(&x).unwrap() {
            max_one = max_one.max(acc);
        } else {
            min_zero = min_zero.min(acc);
        }
    }
    outcome(
        min_zero >= ACCEPT_ZERO_MIN && max_one <= ACCEPT_ONE_MAX,
        format!("balanced depth 3: min acceptance (phi=0) {min_zero:.6} >= {ACCEPT_ZERO_MIN}, max acceptance (phi=1) {max_one:.3e} <= {ACCEPT_ONE_MAX}"),
    )
}

fn zero_energy_vectors() -> Outcome {
    let (mut count, mut worst_residual, mut worst_overlap) = (0usize, 0.0f64, f64::INFINITY);
    for fam in small_formulas() {
        let f = generate(&fam).unwrap();
        let (tree, h0) = setup(&f);
        for x in InputAssignment::all(f.num_vars()) {
            if f.evaluate(&x).unwrap() {
                continue;
            }
            let hx = apply_input(&h0, &tree, &x).unwrap();
            let a = construct_zero_eigenvector(&tree, &hx, &x).unwrap().vector;
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ha = hx.matvec(&a);
            let residual = ha.iter().map(|v| v * v).sum::<f64>().sqrt() / norm;
            worst_residual = worst_residual.max(residual);
            worst_overlap = worst_overlap.min(a[0] / norm);
            count += 1;
        }
    }
    let bound = std::f64::consts::FRAC_1_SQRT_2 - OVERLAP_SLACK;
    outcome(
        worst_residual <= ZERO_RESIDUAL && worst_overlap >= bound,
        format!("{count} phi=0 instances: max |Ha|/|a| {worst_residual:.2e} <= {ZERO_RESIDUAL:e}, min <r''|a> {worst_overlap:.6} >= {bound:.9}"),
    )
}

fn spectral_gap() -> Outcome {
    let (mut count, mut violations, mut worst_ratio) = (0usize, 0usize, f64::INFINITY);
    for fam in small_formulas() {
        let f = generate(&fam).unwrap();
        let (tree, h0) = setup(&f);
        let bound = compute_stats(&f).gap_bound();
        for x in InputAssignment::all(f.num_vars()) {
            if !f.evaluate(&x).unwrap() {
                continue;
            }
            count += 1;
            let hx = apply_input(&h0, &tree, &x).unwrap();
            let (values, vectors) = eigen(&hx);
            for (i, e) in values.iter().enumerate() {
                let support = vectors[(0, i)].abs() + vectors[(1, i)].abs();
                if support > SUPPORT_THRESHOLD {
                    worst_ratio = worst_ratio.min(e.abs() / bound);
                    if e.abs() < bound - GAP_SLACK {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{count} phi=1 instances: {violations} tail-supported eigenvalues below the bound, min |E|/bound {worst_ratio:.3}"),
    )
}

fn walk_correspondence() -> Outcome {
    let f = generate(&Family::Balanced(2)).unwrap();
    let (tree, h0) = setup(&f);
    let q = quantize_tree(&tree, &h0, NormChoice::Eigenvalue).unwrap();
    let nh = q.norm();
    let row_error = q.transition.row_norms().iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let reconstruction = h0
        .edges()
        .iter()
        .map(|e| {
            let pp = q.transition.amplitude(e.lo, e.hi) * q.transition.amplitude(e.hi, e.lo);
            (pp - e.weight / nh).abs()
        })
        .fold(0.0, f64::max);

    let mut max_residual = 0.0f64;
    let mut plane_error = 0.0f64;
    let mut failures = 0;
    for bits in ["0000", "1111", "0110", "1000", "1011"] {
        let x = InputAssignment::parse(bits).unwrap();
        let walk = q.walk.with_input(&x).unwrap();
        let hx = apply_input(&h0, &tree, &x).unwrap();
        let flipped: Vec<usize> = tree
            .leaf_vertices()
            .filter(|&(_, var)| x.get(var).unwrap())
            .map(|(v, _)| v)
            .collect();
        let m = predicted_discriminant(&q.transition, &hx, &flipped).unwrap();
        let report = verify_correspondence(&walk, &m).unwrap();
        max_residual = max_residual.max(report.max_residual);
        failures += report.failures.len();

        // Each T|l> lies in the plane where U has eigenvalues
        // l +- i sqrt(1 - l^2), the roots of u^2 - 2 l u + 1.
        let (values, vectors) = {
            let e = SymmetricEigen::new(m.clone());
            (e.eigenvalues, e.eigenvectors)
        };
        let t = walk.isometry();
        for (a, &l) in values.iter().enumerate() {
            let ta: Vec<f64> = (&t * vectors.column(a)).iter().copied().collect();
            let u1 = walk.step(&ta);
            let u2 = walk.step(&u1);
            let err = u2
                .iter()
                .zip(&u1)
                .zip(&ta)
                .map(|((p, q), r)| (p - 2.0 * l * q + r).powi(2))
                .sum::<f64>()
                .sqrt();
            plane_error = plane_error.max(err);
        }
    }
    outcome(
        max_residual <= WALK_RESIDUAL
            && plane_error <= WALK_RESIDUAL
            && failures == 0
            && row_error <= ROW_NORM_TOL
            && reconstruction <= RECONSTRUCTION_TOL,
        format!("balanced depth 2, 5 inputs: eigenvector residual {max_residual:.2e}, plane residual {plane_error:.2e} (<= {WALK_RESIDUAL:e}); row norms 1 +- {row_error:.1e}, P o P^t vs H/nH {reconstruction:.1e} (<= {RECONSTRUCTION_TOL:e})"),
    )
}

fn query_scaling() -> Outcome {
    let qn = [4usize, 16, 64, 256];
    let quantum: Vec<f64> = qn
        .iter()
        .map(|&n| {
            let f = generate(&Family::Balanced(n.trailing_zeros())).unwrap();
            (cli::default_counter(&f, DEFAULT_BETA).unwrap() - 1) as f64
        })
        .collect();
    let qe = fit_exponent(&qn.map(|n| n as f64), &quantum).unwrap();
    let cn: Vec<usize> = (4..=12).map(|d| 1usize << d).collect();
    let classical: Vec<f64> = cn
        .iter()
        .map(|&n| {
            let f = generate(&Family::Balanced(n.trailing_zeros())).unwrap();
            mean_reluctant_queries(&f, CLASSICAL_TRIALS, n as u64).unwrap()
        })
        .collect();
    let ce = fit_exponent(&cn.iter().map(|&n| n as f64).collect::<Vec<_>>(), &classical).unwrap();
    let q_ok = (qe - QUANTUM_EXPONENT.0).abs() <= QUANTUM_EXPONENT.1;
    let c_ok = (ce - CLASSICAL_EXPONENT.0).abs() <= CLASSICAL_EXPONENT.1;
    outcome(
        q_ok && c_ok,
        format!(
            "quantum exponent {qe:.4} (target {} +- {}), classical exponent {ce:.4} (target {} +- {}, {CLASSICAL_TRIALS} trials per size)",
            QUANTUM_EXPONENT.0, QUANTUM_EXPONENT.1, CLASSICAL_EXPONENT.0, CLASSICAL_EXPONENT.1
        ),
    )
}

fn spectrum_symmetry() -> Outcome {
    let (mut count, mut worst) = (0usize, 0.0f64);
    for fam in small_formulas() {
        let f = generate(&fam).unwrap();
        let (tree, h0) = setup(&f);
        for x in InputAssignment::all(f.num_vars()) {
            let hx = apply_input(&h0, &tree, &x).unwrap();
            let (values, _) = eigen(&hx);
            let n = values.len();
            for i in 0..n {
                worst = worst.max((values[i] + values[n - 1 - i]).abs());
            }
            count += 1;
        }
    }
    outcome(worst <= SYMMETRY_TOL, format!("{count} instances, max |E_i + E_(n-1-i)| {worst:.2e} <= {SYMMETRY_TOL:e}"))
}

fn walk_unitarity() -> Outcome {
    let mut families: Vec<Family> = (0..=3).map(Family::Balanced).collect();
    families.extend([Family::Chain(5), Family::Random { leaves: 9, seed: 2 }]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut count, mut worst) = (0usize, 0.0f64);
    for fam in families {
        let f = generate(&fam).unwrap();
        let (tree, h0) = setup(&f);
        let q = quantize_tree(&tree, &h0, NormChoice::Eigenvalue).unwrap();
        for _ in 0..4 {
            let x = InputAssignment::new((0..f.num_vars()).map(|_| rng.random_bool(0.5)).collect());
            let u = q.walk.with_input(&x).unwrap().unitary();
            let d = u.nrows();
            worst = worst.max((&u * u.transpose() - DMatrix::<f64>::identity(d, d)).abs().max());
            count += 1;
        }
    }
    outcome(worst <= UNITARITY_TOL, format!("{count} walks, max |U U^t - I| {worst:.2e} <= {UNITARITY_TOL:e}"))
}

fn kernel_support() -> Outcome {
    let (mut count, mut worst) = (0usize, 0.0f64);
    for fam in small_formulas() {
        let f = generate(&fam).unwrap();
        let (tree, h0) = setup(&f);
        for x in InputAssignment::all(f.num_vars()) {
            let hx = apply_input(&h0, &tree, &x).unwrap();
            let phi = f.evaluate(&x).unwrap();
            let values_at = tree.evaluate(&x).unwrap();
            let reach = root_component(&hx);
            let mut forbidden: Vec<usize> = (0..tree.vertex_count()).filter(|&v| reach[v] && values_at[v]).collect();
            if phi {
                forbidden.extend([0, 1]);
            }
            let (values, vectors) = eigen(&hx);
            let cut = KERNEL_REL * row_sum_bound(&hx);
            for (i, e) in values.iter().enumerate() {
                if e.abs() <= cut {
                    count += 1;
                    for &v in &forbidden {
                        worst = worst.max(vectors[(v, i)].abs());
                    }
                }
            }
        }
    }
    outcome(
        worst <= KERNEL_SUPPORT_TOL,
        format!("{count} kernel vectors, max amplitude on forbidden vertices {worst:.2e} <= {KERNEL_SUPPORT_TOL:e}"),
    )
}

fn rebalance_limits() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut count, mut failures) = (0usize, Vec::new());
    for n in [8usize, 16, 32, 64] {
        for k in [2usize, 4] {
            for fam in [Family::Chain(n), Family::Balanced(n.trailing_zeros()), Family::Random { leaves: n, seed: n as u64 }] {
                let f = generate(&fam).unwrap();
                let g = rebalance(&f, k).unwrap();
                count += 1;
                let bounds = rebalance_bounds(f.size(), k);
                if !bounds.admits(&g) || g.max_fanin() > 2 {
                    failures.push(format!("{fam} k={k}"));
                    continue;
                }
                for _ in 0..100 {
                    let x = InputAssignment::new((0..f.num_vars()).map(|_| rng.random_bool(0.5)).collect());
                    if f.evaluate(&x).unwrap() != g.evaluate(&x).unwrap() {
                        failures.push(format!("{fam} k={k} differs on {x}"));
                        break;
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{count} rebalanced formulas within depth and size bounds and equivalent on 100 inputs each; failures: {failures:?}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let commands: Vec<Vec<String>> = vec![
        "eval --generate chain:4 --input 1111 --mode sampled --seed 5 --reps 21",
        "eval --generate balanced:3 --input 00010111 --distribution",
        "verify --generate balanced:2",
        "verify --generate random:40:3 --samples 8 --seed 9",
        "bench --sizes 4,16,64 --trials 50 --seed 3",
    ]
    .into_iter()
    .map(|c| c.split_whitespace().map(String::from).collect())
    .collect();
    let mut identical = 0;
    for (i, cmd) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let json = dir.path().join(format!("{i}-{round}.json"));
            let mut args = vec!["nandwalk".to_string()];
            args.extend(cmd.iter().cloned());
            args.extend(["--json".to_string(), json.display().to_string()]);
            let mut out = Vec::new();
            let mut err = Vec::new();
            let code = cli::run(args, &mut out, &mut err);
            outputs.push((code, out, std::fs::read(&json).unwrap_or_default()));
        }
        if outputs[0] == outputs[1] && outputs[0].0 == 0 && !outputs[0].2.is_empty() {
            identical += 1;
        }
    }
    outcome(
        identical == commands.len(),
        format!("{identical}/{} commands gave byte-identical text and JSON reports on repeat", commands.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("correctness sweep", correctness_sweep),
        ("acceptance probability separation", probability_separation),
        ("zero-energy eigenvectors", zero_energy_vectors),
        ("spectral gap", spectral_gap),
        ("walk eigenvalue correspondence", walk_correspondence),
        ("query scaling", query_scaling),
        ("property: spectrum symmetry", spectrum_symmetry),
        ("property: walk unitarity", walk_unitarity),
        ("property: kernel support", kernel_support),
        ("property: rebalance bounds", rebalance_limits),
        ("property: deterministic reports", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let clock = Instant::now();
        let r = check();
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status} {name}: {} [{:.1}s]", r.detail, clock.elapsed().as_secs_f64());
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
