//! Command-line front end behind the `nandwalk` binary.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | a verification check failed |
//! | 2 | the formula, a flag or the input bits could not be parsed |
//! | 3 | the input length does not match the formula |
//! | 4 | the instance exceeds a size limit |
//! | 5 | any other error |
//!
//! Reports omit wall-clock times unless `--timings` is given, so equal
//! flags and seeds give byte-identical output.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baseline::{mean_reluctant_queries, mean_uniform_queries};
use crate::error::{Error, Result};
use crate::formula::{compute_stats_with_beta, generate, parse_formula, Family, Formula, InputAssignment};
use crate::hamiltonian::{
    apply_input, build_tree_with_tail, edge_weights, DEFAULT_BETA, DEFAULT_DENSE_THRESHOLD, INNER_TAIL, OUTER_TAIL,
};
use crate::report::{fit_exponent, render_json, render_text, to_value};
use crate::spectral::analyze;
use crate::szegedy::{predicted_discriminant, principal_eigenvector, quantize_tree, verify_correspondence, NormChoice};
use crate::walksim::{default_config, EvaluatorOptions, Mode, PhaseEstimationConfig, QuantumEvaluator, DEFAULT_REPETITIONS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_TOO_LARGE: i32 = 4;
pub const EXIT_OTHER: i32 = 5;

/// Inputs are swept exhaustively up to this many variables.
pub const EXHAUSTIVE_VARS: usize = 16;

/// Tolerance on completed transition rows and on `P o P^t = H / nH`.
pub const TRANSITION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "nandwalk", version, about = "Evaluate NAND formulas with a simulated quantum walk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run phase estimation on one input and print the decision.
    Eval(EvalArgs),
    /// Check the spectral claims and the walk correspondence over inputs.
    Verify(VerifyArgs),
    /// Tabulate quantum and classical query counts against formula size.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// Formula file.
    #[arg(long, value_name = "FILE", required_unless_present = "generate", conflicts_with = "generate")]
    pub formula: Option<PathBuf>,
    /// Generated family: balanced:DEPTH, chain:N or random:N[:SEED].
    #[arg(long, value_name = "FAMILY:PARAM")]
    pub generate: Option<String>,
}

impl Source {
    fn load(&self) -> Result<(Formula, String)> {
        match (&self.formula, &self.generate) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)?;
                Ok((parse_formula(&text)?, path.display().to_string()))
            }
            (None, Some(text)) => {
                let family: Family = text.parse()?;
                Ok((generate(&family)?, family.to_string()))
            }
            (None, None) => Err(Error::InvalidConfig("one of --formula or --generate is required".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub source: Source,
    /// Input bits, x1 first.
    #[arg(long, value_name = "BITS")]
    pub input: String,
    /// exact or sampled.
    #[arg(long, default_value = "exact")]
    pub mode: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Outcomes drawn in sampled mode.
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    /// Counter size override.
    #[arg(long)]
    pub counter: Option<usize>,
    /// Use the row-sum bound for nH instead of the largest eigenvalue.
    #[arg(long)]
    pub row_sum_norm: bool,
    /// Include the full outcome distribution.
    #[arg(long)]
    pub distribution: bool,
    /// Write H(x) as `row col weight` lines.
    #[arg(long, value_name = "PATH")]
    pub export_matrix: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: Source,
    /// Check one input instead of sweeping.
    #[arg(long, value_name = "BITS")]
    pub input: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = DEFAULT_DENSE_THRESHOLD)]
    pub dense_threshold: usize,
    /// Inputs drawn when there are more than 16 variables.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Test hook: overwrite the outer tail weight before any check.
    #[arg(long, value_name = "WEIGHT")]
    pub corrupt_tail_weight: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// balanced, chain or random.
    #[arg(long, default_value = "balanced")]
    pub family: String,
    /// Leaf counts; powers of two for the balanced family.
    #[arg(long, value_delimiter = ',', default_value = "1,4,16,64,256")]
    pub sizes: Vec<usize>,
    /// Classical trials per size.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Classical inputs: reluctant or uniform.
    #[arg(long, default_value = "reluctant")]
    pub inputs: String,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::InvalidFormula(_)
        | Error::InvalidBits(_)
        | Error::InvalidBeta(_)
        | Error::InvalidFanIn(_)
        | Error::InvalidK(_)
        | Error::InvalidCounter(_)
        | Error::InvalidConfig(_) => EXIT_PARSE,
        Error::InputLength { .. } | Error::DimensionMismatch { .. } => EXIT_DIMENSION,
        Error::TooLarge { .. } | Error::OverDenseThreshold { .. } => EXIT_TOO_LARGE,
        _ => EXIT_OTHER,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn parse_input(bits: &str, formula: &Formula) -> Result<InputAssignment> {
    let x = InputAssignment::parse(bits)?;
    if x.len() != formula.num_vars() {
        return Err(Error::InputLength {
            expected: formula.num_vars(),
            got: x.len(),
        });
    }
    Ok(x)
}

fn emit<T: Serialize>(report: &T, json: Option<&PathBuf>, out: &mut dyn Write) -> Result<()> {
    let value = to_value(report)?;
    out.write_all(render_text(&value).as_bytes())?;
    if let Some(path) = json {
        std::fs::write(path, render_json(&value)?)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalReport {
    formula: String,
    source: String,
    leaves: usize,
    variables: usize,
    vertices: usize,
    input: String,
    beta: f64,
    norm: f64,
    sigma_minus: f64,
    sigma_plus: f64,
    counter_rule: &'static str,
    config: PhaseEstimationConfig,
    acceptance: f64,
    mass_zero: f64,
    mass_half: f64,
    total: f64,
    decision: u8,
    classical: u8,
    max_queries: usize,
    mean_queries: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    samples: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<f64>,
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<i32> {
    let (formula, source) = a.source.load()?;
    let x = parse_input(&a.input, &formula)?;
    let options = EvaluatorOptions {
        beta: a.beta,
        norm: if a.row_sum_norm {
            NormChoice::RowSumBound
        } else {
            NormChoice::Eigenvalue
        },
        mode: a.mode.parse::<Mode>()?,
        seed: a.seed,
        repetitions: a.reps,
        counter: a.counter,
    };
    let clock = Instant::now();
    let ev = QuantumEvaluator::with_options(&formula, &options)?;
    let result = if a.distribution { ev.run(&x)? } else { ev.run_acceptance(&x)? };
    let elapsed = clock.elapsed().as_secs_f64() * 1e3;
    if let Some(path) = &a.export_matrix {
        let hx = apply_input(ev.hamiltonian(), ev.tree(), &x)?;
        std::fs::write(path, hx.to_coordinate_text())?;
    }
    let stats = ev.stats();
    let report = EvalReport {
        formula: formula.to_string(),
        source,
        leaves: stats.leaves,
        variables: formula.num_vars(),
        vertices: ev.tree().vertex_count(),
        input: x.to_string(),
        beta: a.beta,
        norm: ev.quantization().norm(),
        sigma_minus: stats.sigma_minus,
        sigma_plus: stats.sigma_plus,
        counter_rule: if a.counter.is_some() {
            "override"
        } else if stats.balanced_binary {
            "320 floor(sqrt(N))"
        } else {
            "even ceil(100 nH sigma_minus sqrt(sigma_plus))"
        },
        config: ev.config().clone(),
        acceptance: result.acceptance,
        mass_zero: result.mass_zero,
        mass_half: result.mass_half,
        total: result.total,
        decision: result.decision as u8,
        classical: formula.evaluate(&x)? as u8,
        max_queries: result.max_queries,
        mean_queries: result.mean_queries,
        samples: result.samples,
        distribution: a.distribution.then_some(result.distribution),
        wall_time_ms: a.timings.then_some(elapsed),
    };
    emit(&report, a.json.as_ref(), out)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct InputVerdict {
    input: String,
    phi: bool,
    spectral: crate::spectral::SpectralReport,
    correspondence_max_residual: f64,
    correspondence_discriminant_error: f64,
    correspondence_failures: Vec<String>,
}

#[derive(Debug, Serialize)]
struct VerifySummary {
    formula: String,
    source: String,
    leaves: usize,
    variables: usize,
    vertices: usize,
    beta: f64,
    sigma_minus: f64,
    sigma_plus: f64,
    gap_bound: f64,
    norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    corrupted_tail_weight: Option<f64>,
    row_norm_error: f64,
    reconstruction_error: f64,
    exhaustive: bool,
    seed: u64,
    inputs_checked: usize,
    inputs_failed: usize,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct VerifyDocument {
    summary: VerifySummary,
    inputs: Vec<InputVerdict>,
}

fn verify_inputs(a: &VerifyArgs, formula: &Formula) -> Result<(Vec<InputAssignment>, bool)> {
    let vars = formula.num_vars();
    if let Some(bits) = &a.input {
        return Ok((vec![parse_input(bits, formula)?], false));
    }
    if vars <= EXHAUSTIVE_VARS {
        return Ok((InputAssignment::all(vars).collect(), true));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let inputs = (0..a.samples)
        .map(|_| InputAssignment::new((0..vars).map(|_| rng.random_bool(0.5)).collect()))
        .collect();
    Ok((inputs, false))
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let (formula, source) = a.source.load()?;
    let tree = build_tree_with_tail(&formula)?;
    if tree.vertex_count() > a.dense_threshold {
        return Err(Error::OverDenseThreshold {
            vertices: tree.vertex_count(),
            threshold: a.dense_threshold,
        });
    }
    let (inputs, exhaustive) = verify_inputs(a, &formula)?;
    let clock = Instant::now();
    let mut h0 = edge_weights(&tree, a.beta)?;
    if let Some(w) = a.corrupt_tail_weight {
        h0.set_weight(OUTER_TAIL, INNER_TAIL, w)?;
    }
    let stats = compute_stats_with_beta(&formula, a.beta);
    let q = quantize_tree(&tree, &h0, NormChoice::Eigenvalue)?;
    let nh = q.norm();
    let row_norm_error = q
        .transition
        .row_norms()
        .iter()
        .map(|r| (r - 1.0).abs())
        .fold(0.0, f64::max);
    let reconstruction_error = q.transition.reconstruction_error(&h0) / nh;

    let mut verdicts = Vec::with_capacity(inputs.len());
    let mut failed = 0;
    for x in &inputs {
        let spectral = analyze(&tree, &h0, x, &stats, a.dense_threshold)?;
        let hx = apply_input(&h0, &tree, x)?;
        let flipped: Vec<usize> = tree
            .leaf_vertices()
            .filter_map(|(v, var)| x.get(var).ok().filter(|&b| b).map(|_| v))
            .collect();
        let m = predicted_discriminant(&q.transition, &hx, &flipped)?;
        let corr = verify_correspondence(&q.walk.with_input(x)?, &m)?;
        let ok = spectral.passed() && corr.passed();
        if !ok {
            failed += 1;
        }
        writeln!(
            out,
            "{} phi={} spectral={} correspondence={}",
            x,
            spectral.phi as u8,
            if spectral.passed() { "pass" } else { "FAIL" },
            if corr.passed() { "pass" } else { "FAIL" },
        )?;
        for f in spectral.failures.iter().chain(&corr.failures) {
            writeln!(out, "  failure: {f}")?;
        }
        verdicts.push(InputVerdict {
            input: x.to_string(),
            phi: spectral.phi,
            spectral,
            correspondence_max_residual: corr.max_residual,
            correspondence_discriminant_error: corr.discriminant_error,
            correspondence_failures: corr.failures,
        });
    }
    let transition_ok = row_norm_error <= TRANSITION_TOLERANCE && reconstruction_error <= TRANSITION_TOLERANCE;
    let passed = failed == 0 && transition_ok;
    let summary = VerifySummary {
        formula: formula.to_string(),
        source,
        leaves: stats.leaves,
        variables: formula.num_vars(),
        vertices: tree.vertex_count(),
        beta: a.beta,
        sigma_minus: stats.sigma_minus,
        sigma_plus: stats.sigma_plus,
        gap_bound: stats.gap_bound(),
        norm: nh,
        corrupted_tail_weight: a.corrupt_tail_weight,
        row_norm_error,
        reconstruction_error,
        exhaustive,
        seed: a.seed,
        inputs_checked: inputs.len(),
        inputs_failed: failed,
        passed,
        wall_time_ms: a.timings.then(|| clock.elapsed().as_secs_f64() * 1e3),
    };
    out.write_all(render_text(&to_value(&summary)?).as_bytes())?;
    if let Some(path) = &a.json {
        let doc = VerifyDocument {
            summary,
            inputs: verdicts,
        };
        std::fs::write(path, render_json(&to_value(&doc)?)?)?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub counter: usize,
    pub quantum_queries: usize,
    pub classical_queries: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    family: String,
    inputs: String,
    trials: usize,
    seed: u64,
    beta: f64,
    rows: Vec<BenchRow>,
    /// Fits use the rows with `N > 1`.
    quantum_exponent: Option<f64>,
    classical_exponent: Option<f64>,
}

fn bench_family(name: &str, n: usize, seed: u64) -> Result<Family> {
    match name {
        "balanced" if n.is_power_of_two() => Ok(Family::Balanced(n.trailing_zeros())),
        "balanced" => Err(Error::InvalidConfig(format!("balanced sizes must be powers of two, got {n}"))),
        "chain" => Ok(Family::Chain(n)),
        "random" => Ok(Family::Random { leaves: n, seed }),
        other => Err(Error::InvalidConfig(format!("unknown family {other:?}"))),
    }
}

/// Counter size `T` of the default configuration.
pub fn default_counter(formula: &Formula, beta: f64) -> Result<usize> {
    let stats = compute_stats_with_beta(formula, beta);
    let nh = if stats.balanced_binary {
        0.0
    } else {
        let tree = build_tree_with_tail(formula)?;
        principal_eigenvector(&edge_weights(&tree, beta)?)?.value
    };
    Ok(default_config(&stats, nh).counter)
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let uniform = match a.inputs.as_str() {
        "reluctant" => false,
        "uniform" => true,
        other => return Err(Error::InvalidConfig(format!("unknown input distribution {other:?}"))),
    };
    let mut rows = Vec::with_capacity(a.sizes.len());
    for &n in &a.sizes {
        let clock = Instant::now();
        let formula = generate(&bench_family(&a.family, n, a.seed)?)?;
        let counter = default_counter(&formula, a.beta)?;
        let classical_queries = if uniform {
            mean_uniform_queries(&formula, a.trials, a.seed)?
        } else {
            mean_reluctant_queries(&formula, a.trials, a.seed)?
        };
        rows.push(BenchRow {
            n,
            counter,
            quantum_queries: counter - 1,
            classical_queries,
            wall_time_ms: a.timings.then(|| clock.elapsed().as_secs_f64() * 1e3),
        });
    }
    let fitted: Vec<&BenchRow> = rows.iter().filter(|r| r.n > 1).collect();
    let ns: Vec<f64> = fitted.iter().map(|r| r.n as f64).collect();
    let quantum: Vec<f64> = fitted.iter().map(|r| r.quantum_queries as f64).collect();
    let classical: Vec<f64> = fitted.iter().map(|r| r.classical_queries).collect();
    let report = BenchReport {
        family: a.family.clone(),
        inputs: a.inputs.clone(),
        trials: a.trials,
        seed: a.seed,
        beta: a.beta,
        quantum_exponent: fit_exponent(&ns, &quantum),
        classical_exponent: fit_exponent(&ns, &classical),
        rows,
    };
    writeln!(out, "{:>8} {:>10} {:>16} {:>18}", "N", "T", "quantum_queries", "classical_queries")?;
    for r in &report.rows {
        writeln!(
            out,
            "{:>8} {:>10} {:>16} {:>18.3}",
            r.n, r.counter, r.quantum_queries, r.classical_queries
        )?;
    }
    let fmt = |e: Option<f64>| e.map_or("none".to_string(), |v| format!("{v:.4}"));
    writeln!(out, "quantum_exponent: {}", fmt(report.quantum_exponent))?;
    writeln!(out, "classical_exponent: {}", fmt(report.classical_exponent))?;
    if let Some(path) = &a.json {
        std::fs::write(path, render_json(&to_value(&report)?)?)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("nandwalk").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eval_balanced2_zeros() {
        let (code, out, _) = call(&["eval", "--generate", "balanced:2", "--input", "0000"]);
        assert_eq!(code, 0);
        assert!(out.contains("decision: 0\n"), "{out}");
        assert!(out.contains("classical: 0\n"));
        assert!(!out.contains("wall_time_ms"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["eval", "--generate", "balanced:2", "--input", "000"]).0, 3);
        assert_eq!(call(&["eval", "--generate", "balanced:2", "--input", "00a0"]).0, 2);
        assert_eq!(call(&["eval", "--generate", "bogus:2", "--input", "0"]).0, 2);
        assert_eq!(call(&["eval", "--input", "0"]).0, 2);
        assert_eq!(call(&["verify", "--generate", "balanced:3", "--dense-threshold", "10"]).0, 4);
    }

    #[test]
    fn bench_rejects_non_power_of_two() {
        assert_eq!(call(&["bench", "--sizes", "3"]).0, 2);
    }
}
