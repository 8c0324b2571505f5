//! Exact simulation of phase estimation on `-iU` for `U = O_x U_0`.
//!
//! The counter starts in `T^{-1/2} sum_t (-i)^t |t>` and the edge register in
//! `|r'', r'>`. Branch `t` applies `U^t`. After the inverse Fourier transform
//! the amplitude of counter value `k` is
//!
//! ```text
//! A_k = (1/T) sum_t (-i)^t e^{-2 pi i t k / T} U^t |r'', r'>
//! ```
//!
//! and outcome `k` has probability `||A_k||^2`. The walk is real, so the
//! states `U^t |r'', r'>` are real vectors; the phases only enter through the
//! transform. Outcomes `0` and `T/2` signal a zero-energy component and the
//! algorithm answers `phi(x) = 0` when they carry enough mass.

use std::time::Instant;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{compute_stats_with_beta, Formula, FormulaStats, InputAssignment};
use crate::hamiltonian::{build_tree_with_tail, edge_weights, GateTree, WeightedAdjacency, DEFAULT_BETA, INNER_TAIL, OUTER_TAIL};
use crate::szegedy::{quantize_tree, CoinedWalk, NormChoice, Quantization};

/// Counter size per `floor(sqrt(N))` for perfectly balanced binary formulas.
pub const BALANCED_COUNTER_FACTOR: usize = 320;
/// `C` in `T >= C nH sigma_minus sqrt(sigma_plus)` for all other formulas.
pub const GENERAL_COUNTER_CONSTANT: f64 = 100.0;
pub const DEFAULT_ERROR_BUDGET: f64 = 0.2;
pub const DEFAULT_REPETITIONS: usize = 21;
/// Acceptance probability at or above which the answer is `phi(x) = 0`.
pub const DECISION_THRESHOLD: f64 = 0.225;
/// Largest `T * dim` for which the full outcome distribution is computed.
pub const MAX_TRAJECTORY_ENTRIES: usize = 1 << 25;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Decide from the exact acceptance probability.
    #[default]
    Exact,
    /// Draw outcomes with the seeded generator and vote.
    Sampled,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "sampled" => Ok(Mode::Sampled),
            _ => Err(Error::InvalidConfig(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseEstimationConfig {
    /// Counter size `T`; even and at least 2.
    pub counter: usize,
    /// `delta_p = 1 / (10 sigma_minus sqrt(sigma_plus))`.
    pub precision: f64,
    /// `delta_e`, the acceptance bound when `phi(x) = 1`.
    pub error_budget: f64,
    pub repetitions: usize,
    pub mode: Mode,
    pub seed: u64,
}

impl PhaseEstimationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.counter < 2 || self.counter % 2 != 0 {
            return Err(Error::InvalidCounter(self.counter));
        }
        if !(self.precision > 0.0) {
            return Err(Error::InvalidConfig(format!("precision must be positive, got {}", self.precision)));
        }
        if !(self.error_budget > 0.0 && self.error_budget < 0.25) {
            return Err(Error::InvalidConfig(format!(
                "error budget must lie in (0, 1/4), got {}",
                self.error_budget
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("at least one repetition is required".into()));
        }
        Ok(())
    }
}

/// `T = 320 floor(sqrt(N))` for balanced binary formulas, otherwise the
/// smallest even integer at or above `100 nH sigma_minus sqrt(sigma_plus)`.
pub fn default_config(stats: &FormulaStats, nh: f64) -> PhaseEstimationConfig {
    let counter = if stats.balanced_binary {
        BALANCED_COUNTER_FACTOR * (stats.leaves as f64).sqrt().floor() as usize
    } else {
        let raw = (GENERAL_COUNTER_CONSTANT * nh * stats.sigma_minus * stats.sigma_plus.sqrt()).ceil() as usize;
        (raw + raw % 2).max(2)
    };
    PhaseEstimationConfig {
        counter,
        precision: stats.precision(),
        error_budget: DEFAULT_ERROR_BUDGET,
        repetitions: DEFAULT_REPETITIONS,
        mode: Mode::Exact,
        seed: 0,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub counter: usize,
    /// Probability of each counter outcome; empty for acceptance-only runs.
    pub distribution: Vec<f64>,
    /// Mass on outcomes `0` and `T/2`.
    pub acceptance: f64,
    pub mass_zero: f64,
    pub mass_half: f64,
    /// Total probability, `1` up to rounding.
    pub total: f64,
    /// Outcomes drawn in sampled mode.
    pub samples: Vec<usize>,
    /// Estimated `phi(x)`.
    pub decision: bool,
    /// Oracle calls in the longest branch, `T - 1`.
    pub max_queries: usize,
    /// Oracle calls averaged over the uniform counter, `(T - 1) / 2`.
    pub mean_queries: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// See [`RunResult::max_queries`].
pub fn count_queries(result: &RunResult) -> usize {
    result.max_queries
}

fn start_state(walk: &CoinedWalk) -> Result<Vec<f64>> {
    let start = walk
        .arc(OUTER_TAIL, INNER_TAIL)
        .ok_or_else(|| Error::InvalidConfig("walk has no arc (r'', r')".into()))?;
    let mut psi = vec![0.0; walk.dim()];
    psi[start] = 1.0;
    Ok(psi)
}

/// Calls `visit(t, U^t |r'', r'>)` for `t = 0..T`, applying the oracle after
/// every walk step.
fn trajectory(walk: &CoinedWalk, x: &InputAssignment, counter: usize, mut visit: impl FnMut(usize, &[f64])) -> Result<()> {
    let mut psi = start_state(walk)?;
    let mut next = vec![0.0; walk.dim()];
    for t in 0..counter {
        visit(t, &psi);
        if t + 1 < counter {
            walk.step_into(&psi, &mut next);
            walk.apply_oracle(x, &mut next)?;
            std::mem::swap(&mut psi, &mut next);
        }
    }
    Ok(())
}

/// `(-i)^t` times `z`, for real `z`.
fn rotate(t: usize, z: f64) -> Complex64 {
    match t % 4 {
        0 => Complex64::new(z, 0.0),
        1 => Complex64::new(0.0, -z),
        2 => Complex64::new(-z, 0.0),
        _ => Complex64::new(0.0, z),
    }
}

/// Full outcome distribution via one FFT per edge over the stored
/// trajectory. Memory `T * dim`.
pub fn run_phase_estimation(walk: &CoinedWalk, x: &InputAssignment, cfg: &PhaseEstimationConfig) -> Result<RunResult> {
    cfg.validate()?;
    let clock = Instant::now();
    let t_len = cfg.counter;
    let dim = walk.dim();
    let entries = t_len.saturating_mul(dim);
    if entries > MAX_TRAJECTORY_ENTRIES {
        return Err(Error::TooLarge {
            requested: entries,
            limit: MAX_TRAJECTORY_ENTRIES,
        });
    }
    let mut stored = vec![0.0; entries];
    trajectory(walk, x, t_len, |t, psi| {
        stored[t * dim..(t + 1) * dim].copy_from_slice(psi);
    })?;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t_len);
    let mut buffer = vec![Complex64::new(0.0, 0.0); t_len];
    let mut distribution = vec![0.0; t_len];
    let scale = 1.0 / (t_len as f64 * t_len as f64);
    for e in 0..dim {
        for (t, slot) in buffer.iter_mut().enumerate() {
            *slot = rotate(t, stored[t * dim + e]);
        }
        fft.process(&mut buffer);
        for (p, z) in distribution.iter_mut().zip(&buffer) {
            *p += z.norm_sqr() * scale;
        }
    }
    let mass_zero = distribution[0];
    let mass_half = distribution[t_len / 2];
    let total = distribution.iter().sum();
    let mut result = finish(cfg, mass_zero, mass_half, total, Some(&distribution))?;
    result.distribution = distribution;
    result.wall_time_ms = Some(clock.elapsed().as_secs_f64() * 1e3);
    Ok(result)
}

/// Only the two accepting outcomes, streamed in `O(dim)` memory.
pub fn run_acceptance(walk: &CoinedWalk, x: &InputAssignment, cfg: &PhaseEstimationConfig) -> Result<RunResult> {
    cfg.validate()?;
    let clock = Instant::now();
    let dim = walk.dim();
    let mut zero = vec![Complex64::new(0.0, 0.0); dim];
    let mut half = vec![Complex64::new(0.0, 0.0); dim];
    let mut total = 0.0;
    trajectory(walk, x, cfg.counter, |t, psi| {
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        for e in 0..dim {
            let z = rotate(t, psi[e]);
            zero[e] += z;
            half[e] += z * sign;
        }
        total += psi.iter().map(|a| a * a).sum::<f64>();
    })?;
    let t2 = (cfg.counter as f64).powi(2);
    let mass_zero = zero.iter().map(|z| z.norm_sqr()).sum::<f64>() / t2;
    let mass_half = half.iter().map(|z| z.norm_sqr()).sum::<f64>() / t2;
    let total = total / cfg.counter as f64;
    let mut result = finish(cfg, mass_zero, mass_half, total, None)?;
    result.wall_time_ms = Some(clock.elapsed().as_secs_f64() * 1e3);
    Ok(result)
}

fn finish(
    cfg: &PhaseEstimationConfig,
    mass_zero: f64,
    mass_half: f64,
    total: f64,
    distribution: Option<&[f64]>,
) -> Result<RunResult> {
    let acceptance = mass_zero + mass_half;
    let t_len = cfg.counter;
    let mut samples = Vec::new();
    let decision = match cfg.mode {
        Mode::Exact => acceptance < DECISION_THRESHOLD,
        Mode::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let accepted = match distribution {
                Some(d) => {
                    let index = WeightedIndex::new(d.iter().map(|p| p.max(0.0)))
                        .map_err(|e| Error::InvalidConfig(format!("bad outcome distribution: {e}")))?;
                    samples = (0..cfg.repetitions).map(|_| index.sample(&mut rng)).collect();
                    samples.iter().filter(|&&k| k == 0 || k == t_len / 2).count()
                }
                None => (0..cfg.repetitions)
                    .filter(|_| rng.random_bool(acceptance.clamp(0.0, 1.0)))
                    .count(),
            };
            (accepted as f64 / cfg.repetitions as f64) < DECISION_THRESHOLD
        }
    };
    Ok(RunResult {
        counter: t_len,
        distribution: Vec::new(),
        acceptance,
        mass_zero,
        mass_half,
        total,
        samples,
        decision,
        max_queries: t_len - 1,
        mean_queries: (t_len - 1) as f64 / 2.0,
        wall_time_ms: None,
    })
}

/// Settings for [`QuantumEvaluator`]; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluatorOptions {
    pub beta: f64,
    pub norm: NormChoice,
    pub mode: Mode,
    pub seed: u64,
    pub repetitions: usize,
    /// Overrides the default counter size.
    pub counter: Option<usize>,
}

impl Default for EvaluatorOptions {
    fn default() -> Self {
        EvaluatorOptions {
            beta: DEFAULT_BETA,
            norm: NormChoice::Eigenvalue,
            mode: Mode::Exact,
            seed: 0,
            repetitions: DEFAULT_REPETITIONS,
            counter: None,
        }
    }
}

/// All input-independent preprocessing for one formula.
#[derive(Clone, Debug)]
pub struct QuantumEvaluator {
    tree: GateTree,
    h0: WeightedAdjacency,
    stats: FormulaStats,
    quantization: Quantization,
    config: PhaseEstimationConfig,
}

impl QuantumEvaluator {
    pub fn new(formula: &Formula) -> Result<Self> {
        Self::with_options(formula, &EvaluatorOptions::default())
    }

    pub fn with_options(formula: &Formula, options: &EvaluatorOptions) -> Result<Self> {
        let tree = build_tree_with_tail(formula)?;
        let h0 = edge_weights(&tree, options.beta)?;
        let stats = compute_stats_with_beta(formula, options.beta);
        let quantization = quantize_tree(&tree, &h0, options.norm)?;
        let mut config = default_config(&stats, quantization.norm());
        if let Some(t) = options.counter {
            config.counter = t;
        }
        config.mode = options.mode;
        config.seed = options.seed;
        config.repetitions = options.repetitions;
        config.validate()?;
        Ok(QuantumEvaluator {
            tree,
            h0,
            stats,
            quantization,
            config,
        })
    }

    pub fn tree(&self) -> &GateTree {
        &self.tree
    }

    pub fn hamiltonian(&self) -> &WeightedAdjacency {
        &self.h0
    }

    pub fn stats(&self) -> &FormulaStats {
        &self.stats
    }

    pub fn quantization(&self) -> &Quantization {
        &self.quantization
    }

    pub fn walk(&self) -> &CoinedWalk {
        &self.quantization.walk
    }

    pub fn config(&self) -> &PhaseEstimationConfig {
        &self.config
    }

    fn check_input(&self, x: &InputAssignment) -> Result<()> {
        if x.len() < self.tree.num_vars() {
            return Err(Error::InputLength {
                expected: self.tree.num_vars(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Full outcome distribution.
    pub fn run(&self, x: &InputAssignment) -> Result<RunResult> {
        self.check_input(x)?;
        run_phase_estimation(self.walk(), x, &self.config)
    }

    /// Acceptance mass only.
    pub fn run_acceptance(&self, x: &InputAssignment) -> Result<RunResult> {
        self.check_input(x)?;
        run_acceptance(self.walk(), x, &self.config)
    }

    /// Estimated `phi(x)`. Exact mode thresholds the acceptance
    /// probability; sampled mode draws `R` outcomes and votes.
    pub fn evaluate(&self, x: &InputAssignment) -> Result<bool> {
        Ok(self.run_acceptance(x)?.decision)
    }
}

/// One-shot [`QuantumEvaluator::evaluate`].
pub fn evaluate(formula: &Formula, x: &InputAssignment, options: &EvaluatorOptions) -> Result<bool> {
    QuantumEvaluator::with_options(formula, options)?.evaluate(x)
}
