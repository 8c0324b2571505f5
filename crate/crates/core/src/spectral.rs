//! Spectral checks on `H(x)`.
//!
//! When `phi(x) = 0` a zero-energy eigenvector with overlap at least
//! `1/sqrt(2)` on `r''` is built explicitly. When `phi(x) = 1` every
//! eigenvector touching the tail must have `|E| >= 1/(9 sigma_minus sqrt(sigma_plus))`.
//! Kernel vectors vanish on every vertex that evaluates to 1.
//!
//! Dense results come from `nalgebra`'s symmetric eigensolver, checked by
//! reconstruction.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{FormulaStats, InputAssignment};
use crate::hamiltonian::{apply_input, GateTree, WeightedAdjacency, INNER_TAIL, OUTER_TAIL, ROOT};
use crate::linalg::{norm, sorted_symmetric_eigen};

/// `|E| <= KERNEL_TOLERANCE * ||H||` counts as zero energy.
pub const KERNEL_TOLERANCE: f64 = 1e-9;
/// Amplitude above which a vector "has support" at a vertex.
pub const SUPPORT_TOLERANCE: f64 = 1e-8;
pub const GAP_SLACK: f64 = 1e-10;
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const OVERLAP_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Eigensystem {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: DMatrix<f64>,
    pub reconstruction_error: f64,
    pub orthogonality_error: f64,
}

impl Eigensystem {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).iter().copied().collect()
    }

    /// Largest `|E_i + E_{n-1-i}|`.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|i| (self.values[i] + self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

pub fn eigendecompose(h: &WeightedAdjacency, threshold: usize) -> Result<Eigensystem> {
    let m = h.to_dense(threshold)?;
    let (values, vectors) = sorted_symmetric_eigen(m.clone());
    let n = values.len();
    let lambda = DMatrix::from_diagonal(&DVector::from_vec(values.clone()));
    let reconstruction_error = (&vectors * lambda * vectors.transpose() - &m).abs().max();
    let orthogonality_error = (vectors.transpose() * &vectors - DMatrix::<f64>::identity(n, n))
        .abs()
        .max();
    Ok(Eigensystem {
        values,
        vectors,
        reconstruction_error,
        orthogonality_error,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroEigenvector {
    /// Unit norm, `a_{r''} > 0`.
    pub vector: Vec<f64>,
    /// `||H a|| / ||a||`.
    pub residual: f64,
    /// `<r''|a>`.
    pub overlap: f64,
    /// `a_r / ||a_{T_r}||` and its lower bound `1/(sqrt(sigma_minus(r)) N^beta)`.
    pub root_ratio: f64,
    pub root_bound: f64,
    /// Smallest `ratio - bound` over every vertex where the recursion was
    /// rooted.
    pub recursion_margin: f64,
}

/// The recursive zero-energy construction: at a 0-vertex `p` set `a_p = 1`,
/// zero its children, and under each child `v` attach one rescaled
/// zero-energy vector rooted at a 0-grandchild so that the equation at `v`
/// balances. The tail is handled as one more level of the same recursion
/// rooted at `r''`.
pub fn construct_zero_eigenvector(tree: &GateTree, h: &WeightedAdjacency, x: &InputAssignment) -> Result<ZeroEigenvector> {
    if h.vertex_count() != tree.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: tree.vertex_count(),
            got: h.vertex_count(),
        });
    }
    let value = tree.evaluate(x)?;
    if value[ROOT] {
        return Err(Error::WrongEvaluation {
            required: false,
            actual: true,
        });
    }
    let (sigma_minus, _) = tree.path_sums(h.beta());
    let mut builder = ZeroBuilder {
        tree,
        h,
        value: &value,
        sigma_minus: &sigma_minus,
        beta: h.beta(),
        margin: f64::INFINITY,
    };
    let part = builder.build(OUTER_TAIL);
    let mut a = vec![0.0; tree.vertex_count()];
    for &(v, amp) in &part.entries {
        a[v] = amp;
    }
    let len = norm(&a);
    let sign = a[OUTER_TAIL].signum();
    a.iter_mut().for_each(|z| *z *= sign / len);

    let root_subtree: f64 = part
        .entries
        .iter()
        .filter(|&&(v, _)| v >= ROOT)
        .map(|&(_, z)| z * z)
        .sum::<f64>()
        .sqrt();
    let root_amp = part
        .entries
        .iter()
        .find(|&&(v, _)| v == ROOT)
        .map(|&(_, z)| z)
        .unwrap_or(0.0);
    let n = tree.leaves() as f64;
    let ha = h.matvec(&a);
    Ok(ZeroEigenvector {
        residual: norm(&ha),
        overlap: a[OUTER_TAIL],
        root_ratio: root_amp.abs() / root_subtree,
        root_bound: 1.0 / (sigma_minus[ROOT].sqrt() * n.powf(h.beta())),
        recursion_margin: builder.margin,
        vector: a,
    })
}

struct Part {
    /// `(vertex, amplitude)` with the root amplitude first, equal to 1.
    entries: Vec<(usize, f64)>,
    norm_sq: f64,
}

struct ZeroBuilder<'a> {
    tree: &'a GateTree,
    h: &'a WeightedAdjacency,
    value: &'a [bool],
    sigma_minus: &'a [f64],
    beta: f64,
    margin: f64,
}

impl ZeroBuilder<'_> {
    fn build(&mut self, p: usize) -> Part {
        debug_assert!(!self.value[p]);
        let mut entries = vec![(p, 1.0)];
        let mut norm_sq = 1.0;
        for &v in self.tree.children(p) {
            let hpv = self.h.weight(p, v);
            if hpv == 0.0 {
                continue;
            }
            // v evaluates to 1; pick the 0-child giving the smallest norm.
            let mut best: Option<(f64, Part, f64)> = None;
            for &c in self.tree.children(v) {
                let hvc = self.h.weight(v, c);
                if self.value[c] || hvc == 0.0 {
                    continue;
                }
                let sub = self.build(c);
                let scale = -hpv / hvc;
                let cost = scale * scale * sub.norm_sq;
                if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
                    best = Some((cost, sub, scale));
                }
            }
            let (cost, sub, scale) = best.expect("a connected 1-vertex has a connected 0-child");
            norm_sq += cost;
            entries.extend(sub.entries.into_iter().map(|(w, z)| (w, z * scale)));
        }
        let ratio = 1.0 / norm_sq.sqrt();
        let s = self.tree.size(p) as f64;
        let bound = 1.0 / (self.sigma_minus[p].sqrt() * s.powf(self.beta));
        if p >= ROOT {
            self.margin = self.margin.min(ratio - bound);
        }
        Part { entries, norm_sq }
    }
}

/// Vertices connected to `r''` through positive weights.
fn root_component(h: &WeightedAdjacency) -> Vec<bool> {
    let comp = h.components();
    comp.iter().map(|&c| c == comp[OUTER_TAIL]).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportCheck {
    pub kernel_dimension: usize,
    /// Largest kernel amplitude on a 1-vertex of the root component, and on
    /// `r'`, `r''` when `phi(x) = 1`.
    pub max_forbidden_amplitude: f64,
    pub passed: bool,
}

/// Every kernel vector vanishes on each vertex of the root component that
/// evaluates to 1, and on the whole tail when `phi(x) = 1`.
pub fn check_zero_support(tree: &GateTree, h: &WeightedAdjacency, x: &InputAssignment, eig: &Eigensystem) -> Result<SupportCheck> {
    let value = tree.evaluate(x)?;
    let in_root = root_component(h);
    let scale = h.norm_upper_bound().max(f64::MIN_POSITIVE);
    let mut forbidden: Vec<usize> = (0..tree.vertex_count())
        .filter(|&v| value[v] && in_root[v])
        .collect();
    if value[ROOT] {
        forbidden.extend([OUTER_TAIL, INNER_TAIL]);
    }
    let mut kernel_dimension = 0;
    let mut worst = 0.0f64;
    for (i, &e) in eig.values.iter().enumerate() {
        if e.abs() > KERNEL_TOLERANCE * scale {
            continue;
        }
        kernel_dimension += 1;
        for &v in &forbidden {
            worst = worst.max(eig.vectors[(v, i)].abs());
        }
    }
    Ok(SupportCheck {
        kernel_dimension,
        max_forbidden_amplitude: worst,
        passed: worst <= SUPPORT_TOLERANCE,
    })
}

/// Nullity of a weighted forest: `n - 2 nu` with `nu` a maximum matching
/// on the positive-weight edges (greedy from the leaves is optimal on
/// forests).
pub fn forest_nullity(h: &WeightedAdjacency) -> Result<usize> {
    let n = h.vertex_count();
    let positive = h.edges().iter().filter(|e| e.weight > 0.0).count();
    let comps = h.components();
    let mut labels = comps.clone();
    labels.sort_unstable();
    labels.dedup();
    if positive + labels.len() != n {
        return Err(Error::InvalidConfig("graph is not a forest".into()));
    }
    let adj = h.adjacency();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut matched = vec![false; n];
    let mut removed = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut matching = 0;
    while let Some(v) = stack.pop() {
        if removed[v] {
            continue;
        }
        removed[v] = true;
        let partner = adj[v].iter().map(|&(w, _)| w).find(|&w| !removed[w]);
        if let Some(w) = partner {
            if !matched[v] && !matched[w] {
                matched[v] = true;
                matched[w] = true;
                matching += 1;
                removed[w] = true;
                for &(u, _) in &adj[w] {
                    if !removed[u] {
                        degree[u] -= 1;
                        if degree[u] <= 1 {
                            stack.push(u);
                        }
                    }
                }
            } else {
                degree[w] -= 1;
                if degree[w] <= 1 {
                    stack.push(w);
                }
            }
        }
    }
    Ok(n - 2 * matching)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapCheck {
    pub bound: f64,
    /// Smallest `|E|` over eigenvectors with tail support.
    pub min_supported_energy: Option<f64>,
    pub supported_count: usize,
    pub passed: bool,
}

/// Every eigenvector with `|v_{r'}| + |v_{r''}| > 1e-8` has
/// `|E| >= 1/(9 sigma_minus sqrt(sigma_plus)) - 1e-10`. Kernel vectors are
/// not exempt.
pub fn check_spectral_gap(tree: &GateTree, x: &InputAssignment, stats: &FormulaStats, eig: &Eigensystem) -> Result<GapCheck> {
    if !tree.phi(x)? {
        return Err(Error::WrongEvaluation {
            required: true,
            actual: false,
        });
    }
    let bound = stats.gap_bound();
    let mut min_energy: Option<f64> = None;
    let mut count = 0;
    for (i, &e) in eig.values.iter().enumerate() {
        let support = eig.vectors[(OUTER_TAIL, i)].abs() + eig.vectors[(INNER_TAIL, i)].abs();
        if support > SUPPORT_TOLERANCE {
            count += 1;
            min_energy = Some(min_energy.map_or(e.abs(), |m: f64| m.min(e.abs())));
        }
    }
    Ok(GapCheck {
        bound,
        min_supported_energy: min_energy,
        supported_count: count,
        passed: min_energy.is_none_or(|m| m >= bound - GAP_SLACK),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct YBoundVertex {
    pub vertex: usize,
    pub value: bool,
    pub y0: f64,
    pub y1: f64,
    pub gamma: f64,
    /// `alpha_p / alpha_v` if `value` is 0, else `alpha_v / alpha_p`.
    pub ratio: Option<f64>,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct YBoundReport {
    pub energy: f64,
    pub big_gamma: f64,
    pub big_gamma_prime: f64,
    pub vertices: Vec<YBoundVertex>,
    pub gamma_in_range: bool,
    pub violations: usize,
}

/// Amplitudes satisfying `E alpha_v = sum_w H_vw alpha_w` at every vertex
/// except `r''`, with `alpha_{r''} = 1`.
///
/// Ratios `alpha_v / alpha_p = h_pv / (E - sum_c h_vc rho_c)` are computed
/// from the leaves up, then unrolled from `r''` down.
pub fn shooting_vector(tree: &GateTree, h: &WeightedAdjacency, energy: f64) -> Result<Vec<f64>> {
    let n = tree.vertex_count();
    let mut rho = vec![0.0; n];
    for v in (INNER_TAIL..n).rev() {
        let p = tree.parent(v).expect("non-root vertex");
        let hpv = h.weight(p, v);
        if hpv == 0.0 {
            continue;
        }
        let denom = energy - tree.children(v).iter().map(|&c| h.weight(v, c) * rho[c]).sum::<f64>();
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::InvalidConfig(format!("energy {energy} is a pole of the ratio recursion at vertex {v}")));
        }
        rho[v] = hpv / denom;
    }
    let mut alpha = vec![0.0; n];
    alpha[OUTER_TAIL] = 1.0;
    for v in INNER_TAIL..n {
        let p = tree.parent(v).expect("non-root vertex");
        alpha[v] = rho[v] * alpha[p];
    }
    Ok(alpha)
}

/// Recomputes `y_0`, `y_1`, `gamma` bottom-up and checks the ratio bounds
/// of the eigenvector `alpha` at every vertex other than `r''`. Failures are
/// counted, not raised.
pub fn ybound_diagnostic(
    tree: &GateTree,
    h: &WeightedAdjacency,
    x: &InputAssignment,
    stats: &FormulaStats,
    energy: f64,
    alpha: &[f64],
) -> Result<YBoundReport> {
    let limit = stats.gap_bound();
    if !(energy > 0.0 && energy <= limit) {
        return Err(Error::EnergyOutOfRange { energy, limit });
    }
    let n = tree.vertex_count();
    if alpha.len() != n || h.vertex_count() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.len() });
    }
    let scale = norm(alpha);
    let h_alpha = h.matvec(alpha);
    for v in INNER_TAIL..n {
        let residual = (h_alpha[v] - energy * alpha[v]).abs();
        if residual > 1e-9 * scale.max(1.0) {
            return Err(Error::NotLocalEigenvector { vertex: v, residual });
        }
    }
    let value = tree.evaluate(x)?;
    let beta = h.beta();
    let (sigma_minus, sigma_plus) = tree.path_sums(beta);
    let big_gamma = 1.0 / (2.0 * stats.sigma_minus);
    let big_gamma_prime = 8.0 * stats.sigma_minus;
    let mut y0 = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut gamma = vec![0.0; n];
    for v in (INNER_TAIL..n).rev() {
        let p = tree.parent(v).expect("non-root vertex");
        let hpv = h.weight(p, v);
        gamma[v] = big_gamma - big_gamma.powi(2) * sigma_minus[v] - energy.powi(2) * (1.0 + big_gamma_prime) * sigma_plus[v];
        let s = tree.size(v) as f64;
        y1[v] = hpv * s.powf(2.0 * beta) / gamma[v];
        let sum: f64 = tree.children(v).iter().map(|&c| h.weight(v, c) * y1[c]).sum();
        y0[v] = if hpv > 0.0 { (1.0 + sum) / hpv } else { f64::INFINITY };
    }
    let tiny = 1e-10 * scale;
    let mut gamma_in_range = true;
    let mut vertices = Vec::with_capacity(n - 1);
    let mut violations = 0;
    for v in INNER_TAIL..n {
        let p = tree.parent(v).expect("non-root vertex");
        if h.weight(p, v) == 0.0 {
            continue;
        }
        if !(gamma[v] >= 1.0 / big_gamma_prime - 1e-15 && gamma[v] <= big_gamma + 1e-15) {
            gamma_in_range = false;
        }
        let (av, ap) = (alpha[v], alpha[p]);
        let (ratio, ok) = if av.abs() <= tiny && ap.abs() <= tiny {
            (None, true)
        } else if !value[v] {
            if av == 0.0 {
                (None, false)
            } else {
                let r = ap / av;
                (Some(r), r > 0.0 && r <= y0[v] * energy * (1.0 + 1e-9))
            }
        } else if ap == 0.0 {
            (None, false)
        } else {
            let r = av / ap;
            (Some(r), r <= 0.0 && r >= -y1[v] * energy * (1.0 + 1e-9))
        };
        if !ok {
            violations += 1;
        }
        vertices.push(YBoundVertex {
            vertex: v,
            value: value[v],
            y0: y0[v],
            y1: y1[v],
            gamma: gamma[v],
            ratio,
            ok,
        });
    }
    Ok(YBoundReport {
        energy,
        big_gamma,
        big_gamma_prime,
        vertices,
        gamma_in_range,
        violations,
    })
}

/// Every check for one input.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub input: String,
    pub phi: bool,
    pub eigenvalues: Vec<f64>,
    pub reconstruction_error: f64,
    pub symmetry_error: f64,
    pub kernel_dimension: usize,
    pub kernel_dimension_oracle: usize,
    pub support: SupportCheck,
    pub zero_vector: Option<ZeroEigenvectorSummary>,
    pub gap: Option<GapCheck>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroEigenvectorSummary {
    pub residual: f64,
    pub overlap: f64,
    pub root_ratio: f64,
    pub root_bound: f64,
    pub recursion_margin: f64,
}

impl SpectralReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every spectral check on `H(x)` derived from `h0`.
pub fn analyze(
    tree: &GateTree,
    h0: &WeightedAdjacency,
    x: &InputAssignment,
    stats: &FormulaStats,
    threshold: usize,
) -> Result<SpectralReport> {
    let h = apply_input(h0, tree, x)?;
    let eig = eigendecompose(&h, threshold)?;
    let phi = tree.phi(x)?;
    let mut failures = Vec::new();
    if eig.reconstruction_error > 1e-10 || eig.orthogonality_error > 1e-10 {
        failures.push("dense eigendecomposition does not reconstruct H".to_string());
    }
    let symmetry_error = eig.symmetry_error();
    if symmetry_error > 1e-10 {
        failures.push(format!("spectrum not symmetric about 0 ({symmetry_error:e})"));
    }
    let support = check_zero_support(tree, &h, x, &eig)?;
    if !support.passed {
        failures.push(format!(
            "kernel vector has amplitude {:e} on a vertex evaluating to 1",
            support.max_forbidden_amplitude
        ));
    }
    let oracle = forest_nullity(&h)?;
    if oracle != support.kernel_dimension {
        failures.push(format!(
            "kernel dimension {} differs from matching nullity {oracle}",
            support.kernel_dimension
        ));
    }
    let (zero_vector, gap) = if phi {
        let gap = check_spectral_gap(tree, x, stats, &eig)?;
        if !gap.passed {
            failures.push(format!(
                "tail-supported eigenvalue {:e} below the gap bound {:e}",
                gap.min_supported_energy.unwrap_or(f64::NAN),
                gap.bound
            ));
        }
        (None, Some(gap))
    } else {
        let z = construct_zero_eigenvector(tree, &h, x)?;
        if !(z.residual <= RESIDUAL_TOLERANCE) {
            failures.push(format!("zero-energy residual {:e}", z.residual));
        }
        if !(z.overlap >= std::f64::consts::FRAC_1_SQRT_2 - OVERLAP_SLACK) {
            failures.push(format!("overlap {} below 1/sqrt(2)", z.overlap));
        }
        if !(z.root_ratio >= z.root_bound - 1e-12) {
            failures.push(format!("root amplitude ratio {} below {}", z.root_ratio, z.root_bound));
        }
        let summary = ZeroEigenvectorSummary {
            residual: z.residual,
            overlap: z.overlap,
            root_ratio: z.root_ratio,
            root_bound: z.root_bound,
            recursion_margin: z.recursion_margin,
        };
        (Some(summary), None)
    };
    Ok(SpectralReport {
        input: x.to_string(),
        phi,
        eigenvalues: eig.values.clone(),
        reconstruction_error: eig.reconstruction_error,
        symmetry_error,
        kernel_dimension: support.kernel_dimension,
        kernel_dimension_oracle: oracle,
        support,
        zero_vector,
        gap,
        failures,
    })
}
