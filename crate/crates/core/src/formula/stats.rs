use serde::Serialize;

use super::Formula;

/// Input-independent structural statistics of a formula.
///
/// `sigma_minus` and `sigma_plus` are the worst root-to-leaf path sums of
/// `s_w^(-2 beta)` and `s_w`, taken over every vertex of the path. They
/// upper-bound the evaluation-dependent path sums (which only count
/// vertices with a given value), so they can be fixed before the input is
/// known.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulaStats {
    /// Leaf count with multiplicity, `N`.
    pub leaves: usize,
    /// Depth of the root, in edges.
    pub depth: usize,
    /// Subformula leaf counts `s_v`, in preorder.
    pub sizes: Vec<usize>,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub beta: f64,
    /// `sigma_minus <= 4` and `sigma_plus <= 4 N`.
    pub approx_balanced: bool,
    /// Binary fan-in with every leaf at the same depth (includes `N = 1`).
    pub balanced_binary: bool,
}

impl FormulaStats {
    /// `1 / (9 sigma_minus sqrt(sigma_plus))`, the energy below which no
    /// tail-supported eigenvector may exist when the formula evaluates to 1.
    pub fn gap_bound(&self) -> f64 {
        1.0 / (9.0 * self.sigma_minus * self.sigma_plus.sqrt())
    }

    /// `1 / (10 sigma_minus sqrt(sigma_plus))`.
    pub fn precision(&self) -> f64 {
        1.0 / (10.0 * self.sigma_minus * self.sigma_plus.sqrt())
    }
}

pub fn compute_stats(formula: &Formula) -> FormulaStats {
    compute_stats_with_beta(formula, 0.25)
}

pub fn compute_stats_with_beta(formula: &Formula, beta: f64) -> FormulaStats {
    let mut sizes = Vec::with_capacity(formula.node_count());
    let summary = visit(formula, beta, &mut sizes);
    let leaves = summary.size;
    let sigma_minus = summary.sigma_minus;
    let sigma_plus = summary.sigma_plus;
    FormulaStats {
        leaves,
        depth: formula.depth(),
        sizes,
        sigma_minus,
        sigma_plus,
        beta,
        approx_balanced: sigma_minus <= 4.0 && sigma_plus <= 4.0 * leaves as f64,
        balanced_binary: summary.balanced_height.is_some(),
    }
}

struct Summary {
    size: usize,
    sigma_minus: f64,
    sigma_plus: f64,
    balanced_height: Option<usize>,
}

fn visit(f: &Formula, beta: f64, sizes: &mut Vec<usize>) -> Summary {
    let slot = sizes.len();
    sizes.push(0);
    let summary = match f {
        Formula::Leaf(_) => Summary {
            size: 1,
            sigma_minus: 1.0,
            sigma_plus: 1.0,
            balanced_height: Some(0),
        },
        Formula::Nand(children) => {
            let subs: Vec<Summary> = children
                .iter()
                .map(|c| visit(c, beta, sizes))
                .collect();
            let size: usize = subs.iter().map(|s| s.size).sum();
            let s = size as f64;
            let best_minus = subs.iter().map(|s| s.sigma_minus).fold(0.0, f64::max);
            let best_plus = subs.iter().map(|s| s.sigma_plus).fold(0.0, f64::max);
            let balanced_height = match subs.as_slice() {
                [a, b] => match (a.balanced_height, b.balanced_height) {
                    (Some(ha), Some(hb)) if ha == hb => Some(ha + 1),
                    _ => None,
                },
                _ => None,
            };
            Summary {
                size,
                sigma_minus: s.powf(-2.0 * beta) + best_minus,
                sigma_plus: s + best_plus,
                balanced_height,
            }
        }
    };
    sizes[slot] = summary.size;
    summary
}
