//! Equivalence-preserving restructuring: fan-in expansion and depth
//! rebalancing.
//!
//! Rebalancing uses the separator rewrite
//!
//! ```text
//! F = (y AND F[y:=1]) OR (NOT y AND F[y:=0])
//!   = NAND(NAND(y, F1), NAND(NAND(y), F0))
//! ```
//!
//! where `y` is a subformula on the heavy path whose size is closest to
//! half of `F`. Constant propagation shrinks the two cofactors. A
//! subformula is only split while its depth exceeds `k log2(size)`, so a
//! larger `k` trades depth for size.

use serde::Serialize;

use super::Formula;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Node {
    Const(bool),
    Leaf(u32),
    Nand(Vec<Node>),
}

impl Node {
    fn from_formula(f: &Formula) -> Node {
        match f {
            Formula::Leaf(i) => Node::Leaf(*i),
            Formula::Nand(c) => Node::Nand(c.iter().map(Node::from_formula).collect()),
        }
    }

    fn to_formula(&self) -> Option<Formula> {
        match self {
            Node::Const(_) => None,
            Node::Leaf(i) => Some(Formula::Leaf(*i)),
            Node::Nand(c) => c
                .iter()
                .map(Node::to_formula)
                .collect::<Option<Vec<_>>>()
                .map(Formula::Nand),
        }
    }

    fn size(&self) -> usize {
        match self {
            Node::Const(_) => 0,
            Node::Leaf(_) => 1,
            Node::Nand(c) => c.iter().map(Node::size).sum(),
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Nand(c) => 1 + c.iter().map(Node::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn at(&self, path: &[usize]) -> &Node {
        path.iter().fold(self, |n, &i| match n {
            Node::Nand(c) => &c[i],
            _ => unreachable!("path leaves the tree"),
        })
    }

    fn replaced(&self, path: &[usize], value: Node) -> Node {
        match (path.split_first(), self) {
            (None, _) => value,
            (Some((&i, rest)), Node::Nand(c)) => {
                let mut c = c.clone();
                c[i] = c[i].replaced(rest, value);
                Node::Nand(c)
            }
            _ => unreachable!("path leaves the tree"),
        }
    }
}

/// Constant propagation plus removal of double negations.
fn simplify(node: Node) -> Node {
    let Node::Nand(children) = node else {
        return node;
    };
    let mut kept = Vec::with_capacity(children.len());
    for c in children {
        match simplify(c) {
            Node::Const(false) => return Node::Const(true),
            Node::Const(true) => {}
            other => kept.push(other),
        }
    }
    match kept.len() {
        0 => Node::Const(false),
        1 => match kept.pop().unwrap() {
            Node::Nand(mut inner) if inner.len() == 1 => inner.pop().unwrap(),
            single => Node::Nand(vec![single]),
        },
        _ => Node::Nand(kept),
    }
}

fn not(n: Node) -> Node {
    simplify(Node::Nand(vec![n]))
}

fn nand2(a: Node, b: Node) -> Node {
    Node::Nand(vec![a, b])
}

/// Rewrites every gate with more than `max_fanin` inputs: the first
/// `max_fanin` inputs are folded into `NAND(NAND(..))` (their AND) until the
/// gate fits, which yields a left-leaning tree.
pub fn expand_fanin(formula: &Formula, max_fanin: usize) -> Result<Formula> {
    if max_fanin < 2 {
        return Err(Error::InvalidFanIn(max_fanin));
    }
    Ok(expand(formula, max_fanin))
}

fn expand(f: &Formula, m: usize) -> Formula {
    match f {
        Formula::Leaf(i) => Formula::Leaf(*i),
        Formula::Nand(children) => {
            let mut kids: Vec<Formula> = children.iter().map(|c| expand(c, m)).collect();
            while kids.len() > m {
                let rest = kids.split_off(m);
                let and = Formula::not(Formula::Nand(kids));
                kids = std::iter::once(and).chain(rest).collect();
            }
            Formula::Nand(kids)
        }
    }
}

/// The depth and size limits a rebalanced formula must meet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RebalanceBounds {
    /// `(9 ln 2) k log2 N`
    pub depth: f64,
    /// `N^(1 + 1/log2 k)`
    pub size: f64,
}

impl RebalanceBounds {
    pub fn admits(&self, f: &Formula) -> bool {
        f.depth() as f64 <= self.depth + 1e-9 && f.size() as f64 <= self.size + 1e-9
    }
}

pub fn rebalance_bounds(leaves: usize, k: usize) -> RebalanceBounds {
    let n = leaves as f64;
    let k = k as f64;
    RebalanceBounds {
        depth: 9.0 * std::f64::consts::LN_2 * k * n.log2(),
        size: n.powf(1.0 + 1.0 / k.log2()),
    }
}

/// Restructures `formula` into an equivalent formula with fan-in at most
/// two whose depth is `O(k log N)`.
///
/// The returned formula is checked against [`rebalance_bounds`]; when the
/// restructured tree misses them but the fan-in-expanded input meets them,
/// the expanded input is returned instead.
pub fn rebalance(formula: &Formula, k: usize) -> Result<Formula> {
    if k < 2 {
        return Err(Error::InvalidK(k));
    }
    let expanded = expand(formula, 2);
    let start = simplify(Node::from_formula(&expanded));
    let candidate = restructure(start, k as f64).to_formula();
    let bounds = rebalance_bounds(formula.size(), k);
    Ok(match candidate {
        Some(c) if bounds.admits(&c) || !bounds.admits(&expanded) => c,
        _ => expanded,
    })
}

fn restructure(node: Node, k: f64) -> Node {
    let n = node.size();
    if n <= 2 || node.depth() as f64 <= k * (n as f64).log2() {
        return node;
    }
    let path = separator(&node);
    let y = node.at(&path).clone();
    let high = simplify(node.replaced(&path, Node::Const(true)));
    let low = simplify(node.replaced(&path, Node::Const(false)));
    let y = restructure(y, k);
    let high = restructure(high, k);
    let low = restructure(low, k);
    combine(y, high, low).unwrap_or(node)
}

/// Path to the heavy-path descendant whose size is nearest `size/2`.
fn separator(node: &Node) -> Vec<usize> {
    let half = node.size() as f64 / 2.0;
    let mut path = Vec::new();
    let mut best: Option<(f64, usize)> = None;
    let mut cur = node;
    while let Node::Nand(children) = cur {
        let (i, child) = children
            .iter()
            .enumerate()
            .max_by_key(|(_, c)| c.size())
            .expect("gates have inputs");
        path.push(i);
        cur = child;
        let score = (cur.size() as f64 - half).abs();
        if best.is_none_or(|(b, _)| score < b) {
            best = Some((score, path.len()));
        }
    }
    let (_, len) = best.expect("a gate has at least one descendant");
    path.truncate(len);
    path
}

/// `(y AND high) OR (NOT y AND low)` with constant cofactors folded in.
fn combine(y: Node, high: Node, low: Node) -> Option<Node> {
    use Node::Const;
    Some(match (high, low) {
        (Const(true), Const(false)) => y,
        (Const(false), Const(true)) => not(y),
        (Const(_), Const(_)) => return None,
        (Const(true), g) => nand2(not(y), not(g)),
        (Const(false), g) => not(nand2(not(y), g)),
        (g, Const(true)) => nand2(y, not(g)),
        (g, Const(false)) => not(nand2(y, g)),
        (g1, g0) => nand2(nand2(y.clone(), g1), nand2(not(y), g0)),
    })
}
