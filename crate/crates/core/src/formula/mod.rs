//! NAND formulas: parsing, classical evaluation, structural statistics and
//! the equivalence-preserving rewrites (gate normalisation, fan-in
//! expansion, depth rebalancing).
//!
//! A [`Formula`] is a read-once tree of NAND gates. Each leaf occurrence is
//! a separate vertex of the tree even when two leaves name the same
//! variable, so the formula size `N` counts leaves with multiplicity while
//! the input width `V` is the largest variable index.

mod generate;
mod parse;
mod rebalance;
mod stats;

use std::fmt;

pub use generate::{generate, Family, MAX_GENERATED_LEAVES};
pub use parse::{parse_expr, parse_formula, ParseError, ParseErrorKind};
pub use rebalance::{expand_fanin, rebalance, rebalance_bounds, RebalanceBounds};
pub use stats::{compute_stats, compute_stats_with_beta, FormulaStats};

use crate::error::{Error, Result};

/// A NAND formula. A one-child gate is a NOT.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    /// Variable occurrence; indices start at 1.
    Leaf(u32),
    Nand(Vec<Formula>),
}

/// Gate kinds accepted by the text grammar before normalisation to NAND.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Nand,
    And,
    Or,
    Not,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::Nand => "NAND",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
        }
    }
}

/// Mixed-gate expression as written in a formula file.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(u32),
    Gate(GateKind, Vec<Expr>),
}

impl Expr {
    /// Direct evaluation with the gate's own semantics (no rewriting).
    pub fn evaluate(&self, x: &InputAssignment) -> Result<bool> {
        match self {
            Expr::Var(i) => x.get(*i),
            Expr::Gate(kind, children) => {
                let mut values = Vec::with_capacity(children.len());
                for c in children {
                    values.push(c.evaluate(x)?);
                }
                Ok(match kind {
                    GateKind::Nand => !values.iter().all(|&v| v),
                    GateKind::And => values.iter().all(|&v| v),
                    GateKind::Or => values.iter().any(|&v| v),
                    GateKind::Not => !values[0],
                })
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        match self {
            Expr::Var(i) => *i as usize,
            Expr::Gate(_, children) => children.iter().map(Expr::num_vars).max().unwrap_or(0),
        }
    }

    /// Rewrite into an all-NAND formula with the same truth table.
    ///
    /// `NOT a -> NAND(a)`, `AND(a..) -> NAND(NAND(a..))`,
    /// `OR(a..) -> NAND(NAND(a1), .., NAND(ak))`.
    pub fn to_nand(&self) -> Formula {
        match self {
            Expr::Var(i) => Formula::Leaf(*i),
            Expr::Gate(kind, children) => {
                let converted: Vec<Formula> = children.iter().map(Expr::to_nand).collect();
                match kind {
                    GateKind::Nand | GateKind::Not => Formula::Nand(converted),
                    GateKind::And => Formula::Nand(vec![Formula::Nand(converted)]),
                    GateKind::Or => Formula::Nand(
                        converted
                            .into_iter()
                            .map(|c| Formula::Nand(vec![c]))
                            .collect(),
                    ),
                }
            }
        }
    }
}

/// See [`Expr::to_nand`].
pub fn to_nand(expr: &Expr) -> Formula {
    expr.to_nand()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Gate(kind, children) => {
                write!(f, "{}(", kind.name())?;
                for (k, c) in children.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl Formula {
    pub fn leaf(index: u32) -> Self {
        Formula::Leaf(index)
    }

    pub fn nand(children: Vec<Formula>) -> Self {
        Formula::Nand(children)
    }

    pub fn not(child: Formula) -> Self {
        Formula::Nand(vec![child])
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Formula::Leaf(_))
    }

    /// Number of leaves, counted with multiplicity.
    pub fn size(&self) -> usize {
        match self {
            Formula::Leaf(_) => 1,
            Formula::Nand(children) => children.iter().map(Formula::size).sum(),
        }
    }

    /// Largest variable index, i.e. the required input width.
    pub fn num_vars(&self) -> usize {
        match self {
            Formula::Leaf(i) => *i as usize,
            Formula::Nand(children) => children.iter().map(Formula::num_vars).max().unwrap_or(0),
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Leaf(_) => 0,
            Formula::Nand(children) => 1 + children.iter().map(Formula::depth).max().unwrap_or(0),
        }
    }

    /// Gate plus leaf count.
    pub fn node_count(&self) -> usize {
        match self {
            Formula::Leaf(_) => 1,
            Formula::Nand(children) => 1 + children.iter().map(Formula::node_count).sum::<usize>(),
        }
    }

    pub fn max_fanin(&self) -> usize {
        match self {
            Formula::Leaf(_) => 0,
            Formula::Nand(children) => children
                .iter()
                .map(Formula::max_fanin)
                .max()
                .unwrap_or(0)
                .max(children.len()),
        }
    }

    /// Variable indices of the leaves, left to right.
    pub fn leaf_vars(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.size());
        fn walk(f: &Formula, out: &mut Vec<u32>) {
            match f {
                Formula::Leaf(i) => out.push(*i),
                Formula::Nand(children) => children.iter().for_each(|c| walk(c, out)),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Checks the structural invariants: indices >= 1 and no empty gate.
    pub fn validate(&self) -> Result<()> {
        match self {
            Formula::Leaf(0) => Err(Error::InvalidFormula("variable index 0".into())),
            Formula::Leaf(_) => Ok(()),
            Formula::Nand(children) if children.is_empty() => {
                Err(Error::InvalidFormula("gate without inputs".into()))
            }
            Formula::Nand(children) => children.iter().try_for_each(Formula::validate),
        }
    }

    /// Classical value: a leaf reads its bit, a gate returns
    /// `1 - prod(children)`.
    pub fn evaluate(&self, x: &InputAssignment) -> Result<bool> {
        match self {
            Formula::Leaf(i) => x.get(*i),
            Formula::Nand(children) => {
                // Evaluate every child so that an out-of-range index is
                // always reported, whatever the short-circuit order.
                let mut all_one = true;
                for c in children {
                    all_one &= c.evaluate(x)?;
                }
                Ok(!all_one)
            }
        }
    }
}

/// See [`Formula::evaluate`].
pub fn evaluate_classical(formula: &Formula, x: &InputAssignment) -> Result<bool> {
    formula.evaluate(x)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Leaf(i) => write!(f, "x{i}"),
            Formula::Nand(children) => {
                f.write_str("NAND(")?;
                for (k, c) in children.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Input bits `x_1 .. x_V`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InputAssignment(Vec<bool>);

impl InputAssignment {
    pub fn new(bits: Vec<bool>) -> Self {
        InputAssignment(bits)
    }

    pub fn zeros(len: usize) -> Self {
        InputAssignment(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        InputAssignment(vec![true; len])
    }

    /// Bits of `index`, most significant first: `x_1` is bit `len - 1`.
    /// This is the order in which bit strings such as `00010111` are read.
    pub fn from_index(index: u64, len: usize) -> Self {
        InputAssignment(
            (0..len)
                .map(|i| (index >> (len - 1 - i)) & 1 == 1)
                .collect(),
        )
    }

    /// Inverse of [`InputAssignment::from_index`].
    pub fn to_index(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Parses a string of `0`/`1` characters, `x_1` first.
    pub fn parse(bits: &str) -> Result<Self> {
        bits.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidBits(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(InputAssignment)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bit `x_index` (1-based).
    pub fn get(&self, index: u32) -> Result<bool> {
        let i = index as usize;
        if i == 0 || i > self.0.len() {
            return Err(Error::InputLength {
                expected: i,
                got: self.0.len(),
            });
        }
        Ok(self.0[i - 1])
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Iterates over every assignment of the given width in index order.
    pub fn all(len: usize) -> impl Iterator<Item = InputAssignment> {
        assert!(len < 64, "exhaustive enumeration limited to 63 bits");
        (0..1u64 << len).map(move |m| InputAssignment::from_index(m, len))
    }

    /// Fails unless every variable of `formula` has a bit.
    pub fn check_covers(&self, formula: &Formula) -> Result<()> {
        let needed = formula.num_vars();
        if self.0.len() < needed {
            return Err(Error::InputLength {
                expected: needed,
                got: self.0.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for InputAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
