//! The formula tree with its two-vertex tail and the weighted adjacency
//! matrix `H` on it.
//!
//! Vertices are numbered in preorder after the tail: `r''` is 0, `r'` is 1,
//! the formula root `r` is 2. A formula that is a bare variable has the leaf
//! itself as `r`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{Formula, InputAssignment};

pub const OUTER_TAIL: usize = 0;
pub const INNER_TAIL: usize = 1;
pub const ROOT: usize = 2;

/// Largest vertex count converted to a dense matrix unless overridden.
pub const DEFAULT_DENSE_THRESHOLD: usize = 4096;

pub const DEFAULT_BETA: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VertexRole {
    OuterTail,
    InnerTail,
    Root,
    Gate,
    Leaf,
}

#[derive(Clone, Debug)]
pub struct GateTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    sizes: Vec<usize>,
    vars: Vec<Option<u32>>,
    roles: Vec<VertexRole>,
    num_vars: usize,
}

/// Builds `T(phi)` with the tail `r'' - r' - r` attached below the root.
pub fn build_tree_with_tail(formula: &Formula) -> Result<GateTree> {
    formula.validate()?;
    let n = formula.node_count() + 2;
    let mut tree = GateTree {
        parent: Vec::with_capacity(n),
        children: Vec::with_capacity(n),
        sizes: Vec::with_capacity(n),
        vars: Vec::with_capacity(n),
        roles: Vec::with_capacity(n),
        num_vars: formula.num_vars(),
    };
    let total = formula.size();
    tree.push(None, VertexRole::OuterTail, total, None);
    tree.push(Some(OUTER_TAIL), VertexRole::InnerTail, total, None);
    tree.insert(formula, INNER_TAIL, true);
    debug_assert_eq!(tree.vertex_count(), n);
    Ok(tree)
}

impl GateTree {
    fn push(&mut self, parent: Option<usize>, role: VertexRole, size: usize, var: Option<u32>) -> usize {
        let v = self.parent.len();
        self.parent.push(parent);
        self.children.push(Vec::new());
        self.sizes.push(size);
        self.vars.push(var);
        self.roles.push(role);
        if let Some(p) = parent {
            self.children[p].push(v);
        }
        v
    }

    fn insert(&mut self, f: &Formula, parent: usize, is_root: bool) -> usize {
        let role = |leaf| match (is_root, leaf) {
            (true, _) => VertexRole::Root,
            (false, true) => VertexRole::Leaf,
            (false, false) => VertexRole::Gate,
        };
        match f {
            Formula::Leaf(i) => self.push(Some(parent), role(true), 1, Some(*i)),
            Formula::Nand(children) => {
                let v = self.push(Some(parent), role(false), 0, None);
                let mut size = 0;
                for c in children {
                    let cv = self.insert(c, v, false);
                    size += self.sizes[cv];
                }
                self.sizes[v] = size;
                v
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    /// Formula size `N`.
    pub fn leaves(&self) -> usize {
        self.sizes[ROOT]
    }

    /// Input width the formula reads.
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// `s_v`; the tail vertices carry `N`.
    pub fn size(&self, v: usize) -> usize {
        self.sizes[v]
    }

    pub fn role(&self, v: usize) -> VertexRole {
        self.roles[v]
    }

    /// Variable read at `v`, if `v` is a leaf of the formula.
    pub fn var(&self, v: usize) -> Option<u32> {
        self.vars[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.vars[v].is_some()
    }

    /// `(vertex, variable)` for every formula leaf, in preorder.
    pub fn leaf_vertices(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter_map(|(v, var)| var.map(|i| (v, i)))
    }

    /// Value of the subformula at every vertex. Tail vertices act as NOT
    /// gates, so the outer tail carries `phi(x)`.
    pub fn evaluate(&self, x: &InputAssignment) -> Result<Vec<bool>> {
        if x.len() < self.num_vars {
            return Err(Error::InputLength {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        let mut value = vec![false; self.vertex_count()];
        // Preorder puts children after parents; sweep backwards.
        for v in (0..self.vertex_count()).rev() {
            value[v] = match self.vars[v] {
                Some(i) => x.get(i)?,
                None => !self.children[v].iter().all(|&c| value[c]),
            };
        }
        debug_assert_eq!(value[OUTER_TAIL], value[ROOT]);
        Ok(value)
    }

    pub fn phi(&self, x: &InputAssignment) -> Result<bool> {
        Ok(self.evaluate(x)?[ROOT])
    }

    /// Worst path sums from every vertex up to a leaf:
    /// `(sum of s_w^(-2 beta), sum of s_w)` over all path vertices.
    pub fn path_sums(&self, beta: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.vertex_count();
        let mut minus = vec![0.0; n];
        let mut plus = vec![0.0; n];
        for v in (0..n).rev() {
            let s = self.sizes[v] as f64;
            let (m, p) = self.children[v]
                .iter()
                .fold((0.0f64, 0.0f64), |(m, p), &c| (m.max(minus[c]), p.max(plus[c])));
            minus[v] = s.powf(-2.0 * beta) + m;
            plus[v] = s + p;
        }
        (minus, plus)
    }
}

/// One undirected edge, stored with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub lo: usize,
    pub hi: usize,
    pub weight: f64,
}

/// Sparse symmetric nonnegative matrix with zero diagonal, one entry per
/// undirected edge. Edges of weight zero are kept so that `H(x)` and
/// `H_{0^N}` share their structure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedAdjacency {
    n: usize,
    edges: Vec<Edge>,
    beta: f64,
    tail_weight: f64,
}

impl WeightedAdjacency {
    /// General constructor. Rejects loops, repeated edges, out-of-range
    /// endpoints and negative or non-finite weights.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut list: Vec<Edge> = Vec::new();
        for (a, b, w) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidConfig(format!("bad edge ({a}, {b}) for {n} vertices")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidConfig(format!("bad weight {w} on edge ({a}, {b})")));
            }
            list.push(Edge {
                lo: a.min(b),
                hi: a.max(b),
                weight: w,
            });
        }
        list.sort_by_key(|e| (e.lo, e.hi));
        if list.windows(2).any(|w| (w[0].lo, w[0].hi) == (w[1].lo, w[1].hi)) {
            return Err(Error::InvalidConfig("repeated edge".into()));
        }
        Ok(WeightedAdjacency {
            n,
            edges: list,
            beta: DEFAULT_BETA,
            tail_weight: 0.0,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `h_{r'' r'}` as built; zero for matrices not built from a tree.
    pub fn tail_weight(&self) -> f64 {
        self.tail_weight
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by_key(&key, |e| (e.lo, e.hi))
            .map(|i| self.edges[i].weight)
            .unwrap_or(0.0)
    }

    /// Overwrites the weight of an existing edge.
    pub fn set_weight(&mut self, a: usize, b: usize, weight: f64) -> Result<()> {
        let key = (a.min(b), a.max(b));
        let i = self
            .edges
            .binary_search_by_key(&key, |e| (e.lo, e.hi))
            .map_err(|_| Error::InvalidConfig(format!("no edge ({a}, {b})")))?;
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::InvalidConfig(format!("bad weight {weight}")));
        }
        self.edges[i].weight = weight;
        if key == (OUTER_TAIL, INNER_TAIL) {
            self.tail_weight = weight;
        }
        Ok(())
    }

    /// Neighbour lists over positive-weight edges, sorted by neighbour.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in self.edges.iter().filter(|e| e.weight > 0.0) {
            adj[e.lo].push((e.hi, e.weight));
            adj[e.hi].push((e.lo, e.weight));
        }
        for list in &mut adj {
            list.sort_by_key(|&(w, _)| w);
        }
        adj
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for e in &self.edges {
            out[e.lo] += e.weight * v[e.hi];
            out[e.hi] += e.weight * v[e.lo];
        }
        out
    }

    pub fn to_dense(&self, threshold: usize) -> Result<DMatrix<f64>> {
        if self.n > threshold {
            return Err(Error::OverDenseThreshold {
                vertices: self.n,
                threshold,
            });
        }
        let mut m = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            m[(e.lo, e.hi)] = e.weight;
            m[(e.hi, e.lo)] = e.weight;
        }
        Ok(m)
    }

    /// Largest absolute row sum; bounds the spectral norm from above.
    pub fn norm_upper_bound(&self) -> f64 {
        let mut rows = vec![0.0f64; self.n];
        for e in &self.edges {
            rows[e.lo] += e.weight;
            rows[e.hi] += e.weight;
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Connected components over positive-weight edges; returns the
    /// component label of every vertex.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(v) = stack.pop() {
                for &(w, _) in &adj[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Coordinate listing `row col weight`, both orientations of every
    /// nonzero entry, 0-indexed, 17 significant digits.
    pub fn to_coordinate_text(&self) -> String {
        let mut entries: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .filter(|e| e.weight != 0.0)
            .flat_map(|e| [(e.lo, e.hi, e.weight), (e.hi, e.lo, e.weight)])
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut out = String::new();
        for (r, c, w) in entries {
            let _ = writeln!(out, "{r} {c} {w:.16e}");
        }
        out
    }
}

/// `H_{0^N}`: every leaf edge present. Interior and tail-to-root edges get
/// `s_v^beta / s_p^(1/2 - beta)`; the outer tail edge gets
/// `1 / (sqrt(sigma_minus(r)) N^(1/2 - beta))`.
pub fn edge_weights(tree: &GateTree, beta: f64) -> Result<WeightedAdjacency> {
    if !(beta > 0.0 && beta <= 0.5) {
        return Err(Error::InvalidBeta(beta));
    }
    let (sigma_minus, _) = tree.path_sums(beta);
    let n = tree.leaves() as f64;
    let tail_weight = 1.0 / (sigma_minus[ROOT].sqrt() * n.powf(0.5 - beta));
    let mut edges = Vec::with_capacity(tree.vertex_count() - 1);
    edges.push((OUTER_TAIL, INNER_TAIL, tail_weight));
    for v in ROOT..tree.vertex_count() {
        let p = tree.parent(v).expect("non-tail vertices have parents");
        let sv = tree.size(v) as f64;
        let sp = tree.size(p) as f64;
        edges.push((p, v, sv.powf(beta) / sp.powf(0.5 - beta)));
    }
    let mut h = WeightedAdjacency::from_edges(tree.vertex_count(), edges)?;
    h.beta = beta;
    h.tail_weight = tail_weight;
    Ok(h)
}

/// `H(x)`: zero the parent edge of every leaf whose bit is 1.
pub fn apply_input(h0: &WeightedAdjacency, tree: &GateTree, x: &InputAssignment) -> Result<WeightedAdjacency> {
    if h0.vertex_count() != tree.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: tree.vertex_count(),
            got: h0.vertex_count(),
        });
    }
    if x.len() < tree.num_vars() {
        return Err(Error::InputLength {
            expected: tree.num_vars(),
            got: x.len(),
        });
    }
    let mut h = h0.clone();
    for (v, var) in tree.leaf_vertices() {
        if x.get(var)? {
            let p = tree.parent(v).expect("leaves have parents");
            h.set_weight(p, v, 0.0)?;
        }
    }
    Ok(h)
}

/// See [`WeightedAdjacency::norm_upper_bound`].
pub fn norm_upper_bound(h: &WeightedAdjacency) -> f64 {
    h.norm_upper_bound()
}
