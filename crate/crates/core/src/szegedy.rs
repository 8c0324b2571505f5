//! Szegedy quantization of a nonnegative symmetric matrix `H`.
//!
//! The principal eigenvector `delta` of `H` turns `H / nH` into amplitudes
//! `sqrt(p_vw) = sqrt((H_vw / nH) delta_w / delta_v)`. Each vertex `v` gets
//! the coin state `|v~> = sum_w sqrt(p_vw) |v, w>` on the directed-edge
//! space, and the walk is `U = (2 Pi - 1) S`: swap the two registers, then
//! reflect every vertex block about its coin.
//!
//! With `T = sum_v |v~><v|` and `M = T^t S T`, every eigenpair `(lambda, |l>)`
//! of `M` spans an invariant plane `{T|l>, S T|l>}` on which `U` has
//! eigenvalues `lambda +- i sqrt(1 - lambda^2)`, with eigenvectors
//! `(1 + b S) T|l>` for `b = -lambda +- i sqrt(1 - lambda^2)`. Note that `b`
//! itself is the eigenvalue of `-U^dagger`, not of `U`. At `lambda = +-1`
//! the plane collapses to `T|l>`, an eigenvector with eigenvalue `lambda`.
//! On the complement of all planes `U = -S`.

use std::ops::{Add, Mul, Range, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::InputAssignment;
use crate::hamiltonian::{GateTree, WeightedAdjacency};
use crate::linalg::{dot, norm, sorted_symmetric_eigen};

/// Relative residual `||H d - lambda d|| / lambda` at which power iteration stops.
pub const POWER_TOLERANCE: f64 = 1e-13;
pub const POWER_MAX_ITERATIONS: usize = 1_000_000;

/// Rows whose squared norm exceeds one by less than this are renormalised.
const ROW_NORM_SLACK: f64 = 1e-9;

/// Tolerance on eigenvector residuals in [`verify_correspondence`].
pub const CORRESPONDENCE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct PrincipalEigen {
    pub value: f64,
    /// Unit vector, positive on the component of vertex 0 and zero elsewhere.
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Perron eigenpair of the connected component containing vertex 0.
///
/// Power iteration on `H + cI` with `c` half the row-sum bound, which
/// separates the top eigenvalue from its mirror `-lambda_max` on bipartite
/// graphs. Starts from the normalised indicator of the component.
pub fn principal_eigenvector(h: &WeightedAdjacency) -> Result<PrincipalEigen> {
    principal_eigenvector_with(h, POWER_TOLERANCE, POWER_MAX_ITERATIONS)
}

pub fn principal_eigenvector_with(
    h: &WeightedAdjacency,
    tolerance: f64,
    max_iterations: usize,
) -> Result<PrincipalEigen> {
    let n = h.vertex_count();
    if n == 0 || h.edges().iter().all(|e| e.weight == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let comp = h.components();
    let members: Vec<usize> = (0..n).filter(|&v| comp[v] == comp[0]).collect();
    if members.len() < 2 {
        return Err(Error::ZeroMatrix);
    }
    let shift = h.norm_upper_bound() / 2.0;
    let mut v = vec![0.0; n];
    let start = 1.0 / (members.len() as f64).sqrt();
    for &m in &members {
        v[m] = start;
    }
    let mut residual = f64::INFINITY;
    for it in 1..=max_iterations {
        let hv = h.matvec(&v);
        let value = dot(&v, &hv);
        residual = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - value * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tolerance * value {
            for &m in &members {
                if !(v[m] > 0.0) {
                    return Err(Error::NonPositiveEigenvector { vertex: m, value: v[m] });
                }
            }
            return Ok(PrincipalEigen {
                value,
                vector: v,
                iterations: it,
                residual,
            });
        }
        let mut next: Vec<f64> = hv.iter().zip(&v).map(|(a, b)| a + shift * b).collect();
        let len = norm(&next);
        next.iter_mut().for_each(|x| *x /= len);
        v = next;
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
        residual,
    })
}

/// The rows of `P`: for every vertex the amplitudes `sqrt(p_vw)` over its
/// neighbours, plus a self-loop amplitude completing the row to unit norm.
#[derive(Clone, Debug, Serialize)]
pub struct TransitionFactor {
    norm: f64,
    rows: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    raw_row_norms: Vec<f64>,
}

/// Builds `P` from `H`, its principal eigenvector and a normalisation
/// `nH >= ||H||`.
///
/// A row whose squared norm falls short of one by more than `1e-9` gets the
/// deficit as a self-loop; smaller deviations (power-iteration noise) are
/// renormalised away. Vertices outside the support of `delta` get a pure
/// self-loop.
pub fn classical_transition(h: &WeightedAdjacency, delta: &[f64], nh: f64) -> Result<TransitionFactor> {
    let n = h.vertex_count();
    if delta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: delta.len(),
        });
    }
    if !(nh > 0.0 && nh.is_finite()) {
        return Err(Error::InvalidConfig(format!("normalisation must be positive, got {nh}")));
    }
    if let Some(v) = (0..n).find(|&v| !(delta[v] >= 0.0)) {
        return Err(Error::NonPositiveEigenvector { vertex: v, value: delta[v] });
    }
    let adj = h.adjacency();
    let mut rows = vec![Vec::new(); n];
    let mut self_loop = vec![0.0; n];
    let mut raw_row_norms = vec![0.0; n];
    for v in 0..n {
        if delta[v] == 0.0 {
            if let Some(&(w, _)) = adj[v].iter().find(|&&(w, _)| delta[w] > 0.0) {
                return Err(Error::NonPositiveEigenvector { vertex: v, value: delta[w].min(0.0) });
            }
            self_loop[v] = 1.0;
            raw_row_norms[v] = 0.0;
            continue;
        }
        let mut row: Vec<(usize, f64)> = adj[v]
            .iter()
            .map(|&(w, hw)| (w, ((hw / nh) * delta[w] / delta[v]).sqrt()))
            .collect();
        let rho: f64 = row.iter().map(|(_, a)| a * a).sum();
        raw_row_norms[v] = rho;
        if rho > 1.0 + ROW_NORM_SLACK {
            return Err(Error::NormBoundTooSmall {
                bound: nh,
                radius: rho * nh,
            });
        }
        if rho >= 1.0 - ROW_NORM_SLACK {
            let scale = rho.sqrt();
            row.iter_mut().for_each(|(_, a)| *a /= scale);
        } else {
            self_loop[v] = (1.0 - rho).sqrt();
        }
        rows[v] = row;
    }
    Ok(TransitionFactor {
        norm: nh,
        rows,
        self_loop,
        raw_row_norms,
    })
}

impl TransitionFactor {
    pub fn vertex_count(&self) -> usize {
        self.rows.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `(w, sqrt(p_vw))` over the neighbours of `v`, excluding the self-loop.
    pub fn row(&self, v: usize) -> &[(usize, f64)] {
        &self.rows[v]
    }

    pub fn self_loop(&self, v: usize) -> f64 {
        self.self_loop[v]
    }

    /// Squared row norms before renormalisation or self-loop completion.
    pub fn raw_row_norms(&self) -> &[f64] {
        &self.raw_row_norms
    }

    /// Squared norms of the completed rows.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.vertex_count())
            .map(|v| self.rows[v].iter().map(|(_, a)| a * a).sum::<f64>() + self.self_loop[v].powi(2))
            .collect()
    }

    /// `sqrt(p_vw)`; zero off the support.
    pub fn amplitude(&self, v: usize, w: usize) -> f64 {
        if v == w {
            return self.self_loop[v];
        }
        self.rows[v]
            .binary_search_by_key(&w, |&(u, _)| u)
            .map(|i| self.rows[v][i].1)
            .unwrap_or(0.0)
    }

    /// Largest `|sqrt(p_vw p_wv) nH - H_vw|` over the edges of `H`.
    pub fn reconstruction_error(&self, h: &WeightedAdjacency) -> f64 {
        h.edges()
            .iter()
            .map(|e| {
                let m = self.amplitude(e.lo, e.hi) * self.amplitude(e.hi, e.lo);
                (m * self.norm - e.weight).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Directed-edge basis. Arcs leaving `v` are contiguous and sorted by
/// their second vertex, self-loop included.
#[derive(Clone, Debug)]
pub struct EdgeSpace {
    offsets: Vec<usize>,
    tails: Vec<usize>,
    heads: Vec<usize>,
    swap: Vec<usize>,
}

impl EdgeSpace {
    /// `neighbours[v]` must be symmetric: `w` in `neighbours[v]` iff `v` in
    /// `neighbours[w]`. `loops[v]` adds the arc `(v, v)`.
    pub fn new(neighbours: &[Vec<usize>], loops: &[bool]) -> Result<Self> {
        let n = neighbours.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut tails = Vec::new();
        let mut heads = Vec::new();
        offsets.push(0);
        for v in 0..n {
            let mut block: Vec<usize> = neighbours[v].iter().copied().filter(|&w| w != v).collect();
            if loops[v] {
                block.push(v);
            }
            block.sort_unstable();
            block.dedup();
            for w in block {
                tails.push(v);
                heads.push(w);
            }
            offsets.push(heads.len());
        }
        let mut space = EdgeSpace {
            offsets,
            tails,
            heads,
            swap: Vec::new(),
        };
        let mut swap = Vec::with_capacity(space.dim());
        for e in 0..space.dim() {
            let (v, w) = space.pair(e);
            let back = space
                .index(w, v)
                .ok_or_else(|| Error::InvalidConfig(format!("arc ({v}, {w}) has no reverse")))?;
            swap.push(back);
        }
        space.swap = swap;
        Ok(space)
    }

    pub fn dim(&self) -> usize {
        self.heads.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn arcs(&self, v: usize) -> Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn pair(&self, e: usize) -> (usize, usize) {
        (self.tails[e], self.heads[e])
    }

    pub fn index(&self, v: usize, w: usize) -> Option<usize> {
        let r = self.arcs(v);
        self.heads[r.clone()].binary_search(&w).ok().map(|i| r.start + i)
    }

    pub fn swap(&self, e: usize) -> usize {
        self.swap[e]
    }
}

/// `U = (2 Pi - 1) S` with per-vertex coin blocks. Immutable once built.
#[derive(Clone, Debug)]
pub struct CoinedWalk {
    space: EdgeSpace,
    coins: Vec<f64>,
    leaves: Vec<(usize, u32)>,
}

/// Builds the walk for `P`. `leaves` lists `(vertex, variable)` pairs the
/// oracle may flag; each gets a self-loop arc so that a flagged leaf can
/// switch its coin to `|i, i>`.
pub fn build_walk(p: &TransitionFactor, leaves: &[(usize, u32)]) -> Result<CoinedWalk> {
    let n = p.vertex_count();
    let mut loops: Vec<bool> = (0..n).map(|v| p.self_loop(v) > 0.0).collect();
    for &(v, _) in leaves {
        if v >= n {
            return Err(Error::DimensionMismatch { expected: n, got: v + 1 });
        }
        loops[v] = true;
    }
    let neighbours: Vec<Vec<usize>> = (0..n).map(|v| p.row(v).iter().map(|&(w, _)| w).collect()).collect();
    let space = EdgeSpace::new(&neighbours, &loops)?;
    let coins = (0..space.dim())
        .map(|e| {
            let (v, w) = space.pair(e);
            p.amplitude(v, w)
        })
        .collect();
    Ok(CoinedWalk {
        space,
        coins,
        leaves: leaves.to_vec(),
    })
}

/// How the normalisation `nH` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum NormChoice {
    /// `nH = lambda_max(H)` from power iteration.
    #[default]
    Eigenvalue,
    /// `nH` = largest row sum, an upper bound on `||H||`.
    RowSumBound,
}

/// Everything derived from quantizing one matrix.
#[derive(Clone, Debug)]
pub struct Quantization {
    pub eigen: PrincipalEigen,
    pub transition: TransitionFactor,
    pub walk: CoinedWalk,
}

impl Quantization {
    pub fn norm(&self) -> f64 {
        self.transition.norm()
    }
}

pub fn quantize(h: &WeightedAdjacency, leaves: &[(usize, u32)], choice: NormChoice) -> Result<Quantization> {
    let eigen = principal_eigenvector(h)?;
    let nh = match choice {
        NormChoice::Eigenvalue => eigen.value,
        NormChoice::RowSumBound => h.norm_upper_bound(),
    };
    let transition = classical_transition(h, &eigen.vector, nh)?;
    let walk = build_walk(&transition, leaves)?;
    Ok(Quantization {
        eigen,
        transition,
        walk,
    })
}

/// Quantizes the all-zero Hamiltonian of a formula tree.
pub fn quantize_tree(tree: &GateTree, h0: &WeightedAdjacency, choice: NormChoice) -> Result<Quantization> {
    if tree.vertex_count() != h0.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: tree.vertex_count(),
            got: h0.vertex_count(),
        });
    }
    let leaves: Vec<(usize, u32)> = tree.leaf_vertices().collect();
    quantize(h0, &leaves, choice)
}

impl CoinedWalk {
    pub fn space(&self) -> &EdgeSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn vertex_count(&self) -> usize {
        self.space.vertex_count()
    }

    pub fn leaves(&self) -> &[(usize, u32)] {
        &self.leaves
    }

    /// Coin amplitude `<v, w | v~>` on arc `e = (v, w)`.
    pub fn coin(&self, e: usize) -> f64 {
        self.coins[e]
    }

    /// Basis index of `|v, w>`.
    pub fn arc(&self, v: usize, w: usize) -> Option<usize> {
        self.space.index(v, w)
    }

    /// `out = U input`.
    pub fn step_into<T>(&self, input: &[T], out: &mut [T])
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        assert_eq!(input.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for v in 0..self.vertex_count() {
            let r = self.space.arcs(v);
            let mut proj = T::default();
            for e in r.clone() {
                out[e] = input[self.space.swap[e]];
                proj = proj + out[e] * self.coins[e];
            }
            for e in r {
                out[e] = proj * (2.0 * self.coins[e]) - out[e];
            }
        }
    }

    pub fn step<T>(&self, input: &[T]) -> Vec<T>
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let mut out = vec![T::default(); self.dim()];
        self.step_into(input, &mut out);
        out
    }

    /// `S input`.
    pub fn swap<T: Copy>(&self, input: &[T]) -> Vec<T> {
        (0..self.dim()).map(|e| input[self.space.swap[e]]).collect()
    }

    /// `O_x`: negate every arc whose first vertex is a leaf with bit 1.
    pub fn apply_oracle<T>(&self, x: &InputAssignment, state: &mut [T]) -> Result<()>
    where
        T: Copy + Mul<f64, Output = T>,
    {
        for &(v, var) in &self.leaves {
            if x.get(var)? {
                for e in self.space.arcs(v) {
                    state[e] = state[e] * -1.0;
                }
            }
        }
        Ok(())
    }

    /// The walk whose coin at every flagged leaf is `|i, i>`. Equals
    /// `O_x U` whenever leaf coins carry no self-loop amplitude.
    pub fn with_input(&self, x: &InputAssignment) -> Result<CoinedWalk> {
        let mut walk = self.clone();
        for &(v, var) in &self.leaves {
            if x.get(var)? {
                for e in self.space.arcs(v) {
                    walk.coins[e] = if self.space.heads[e] == v { 1.0 } else { 0.0 };
                }
            }
        }
        Ok(walk)
    }

    /// The isometry `T`, one column per vertex.
    pub fn isometry(&self) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(self.dim(), self.vertex_count());
        for v in 0..self.vertex_count() {
            for e in self.space.arcs(v) {
                t[(e, v)] = self.coins[e];
            }
        }
        t
    }

    /// `M = T^t S T`, entrywise `M_vw = <v~| S |w~>`.
    pub fn discriminant(&self) -> DMatrix<f64> {
        let n = self.vertex_count();
        let mut m = DMatrix::zeros(n, n);
        for e in 0..self.dim() {
            let (v, w) = self.space.pair(e);
            m[(v, w)] += self.coins[e] * self.coins[self.space.swap[e]];
        }
        m
    }

    /// Dense matrix of `U`, built column by column.
    pub fn unitary(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut u = DMatrix::zeros(d, d);
        let mut basis = vec![0.0; d];
        let mut col = vec![0.0; d];
        for j in 0..d {
            basis[j] = 1.0;
            self.step_into(&basis, &mut col);
            basis[j] = 0.0;
            for i in 0..d {
                u[(i, j)] = col[i];
            }
        }
        u
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrespondenceEntry {
    pub lambda: f64,
    /// Walk eigenvalues `(re, im)` matched to `lambda`.
    pub walk_eigenvalues: Vec<(f64, f64)>,
    /// `||U y - mu y|| / ||y||` for each matched eigenvalue.
    pub residuals: Vec<f64>,
    /// Residual if `-lambda +- i sqrt(1 - lambda^2)` is taken as the
    /// eigenvalue of `U` itself.
    pub unconjugated_residual: f64,
    /// `arcsin(lambda)`; `-iU` has eigenvalues `e^{-i a}` and `-e^{i a}`.
    pub arcsin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrespondenceReport {
    pub entries: Vec<CorrespondenceEntry>,
    pub max_residual: f64,
    /// Largest `|<u, v>|` between basis vectors of different planes.
    pub max_overlap: f64,
    /// `||U z + S z|| / ||z||` for a random `z` orthogonal to every plane.
    pub complement_residual: f64,
    /// `max |M - T^t S T|` against the supplied `M`.
    pub discriminant_error: f64,
    pub failures: Vec<String>,
}

impl CorrespondenceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the eigenvalue correspondence between `M` and the walk.
///
/// Eigenvectors are built from the dense eigensystem of `m` and checked
/// against `U` directly.
pub fn verify_correspondence(walk: &CoinedWalk, m: &DMatrix<f64>) -> Result<CorrespondenceReport> {
    let n = walk.vertex_count();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.nrows(),
        });
    }
    let own = walk.discriminant();
    let discriminant_error = (m - &own).abs().max();
    let (values, vectors) = sorted_symmetric_eigen(m.clone());
    let t = walk.isometry();
    let mut failures = Vec::new();
    let mut entries = Vec::with_capacity(n);
    let mut planes: Vec<Vec<f64>> = Vec::new();
    let mut owners: Vec<usize> = Vec::new();
    let mut max_residual = 0.0f64;

    for (a, &lambda) in values.iter().enumerate() {
        let col = vectors.column(a);
        let ta: Vec<f64> = (&t * col).iter().copied().collect();
        let sta = walk.swap(&ta);
        let lam = lambda.clamp(-1.0, 1.0);
        let root = (1.0 - lam * lam).max(0.0).sqrt();
        let mut entry = CorrespondenceEntry {
            lambda,
            walk_eigenvalues: Vec::new(),
            residuals: Vec::new(),
            unconjugated_residual: 0.0,
            arcsin: lam.asin(),
        };
        if 1.0 - lam.abs() <= 1e-9 {
            let mu = lam.signum();
            let u = walk.step(&ta);
            let res = norm(&u.iter().zip(&ta).map(|(x, y)| x - mu * y).collect::<Vec<_>>()) / norm(&ta);
            entry.walk_eigenvalues.push((mu, 0.0));
            entry.residuals.push(res);
            let un = norm(&u.iter().zip(&ta).map(|(x, y)| x + mu * y).collect::<Vec<_>>()) / norm(&ta);
            entry.unconjugated_residual = un;
            planes.push(ta);
            owners.push(a);
        } else {
            let mut worst_un = 0.0f64;
            for sign in [1.0, -1.0] {
                let b = Complex64::new(-lam, sign * root);
                let mu = -b.conj();
                let y: Vec<Complex64> = ta
                    .iter()
                    .zip(&sta)
                    .map(|(&x, &s)| Complex64::from(x) + b * s)
                    .collect();
                let uy = walk.step(&y);
                let ynorm = cnorm(&y);
                let res = cnorm(&uy.iter().zip(&y).map(|(u, y)| u - mu * y).collect::<Vec<_>>()) / ynorm;
                let un = cnorm(&uy.iter().zip(&y).map(|(u, y)| u - b * y).collect::<Vec<_>>()) / ynorm;
                worst_un = worst_un.max(un);
                entry.walk_eigenvalues.push((mu.re, mu.im));
                entry.residuals.push(res);
            }
            entry.unconjugated_residual = worst_un;
            planes.push(ta);
            planes.push(sta);
            owners.push(a);
            owners.push(a);
        }
        for &r in &entry.residuals {
            max_residual = max_residual.max(r);
        }
        if entry.residuals.iter().any(|&r| !(r <= CORRESPONDENCE_TOLERANCE)) {
            failures.push(format!("eigenvector residual above tolerance at lambda = {lambda:.12}"));
        }
        if lam.abs() <= 0.1 && (entry.arcsin - lam).abs() > lam.abs().powi(3) {
            failures.push(format!("arcsin deviates by more than third order at lambda = {lambda:.12}"));
        }
        entries.push(entry);
    }

    let mut max_overlap = 0.0f64;
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            if owners[i] != owners[j] {
                max_overlap = max_overlap.max(dot(&planes[i], &planes[j]).abs());
            }
        }
    }
    if max_overlap > 1e-10 {
        failures.push(format!("invariant planes overlap by {max_overlap:e}"));
    }

    let complement_residual = complement_check(walk, &planes);
    if complement_residual > 1e-10 {
        failures.push(format!("U differs from -S on the complement by {complement_residual:e}"));
    }
    if discriminant_error > 1e-12 {
        failures.push(format!("supplied M differs from T^t S T by {discriminant_error:e}"));
    }

    Ok(CorrespondenceReport {
        entries,
        max_residual,
        max_overlap,
        complement_residual,
        discriminant_error,
        failures,
    })
}

fn cnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Projects a seeded random vector off the planes and measures `U + S` on it.
fn complement_check(walk: &CoinedWalk, planes: &[Vec<f64>]) -> f64 {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in planes {
        let mut v = p.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let len = norm(&v);
        if len > 1e-8 {
            v.iter_mut().for_each(|x| *x /= len);
            basis.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut z: Vec<f64> = (0..walk.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    for _ in 0..2 {
        for b in &basis {
            let c = dot(&z, b);
            z.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let len = norm(&z);
    if len < 1e-6 {
        return 0.0;
    }
    let u = walk.step(&z);
    let s = walk.swap(&z);
    norm(&u.iter().zip(&s).map(|(a, b)| a + b).collect::<Vec<_>>()) / len
}

/// `M` predicted from the Hamiltonian rather than from the coins:
/// `H(x) / nH` off the diagonal, `1` on the diagonal at `flipped` leaves and
/// the squared self-loop amplitude elsewhere.
pub fn predicted_discriminant(
    transition: &TransitionFactor,
    hx: &WeightedAdjacency,
    flipped: &[usize],
) -> Result<DMatrix<f64>> {
    let n = transition.vertex_count();
    if hx.vertex_count() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: hx.vertex_count(),
        });
    }
    let mut m = hx.to_dense(usize::MAX)? / transition.norm();
    for v in 0..n {
        m[(v, v)] = transition.self_loop(v).powi(2);
    }
    for &v in flipped {
        m[(v, v)] = 1.0;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{generate, Family};
    use crate::hamiltonian::{build_tree_with_tail, edge_weights, DEFAULT_BETA, INNER_TAIL, OUTER_TAIL};

    fn tree_walk(n: u32) -> (GateTree, WeightedAdjacency, Quantization) {
        let tree = build_tree_with_tail(&generate(&Family::Balanced(n)).unwrap()).unwrap();
        let h0 = edge_weights(&tree, DEFAULT_BETA).unwrap();
        let q = quantize_tree(&tree, &h0, NormChoice::Eigenvalue).unwrap();
        (tree, h0, q)
    }

    fn random_state(dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn single_edge_eigenpair() {
        let h = WeightedAdjacency::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let e = principal_eigenvector(&h).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
        for x in &e.vector {
            assert!((x - 0.5f64.sqrt()).abs() < 1e-14);
        }
        let p = classical_transition(&h, &e.vector, 1.0).unwrap();
        assert!((p.amplitude(0, 1) - 1.0).abs() < 1e-14);
        assert!((p.amplitude(1, 0) - 1.0).abs() < 1e-14);
        assert_eq!(p.amplitude(0, 0), 0.0);
    }

    #[test]
    fn path_matches_dense_solver() {
        let h = WeightedAdjacency::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let e = principal_eigenvector(&h).unwrap();
        let (vals, vecs) = sorted_symmetric_eigen(h.to_dense(16).unwrap());
        assert!((e.value - vals[3]).abs() < 1e-12);
        let sign = vecs[(0, 3)].signum();
        for v in 0..4 {
            assert!((e.vector[v] - sign * vecs[(v, 3)]).abs() < 1e-10);
        }
        // Golden-ratio closed form for the path on four vertices.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((e.value - phi).abs() < 1e-12);
        assert!((e.vector[1] / e.vector[0] - phi).abs() < 1e-10);
    }

    #[test]
    fn balanced2_power_iteration_matches_dense() {
        let (_, h0, q) = tree_walk(2);
        let (vals, vecs) = sorted_symmetric_eigen(h0.to_dense(64).unwrap());
        let top = vals.len() - 1;
        assert!((q.eigen.value - vals[top]).abs() < 1e-12);
        let sign = vecs[(0, top)].signum();
        for v in 0..vals.len() {
            assert!((q.eigen.vector[v] - sign * vecs[(v, top)]).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let h = WeightedAdjacency::from_edges(3, [(0, 1, 0.0)]).unwrap();
        assert!(matches!(principal_eigenvector(&h), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn disconnected_vertices_get_pure_self_loops() {
        let h = WeightedAdjacency::from_edges(4, [(0, 1, 1.0), (2, 3, 0.5)]).unwrap();
        let q = quantize(&h, &[], NormChoice::Eigenvalue).unwrap();
        assert_eq!(q.eigen.vector[2], 0.0);
        assert_eq!(q.transition.self_loop(2), 1.0);
        assert_eq!(q.transition.self_loop(3), 1.0);
        assert_eq!(q.walk.dim(), 4);
    }

    #[test]
    fn transition_reconstructs_h() {
        let (_, h0, q) = tree_walk(2);
        assert!(q.transition.reconstruction_error(&h0) < 1e-12);
        for (v, r) in q.transition.raw_row_norms().iter().enumerate() {
            assert!((r - 1.0).abs() < 1e-12, "row {v}: {r}");
        }
        for r in q.transition.row_norms() {
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn row_sum_bound_completes_rows_with_self_loops() {
        let tree = build_tree_with_tail(&generate(&Family::Balanced(2)).unwrap()).unwrap();
        let h0 = edge_weights(&tree, DEFAULT_BETA).unwrap();
        let q = quantize_tree(&tree, &h0, NormChoice::RowSumBound).unwrap();
        assert!(q.norm() >= q.eigen.value);
        for (v, r) in q.transition.raw_row_norms().iter().enumerate() {
            assert!((r - q.eigen.value / q.norm()).abs() < 1e-10, "row {v}");
        }
        for r in q.transition.row_norms() {
            assert!((r - 1.0).abs() < 1e-12);
        }
        assert!(q.transition.reconstruction_error(&h0) < 1e-12);
    }

    #[test]
    fn too_small_norm_is_rejected() {
        let h = WeightedAdjacency::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let e = principal_eigenvector(&h).unwrap();
        assert!(matches!(
            classical_transition(&h, &e.vector, 0.5),
            Err(Error::NormBoundTooSmall { .. })
        ));
        assert!(classical_transition(&h, &[1.0, -1.0], 1.0).is_err());
    }

    #[test]
    fn edge_space_layout() {
        let (tree, _, q) = tree_walk(2);
        let space = q.walk.space();
        // Both orientations of 8 edges plus one loop per leaf.
        assert_eq!(space.dim(), 2 * (tree.vertex_count() - 1) + 4);
        for e in 0..space.dim() {
            let (v, w) = space.pair(e);
            assert_eq!(space.pair(space.swap(e)), (w, v));
            assert_eq!(space.swap(space.swap(e)), e);
            assert_eq!(space.index(v, w), Some(e));
        }
        assert!(space.index(OUTER_TAIL, INNER_TAIL).is_some());
    }

    #[test]
    fn walk_is_unitary() {
        let (_, _, q) = tree_walk(2);
        let u = q.walk.unitary();
        let d = u.nrows();
        let err = (u.transpose() * &u - DMatrix::<f64>::identity(d, d)).abs().max();
        assert!(err < 1e-12, "{err}");
        for seed in 0..100 {
            let s = random_state(q.walk.dim(), seed);
            let out = q.walk.step(&s);
            assert!((norm(&out) - norm(&s)).abs() < 1e-12 * norm(&s));
        }
    }

    #[test]
    fn oracle_times_walk_is_effective_walk() {
        let (tree, _, q) = tree_walk(3);
        let x = InputAssignment::parse("00010111").unwrap();
        let eff = q.walk.with_input(&x).unwrap();
        for seed in 0..5 {
            let s = random_state(q.walk.dim(), seed);
            let mut a = q.walk.step(&s);
            q.walk.apply_oracle(&x, &mut a).unwrap();
            let b = eff.step(&s);
            let diff = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-14);
        }
        let h = crate::hamiltonian::apply_input(&edge_weights(&tree, DEFAULT_BETA).unwrap(), &tree, &x).unwrap();
        let m = eff.discriminant();
        for v in 0..tree.vertex_count() {
            for w in 0..tree.vertex_count() {
                let expected = if v == w {
                    if tree.is_leaf(v) && x.get(tree.var(v).unwrap()).unwrap() { 1.0 } else { 0.0 }
                } else {
                    h.weight(v, w) / q.norm()
                };
                assert!((m[(v, w)] - expected).abs() < 1e-12, "({v},{w})");
            }
        }
    }

    #[test]
    fn oracle_phases() {
        let (tree, _, q) = tree_walk(3);
        let ones = vec![1.0; q.walk.dim()];
        let mut s = ones.clone();
        q.walk.apply_oracle(&InputAssignment::zeros(8), &mut s).unwrap();
        assert_eq!(s, ones);
        let x = InputAssignment::parse("00010111").unwrap();
        q.walk.apply_oracle(&x, &mut s).unwrap();
        let mut flipped_vars = Vec::new();
        for e in 0..q.walk.dim() {
            let (v, _) = q.walk.space().pair(e);
            if s[e] < 0.0 {
                flipped_vars.push(tree.var(v).unwrap());
            }
        }
        flipped_vars.dedup();
        assert_eq!(flipped_vars, vec![4, 6, 7, 8]);
        let mut all = ones.clone();
        q.walk.apply_oracle(&InputAssignment::ones(8), &mut all).unwrap();
        let negated = all.iter().filter(|&&a| a < 0.0).count();
        assert_eq!(negated, 16);
    }

    #[test]
    fn locality() {
        let (tree, _, q) = tree_walk(3);
        let space = q.walk.space();
        let src = 5;
        let mut s = vec![0.0; space.dim()];
        for e in space.arcs(src) {
            s[e] = 1.0;
        }
        let out = q.walk.step(&s);
        let mut allowed = vec![src];
        allowed.extend(tree.children(src));
        allowed.extend(tree.parent(src));
        for e in 0..space.dim() {
            if out[e].abs() > 0.0 {
                assert!(allowed.contains(&space.pair(e).0));
            }
        }
    }

    #[test]
    fn predicted_discriminant_matches_input_walk() {
        let (tree, h0, q) = tree_walk(2);
        let x = InputAssignment::parse("0110").unwrap();
        let hx = crate::hamiltonian::apply_input(&h0, &tree, &x).unwrap();
        let flipped: Vec<usize> = tree
            .leaf_vertices()
            .filter(|&(_, var)| x.get(var).unwrap())
            .map(|(v, _)| v)
            .collect();
        let m = predicted_discriminant(&q.transition, &hx, &flipped).unwrap();
        let walk = q.walk.with_input(&x).unwrap();
        assert!((m - walk.discriminant()).abs().max() < 1e-12);
    }

    #[test]
    fn correspondence_on_balanced2() {
        let (_, _, q) = tree_walk(2);
        let m = q.walk.discriminant();
        let report = verify_correspondence(&q.walk, &m).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert!(report.max_residual <= 1e-9);
        for e in &report.entries {
            if e.lambda.abs() < 1e-9 {
                let (re, im) = e.walk_eigenvalues[0];
                assert!(re.abs() < 1e-9 && (im.abs() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unit_eigenvalue_keeps_its_sign() {
        // Single edge: M = [[0,1],[1,0]], eigenvalues -1 and +1.
        let h = WeightedAdjacency::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let q = quantize(&h, &[], NormChoice::Eigenvalue).unwrap();
        let report = verify_correspondence(&q.walk, &q.walk.discriminant()).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        let signs: Vec<f64> = report.entries.iter().map(|e| e.walk_eigenvalues[0].0).collect();
        assert_eq!(signs, vec![-1.0, 1.0]);
        assert!(report.entries[1].unconjugated_residual > 1.0);
    }

    #[test]
    fn corrupted_discriminant_is_reported() {
        let (_, _, q) = tree_walk(1);
        let mut m = q.walk.discriminant();
        m[(0, 1)] += 0.1;
        m[(1, 0)] += 0.1;
        let report = verify_correspondence(&q.walk, &m).unwrap();
        assert!(!report.passed());
    }
}
