//! Undirected graphs with signed edge weights and positive self-loops.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::contour::BlockContour;
use crate::linalg::{DenseSymMatrix, Matrix};
use crate::markov::MarkovModel1D;
use crate::spectral;
use crate::{Error, Result};

/// Undirected weighted graph on nodes `0..n`.
///
/// Edge weights are non-zero and may be negative; self-loop weights are
/// strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    n: usize,
    edges: BTreeMap<(usize, usize), f64>,
    self_loops: BTreeMap<usize, f64>,
}

impl SignedGraph {
    pub fn new(n: usize) -> Self {
        SignedGraph { n, edges: BTreeMap::new(), self_loops: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if a == b {
            return Err(Error::InvalidGraph(format!("edge ({i}, {j}) is a loop")));
        }
        if b >= self.n {
            return Err(Error::InvalidGraph(format!("edge ({i}, {j}) outside {} nodes", self.n)));
        }
        if w == 0.0 || !w.is_finite() {
            return Err(Error::InvalidGraph(format!("edge ({i}, {j}) has weight {w}")));
        }
        if self.edges.insert((a, b), w).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
        }
        Ok(())
    }

    /// Adds `w` to the self-loop of node `i`; the accumulated weight must
    /// stay strictly positive.
    pub fn add_self_loop(&mut self, i: usize, w: f64) -> Result<()> {
        if i >= self.n {
            return Err(Error::InvalidGraph(format!("self-loop at {i} outside {} nodes", self.n)));
        }
        let total = self.self_loop(i) + w;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidGraph(format!("self-loop weight {total} at node {i}")));
        }
        self.self_loops.insert(i, total);
        Ok(())
    }

    pub fn self_loop(&self, i: usize) -> f64 {
        self.self_loops.get(&i).copied().unwrap_or(0.0)
    }

    pub fn edge(&self, i: usize, j: usize) -> Option<f64> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    /// Edges as `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn self_loops(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.self_loops.iter().map(|(&i, &w)| (i, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adjacency `A`, self-loops on the diagonal.
    pub fn adjacency(&self) -> DenseSymMatrix {
        let mut a = DenseSymMatrix::zeros(self.n);
        for (i, j, w) in self.edges() {
            a.set(i, j, w);
        }
        for (i, w) in self.self_loops() {
            a.set(i, i, w);
        }
        a
    }

    /// `Dᵢᵢ = Σⱼ Aᵢⱼ`, the self-loop included once.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d: Vec<f64> = (0..self.n).map(|i| self.self_loop(i)).collect();
        for (i, j, w) in self.edges() {
            d[i] += w;
            d[j] += w;
        }
        d
    }

    pub fn degree_matrix(&self) -> DenseSymMatrix {
        DenseSymMatrix::from_diagonal(&self.degrees())
    }

    /// `L = D − A`. Self-loops cancel, so `Lᵢᵢ` is the sum of incident edge
    /// weights.
    pub fn laplacian(&self) -> DenseSymMatrix {
        let d = self.degrees();
        let mut l = DenseSymMatrix::zeros(self.n);
        for (i, &di) in d.iter().enumerate() {
            l.set(i, i, di - self.self_loop(i));
        }
        for (i, j, w) in self.edges() {
            l.set(i, j, -w);
        }
        l
    }

    /// `Q = L + diag(Aᵢᵢ)`.
    ///
    /// The diagonal is accumulated as self-loop, then negative edges, then
    /// positive edges, each group in edge order. A `−w` edge paired with a
    /// `2w` loop therefore cancels to exactly `w` before anything else is
    /// added, which makes the loopy Laplacian of
    /// [`optimal_line_graph`] bit-identical to
    /// [`MarkovModel1D::precision`] when the first precision is zero.
    pub fn loopy_laplacian(&self) -> DenseSymMatrix {
        let mut diag: Vec<f64> = (0..self.n).map(|i| self.self_loop(i)).collect();
        for negative in [true, false] {
            for (i, j, w) in self.edges().filter(|e| (e.2 < 0.0) == negative) {
                diag[i] += w;
                diag[j] += w;
            }
        }
        let mut q = DenseSymMatrix::from_diagonal(&diag);
        for (i, j, w) in self.edges() {
            q.set(i, j, -w);
        }
        q
    }

    /// Line-oriented text: a header line `n`, then `E i j w` per edge and
    /// `S i w` per self-loop, with 1-based node indices. Blank lines and
    /// `#` comments are ignored when parsing.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (i, j, w) in self.edges() {
            let _ = writeln!(s, "E {} {} {}", i + 1, j + 1, w);
        }
        for (i, w) in self.self_loops() {
            let _ = writeln!(s, "S {} {}", i + 1, w);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(no, l)| (no + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |no: usize, msg: &str| Error::InvalidGraph(format!("line {no}: {msg}"));

        let (no, header) = lines.next().ok_or_else(|| bad(0, "missing node count"))?;
        let n: usize = header.parse().map_err(|_| bad(no, "node count expected"))?;
        let mut g = SignedGraph::new(n);
        let node = |no: usize, t: Option<&str>| -> Result<usize> {
            let i: usize = t.and_then(|t| t.parse().ok()).ok_or_else(|| bad(no, "node index expected"))?;
            if i == 0 || i > n {
                return Err(bad(no, "node index out of range"));
            }
            Ok(i - 1)
        };
        let weight = |no: usize, t: Option<&str>| -> Result<f64> {
            t.and_then(|t| t.parse().ok()).ok_or_else(|| bad(no, "weight expected"))
        };
        for (no, line) in lines {
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("E") => {
                    let i = node(no, tok.next())?;
                    let j = node(no, tok.next())?;
                    let w = weight(no, tok.next())?;
                    g.add_edge(i, j, w)?;
                }
                Some("S") => {
                    let i = node(no, tok.next())?;
                    let w = weight(no, tok.next())?;
                    if g.self_loops.contains_key(&i) {
                        return Err(bad(no, "duplicate self-loop"));
                    }
                    g.add_self_loop(i, w)?;
                }
                _ => return Err(bad(no, "expected `E i j w` or `S i w`")),
            }
            if tok.next().is_some() {
                return Err(bad(no, "trailing tokens"));
            }
        }
        Ok(g)
    }
}

/// Line graph whose loopy Laplacian reproduces the precision matrix of
/// `model`.
///
/// Edge `(i−1, i)` has weight `1/σᵢ²`, except `−1/σₖ²` at the break, and
/// nodes `k−1`, `k` carry self-loops of `2/σₖ²`.
pub fn optimal_line_graph(model: &MarkovModel1D) -> SignedGraph {
    let inv = model.inverse_variances();
    let brk = model.k() - 1;
    let mut g = SignedGraph::new(model.n());
    for i in 1..model.n() {
        let w = if i == brk { -inv[i] } else { inv[i] };
        g.add_edge(i - 1, i, w).expect("line edges are distinct and non-zero");
    }
    let lw = 2.0 * inv[brk];
    g.add_self_loop(brk - 1, lw).expect("positive loop");
    g.add_self_loop(brk, lw).expect("positive loop");
    g
}

/// Plain line graph with unit weights except `weight` on edge
/// `(k−1, k)` (1-based) and optional loops on its end nodes.
pub fn line_graph(n: usize, k: usize, weight: f64, loop_weight: f64) -> Result<SignedGraph> {
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!("break {k} outside [2, {n}]")));
    }
    let mut g = SignedGraph::new(n);
    for i in 1..n {
        g.add_edge(i - 1, i, if i == k - 1 { weight } else { 1.0 })?;
    }
    if loop_weight != 0.0 {
        g.add_self_loop(k - 2, loop_weight)?;
        g.add_self_loop(k - 1, loop_weight)?;
    }
    Ok(g)
}

/// 4-connected graph of a `size × size` block in raster order.
///
/// Links not in `contour` get weight `+1`; broken links get `−w` and add
/// `2w` to the self-loop of both end pixels (accumulating at corners).
pub fn block_graph(contour: &BlockContour, w: f64) -> Result<SignedGraph> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidArgument(format!("negative-edge magnitude {w} must be > 0")));
    }
    let n = contour.size();
    let mut g = SignedGraph::new(n * n);
    for (link, broken) in contour.all_links() {
        let a = link.y * n + link.x;
        let (ox, oy) = link.other();
        let b = oy * n + ox;
        if broken {
            g.add_edge(a, b, -w)?;
            g.add_self_loop(a, 2.0 * w)?;
            g.add_self_loop(b, 2.0 * w)?;
        } else {
            g.add_edge(a, b, 1.0)?;
        }
    }
    Ok(g)
}

/// Baseline graph: broken links keep a small positive weight `w_pos`, no
/// self-loops.
pub fn weighted_block_graph(contour: &BlockContour, w_pos: f64) -> Result<SignedGraph> {
    if !(w_pos > 0.0 && w_pos <= 1.0) {
        return Err(Error::InvalidArgument(format!("positive weight {w_pos} outside (0, 1]")));
    }
    let n = contour.size();
    let mut g = SignedGraph::new(n * n);
    for (link, broken) in contour.all_links() {
        let (ox, oy) = link.other();
        g.add_edge(link.y * n + link.x, oy * n + ox, if broken { w_pos } else { 1.0 })?;
    }
    Ok(g)
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn order(&self) -> usize {
        self.positive + self.negative + self.zero
    }
}

impl std::ops::Add for Inertia {
    type Output = Inertia;

    fn add(self, o: Inertia) -> Inertia {
        Inertia {
            positive: self.positive + o.positive,
            negative: self.negative + o.negative,
            zero: self.zero + o.zero,
        }
    }
}

/// Relative threshold separating zero from non-zero eigenvalues.
pub const INERTIA_TOLERANCE: f64 = 1e-9;

/// Eigenvalues above `τ`, below `−τ` and within `±τ`, where
/// `τ = 1e-9 · max|λ|`.
pub fn inertia(m: &DenseSymMatrix) -> Result<Inertia> {
    let values = spectral::eigenvalues(m)?;
    let tau = INERTIA_TOLERANCE * spectral::spectral_scale(&values);
    let mut out = Inertia::default();
    for v in values {
        if v > tau {
            out.positive += 1;
        } else if v < -tau {
            out.negative += 1;
        } else {
            out.zero += 1;
        }
    }
    Ok(out)
}

/// `M₂₂ − M₁₂ᵀ M₁₁⁻¹ M₁₂`, where block 1 is `block_indices` (0-based, in
/// the given order) and block 2 is the remaining indices in ascending order.
///
/// Fails with [`Error::SingularBlock`] when `|det M₁₁|` is below `1e-12`
/// times `max|M₁₁|` raised to the block order.
pub fn schur_complement(m: &DenseSymMatrix, block_indices: &[usize]) -> Result<DenseSymMatrix> {
    let n = m.order();
    let mut in_block = vec![false; n];
    for &i in block_indices {
        if i >= n || in_block[i] {
            return Err(Error::InvalidArgument(format!("bad block index {i}")));
        }
        in_block[i] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !in_block[i]).collect();
    let m11 = m.principal(block_indices).to_matrix();
    let scale = m11.max_abs();
    let det = m11.determinant();
    if scale == 0.0 || det.abs() < 1e-12 * scale.powi(block_indices.len() as i32) {
        return Err(Error::SingularBlock);
    }
    let inv = m11.inverse()?;
    let m12 = Matrix::from_fn(block_indices.len(), rest.len(), |i, j| m.get(block_indices[i], rest[j]));
    let correction = m12.transpose().matmul(&inv).matmul(&m12);
    Ok(DenseSymMatrix::from_upper(rest.len(), |i, j| {
        m.get(rest[i], rest[j]) - correction.get(i, j)
    }))
}

/// Four-node line graph with its break between nodes 2 and 3, side edges
/// `1/σ_side²`, negative edge `−1/σₖ²` and self-loops `2/σₖ² − ε` on the
/// two break nodes (omitted when exactly zero).
pub fn indefiniteness_demo_graph(sigma_side_sq: f64, sigma_k_sq: f64, epsilon: f64) -> Result<SignedGraph> {
    if !(sigma_side_sq > 0.0 && sigma_k_sq > 0.0) {
        return Err(Error::InvalidArgument("variances must be positive".into()));
    }
    let side = 1.0 / sigma_side_sq;
    let brk = 1.0 / sigma_k_sq;
    let loop_w = 2.0 * brk - epsilon;
    if epsilon < 0.0 || loop_w < 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside [0, 2/σₖ²]")));
    }
    let mut g = SignedGraph::new(4);
    g.add_edge(0, 1, side)?;
    g.add_edge(1, 2, -brk)?;
    g.add_edge(2, 3, side)?;
    if loop_w > 0.0 {
        g.add_self_loop(1, loop_w)?;
        g.add_self_loop(2, loop_w)?;
    }
    Ok(g)
}

/// Inertia of the loopy Laplacian of [`indefiniteness_demo_graph`].
pub fn indefiniteness_demo(sigma_side_sq: f64, sigma_k_sq: f64, epsilon: f64) -> Result<Inertia> {
    inertia(&indefiniteness_demo_graph(sigma_side_sq, sigma_k_sq, epsilon)?.loopy_laplacian())
}
