//! Symmetric eigendecomposition and SGFT bases.
//!
//! The eigensolver is a cyclic Jacobi iteration. It is slow for big
//! matrices but accurate, simple and bit-reproducible, which matters here:
//! encoder and decoder derive the transform independently from the coded
//! contours, so both sides must produce identical bases.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::linalg::{DenseSymMatrix, Matrix};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOLERANCE: f64 = 1e-14;
const SIGN_EPS: f64 = 1e-12;
/// Relative threshold used by [`psd_check`].
pub const PSD_TOLERANCE: f64 = 1e-9;

/// Orthonormal eigenbasis with ascending eigenvalues.
///
/// Column `i` of [`SgftBasis::vectors`] pairs with eigenvalue `i`. The first
/// entry of every column whose magnitude exceeds `1e-12` is positive; ties
/// between equal eigenvalues are ordered lexicographically by the
/// sign-normalised vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SgftBasis {
    eigenvalues: Vec<f64>,
    vectors: Matrix,
}

impl SgftBasis {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// Analysis: `Φᵀ x`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.vectors.tr_mul_vec(x)
    }

    /// Synthesis: `Φ c`.
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        self.vectors.mul_vec(coeffs)
    }

    /// Builds a basis from explicit parts, normalising order and signs.
    pub(crate) fn from_parts(eigenvalues: Vec<f64>, vectors: Matrix) -> SgftBasis {
        canonicalize(eigenvalues, vectors)
    }

    /// Reverses the column order, e.g. to turn an ascending-variance
    /// decomposition into ascending-precision order.
    pub(crate) fn reversed_with(&self, f: impl Fn(f64) -> f64) -> SgftBasis {
        let n = self.order();
        let vectors = Matrix::from_fn(n, n, |i, j| self.vectors.get(i, n - 1 - j));
        let eigenvalues = (0..n).map(|j| f(self.eigenvalues[n - 1 - j])).collect();
        SgftBasis { eigenvalues, vectors }
    }

    /// `max |QΦ − Φ diag(λ)|`.
    pub fn residual(&self, m: &DenseSymMatrix) -> f64 {
        let n = self.order();
        let qphi = m.to_matrix().matmul(&self.vectors);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r = qphi.get(i, j) - self.vectors.get(i, j) * self.eigenvalues[j];
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    /// `max |ΦᵀΦ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.vectors.transpose().matmul(&self.vectors);
        g.sub(&Matrix::identity(self.order())).max_abs()
    }
}

/// Eigendecomposition of a general square matrix that must be symmetric to
/// within `1e-12` relative.
pub fn try_eigendecompose(m: &Matrix) -> Result<SgftBasis> {
    eigendecompose(&DenseSymMatrix::try_from_matrix(m)?)
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls below
/// `1e-14 · ‖m‖_F`; more than 100 sweeps is reported as
/// [`Error::NoConvergence`].
pub fn eigendecompose(m: &DenseSymMatrix) -> Result<SgftBasis> {
    let (values, vectors) = jacobi(m, true)?;
    Ok(canonicalize(values, vectors.expect("vectors requested")))
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(m: &DenseSymMatrix) -> Result<Vec<f64>> {
    let (mut values, _) = jacobi(m, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn jacobi(m: &DenseSymMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>)> {
    let n = m.order();
    let mut a = m.to_matrix();
    let mut v = want_vectors.then(|| Matrix::identity(n));
    let norm = m.frobenius();
    let target = OFF_DIAGONAL_TOLERANCE * norm;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, v.as_mut(), p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > target {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    Ok(((0..n).map(|i| a.get(i, i)).collect(), v))
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j) * a.get(i, j);
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`, accumulated into `v` if given.
fn rotate(a: &mut Matrix, v: Option<&mut Matrix>, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    if t == 0.0 {
        // |a_pq| is negligible against the diagonal gap
        a.set(p, q, 0.0);
        a.set(q, p, 0.0);
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        a.set(k, p, new_p);
        a.set(p, k, new_p);
        a.set(k, q, new_q);
        a.set(q, k, new_q);
    }
    a.set(p, p, app - t * apq);
    a.set(q, q, aqq + t * apq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);

    let Some(v) = v else {
        return;
    };
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

fn canonicalize(values: Vec<f64>, vectors: Matrix) -> SgftBasis {
    let n = values.len();
    let mut cols: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut col = vectors.column(j);
            if let Some(first) = col.iter().find(|x| x.abs() > SIGN_EPS) {
                if *first < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            (values[j], col)
        })
        .collect();
    cols.sort_by(|(la, va), (lb, vb)| {
        la.total_cmp(lb).then_with(|| {
            va.iter()
                .zip(vb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let eigenvalues = cols.iter().map(|(l, _)| *l).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| cols[j].1[i]);
    SgftBasis { eigenvalues, vectors }
}

/// Piecewise-constant vector `+1` on nodes `1..k` and `−1` on `k..=n`
/// (1-based, matching the break index of [`crate::markov::MarkovModel1D`]).
pub fn pwc_vector(n: usize, k: usize) -> Vec<f64> {
    assert!(k >= 2 && k <= n, "break index must satisfy 2 <= k <= n");
    (1..=n).map(|i| if i < k { 1.0 } else { -1.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// PSD iff the smallest eigenvalue is at least `−1e-9 · max|λ|`.
pub fn psd_check(m: &DenseSymMatrix) -> Result<PsdReport> {
    let values = eigenvalues(m)?;
    let min = values.first().copied().unwrap_or(0.0);
    let scale = spectral_scale(&values);
    Ok(PsdReport { is_psd: min >= -PSD_TOLERANCE * scale, min_eigenvalue: min })
}

pub(crate) fn spectral_scale(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Key under which a block basis is cached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisKey {
    pub kind: GraphKind,
    pub size: u8,
    /// Canonical contour signature (bitmask of broken internal links).
    pub contour: u128,
    /// Edge weight in 1/256 steps.
    pub weight_q: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    /// Negative edges with compensating self-loops, loopy Laplacian.
    Signed,
    /// Small positive edges, plain Laplacian.
    Weighted,
}

/// Thread-safe memo of block bases.
///
/// Lookups take a shared lock. On a miss the basis is computed outside any
/// lock and inserted only if no other thread got there first, so every
/// caller observes the same `Arc` for a given key.
#[derive(Default)]
pub struct BasisCache {
    map: RwLock<HashMap<BasisKey, Arc<SgftBasis>>>,
}

impl BasisCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache shared by the codec.
    pub fn global() -> &'static BasisCache {
        static CACHE: OnceLock<BasisCache> = OnceLock::new();
        CACHE.get_or_init(BasisCache::new)
    }

    pub fn get_or_compute(
        &self,
        key: BasisKey,
        compute: impl FnOnce() -> Result<SgftBasis>,
    ) -> Result<Arc<SgftBasis>> {
        if let Some(b) = self.map.read().unwrap().get(&key) {
            return Ok(Arc::clone(b));
        }
        let basis = Arc::new(compute()?);
        let mut map = self.map.write().unwrap();
        Ok(Arc::clone(map.entry(key).or_insert(basis)))
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
