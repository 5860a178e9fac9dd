//! One-state Markov process with a single anti-correlated step.
//!
//! The signal `x` of length `n` is generated by
//!
//! ```text
//! x₁          = z₁
//! xᵢ − xᵢ₋₁   = zᵢ      (i ≠ k)
//! xₖ + xₖ₋₁   = zₖ
//! ```
//!
//! with independent zero-mean innovations `zᵢ ~ N(0, σᵢ²)`. In matrix form
//! `M x = z`, so `C = M⁻¹ diag(σᵢ²) M⁻ᵀ` and `P = Mᵀ diag(1/σᵢ²) M`.
//!
//! Indices in this module's public API are 1-based to match the break
//! position `k`; storage is 0-based.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{DenseSymMatrix, Matrix};
use crate::spectral::{self, SgftBasis};
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel1D {
    k: usize,
    sigma_sq: Vec<f64>,
    first_precision_zero: bool,
}

impl MarkovModel1D {
    /// `k` is the 1-based break position: the pair `(k−1, k)` is
    /// anti-correlated. With `first_precision_zero` the first variance is
    /// treated as infinite and `sigma_sq[0]` is ignored.
    pub fn new(k: usize, sigma_sq: Vec<f64>, first_precision_zero: bool) -> Result<Self> {
        let n = sigma_sq.len();
        if n < 2 {
            return Err(Error::InvalidModel(format!("length {n} < 2")));
        }
        if k < 2 || k > n {
            return Err(Error::InvalidModel(format!("break index {k} outside [2, {n}]")));
        }
        for (i, &s) in sigma_sq.iter().enumerate() {
            if i == 0 && first_precision_zero {
                continue;
            }
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidModel(format!("variance {} is {s}", i + 1)));
            }
        }
        Ok(MarkovModel1D { k, sigma_sq, first_precision_zero })
    }

    /// Like [`MarkovModel1D::new`], but an infinite `sigma_sq[0]` sets the
    /// infinite-first-variance flag.
    pub fn from_variances(k: usize, sigma_sq: Vec<f64>) -> Result<Self> {
        let flag = sigma_sq.first().is_some_and(|s| s.is_infinite() && *s > 0.0);
        Self::new(k, sigma_sq, flag)
    }

    pub fn n(&self) -> usize {
        self.sigma_sq.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma_sq(&self) -> &[f64] {
        &self.sigma_sq
    }

    pub fn first_precision_zero(&self) -> bool {
        self.first_precision_zero
    }

    /// `1/σᵢ²`, with the first entry exactly 0 under the flag.
    pub fn inverse_variances(&self) -> Vec<f64> {
        self.sigma_sq
            .iter()
            .enumerate()
            .map(|(i, s)| if i == 0 && self.first_precision_zero { 0.0 } else { 1.0 / s })
            .collect()
    }

    /// 0-based row index of the anti-correlated equation.
    fn break_row(&self) -> usize {
        self.k - 1
    }

    /// Lower-bidiagonal `M` with `+1` at `(k, k−1)` and `−1` on every other
    /// sub-diagonal entry.
    pub fn difference_matrix(&self) -> Matrix {
        let n = self.n();
        let mut m = Matrix::identity(n);
        for i in 1..n {
            m.set(i, i - 1, if i == self.break_row() { 1.0 } else { -1.0 });
        }
        m
    }

    /// Solves `M x = z` by forward substitution.
    pub fn synthesize(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n());
        let mut x = Vec::with_capacity(z.len());
        x.push(z[0]);
        for i in 1..z.len() {
            let prev = x[i - 1];
            x.push(if i == self.break_row() { z[i] - prev } else { z[i] + prev });
        }
        x
    }

    /// `M⁻¹`, column by column.
    pub fn difference_matrix_inverse(&self) -> Matrix {
        let n = self.n();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            for (i, v) in self.synthesize(&e).into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        inv
    }

    /// `C = M⁻¹ diag(σᵢ²) M⁻ᵀ`.
    pub fn covariance(&self) -> Result<DenseSymMatrix> {
        if self.first_precision_zero {
            return Err(Error::InfiniteFirstVariance);
        }
        let inv = self.difference_matrix_inverse();
        let n = self.n();
        Ok(DenseSymMatrix::from_upper(n, |i, j| {
            (0..n).map(|r| inv.get(i, r) * self.sigma_sq[r] * inv.get(j, r)).sum()
        }))
    }

    /// Tridiagonal `P = Mᵀ diag(1/σᵢ²) M` in expanded form.
    ///
    /// Diagonal `i` is `1/σᵢ² + 1/σᵢ₊₁²` (the second term absent on the last
    /// row); sub-diagonal `(i, i−1)` is `−1/σᵢ²`, except `+1/σₖ²` at the
    /// break.
    pub fn precision(&self) -> DenseSymMatrix {
        let n = self.n();
        let inv = self.inverse_variances();
        let mut p = DenseSymMatrix::zeros(n);
        for i in 0..n {
            let d = if i + 1 < n { inv[i] + inv[i + 1] } else { inv[i] };
            p.set(i, i, d);
            if i > 0 {
                p.set(i, i - 1, if i == self.break_row() { inv[i] } else { -inv[i] });
            }
        }
        p
    }

    /// Draws one signal, using `standard` as the source of `N(0, 1)` draws.
    pub fn sample_with(&self, mut standard: impl FnMut() -> f64) -> Result<Vec<f64>> {
        if self.first_precision_zero {
            return Err(Error::InfiniteFirstVariance);
        }
        let z: Vec<f64> = self.sigma_sq.iter().map(|s| s.sqrt() * standard()).collect();
        Ok(self.synthesize(&z))
    }

    /// `count` independent signals. Signal `i` uses its own ChaCha stream
    /// derived from `(seed, i)`, so output does not depend on `exec`.
    pub fn sample(&self, seed: u64, count: usize, exec: Exec) -> Result<Vec<Vec<f64>>> {
        if self.first_precision_zero {
            return Err(Error::InfiniteFirstVariance);
        }
        exec.map_range(count, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            self.sample_with(|| StandardNormal.sample(&mut rng))
        })
        .into_iter()
        .collect()
    }
}

const COV_CHUNK: usize = 4096;

/// Sample covariance (mean removed, `count − 1` normalisation).
///
/// Partial sums are taken over fixed-size chunks and combined in order, so
/// the result is bit-identical under every [`Exec`] policy.
pub fn empirical_covariance(samples: &[Vec<f64>], exec: Exec) -> Result<DenseSymMatrix> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let n = samples[0].len();
    if samples.iter().any(|s| s.len() != n) {
        return Err(Error::DimensionMismatch("samples have different lengths".into()));
    }
    let chunks: Vec<&[Vec<f64>]> = samples.chunks(COV_CHUNK).collect();

    let sums = exec.map(&chunks, |chunk| {
        let mut s = vec![0.0; n];
        for x in chunk.iter() {
            s.iter_mut().zip(x).for_each(|(a, b)| *a += b);
        }
        s
    });
    let mut mean = vec![0.0; n];
    for s in &sums {
        mean.iter_mut().zip(s).for_each(|(a, b)| *a += b);
    }
    let count = samples.len() as f64;
    mean.iter_mut().for_each(|m| *m /= count);

    let partials = exec.map(&chunks, |chunk| {
        let mut acc = vec![0.0; n * n];
        let mut d = vec![0.0; n];
        for x in chunk.iter() {
            d.iter_mut().zip(x.iter().zip(&mean)).for_each(|(di, (xi, mi))| *di = xi - mi);
            for i in 0..n {
                for j in i..n {
                    acc[i * n + j] += d[i] * d[j];
                }
            }
        }
        acc
    });
    let mut acc = vec![0.0; n * n];
    for p in &partials {
        acc.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    Ok(DenseSymMatrix::from_upper(n, |i, j| acc[i * n + j] / (count - 1.0)))
}

/// Eigenvectors of the sample covariance ordered by ascending precision
/// (descending variance). Reported eigenvalues are precisions `1/variance`.
///
/// Fails with [`Error::DegenerateCovariance`] when any variance is at most
/// `1e-9` times the largest.
pub fn empirical_klt(samples: &[Vec<f64>], exec: Exec) -> Result<SgftBasis> {
    let cov = empirical_covariance(samples, exec)?;
    let basis = spectral::eigendecompose(&cov)?;
    let values = basis.eigenvalues();
    let top = values.last().copied().unwrap_or(0.0);
    let rank = values.iter().filter(|&&v| v > 1e-9 * top).count();
    if top <= 0.0 || rank < values.len() {
        return Err(Error::DegenerateCovariance { rank, order: values.len() });
    }
    let reversed = basis.reversed_with(|v| 1.0 / v);
    Ok(SgftBasis::from_parts(reversed.eigenvalues().to_vec(), reversed.vectors().clone()))
}
