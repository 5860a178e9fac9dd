//! Block transforms: SGFT, the positive-weight WGFT baseline and the DCT.
//!
//! Blocks are vectorised in raster order. Graph transform coefficients are
//! in ascending eigenvalue order; DCT coefficients are in zig-zag order.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::contour::BlockContour;
use crate::graph;
use crate::linalg::Matrix;
use crate::spectral::{self, BasisCache, BasisKey, GraphKind, SgftBasis};
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    size: usize,
    pixels: Vec<f64>,
}

impl Block {
    pub fn new(size: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels for a {size}x{size} block",
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("non-finite pixel".into()));
        }
        Ok(Block { size, pixels })
    }

    pub fn zeros(size: usize) -> Self {
        Block { size, pixels: vec![0.0; size * size] }
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let pixels = (0..size * size).map(|i| f(i % size, i / size)).collect();
        Block { size, pixels }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.size + x]
    }

    pub fn energy(&self) -> f64 {
        self.pixels.iter().map(|p| p * p).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffBlock {
    size: usize,
    coeffs: Vec<f64>,
}

impl CoeffBlock {
    pub fn new(size: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a {size}x{size} block",
                coeffs.len()
            )));
        }
        Ok(CoeffBlock { size, coeffs })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// Which transform to apply to a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformKind {
    /// Negative edges of magnitude `w` across the contour.
    Sgft { w: f64 },
    /// Positive edges of weight `w_pos` across the contour.
    Wgft { w_pos: f64 },
    Dct,
}

/// Weight quantised to 1/256 steps, the granularity used in bitstreams and
/// cache keys.
pub fn quantize_weight(w: f64) -> u16 {
    (w * 256.0).round().clamp(1.0, u16::MAX as f64) as u16
}

pub fn dequantize_weight(q: u16) -> f64 {
    q as f64 / 256.0
}

/// SGFT basis for a block contour. Uncached; see [`sgft_basis_cached`].
pub fn sgft_basis(contour: &BlockContour, w: f64) -> Result<SgftBasis> {
    spectral::eigendecompose(&graph::block_graph(contour, w)?.loopy_laplacian())
}

/// WGFT basis: eigenvectors of the plain Laplacian.
pub fn wgft_basis(contour: &BlockContour, w_pos: f64) -> Result<SgftBasis> {
    spectral::eigendecompose(&graph::weighted_block_graph(contour, w_pos)?.laplacian())
}

/// Cached basis lookup. The weight is quantised to 1/256 before building
/// the graph so that the key fully determines the basis.
pub fn basis_cached(
    cache: &BasisCache,
    kind: GraphKind,
    contour: &BlockContour,
    weight: f64,
) -> Result<Arc<SgftBasis>> {
    let weight_q = quantize_weight(weight);
    let key = BasisKey { kind, size: contour.size() as u8, contour: contour.mask(), weight_q };
    let w = dequantize_weight(weight_q);
    cache.get_or_compute(key, || match kind {
        GraphKind::Signed => sgft_basis(contour, w),
        GraphKind::Weighted => wgft_basis(contour, w),
    })
}

pub fn sgft_basis_cached(cache: &BasisCache, contour: &BlockContour, w: f64) -> Result<Arc<SgftBasis>> {
    basis_cached(cache, GraphKind::Signed, contour, w)
}

fn check_sizes(block_size: usize, contour: &BlockContour) -> Result<()> {
    if block_size != contour.size() {
        return Err(Error::DimensionMismatch(format!(
            "block {block_size} vs contour {}",
            contour.size()
        )));
    }
    Ok(())
}

fn graph_forward(basis: &SgftBasis, block: &Block) -> CoeffBlock {
    CoeffBlock { size: block.size, coeffs: basis.forward(&block.pixels) }
}

fn graph_inverse(basis: &SgftBasis, coeffs: &CoeffBlock) -> Block {
    Block { size: coeffs.size, pixels: basis.inverse(&coeffs.coeffs) }
}

pub fn sgft_forward(block: &Block, contour: &BlockContour, w: f64) -> Result<CoeffBlock> {
    check_sizes(block.size, contour)?;
    Ok(graph_forward(&sgft_basis(contour, w)?, block))
}

pub fn sgft_inverse(coeffs: &CoeffBlock, contour: &BlockContour, w: f64) -> Result<Block> {
    check_sizes(coeffs.size, contour)?;
    Ok(graph_inverse(&sgft_basis(contour, w)?, coeffs))
}

pub fn wgft_forward(block: &Block, contour: &BlockContour, w_pos: f64) -> Result<CoeffBlock> {
    check_sizes(block.size, contour)?;
    Ok(graph_forward(&wgft_basis(contour, w_pos)?, block))
}

pub fn wgft_inverse(coeffs: &CoeffBlock, contour: &BlockContour, w_pos: f64) -> Result<Block> {
    check_sizes(coeffs.size, contour)?;
    Ok(graph_inverse(&wgft_basis(contour, w_pos)?, coeffs))
}

/// Orthonormal DCT-II matrix, row `k` holding frequency `k`.
pub fn dct_matrix(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |k, i| {
        let alpha = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        alpha * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos()
    })
}

/// Zig-zag scan: `order[s]` is the raster index (`v·n + u`) of the
/// coefficient at scan position `s`.
pub fn zigzag_order(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(n * n);
    for d in 0..(2 * n).saturating_sub(1) {
        let lo = d.saturating_sub(n - 1);
        let hi = d.min(n - 1);
        let mut diag: Vec<usize> = (lo..=hi).map(|v| v * n + (d - v)).collect();
        if d % 2 == 0 {
            diag.reverse();
        }
        order.extend(diag);
    }
    order
}

fn check_dct_size(n: usize) -> Result<()> {
    if n == 4 || n == 8 {
        Ok(())
    } else {
        Err(Error::UnsupportedSize(n))
    }
}

/// Separable 2D DCT-II, coefficients in zig-zag order.
pub fn dct_forward(block: &Block) -> Result<CoeffBlock> {
    let n = block.size;
    check_dct_size(n)?;
    let c = dct_matrix(n);
    let x = Matrix::from_row_slice(n, n, &block.pixels);
    let y = c.matmul(&x).matmul(&c.transpose());
    let coeffs = zigzag_order(n).into_iter().map(|r| y.as_slice()[r]).collect();
    Ok(CoeffBlock { size: n, coeffs })
}

/// Inverse of [`dct_forward`] (DCT-III).
pub fn dct_inverse(coeffs: &CoeffBlock) -> Result<Block> {
    let n = coeffs.size;
    check_dct_size(n)?;
    let mut raster = vec![0.0; n * n];
    for (s, r) in zigzag_order(n).into_iter().enumerate() {
        raster[r] = coeffs.coeffs[s];
    }
    let c = dct_matrix(n);
    let y = Matrix::from_row_slice(n, n, &raster);
    let x = c.transpose().matmul(&y).matmul(&c);
    Ok(Block { size: n, pixels: x.as_slice().to_vec() })
}

/// Forward transform through `cache`.
pub fn forward(cache: &BasisCache, kind: TransformKind, block: &Block, contour: &BlockContour) -> Result<CoeffBlock> {
    match kind {
        TransformKind::Dct => dct_forward(block),
        TransformKind::Sgft { w } => {
            check_sizes(block.size, contour)?;
            Ok(graph_forward(&*basis_cached(cache, GraphKind::Signed, contour, w)?, block))
        }
        TransformKind::Wgft { w_pos } => {
            check_sizes(block.size, contour)?;
            Ok(graph_forward(&*basis_cached(cache, GraphKind::Weighted, contour, w_pos)?, block))
        }
    }
}

/// Inverse transform through `cache`.
pub fn inverse(cache: &BasisCache, kind: TransformKind, coeffs: &CoeffBlock, contour: &BlockContour) -> Result<Block> {
    match kind {
        TransformKind::Dct => dct_inverse(coeffs),
        TransformKind::Sgft { w } => {
            check_sizes(coeffs.size, contour)?;
            Ok(graph_inverse(&*basis_cached(cache, GraphKind::Signed, contour, w)?, coeffs))
        }
        TransformKind::Wgft { w_pos } => {
            check_sizes(coeffs.size, contour)?;
            Ok(graph_inverse(&*basis_cached(cache, GraphKind::Weighted, contour, w_pos)?, coeffs))
        }
    }
}

/// Forward transform of many independent blocks.
pub fn forward_batch(
    cache: &BasisCache,
    kind: TransformKind,
    jobs: &[(Block, BlockContour)],
    exec: Exec,
) -> Result<Vec<CoeffBlock>> {
    exec.map(jobs, |(b, c)| forward(cache, kind, b, c)).into_iter().collect()
}

/// Inverse transform of many independent blocks.
pub fn inverse_batch(
    cache: &BasisCache,
    kind: TransformKind,
    jobs: &[(CoeffBlock, BlockContour)],
    exec: Exec,
) -> Result<Vec<Block>> {
    exec.map(jobs, |(c, bc)| inverse(cache, kind, c, bc)).into_iter().collect()
}
