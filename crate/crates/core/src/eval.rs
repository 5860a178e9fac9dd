//! Rate-distortion evaluation.

use crate::codec::{self, CodecConfig, DepthImage, Method};
use crate::{Error, Exec, Result};
use std::fmt::Write;

/// Quantisation parameters swept for the graph transforms.
pub const GRAPH_QPS: [u8; 5] = [16, 24, 32, 40, 48];
/// Quantisation parameters swept for the DCT.
pub const DCT_QPS: [u8; 5] = [40, 42, 44, 46, 48];
/// qp whose PSNR [`search_w`] reports.
pub const SEARCH_QP: u8 = 32;
/// Relative rate tolerance when matching points of two curves.
pub const MATCH_SLACK: f64 = 0.05;

pub fn default_qps(method: Method) -> &'static [u8] {
    match method {
        Method::Dct => &DCT_QPS,
        _ => &GRAPH_QPS,
    }
}

/// Candidate negative edge weights `0.05, 0.10, …, 1.00`.
pub fn w_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 * 0.05).collect()
}

/// Peak signal-to-noise ratio for 8-bit samples; `+∞` for identical images.
pub fn psnr(a: &DepthImage, b: &DepthImage) -> Result<f64> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sse: u64 = a.samples().iter().zip(b.samples()).map(|(&x, &y)| (x as i64 - y as i64).pow(2) as u64).sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / a.samples().len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    pub method: Method,
    pub qp: u8,
    pub bits_total: usize,
    pub bits_per_pixel: f64,
    pub psnr_db: f64,
}

/// Encodes, decodes the produced bytes and measures the result.
pub fn rd_point(img: &DepthImage, config: &CodecConfig) -> Result<RdPoint> {
    let enc = codec::encode(img, config)?;
    let dec = codec::decode(&enc.bytes)?;
    Ok(RdPoint {
        method: config.method,
        qp: config.qp,
        bits_total: enc.bits(),
        bits_per_pixel: enc.bits() as f64 / (img.width() * img.height()) as f64,
        psnr_db: psnr(img, &dec)?,
    })
}

pub fn rd_sweep(img: &DepthImage, method: Method, qps: &[u8], config: &CodecConfig, exec: Exec) -> Result<Vec<RdPoint>> {
    let jobs: Vec<(Method, u8)> = qps.iter().map(|&qp| (method, qp)).collect();
    rd_sweep_jobs(img, &jobs, config, exec)
}

/// One point per `(method, qp)` job, in job order.
pub fn rd_sweep_jobs(img: &DepthImage, jobs: &[(Method, u8)], config: &CodecConfig, exec: Exec) -> Result<Vec<RdPoint>> {
    exec.map(jobs, |&(method, qp)| rd_point(img, &config.with_method(method).with_qp(qp))).into_iter().collect()
}

/// Grid search over [`w_grid`] for the SGFT weight with the best
/// rate-distortion curve over [`GRAPH_QPS`]. A candidate's score is its
/// average [`mean_gap`] against every other candidate; ties keep the
/// smaller weight. Returns `(w, psnr at SEARCH_QP)`.
pub fn search_w(img: &DepthImage, config: &CodecConfig, exec: Exec) -> Result<(f64, f64)> {
    let grid = w_grid();
    let jobs: Vec<(f64, u8)> = grid.iter().flat_map(|&w| GRAPH_QPS.map(|qp| (w, qp))).collect();
    let base = config.with_method(Method::Sgft);
    let points: Vec<RdPoint> =
        exec.map(&jobs, |&(w, qp)| rd_point(img, &base.with_w(w).with_qp(qp))).into_iter().collect::<Result<_>>()?;
    let curves: Vec<&[RdPoint]> = points.chunks(GRAPH_QPS.len()).collect();
    let score = |i: usize| -> f64 {
        let gaps: Vec<f64> = (0..curves.len())
            .filter(|&j| j != i)
            .filter_map(|j| mean_gap(curves[i], curves[j], MATCH_SLACK))
            .collect();
        gaps.iter().sum::<f64>() / gaps.len().max(1) as f64
    };
    let scores: Vec<f64> = (0..curves.len()).map(score).collect();
    let mut best = 0;
    for i in 1..grid.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    let at_search = GRAPH_QPS.iter().position(|&q| q == SEARCH_QP).expect("search qp in sweep");
    Ok((grid[best], curves[best][at_search].psnr_db))
}

/// Points not beaten by another point of lower or equal rate, sorted by
/// rate, as `(bpp, psnr)`.
pub fn pareto_front(curve: &[RdPoint]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.bits_per_pixel, p.psnr_db)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut front: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        if front.last().is_none_or(|l| p.1 > l.1) {
            front.push(p);
        }
    }
    front
}

/// PSNR of a curve's Pareto front at `bpp`, interpolated linearly between
/// neighbouring points. Rates up to `slack` (relative) outside the covered
/// range snap to the nearest end; anything further out gives `None`.
pub fn psnr_at_bpp(curve: &[RdPoint], bpp: f64, slack: f64) -> Option<f64> {
    interpolate(&pareto_front(curve), bpp, slack)
}

fn interpolate(front: &[(f64, f64)], bpp: f64, slack: f64) -> Option<f64> {
    let (lo, hi) = (front.first()?, front.last()?);
    if bpp < lo.0 {
        return (bpp >= lo.0 * (1.0 - slack)).then_some(lo.1);
    }
    if bpp > hi.0 {
        return (bpp <= hi.0 * (1.0 + slack)).then_some(hi.1);
    }
    for pair in front.windows(2) {
        let ((r0, p0), (r1, p1)) = (pair[0], pair[1]);
        if bpp <= r1 {
            return Some(p0 + (p1 - p0) * (bpp - r0) / (r1 - r0));
        }
    }
    Some(hi.1)
}

/// `(bpp, psnr(a) − psnr(b))` at every point of `a` whose rate `b` covers.
pub fn matched_gaps(a: &[RdPoint], b: &[RdPoint], slack: f64) -> Vec<(f64, f64)> {
    a.iter()
        .filter_map(|p| psnr_at_bpp(b, p.bits_per_pixel, slack).map(|q| (p.bits_per_pixel, p.psnr_db - q)))
        .collect()
}

/// Average PSNR advantage of `a` over `b` across the rate range both
/// Pareto fronts cover, sampled uniformly in log rate. Ranges that miss
/// each other by no more than `slack` are compared at the nearest rate.
pub fn mean_gap(a: &[RdPoint], b: &[RdPoint], slack: f64) -> Option<f64> {
    const SAMPLES: usize = 64;
    let (fa, fb) = (pareto_front(a), pareto_front(b));
    let lo = fa.first()?.0.max(fb.first()?.0);
    let hi = fa.last()?.0.min(fb.last()?.0);
    let gap = |r: f64| Some(interpolate(&fa, r, slack)? - interpolate(&fb, r, slack)?);
    if lo >= hi {
        return gap((lo * hi).sqrt());
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut sum = 0.0;
    for i in 0..SAMPLES {
        let t = (i as f64 + 0.5) / SAMPLES as f64;
        sum += gap((llo + t * (lhi - llo)).exp())?;
    }
    Some(sum / SAMPLES as f64)
}

/// CSV with `# key: value` metadata lines, then `method,qp,bpp,psnr`.
pub fn to_csv(points: &[RdPoint], metadata: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in metadata {
        writeln!(out, "# {k}: {v}").unwrap();
    }
    out.push_str("method,qp,bpp,psnr\n");
    for p in points {
        let psnr = if p.psnr_db.is_finite() { format!("{:.4}", p.psnr_db) } else { "inf".into() };
        writeln!(out, "{},{},{:.6},{}", p.method, p.qp, p.bits_per_pixel, psnr).unwrap();
    }
    out
}
