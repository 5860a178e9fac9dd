//! Contour-aware intra prediction.
//!
//! Causal samples are the reconstructed row above and column left of the
//! block. A sample seeds the pixel it touches unless the link into the
//! block is broken; seeds then spread by breadth-first search over
//! unbroken internal links, so each pixel copies the nearest reachable
//! seed (ties go to the earlier seed: top row left to right, then left
//! column top to bottom).

use crate::contour::{ContourMap, Link};
use std::collections::VecDeque;

pub const FALLBACK: u8 = 128;

/// Predicts the `size × size` block at `(x0, y0)` from `recon`, a
/// row-major image of width `stride` whose causal area is already
/// reconstructed.
pub fn intra_predict(recon: &[u8], stride: usize, contours: &ContourMap, x0: usize, y0: usize, size: usize) -> Vec<u8> {
    let mut seeds: Vec<(usize, u8)> = Vec::new();
    if y0 > 0 {
        for i in 0..size {
            if !contours.is_broken(Link::down(x0 + i, y0 - 1)) {
                seeds.push((i, recon[(y0 - 1) * stride + x0 + i]));
            }
        }
    }
    if x0 > 0 {
        for j in 0..size {
            if !contours.is_broken(Link::right(x0 - 1, y0 + j)) {
                seeds.push((j * size, recon[(y0 + j) * stride + x0 - 1]));
            }
        }
    }

    let mut pred: Vec<Option<u8>> = vec![None; size * size];
    let mut queue = VecDeque::new();
    for &(i, v) in &seeds {
        if pred[i].is_none() {
            pred[i] = Some(v);
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % size, i / size);
        let v = pred[i];
        let mut visit = |j: usize, link: Link| {
            if pred[j].is_none() && !contours.is_broken(link) {
                pred[j] = v;
                queue.push_back(j);
            }
        };
        if x + 1 < size {
            visit(i + 1, Link::right(x0 + x, y0 + y));
        }
        if y + 1 < size {
            visit(i + size, Link::down(x0 + x, y0 + y));
        }
        if x > 0 {
            visit(i - 1, Link::right(x0 + x - 1, y0 + y));
        }
        if y > 0 {
            visit(i - size, Link::down(x0 + x, y0 + y - 1));
        }
    }

    let fill = if seeds.is_empty() {
        FALLBACK
    } else {
        let sum: usize = seeds.iter().map(|&(_, v)| v as usize).sum();
        ((sum + seeds.len() / 2) / seeds.len()) as u8
    };
    pred.into_iter().map(|p| p.unwrap_or(fill)).collect()
}
