//! Deterministic synthetic depth images.

use crate::codec::DepthImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent uniform samples.
pub fn uniform_noise(width: usize, height: usize, seed: u64) -> DepthImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..width * height).map(|_| rng.random()).collect();
    DepthImage::new(width, height, samples).expect("positive dimensions")
}

struct Plane {
    level: f64,
    gx: f64,
    gy: f64,
}

enum Shape {
    Disc { cx: f64, cy: f64, r: f64 },
    HalfPlane { nx: f64, ny: f64, offset: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Disc { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) < r * r,
            Shape::HalfPlane { nx, ny, offset } => nx * x + ny * y > offset,
            Shape::Rect { x0, y0, x1, y1 } => (x0..x1).contains(&x) && (y0..y1).contains(&y),
        }
    }
}

/// Piecewise-smooth scene: a sloped background with `layers` overlapping
/// sloped objects whose depth jumps exceed 40 levels, the kind of content
/// depth maps are made of.
pub fn piecewise_smooth(size: usize, layers: usize, seed: u64) -> DepthImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let plane = |rng: &mut ChaCha8Rng, level: f64| Plane {
        level,
        gx: rng.random_range(-0.25..0.25),
        gy: rng.random_range(-0.25..0.25),
    };
    let base = rng.random_range(20.0..60.0);
    let background = plane(&mut rng, base);
    let mut objects = Vec::with_capacity(layers);
    let mut level = background.level;
    for _ in 0..layers {
        level += rng.random_range(45.0..70.0);
        if level > 230.0 {
            level -= 190.0;
        }
        let shape = match rng.random_range(0..3) {
            0 => Shape::Disc {
                cx: rng.random_range(0.2..0.8) * s,
                cy: rng.random_range(0.2..0.8) * s,
                r: rng.random_range(0.15..0.35) * s,
            },
            1 => {
                let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let (nx, ny) = (angle.cos(), angle.sin());
                Shape::HalfPlane { nx, ny, offset: nx * s / 2.0 + ny * s / 2.0 + rng.random_range(-0.2..0.2) * s }
            }
            _ => {
                let (x0, y0) = (rng.random_range(0.05..0.5) * s, rng.random_range(0.05..0.5) * s);
                Shape::Rect { x0, y0, x1: x0 + rng.random_range(0.2..0.45) * s, y1: y0 + rng.random_range(0.2..0.45) * s }
            }
        };
        objects.push((shape, plane(&mut rng, level)));
    }
    DepthImage::from_fn(size, size, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let p = objects.iter().rev().find(|(shape, _)| shape.contains(fx, fy)).map_or(&background, |(_, p)| p);
        let (dx, dy) = (fx - s / 2.0, fy - s / 2.0);
        (p.level + p.gx * dx + p.gy * dy).round().clamp(0.0, 255.0) as u8
    })
    .expect("positive dimensions")
}
