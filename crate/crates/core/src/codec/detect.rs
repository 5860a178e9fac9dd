//! Threshold contour detection.

use crate::codec::DepthImage;
use crate::contour::{ContourMap, Link};

/// Breaks every 4-adjacent link whose sample difference reaches
/// `threshold`, then drops broken links that touch no other broken link.
pub fn detect_contours(img: &DepthImage, threshold: u8) -> ContourMap {
    let (w, h) = (img.width(), img.height());
    let threshold = threshold.max(1) as i32;
    let mut map = ContourMap::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let v = img.get(x, y) as i32;
            if x + 1 < w && (v - img.get(x + 1, y) as i32).abs() >= threshold {
                map.insert(Link::right(x, y)).expect("inside image");
            }
            if y + 1 < h && (v - img.get(x, y + 1) as i32).abs() >= threshold {
                map.insert(Link::down(x, y)).expect("inside image");
            }
        }
    }
    let isolated: Vec<Link> = map
        .links()
        .into_iter()
        .filter(|l| l.corners().iter().all(|&(cx, cy)| map.broken_at_corner(cx, cy).all(|o| o == *l)))
        .collect();
    for l in isolated {
        map.set(l, false).expect("inside image");
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_ramp_are_smooth() {
        let flat = DepthImage::filled(16, 16, 90).unwrap();
        assert!(detect_contours(&flat, 30).is_empty());
        let ramp = DepthImage::from_fn(32, 8, |x, _| (x * 4 + 10) as u8).unwrap();
        assert!(detect_contours(&ramp, 30).is_empty());
    }

    #[test]
    fn vertical_step() {
        let img = DepthImage::from_fn(8, 8, |x, _| if x < 3 { 50 } else { 150 }).unwrap();
        let map = detect_contours(&img, 30);
        assert_eq!(map.len(), 8);
        assert!((0..8).all(|y| map.is_broken(Link::right(2, y))));
    }

    #[test]
    fn lone_link_is_noise() {
        // a single outlier pixel on the border has one broken link only
        let img = DepthImage::from_fn(6, 6, |x, y| if (x, y) == (0, 3) { 200 } else { 20 }).unwrap();
        let map = detect_contours(&img, 30);
        // (0,3) differs from (1,3), (0,2), (0,4): three links that meet at corners
        assert_eq!(map.len(), 3);
        let img = DepthImage::from_fn(6, 1, |x, _| if x < 2 { 200 } else { 20 }).unwrap();
        assert!(detect_contours(&img, 30).is_empty());
    }
}
