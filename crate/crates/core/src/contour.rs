//! Broken links between 4-adjacent pixels.
//!
//! A link joins pixel `(x, y)` to its right neighbour `(x+1, y)` or to the
//! pixel below, `(x, y+1)`. A contour is the set of links it cuts.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkDir {
    /// `(x, y)` – `(x+1, y)`
    Right,
    /// `(x, y)` – `(x, y+1)`
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub x: usize,
    pub y: usize,
    pub dir: LinkDir,
}

impl Link {
    pub fn right(x: usize, y: usize) -> Self {
        Link { x, y, dir: LinkDir::Right }
    }

    pub fn down(x: usize, y: usize) -> Self {
        Link { x, y, dir: LinkDir::Down }
    }

    /// The link joining two pixels, if they are 4-adjacent.
    pub fn between(a: (usize, usize), b: (usize, usize)) -> Option<Link> {
        let (p, q) = if a <= b { (a, b) } else { (b, a) };
        if p.1 == q.1 && q.0 == p.0 + 1 {
            Some(Link::right(p.0, p.1))
        } else if p.0 == q.0 && q.1 == p.1 + 1 {
            Some(Link::down(p.0, p.1))
        } else {
            None
        }
    }

    /// Pixel corners at the ends of the dual edge this link crosses.
    pub fn corners(&self) -> [(usize, usize); 2] {
        match self.dir {
            LinkDir::Right => [(self.x + 1, self.y), (self.x + 1, self.y + 1)],
            LinkDir::Down => [(self.x, self.y + 1), (self.x + 1, self.y + 1)],
        }
    }

    /// The second pixel of the link.
    pub fn other(&self) -> (usize, usize) {
        match self.dir {
            LinkDir::Right => (self.x + 1, self.y),
            LinkDir::Down => (self.x, self.y + 1),
        }
    }
}

/// Image-wide set of broken links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContourMap {
    width: usize,
    height: usize,
    /// `(width−1) × height`, index `y·(width−1) + x`
    right: Vec<bool>,
    /// `width × (height−1)`, index `y·width + x`
    down: Vec<bool>,
}

impl ContourMap {
    pub fn new(width: usize, height: usize) -> Self {
        ContourMap {
            width,
            height,
            right: vec![false; width.saturating_sub(1) * height],
            down: vec![false; width * height.saturating_sub(1)],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_valid(&self, link: Link) -> bool {
        match link.dir {
            LinkDir::Right => link.x + 1 < self.width && link.y < self.height,
            LinkDir::Down => link.x < self.width && link.y + 1 < self.height,
        }
    }

    fn slot(&self, link: Link) -> Option<(bool, usize)> {
        if !self.is_valid(link) {
            return None;
        }
        Some(match link.dir {
            LinkDir::Right => (true, link.y * (self.width - 1) + link.x),
            LinkDir::Down => (false, link.y * self.width + link.x),
        })
    }

    pub fn is_broken(&self, link: Link) -> bool {
        match self.slot(link) {
            Some((true, i)) => self.right[i],
            Some((false, i)) => self.down[i],
            None => false,
        }
    }

    /// Whether the link between two adjacent pixels is broken. Non-adjacent
    /// or out-of-range pairs report `false`.
    pub fn is_cut(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        Link::between(a, b).is_some_and(|l| self.is_broken(l))
    }

    pub fn set(&mut self, link: Link, broken: bool) -> Result<()> {
        match self.slot(link) {
            Some((true, i)) => self.right[i] = broken,
            Some((false, i)) => self.down[i] = broken,
            None => {
                return Err(Error::InvalidLink((link.x, link.y), link.other()));
            }
        }
        Ok(())
    }

    pub fn insert(&mut self, link: Link) -> Result<()> {
        self.set(link, true)
    }

    pub fn is_empty(&self) -> bool {
        !self.right.iter().chain(&self.down).any(|&b| b)
    }

    pub fn len(&self) -> usize {
        self.right.iter().chain(&self.down).filter(|&&b| b).count()
    }

    /// Broken links in raster order of their first pixel, `Right` before
    /// `Down`.
    pub fn links(&self) -> Vec<Link> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                for link in [Link::right(x, y), Link::down(x, y)] {
                    if self.is_broken(link) {
                        out.push(link);
                    }
                }
            }
        }
        out
    }

    /// Broken links whose dual edge touches pixel corner `(cx, cy)`.
    pub fn broken_at_corner(&self, cx: usize, cy: usize) -> impl Iterator<Item = Link> + '_ {
        let left = cx.checked_sub(1);
        let up = cy.checked_sub(1);
        let candidates = [
            left.zip(up).map(|(x, y)| Link::right(x, y)),
            left.map(|x| Link::right(x, cy)),
            left.zip(up).map(|(x, y)| Link::down(x, y)),
            up.map(|y| Link::down(cx, y)),
        ];
        candidates.into_iter().flatten().filter(|l| self.is_broken(*l))
    }

    /// Broken links strictly inside the `size × size` block at `(x0, y0)`.
    pub fn block_view(&self, x0: usize, y0: usize, size: usize) -> BlockContour {
        let mut bc = BlockContour::empty(size);
        for y in 0..size {
            for x in 0..size {
                if x + 1 < size && self.is_broken(Link::right(x0 + x, y0 + y)) {
                    bc.insert(Link::right(x, y));
                }
                if y + 1 < size && self.is_broken(Link::down(x0 + x, y0 + y)) {
                    bc.insert(Link::down(x, y));
                }
            }
        }
        bc
    }
}

/// Broken internal links of one `size × size` block, stored as a bitmask.
///
/// Bit `y·(size−1) + x` is the `Right` link at `(x, y)`; bit
/// `size·(size−1) + y·size + x` is the `Down` link at `(x, y)`. The mask
/// doubles as the canonical contour signature for basis caching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockContour {
    size: usize,
    mask: u128,
}

impl BlockContour {
    pub const MAX_SIZE: usize = 8;

    pub fn empty(size: usize) -> Self {
        assert!((1..=Self::MAX_SIZE).contains(&size), "block size {size} unsupported");
        BlockContour { size, mask: 0 }
    }

    pub fn from_mask(size: usize, mask: u128) -> Result<Self> {
        if !(1..=Self::MAX_SIZE).contains(&size) {
            return Err(Error::UnsupportedSize(size));
        }
        let bits = Self::link_count(size);
        if bits < 128 && mask >> bits != 0 {
            return Err(Error::InvalidArgument(format!("mask has bits beyond {bits} links")));
        }
        Ok(BlockContour { size, mask })
    }

    /// Builds from pixel pairs (local `(x, y)` coordinates); every pair must
    /// be 4-adjacent and inside the block.
    pub fn from_pixel_pairs(size: usize, pairs: &[((usize, usize), (usize, usize))]) -> Result<Self> {
        if !(1..=Self::MAX_SIZE).contains(&size) {
            return Err(Error::UnsupportedSize(size));
        }
        let mut bc = BlockContour::empty(size);
        for &(a, b) in pairs {
            let link = Link::between(a, b)
                .filter(|l| bc.index(*l).is_some())
                .ok_or(Error::InvalidLink(a, b))?;
            bc.insert(link);
        }
        Ok(bc)
    }

    pub fn link_count(size: usize) -> usize {
        2 * size * size.saturating_sub(1)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mask(&self) -> u128 {
        self.mask
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn count(&self) -> usize {
        self.mask.count_ones() as usize
    }

    fn index(&self, link: Link) -> Option<usize> {
        let n = self.size;
        match link.dir {
            LinkDir::Right if link.x + 1 < n && link.y < n => Some(link.y * (n - 1) + link.x),
            LinkDir::Down if link.x < n && link.y + 1 < n => Some(n * (n - 1) + link.y * n + link.x),
            _ => None,
        }
    }

    pub fn insert(&mut self, link: Link) {
        let i = self.index(link).expect("link outside block");
        self.mask |= 1u128 << i;
    }

    pub fn contains(&self, link: Link) -> bool {
        self.index(link).is_some_and(|i| self.mask >> i & 1 == 1)
    }

    /// All internal links of the block with their broken flag, `Right`
    /// links first, each group in raster order.
    pub fn all_links(&self) -> impl Iterator<Item = (Link, bool)> + '_ {
        let n = self.size;
        let rights = (0..n).flat_map(move |y| (0..n.saturating_sub(1)).map(move |x| Link::right(x, y)));
        let downs = (0..n.saturating_sub(1)).flat_map(move |y| (0..n).map(move |x| Link::down(x, y)));
        rights.chain(downs).map(move |l| (l, self.contains(l)))
    }
}
