//! Contour side information as chain codes.
//!
//! Broken links are dual-lattice edges between pixel corners. A chain
//! starts at a corner `(cx, cy)` with `0 ≤ cx ≤ width`, `0 ≤ cy ≤ height`,
//! takes one step in its initial direction and then one step per turn.
//! Every step must cross an existing link, i.e. stay off the image border.
//!
//! Payload layout:
//!
//! ```text
//! varint  chain count (LEB128); a lone 0x00 for an empty map
//! bits    per chain: cx, cy (fixed width for the image size), direction (2)
//!         padded to a byte boundary
//! range   per chain: turns, then an end marker; see `MoveModels`
//! ```

use crate::contour::{ContourMap, Link};
use crate::entropy::bits::{BitReader, BitWriter};
use crate::entropy::range_coder::{BitModel, RangeDecoder, RangeEncoder};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    East,
    South,
    West,
    North,
}

impl Direction {
    const ALL: [Direction; 4] = [Direction::East, Direction::South, Direction::West, Direction::North];

    fn code(self) -> u64 {
        self as u64
    }

    fn from_code(c: u64) -> Direction {
        Self::ALL[c as usize & 3]
    }

    fn delta(self) -> (i64, i64) {
        match self {
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
            Direction::North => (0, -1),
        }
    }

    /// Heading after turning; image coordinates have `y` pointing down, so
    /// a left turn from east heads north.
    pub fn turn(self, t: Turn) -> Direction {
        let i = self as usize;
        match t {
            Turn::Straight => self,
            Turn::Left => Self::ALL[(i + 3) % 4],
            Turn::Right => Self::ALL[(i + 1) % 4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Turn {
    Straight,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContourChain {
    pub start: (usize, usize),
    pub initial: Direction,
    pub moves: Vec<Turn>,
}

impl ContourChain {
    /// Number of links the chain cuts.
    pub fn len(&self) -> usize {
        1 + self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Link crossed by the dual edge leaving corner `(cx, cy)` towards `dir`.
fn dual_link(width: usize, height: usize, cx: i64, cy: i64, dir: Direction) -> Option<Link> {
    let (w, h) = (width as i64, height as i64);
    let (x, y, link_right) = match dir {
        // horizontal dual edges separate vertically adjacent pixels
        Direction::East => (cx, cy - 1, false),
        Direction::West => (cx - 1, cy - 1, false),
        // vertical dual edges separate horizontally adjacent pixels
        Direction::South => (cx - 1, cy, true),
        Direction::North => (cx - 1, cy - 1, true),
    };
    let ok = if link_right {
        x >= 0 && x + 1 < w && y >= 0 && y < h
    } else {
        x >= 0 && x < w && y >= 0 && y + 1 < h
    };
    if !ok {
        return None;
    }
    let (x, y) = (x as usize, y as usize);
    Some(if link_right { Link::right(x, y) } else { Link::down(x, y) })
}

/// Links cut by `chain`, in walking order.
pub fn chain_links(chain: &ContourChain, width: usize, height: usize) -> Result<Vec<Link>> {
    let (mut cx, mut cy) = (chain.start.0 as i64, chain.start.1 as i64);
    let mut dir = chain.initial;
    let mut out = Vec::with_capacity(chain.len());
    let turns = std::iter::once(Turn::Straight).chain(chain.moves.iter().copied());
    for t in turns {
        dir = dir.turn(t);
        let link = dual_link(width, height, cx, cy, dir).ok_or(Error::OutOfBounds(cx, cy))?;
        out.push(link);
        let (dx, dy) = dir.delta();
        cx += dx;
        cy += dy;
    }
    Ok(out)
}

/// Decomposes the broken links of `map` into chains.
///
/// Chains first start from corners with an odd number of remaining broken
/// edges (open contour ends), in raster order, then from any remaining
/// corner. A walk prefers going straight, then left, then right, and ends
/// when no unvisited edge leaves the current corner.
pub fn trace_chains(map: &ContourMap) -> Vec<ContourChain> {
    let (w, h) = (map.width(), map.height());
    let mut left = map.clone();
    let degree = |m: &ContourMap, cx: i64, cy: i64| {
        Direction::ALL
            .iter()
            .filter(|&&d| dual_link(w, h, cx, cy, d).is_some_and(|l| m.is_broken(l)))
            .count()
    };
    let mut chains = Vec::new();
    for odd_pass in [true, false] {
        for cy in 0..=h as i64 {
            for cx in 0..=w as i64 {
                loop {
                    let d = degree(&left, cx, cy);
                    if d == 0 || (odd_pass && d % 2 == 0) {
                        break;
                    }
                    chains.push(walk(&mut left, cx, cy));
                }
            }
        }
    }
    chains
}

fn walk(map: &mut ContourMap, cx: i64, cy: i64) -> ContourChain {
    let (w, h) = (map.width(), map.height());
    let open = |m: &ContourMap, cx: i64, cy: i64, d: Direction| {
        dual_link(w, h, cx, cy, d).filter(|l| m.is_broken(*l))
    };
    let initial = *Direction::ALL
        .iter()
        .find(|&&d| open(map, cx, cy, d).is_some())
        .expect("corner has a broken edge");
    let (mut x, mut y, mut dir) = (cx, cy, initial);
    let mut moves = Vec::new();
    loop {
        let link = open(map, x, y, dir).expect("chosen edge is open");
        map.set(link, false).expect("link is valid");
        let (dx, dy) = dir.delta();
        x += dx;
        y += dy;
        let next = [Turn::Straight, Turn::Left, Turn::Right]
            .into_iter()
            .find(|&t| open(map, x, y, dir.turn(t)).is_some());
        match next {
            Some(t) => {
                moves.push(t);
                dir = dir.turn(t);
            }
            None => break,
        }
    }
    ContourChain { start: (cx as usize, cy as usize), initial, moves }
}

fn coord_bits(max: usize) -> u32 {
    (usize::BITS - max.leading_zeros()).max(1)
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn get_varint(bytes: &[u8]) -> Result<(u64, usize)> {
    let mut v = 0u64;
    for (i, &b) in bytes.iter().enumerate().take(10) {
        v |= ((b & 0x7f) as u64) << (7 * i);
        if b & 0x80 == 0 {
            return Ok((v, i + 1));
        }
    }
    Err(Error::TruncatedStream)
}

/// Adaptive contexts for turns, each conditioned on the previous turn.
#[derive(Default)]
struct MoveModels {
    more: [BitModel; 3],
    straight: [BitModel; 3],
    left: [BitModel; 3],
}

fn turn_index(t: Turn) -> usize {
    match t {
        Turn::Straight => 0,
        Turn::Left => 1,
        Turn::Right => 2,
    }
}

/// Encodes chains for an image of `width × height` pixels.
pub fn encode_contours(chains: &[ContourChain], width: usize, height: usize) -> Result<Vec<u8>> {
    for c in chains {
        chain_links(c, width, height)?;
    }
    let mut out = Vec::new();
    put_varint(&mut out, chains.len() as u64);
    if chains.is_empty() {
        return Ok(out);
    }
    let (bx, by) = (coord_bits(width), coord_bits(height));
    let mut bits = BitWriter::new();
    for c in chains {
        bits.put_bits(c.start.0 as u64, bx);
        bits.put_bits(c.start.1 as u64, by);
        bits.put_bits(c.initial.code(), 2);
    }
    out.extend(bits.finish());

    let mut models = MoveModels::default();
    let mut enc = RangeEncoder::new();
    for c in chains {
        let mut prev = Turn::Straight;
        for &t in &c.moves {
            let p = turn_index(prev);
            enc.encode(&mut models.more[p], true);
            enc.encode(&mut models.straight[p], t == Turn::Straight);
            if t != Turn::Straight {
                enc.encode(&mut models.left[p], t == Turn::Left);
            }
            prev = t;
        }
        enc.encode(&mut models.more[turn_index(prev)], false);
    }
    out.extend(enc.finish());
    Ok(out)
}

/// Decodes the chain list written by [`encode_contours`].
pub fn decode_chains(bytes: &[u8], width: usize, height: usize) -> Result<Vec<ContourChain>> {
    let (count, mut pos) = get_varint(bytes)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    // every chain cuts at least one distinct link
    let max_links = 2 * width * height;
    if count as usize > max_links {
        return Err(Error::CorruptPayload(format!("{count} chains")));
    }
    let (bx, by) = (coord_bits(width), coord_bits(height));
    let mut reader = BitReader::new(&bytes[pos..]);
    let mut starts = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let cx = reader.get_bits(bx)? as usize;
        let cy = reader.get_bits(by)? as usize;
        let dir = Direction::from_code(reader.get_bits(2)?);
        if cx > width || cy > height {
            return Err(Error::OutOfBounds(cx as i64, cy as i64));
        }
        starts.push(((cx, cy), dir));
    }
    pos += reader.byte_pos();

    let mut models = MoveModels::default();
    let mut dec = RangeDecoder::new(&bytes[pos..])?;
    let mut chains = Vec::with_capacity(starts.len());
    for (start, initial) in starts {
        let mut moves = Vec::new();
        let mut prev = Turn::Straight;
        loop {
            let p = turn_index(prev);
            if !dec.decode(&mut models.more[p])? {
                break;
            }
            let t = if dec.decode(&mut models.straight[p])? {
                Turn::Straight
            } else if dec.decode(&mut models.left[p])? {
                Turn::Left
            } else {
                Turn::Right
            };
            moves.push(t);
            if moves.len() > max_links {
                return Err(Error::CorruptPayload("chain longer than the link count".into()));
            }
            prev = t;
        }
        let chain = ContourChain { start, initial, moves };
        chain_links(&chain, width, height)?;
        chains.push(chain);
    }
    Ok(chains)
}

/// Decodes a contour payload into the broken-link map it describes.
pub fn decode_contours(bytes: &[u8], width: usize, height: usize) -> Result<ContourMap> {
    let mut map = ContourMap::new(width, height);
    for chain in decode_chains(bytes, width, height)? {
        for link in chain_links(&chain, width, height)? {
            map.insert(link)?;
        }
    }
    Ok(map)
}
