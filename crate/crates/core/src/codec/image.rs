//! 8-bit depth images and binary PGM (P5) I/O.

use crate::{Error, Result};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!("image dimensions {width}x{height}")));
        }
        if samples.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {width}x{height} image",
                samples.len()
            )));
        }
        Ok(DepthImage { width, height, samples })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let samples = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self::new(width, height, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    /// Replicates the last column and row out to `width × height`.
    pub fn padded(&self, width: usize, height: usize) -> DepthImage {
        assert!(width >= self.width && height >= self.height);
        DepthImage::from_fn(width, height, |x, y| self.get(x.min(self.width - 1), y.min(self.height - 1)))
            .expect("non-empty")
    }

    /// Top-left `width × height` window.
    pub fn cropped(&self, width: usize, height: usize) -> DepthImage {
        assert!(width <= self.width && height <= self.height);
        DepthImage::from_fn(width, height, |x, y| self.get(x, y)).expect("non-empty")
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.samples);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        if bytes.get(..2) != Some(b"P5") {
            return Err(Error::Pgm("missing P5 magic".into()));
        }
        pos += 2;
        let mut fields = [0usize; 3];
        for field in &mut fields {
            *field = pgm_number(bytes, &mut pos)?;
        }
        let [width, height, maxval] = fields;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Pgm(format!("unsupported maxval {maxval}")));
        }
        // exactly one whitespace byte separates the header from the raster
        if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(Error::Pgm("missing whitespace after header".into()));
        }
        pos += 1;
        let n = width.checked_mul(height).ok_or_else(|| Error::Pgm("dimensions overflow".into()))?;
        let data = bytes
            .get(pos..pos + n)
            .ok_or_else(|| Error::Pgm(format!("expected {n} samples, found {}", bytes.len() - pos)))?;
        Self::new(width, height, data.to_vec()).map_err(|e| Error::Pgm(e.to_string()))
    }

    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::Pgm(format!("{}: {e}", path.display())))?;
        Self::from_pgm(&bytes)
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_pgm()).map_err(|e| Error::Pgm(format!("{}: {e}", path.display())))
    }
}

fn pgm_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::Pgm("truncated header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Pgm(format!("bad header field at byte {start}")))
}
