//! Block-based depth-image codec.
//!
//! Pipeline: detect contours on the padded image and code them as chains;
//! walk the 8×8 grid in raster order; a block crossed by no broken link is
//! predicted and DCT coded, any other block is split into four 4×4 blocks
//! coded with the graph transform of their own contour. Predictions read
//! reconstructed samples only, so encoder and decoder stay in lockstep.

mod bitstream;
mod detect;
mod image;
mod predict;
mod quant;

pub use bitstream::{Bitstream, Header, Method, HEADER_LEN, MAGIC, VERSION};
pub use detect::detect_contours;
pub use image::DepthImage;
pub use predict::{intra_predict, FALLBACK};
pub use quant::{dequantize, quantize, step_size, MAX_QP};

use crate::contour::{BlockContour, ContourMap};
use crate::entropy::{decode_contours, encode_contours, trace_chains, BitModel, CoeffClass, CoeffCoder, RangeDecoder, RangeEncoder};
use crate::spectral::BasisCache;
use crate::transforms::{self, dequantize_weight, quantize_weight, Block, CoeffBlock, TransformKind};
use crate::{Error, Result};

pub const SGFT_BLOCK: usize = 4;
pub const DCT_BLOCK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecConfig {
    pub method: Method,
    pub qp: u8,
    /// Negative edge magnitude for SGFT blocks.
    pub w: f64,
    /// Edge weight across contours for WGFT blocks.
    pub w_pos: f64,
    pub contour_threshold: u8,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig { method: Method::Sgft, qp: 32, w: 0.1, w_pos: 0.1, contour_threshold: 30 }
    }
}

impl CodecConfig {
    pub fn with_method(self, method: Method) -> Self {
        CodecConfig { method, ..self }
    }

    pub fn with_qp(self, qp: u8) -> Self {
        CodecConfig { qp, ..self }
    }

    pub fn with_w(self, w: f64) -> Self {
        CodecConfig { w, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qp > MAX_QP {
            return Err(Error::InvalidArgument(format!("qp {} outside [0, {MAX_QP}]", self.qp)));
        }
        for (name, v) in [("w", self.w), ("w_pos", self.w_pos)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} outside (0, 1]")));
            }
        }
        if self.contour_threshold == 0 {
            return Err(Error::InvalidArgument("contour threshold must be at least 1".into()));
        }
        Ok(())
    }

    /// The graph weight written to the header.
    pub fn weight(&self) -> f64 {
        match self.method {
            Method::Wgft => self.w_pos,
            _ => self.w,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub bytes: Vec<u8>,
    pub reconstruction: DepthImage,
    /// One entry per 8×8 block in raster order; `true` for graph-coded.
    pub modes: Vec<bool>,
    /// Non-zero quantised coefficients over the whole image.
    pub significant: usize,
}

impl Encoded {
    pub fn bits(&self) -> usize {
        8 * self.bytes.len()
    }
}

#[derive(Debug, Clone)]
pub struct Decoded {
    pub header: Header,
    pub image: DepthImage,
    pub modes: Vec<bool>,
}

trait LevelIo {
    fn mode(&mut self, derived: bool) -> Result<()>;
    fn levels(&mut self, class: CoeffClass, count: usize, coeffs: Option<&[f64]>) -> Result<Vec<i32>>;
}

struct Writer {
    enc: RangeEncoder,
    coder: CoeffCoder,
    mode_models: [BitModel; 2],
    qp: u8,
    significant: usize,
}

impl LevelIo for Writer {
    fn mode(&mut self, derived: bool) -> Result<()> {
        self.enc.encode(&mut self.mode_models[derived as usize], derived);
        Ok(())
    }

    fn levels(&mut self, class: CoeffClass, _count: usize, coeffs: Option<&[f64]>) -> Result<Vec<i32>> {
        let q = quantize(coeffs.expect("encoder has originals"), self.qp)?;
        self.significant += q.iter().filter(|&&v| v != 0).count();
        self.coder.encode_block(&mut self.enc, class, &q);
        Ok(q)
    }
}

struct Reader<'a> {
    dec: RangeDecoder<'a>,
    coder: CoeffCoder,
    mode_models: [BitModel; 2],
}

fn truncated(e: Error) -> Error {
    match e {
        Error::TruncatedStream => Error::TruncatedPayload("block payload ends early".into()),
        e => e,
    }
}

impl LevelIo for Reader<'_> {
    fn mode(&mut self, derived: bool) -> Result<()> {
        let bit = self.dec.decode(&mut self.mode_models[derived as usize]).map_err(truncated)?;
        if bit != derived {
            return Err(Error::CorruptPayload("block mode disagrees with contours".into()));
        }
        Ok(())
    }

    fn levels(&mut self, class: CoeffClass, count: usize, _coeffs: Option<&[f64]>) -> Result<Vec<i32>> {
        self.coder.decode_block(&mut self.dec, class, count).map_err(truncated)
    }
}

struct Frame<'a> {
    original: Option<&'a DepthImage>,
    contours: &'a ContourMap,
    cache: &'a BasisCache,
    method: Method,
    qp: u8,
    weight: f64,
    width: usize,
    height: usize,
    recon: Vec<u8>,
}

impl Frame<'_> {
    fn graph_kind(&self) -> TransformKind {
        match self.method {
            Method::Wgft => TransformKind::Wgft { w_pos: self.weight },
            _ => TransformKind::Sgft { w: self.weight },
        }
    }

    fn run(&mut self, io: &mut impl LevelIo) -> Result<Vec<bool>> {
        let mut modes = Vec::new();
        for y0 in (0..self.height).step_by(DCT_BLOCK) {
            for x0 in (0..self.width).step_by(DCT_BLOCK) {
                let graph = self.method != Method::Dct && !self.contours.block_view(x0, y0, DCT_BLOCK).is_empty();
                io.mode(graph)?;
                modes.push(graph);
                if graph {
                    for (dx, dy) in [(0, 0), (SGFT_BLOCK, 0), (0, SGFT_BLOCK), (SGFT_BLOCK, SGFT_BLOCK)] {
                        self.code_block(io, x0 + dx, y0 + dy, SGFT_BLOCK, self.graph_kind(), CoeffClass::Graph)?;
                    }
                } else {
                    self.code_block(io, x0, y0, DCT_BLOCK, TransformKind::Dct, CoeffClass::Dct)?;
                }
            }
        }
        Ok(modes)
    }

    fn code_block(
        &mut self,
        io: &mut impl LevelIo,
        x0: usize,
        y0: usize,
        n: usize,
        kind: TransformKind,
        class: CoeffClass,
    ) -> Result<()> {
        let pred = intra_predict(&self.recon, self.width, self.contours, x0, y0, n);
        let contour = match kind {
            TransformKind::Dct => BlockContour::empty(n),
            _ => self.contours.block_view(x0, y0, n),
        };
        let coeffs = match self.original {
            Some(img) => {
                let residual = Block::from_fn(n, |x, y| img.get(x0 + x, y0 + y) as f64 - pred[y * n + x] as f64);
                Some(transforms::forward(self.cache, kind, &residual, &contour)?.coeffs().to_vec())
            }
            None => None,
        };
        let levels = io.levels(class, n * n, coeffs.as_deref())?;
        let rec = CoeffBlock::new(n, dequantize(&levels, self.qp)?)?;
        let res = transforms::inverse(self.cache, kind, &rec, &contour)?;
        for y in 0..n {
            for x in 0..n {
                let v = (pred[y * n + x] as f64 + res.get(x, y)).round().clamp(0.0, 255.0);
                self.recon[(y0 + y) * self.width + x0 + x] = v as u8;
            }
        }
        Ok(())
    }
}

fn padded_dims(width: usize, height: usize) -> (usize, usize) {
    (width.next_multiple_of(DCT_BLOCK), height.next_multiple_of(DCT_BLOCK))
}

pub fn encode(img: &DepthImage, config: &CodecConfig) -> Result<Encoded> {
    encode_with_cache(img, config, BasisCache::global())
}

pub fn encode_with_cache(img: &DepthImage, config: &CodecConfig, cache: &BasisCache) -> Result<Encoded> {
    config.validate()?;
    let (width, height) = (img.width(), img.height());
    let dims = u16::try_from(width).and_then(|w| Ok((w, u16::try_from(height)?)));
    let (w16, h16) = dims.map_err(|_| Error::InvalidArgument(format!("{width}x{height} exceeds 65535")))?;
    let (pw, ph) = padded_dims(width, height);
    let padded = img.padded(pw, ph);

    let detected = detect_contours(&padded, config.contour_threshold);
    let contour_payload = encode_contours(&trace_chains(&detected), pw, ph)?;
    // code from the decoder's view of the contours
    let contours = decode_contours(&contour_payload, pw, ph)?;

    let weight_q = quantize_weight(config.weight());
    let mut frame = Frame {
        original: Some(&padded),
        contours: &contours,
        cache,
        method: config.method,
        qp: config.qp,
        weight: dequantize_weight(weight_q),
        width: pw,
        height: ph,
        recon: vec![0; pw * ph],
    };
    let mut writer = Writer {
        enc: RangeEncoder::new(),
        coder: CoeffCoder::new(),
        mode_models: Default::default(),
        qp: config.qp,
        significant: 0,
    };
    let modes = frame.run(&mut writer)?;

    let bitstream = Bitstream {
        header: Header {
            method: config.method,
            width: w16,
            height: h16,
            qp: config.qp,
            threshold: config.contour_threshold,
            weight_q,
        },
        contour_payload,
        block_payload: writer.enc.finish(),
    };
    let reconstruction = DepthImage::new(pw, ph, frame.recon)?.cropped(width, height);
    Ok(Encoded { bytes: bitstream.to_bytes(), reconstruction, modes, significant: writer.significant })
}

pub fn decode(bytes: &[u8]) -> Result<DepthImage> {
    Ok(decode_detailed(bytes)?.image)
}

pub fn decode_detailed(bytes: &[u8]) -> Result<Decoded> {
    decode_with_cache(bytes, BasisCache::global())
}

pub fn decode_with_cache(bytes: &[u8], cache: &BasisCache) -> Result<Decoded> {
    let bs = Bitstream::parse(bytes)?;
    let header = bs.header;
    let (width, height) = (header.width as usize, header.height as usize);
    let (pw, ph) = padded_dims(width, height);
    let contours = decode_contours(&bs.contour_payload, pw, ph).map_err(|e| match e {
        Error::TruncatedStream => Error::TruncatedPayload("contour payload ends early".into()),
        e => e,
    })?;
    let mut frame = Frame {
        original: None,
        contours: &contours,
        cache,
        method: header.method,
        qp: header.qp,
        weight: dequantize_weight(header.weight_q),
        width: pw,
        height: ph,
        recon: vec![0; pw * ph],
    };
    let mut reader = Reader {
        dec: RangeDecoder::new(&bs.block_payload).map_err(truncated)?,
        coder: CoeffCoder::new(),
        mode_models: Default::default(),
    };
    let modes = frame.run(&mut reader)?;
    let image = DepthImage::new(pw, ph, frame.recon)?.cropped(width, height);
    Ok(Decoded { header, image, modes })
}
