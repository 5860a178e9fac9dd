//! Quantised coefficient coding.
//!
//! Every coefficient gets a significance flag whose context is the scan
//! position bucket. A non-zero coefficient follows with a bypass sign bit
//! and `|v| − 1` in order-0 exp-Golomb: the unary prefix goes through
//! adaptive contexts, the suffix bits are bypass coded.

use crate::entropy::range_coder::{BitModel, RangeDecoder, RangeEncoder};
use crate::{Error, Result};

const BUCKETS: usize = 5;
const PREFIX_CONTEXTS: usize = 8;
const MAX_PREFIX: u32 = 32;

/// Coefficient statistics differ between block kinds; each class has its
/// own set of contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffClass {
    /// 8×8 DCT blocks, zig-zag order.
    Dct = 0,
    /// 4×4 graph transform blocks, spectral order.
    Graph = 1,
}

fn bucket(pos: usize) -> usize {
    match pos {
        0 => 0,
        1..=2 => 1,
        3..=5 => 2,
        6..=14 => 3,
        _ => 4,
    }
}

/// Adaptive state for coefficient coding; one instance per stream, shared
/// by all blocks in coding order.
#[derive(Debug, Clone, Default)]
pub struct CoeffCoder {
    sig: [[BitModel; BUCKETS]; 2],
    prefix: [[BitModel; PREFIX_CONTEXTS]; 2],
}

impl CoeffCoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode_block(&mut self, enc: &mut RangeEncoder, class: CoeffClass, q: &[i32]) {
        let c = class as usize;
        for (pos, &v) in q.iter().enumerate() {
            enc.encode(&mut self.sig[c][bucket(pos)], v != 0);
            if v == 0 {
                continue;
            }
            enc.encode_bypass(v < 0);
            // exp-Golomb of |v| − 1 is the binary form of |v| with its
            // leading one replaced by a unary length prefix
            let mag = v.unsigned_abs() as u64;
            let len = 63 - mag.leading_zeros();
            for i in 0..len {
                enc.encode(&mut self.prefix[c][(i as usize).min(PREFIX_CONTEXTS - 1)], true);
            }
            enc.encode(&mut self.prefix[c][(len as usize).min(PREFIX_CONTEXTS - 1)], false);
            enc.encode_bypass_bits(mag, len);
        }
    }

    pub fn decode_block(&mut self, dec: &mut RangeDecoder<'_>, class: CoeffClass, count: usize) -> Result<Vec<i32>> {
        let c = class as usize;
        let mut out = Vec::with_capacity(count);
        for pos in 0..count {
            if !dec.decode(&mut self.sig[c][bucket(pos)])? {
                out.push(0);
                continue;
            }
            let negative = dec.decode_bypass()?;
            let mut len = 0;
            while dec.decode(&mut self.prefix[c][(len as usize).min(PREFIX_CONTEXTS - 1)])? {
                len += 1;
                if len >= MAX_PREFIX {
                    return Err(Error::CorruptPayload("coefficient prefix too long".into()));
                }
            }
            let mag = (1u64 << len) | dec.decode_bypass_bits(len)?;
            let mag = i32::try_from(mag).map_err(|_| Error::CorruptPayload("coefficient overflow".into()))?;
            out.push(if negative { -mag } else { mag });
        }
        Ok(out)
    }
}

/// Codes a single block with fresh contexts.
pub fn encode_coeffs(q: &[i32], class: CoeffClass) -> Vec<u8> {
    let mut enc = RangeEncoder::new();
    CoeffCoder::new().encode_block(&mut enc, class, q);
    enc.finish()
}

pub fn decode_coeffs(bytes: &[u8], class: CoeffClass, count: usize) -> Result<Vec<i32>> {
    let mut dec = RangeDecoder::new(bytes)?;
    CoeffCoder::new().decode_block(&mut dec, class, count)
}
