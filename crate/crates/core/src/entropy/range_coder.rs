//! 32-bit binary range coder with carry propagation.
//!
//! The encoder keeps a 33-bit `low`, a 32-bit `range` and a pending byte
//! plus a run of `0xFF` bytes that a later carry may still ripple into.
//! The range is renormalised a byte at a time whenever it drops below
//! 2²⁴.
//!
//! Stream layout: the always-zero leading byte of the classic design is not
//! written, and at most four trailing zero bytes of the final flush are
//! dropped. The decoder substitutes zeros for up to four missing bytes and
//! reports [`Error::TruncatedStream`] beyond that.

use crate::{Error, Result};

const TOP: u32 = 1 << 24;
const MAX_IMPLICIT_ZEROS: usize = 4;

/// Adaptive probability for one binary context.
///
/// Both symbol counts start at 1 and are halved (rounding up) once their
/// sum reaches 2¹⁵.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitModel {
    zeros: u32,
    ones: u32,
}

impl Default for BitModel {
    fn default() -> Self {
        BitModel { zeros: 1, ones: 1 }
    }
}

impl BitModel {
    const LIMIT: u32 = 1 << 15;

    fn split(&self, range: u32) -> u32 {
        (range / (self.zeros + self.ones)) * self.zeros
    }

    fn update(&mut self, bit: bool) {
        if bit {
            self.ones += 1;
        } else {
            self.zeros += 1;
        }
        if self.zeros + self.ones >= Self::LIMIT {
            self.zeros = self.zeros.div_ceil(2);
            self.ones = self.ones.div_ceil(2);
        }
    }

    /// Current probability of a zero bit.
    pub fn p_zero(&self) -> f64 {
        self.zeros as f64 / (self.zeros + self.ones) as f64
    }
}

#[derive(Debug, Clone)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    leading: bool,
    out: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        RangeEncoder { low: 0, range: u32::MAX, cache: 0, cache_size: 1, leading: true, out: Vec::new() }
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, model: &mut BitModel, bit: bool) {
        let bound = model.split(self.range);
        if bit {
            self.low += bound as u64;
            self.range -= bound;
        } else {
            self.range = bound;
        }
        model.update(bit);
        self.normalize();
    }

    /// Equiprobable bit without a model.
    pub fn encode_bypass(&mut self, bit: bool) {
        self.range >>= 1;
        if bit {
            self.low += self.range as u64;
        }
        self.normalize();
    }

    /// Low `count` bits of `value`, most significant first, in bypass mode.
    pub fn encode_bypass_bits(&mut self, value: u64, count: u32) {
        for i in (0..count).rev() {
            self.encode_bypass(value >> i & 1 == 1);
        }
    }

    fn normalize(&mut self) {
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn shift_low(&mut self) {
        if self.low < 0xFF00_0000 || self.low >= 1 << 32 {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                self.emit(byte.wrapping_add(carry));
                byte = 0xFF;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    fn emit(&mut self, byte: u8) {
        if self.leading {
            self.leading = false;
        } else {
            self.out.push(byte);
        }
    }

    /// Approximate number of bytes produced so far, including pending ones.
    pub fn pending_len(&self) -> usize {
        self.out.len() + self.cache_size as usize + 4
    }

    /// Terminates the stream.
    ///
    /// The final value is chosen inside `[low, low + range)` with as many
    /// trailing zero bits as possible, so the dropped trailing zeros shorten
    /// the stream.
    pub fn finish(mut self) -> Vec<u8> {
        let hi = self.low + self.range as u64;
        for shift in (0..=32).rev() {
            let m = 1u64 << shift;
            let v = (self.low + m - 1) & !(m - 1);
            if v < hi {
                self.low = v;
                break;
            }
        }
        for _ in 0..5 {
            self.shift_low();
        }
        let mut dropped = 0;
        while dropped < MAX_IMPLICIT_ZEROS && self.out.last() == Some(&0) {
            self.out.pop();
            dropped += 1;
        }
        self.out
    }
}

#[derive(Debug, Clone)]
pub struct RangeDecoder<'a> {
    input: &'a [u8],
    pos: usize,
    code: u32,
    range: u32,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(input: &'a [u8]) -> Result<Self> {
        let mut d = RangeDecoder { input, pos: 0, code: 0, range: u32::MAX };
        for _ in 0..4 {
            d.code = d.code << 8 | d.next_byte()? as u32;
        }
        Ok(d)
    }

    fn next_byte(&mut self) -> Result<u8> {
        let b = match self.input.get(self.pos) {
            Some(&b) => b,
            None if self.pos < self.input.len() + MAX_IMPLICIT_ZEROS => 0,
            None => return Err(Error::TruncatedStream),
        };
        self.pos += 1;
        Ok(b)
    }

    fn normalize(&mut self) -> Result<()> {
        while self.range < TOP {
            self.range <<= 8;
            self.code = self.code << 8 | self.next_byte()? as u32;
        }
        Ok(())
    }

    pub fn decode(&mut self, model: &mut BitModel) -> Result<bool> {
        let bound = model.split(self.range);
        let bit = if self.code < bound {
            self.range = bound;
            false
        } else {
            self.code -= bound;
            self.range -= bound;
            true
        };
        model.update(bit);
        self.normalize()?;
        Ok(bit)
    }

    pub fn decode_bypass(&mut self) -> Result<bool> {
        self.range >>= 1;
        let bit = if self.code >= self.range {
            self.code -= self.range;
            true
        } else {
            false
        };
        self.normalize()?;
        Ok(bit)
    }

    pub fn decode_bypass_bits(&mut self, count: u32) -> Result<u64> {
        let mut v = 0;
        for _ in 0..count {
            v = v << 1 | self.decode_bypass()? as u64;
        }
        Ok(v)
    }

    /// Bytes consumed from the real input (implicit zeros excluded).
    pub fn consumed(&self) -> usize {
        self.pos.min(self.input.len())
    }
}

/// Codes `bits[i]` under adaptive context `contexts[i]`.
pub fn ac_encode(bits: &[bool], contexts: &[usize]) -> Vec<u8> {
    assert_eq!(bits.len(), contexts.len(), "one context per bit");
    let mut models = vec![BitModel::default(); contexts.iter().max().map_or(0, |m| m + 1)];
    let mut enc = RangeEncoder::new();
    for (&b, &c) in bits.iter().zip(contexts) {
        enc.encode(&mut models[c], b);
    }
    enc.finish()
}

/// Decodes one bit per entry of `contexts`, which must match the encoder's
/// sequence.
pub fn ac_decode(bytes: &[u8], contexts: &[usize]) -> Result<Vec<bool>> {
    let mut models = vec![BitModel::default(); contexts.iter().max().map_or(0, |m| m + 1)];
    let mut dec = RangeDecoder::new(bytes)?;
    contexts.iter().map(|&c| dec.decode(&mut models[c])).collect()
}
