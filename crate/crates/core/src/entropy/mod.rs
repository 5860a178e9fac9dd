//! Entropy coding: a binary adaptive range coder and the two payloads built
//! on it, contour chains and quantised coefficients.

mod bits;
mod chain;
mod coeffs;
mod range_coder;

pub use bits::{BitReader, BitWriter};
pub use chain::{
    chain_links, decode_chains, decode_contours, encode_contours, trace_chains, ContourChain, Direction, Turn,
};
pub use coeffs::{decode_coeffs, encode_coeffs, CoeffClass, CoeffCoder};
pub use range_coder::{ac_decode, ac_encode, BitModel, RangeDecoder, RangeEncoder};
