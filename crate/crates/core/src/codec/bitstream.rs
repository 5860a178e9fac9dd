//! Container layout.
//!
//! ```text
//! offset size field
//!      0    4 magic "SGFT"
//!      4    1 version
//!      5    1 method (0 SGFT, 1 WGFT, 2 DCT)
//!      6    2 width
//!      8    2 height
//!     10    1 qp
//!     11    1 contour threshold
//!     12    2 graph edge weight, 1/256 units
//!     14    4 contour payload length
//!     18    4 block payload length
//!     22      contour payload, block payload
//! ```
//!
//! Multi-byte fields are little-endian.

use crate::codec::quant::MAX_QP;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"SGFT";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Sgft,
    Wgft,
    Dct,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sgft, Method::Wgft, Method::Dct];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Method> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Sgft => "SGFT",
            Method::Wgft => "WGFT",
            Method::Dct => "DCT",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub method: Method,
    pub width: u16,
    pub height: u16,
    pub qp: u8,
    pub threshold: u8,
    pub weight_q: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    pub header: Header,
    pub contour_payload: Vec<u8>,
    pub block_payload: Vec<u8>,
}

impl Bitstream {
    pub fn len(&self) -> usize {
        HEADER_LEN + self.contour_payload.len() + self.block_payload.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(h.method.code());
        out.extend_from_slice(&h.width.to_le_bytes());
        out.extend_from_slice(&h.height.to_le_bytes());
        out.push(h.qp);
        out.push(h.threshold);
        out.extend_from_slice(&h.weight_q.to_le_bytes());
        out.extend_from_slice(&(self.contour_payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.block_payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.contour_payload);
        out.extend_from_slice(&self.block_payload);
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            if bytes.len() >= 4 && bytes[..4] != MAGIC {
                return Err(Error::MalformedHeader("bad magic".into()));
            }
            return Err(Error::TruncatedPayload(format!("{} bytes, header needs {HEADER_LEN}", bytes.len())));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::MalformedHeader("bad magic".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::MalformedHeader(format!("unsupported version {}", bytes[4])));
        }
        let method =
            Method::from_code(bytes[5]).ok_or_else(|| Error::MalformedHeader(format!("unknown method {}", bytes[5])))?;
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let u32_at = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]) as usize;
        let header = Header {
            method,
            width: u16_at(6),
            height: u16_at(8),
            qp: bytes[10],
            threshold: bytes[11],
            weight_q: u16_at(12),
        };
        if header.width == 0 || header.height == 0 {
            return Err(Error::MalformedHeader("zero dimension".into()));
        }
        if header.qp > MAX_QP {
            return Err(Error::MalformedHeader(format!("qp {}", header.qp)));
        }
        if header.threshold == 0 {
            return Err(Error::MalformedHeader("zero threshold".into()));
        }
        if header.weight_q == 0 || header.weight_q > 256 {
            return Err(Error::MalformedHeader(format!("weight {}/256", header.weight_q)));
        }
        let contour_len = u32_at(14);
        let block_len = u32_at(18);
        let body = &bytes[HEADER_LEN..];
        let expected = contour_len + block_len;
        if body.len() < expected {
            return Err(Error::TruncatedPayload(format!("{} payload bytes, header declares {expected}", body.len())));
        }
        if body.len() > expected {
            return Err(Error::MalformedHeader(format!("{} trailing bytes", body.len() - expected)));
        }
        Ok(Bitstream {
            header,
            contour_payload: body[..contour_len].to_vec(),
            block_payload: body[contour_len..].to_vec(),
        })
    }
}
