//! Canonical wire encoding.
//!
//! A message is a version byte followed by length-prefixed fields. Each
//! field is a fixed-width concatenation of primitives: scalars are 32-byte
//! big-endian, G1 points 48-byte compressed, G2 points 96-byte compressed,
//! integers big-endian.

use blstrs::{G1Affine, G2Affine, Scalar};
use thiserror::Error;

pub const FORMAT_VERSION: u8 = 0x01;

pub const SCALAR_LEN: usize = 32;
pub const G1_LEN: usize = 48;
pub const G2_LEN: usize = 96;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("input truncated")]
    Truncated,
    #[error("unsupported format version {0:#04x}")]
    Version(u8),
    #[error("field has length {found}, expected {expected}")]
    FieldLength { expected: usize, found: usize },
    #[error("non-canonical scalar")]
    Scalar,
    #[error("invalid group element")]
    Point,
    #[error("trailing bytes after message")]
    Trailing,
    #[error("invalid {0}")]
    Invalid(&'static str),
}

/// Types with a canonical message encoding.
pub trait Wire: Sized {
    fn encode(&self, enc: &mut Encoder);
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError>;

    fn to_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        self.encode(&mut enc);
        enc.finish()
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes)?;
        let value = Self::decode(&mut dec)?;
        dec.finish()?;
        Ok(value)
    }
}

#[derive(Debug, Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Encoder {
            buf: vec![FORMAT_VERSION],
        }
    }

    /// Appends one length-prefixed field.
    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        let len = u32::try_from(bytes.len()).expect("field longer than 4 GiB");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.field(&v.to_be_bytes())
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.field(&v.to_be_bytes())
    }

    pub fn scalar(&mut self, s: &Scalar) -> &mut Self {
        self.field(&s.to_bytes_be())
    }

    pub fn g1(&mut self, p: &G1Affine) -> &mut Self {
        self.field(&p.to_compressed())
    }

    pub fn g2(&mut self, p: &G2Affine) -> &mut Self {
        self.field(&p.to_compressed())
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug)]
pub struct Decoder<'a> {
    rest: &'a [u8],
}

impl<'a> Decoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<Self, DecodeError> {
        match bytes.split_first() {
            Some((&FORMAT_VERSION, rest)) => Ok(Decoder { rest }),
            Some((&v, _)) => Err(DecodeError::Version(v)),
            None => Err(DecodeError::Truncated),
        }
    }

    pub fn field(&mut self) -> Result<&'a [u8], DecodeError> {
        if self.rest.len() < 4 {
            return Err(DecodeError::Truncated);
        }
        let (len, rest) = self.rest.split_at(4);
        let len = u32::from_be_bytes(len.try_into().unwrap()) as usize;
        if rest.len() < len {
            return Err(DecodeError::Truncated);
        }
        let (field, rest) = rest.split_at(len);
        self.rest = rest;
        Ok(field)
    }

    pub fn fixed<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let f = self.field()?;
        f.try_into().map_err(|_| DecodeError::FieldLength {
            expected: N,
            found: f.len(),
        })
    }

    /// Opens a fixed-width field for reading its primitives in order.
    pub fn reader(&mut self, expected: usize) -> Result<Reader<'a>, DecodeError> {
        let f = self.field()?;
        if f.len() != expected {
            return Err(DecodeError::FieldLength {
                expected,
                found: f.len(),
            });
        }
        Ok(Reader { rest: f })
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.fixed()?))
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_be_bytes(self.fixed()?))
    }

    pub fn scalar(&mut self) -> Result<Scalar, DecodeError> {
        scalar_from_be(&self.fixed()?)
    }

    pub fn g1(&mut self) -> Result<G1Affine, DecodeError> {
        g1_from_bytes(&self.fixed()?)
    }

    pub fn g2(&mut self) -> Result<G2Affine, DecodeError> {
        g2_from_bytes(&self.fixed()?)
    }

    pub fn is_empty(&self) -> bool {
        self.rest.is_empty()
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(DecodeError::Trailing)
        }
    }
}

/// Sequential reader over the primitives packed in one field.
#[derive(Debug)]
pub struct Reader<'a> {
    rest: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Reader { rest: bytes }
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        if self.rest.len() < N {
            return Err(DecodeError::Truncated);
        }
        let (head, rest) = self.rest.split_at(N);
        self.rest = rest;
        Ok(head.try_into().unwrap())
    }

    pub fn scalar(&mut self) -> Result<Scalar, DecodeError> {
        scalar_from_be(&self.take()?)
    }

    pub fn g1(&mut self) -> Result<G1Affine, DecodeError> {
        g1_from_bytes(&self.take()?)
    }

    pub fn g2(&mut self) -> Result<G2Affine, DecodeError> {
        g2_from_bytes(&self.take()?)
    }

    pub fn bytes<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        self.take()
    }
}

/// Packs primitives into one fixed-width field body.
#[derive(Debug, Default)]
pub struct Packer {
    buf: Vec<u8>,
}

impl Packer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(mut self, s: &Scalar) -> Self {
        self.buf.extend_from_slice(&s.to_bytes_be());
        self
    }

    pub fn g1(mut self, p: &G1Affine) -> Self {
        self.buf.extend_from_slice(&p.to_compressed());
        self
    }

    pub fn g2(mut self, p: &G2Affine) -> Self {
        self.buf.extend_from_slice(&p.to_compressed());
        self
    }

    pub fn bytes(mut self, b: &[u8]) -> Self {
        self.buf.extend_from_slice(b);
        self
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.buf
    }
}

pub fn scalar_from_be(bytes: &[u8; 32]) -> Result<Scalar, DecodeError> {
    Option::from(Scalar::from_bytes_be(bytes)).ok_or(DecodeError::Scalar)
}

pub fn g1_from_bytes(bytes: &[u8; G1_LEN]) -> Result<G1Affine, DecodeError> {
    Option::from(G1Affine::from_compressed(bytes)).ok_or(DecodeError::Point)
}

pub fn g2_from_bytes(bytes: &[u8; G2_LEN]) -> Result<G2Affine, DecodeError> {
    Option::from(G2Affine::from_compressed(bytes)).ok_or(DecodeError::Point)
}
