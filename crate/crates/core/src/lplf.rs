//! LPLF container: a little-endian header, the texel payload and a CRC32.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "LPLF"
//!      4     4  version (u32) = 1
//!      8     4  flags (u32), bit 0 = hemisphere only
//!     12     4  M, origin count (u32)
//!     16     4  N, direction count (u32)
//!     20     8  R, sphere radius (f64)
//!     28    24  O, sphere center (3 × f64)
//!     52     4  texel format (u32), 0 = RGBA8
//!     56     …  payload: stored_rows × N × 4 bytes, origin-major
//!      …     4  CRC32 (IEEE) of the payload
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::lightfield::{allocate, FieldError, FieldGeometry, LightField};
use crate::Vector;

pub const MAGIC: [u8; 4] = *b"LPLF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 56;
pub const FLAG_HEMISPHERE: u32 = 1;
pub const TEXEL_FORMAT_RGBA8: u32 = 0;

#[derive(Debug, Error)]
pub enum LplfError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("offset 0: bad magic {found:?}, expected \"LPLF\"")]
    BadMagic { found: [u8; 4] },
    #[error("offset 4: unsupported version {version}")]
    UnsupportedVersion { version: u32 },
    #[error("offset 8: unknown flag bits {flags:#x}")]
    UnknownFlags { flags: u32 },
    #[error("offset 52: unsupported texel format {format}")]
    UnsupportedTexelFormat { format: u32 },
    #[error("offset {offset}: invalid header")]
    InvalidHeader {
        offset: usize,
        #[source]
        source: FieldError,
    },
    #[error("offset {offset}: truncated, expected {expected} bytes in total but file has {actual}")]
    Truncated { offset: u64, expected: u64, actual: u64 },
    #[error("offset {offset}: {extra} unexpected trailing bytes")]
    TrailingBytes { offset: u64, extra: u64 },
    #[error("offset {offset}: payload checksum {actual:#010x} does not match stored {expected:#010x}")]
    Checksum { offset: u64, expected: u32, actual: u32 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Header bytes for a field with the given geometry.
pub fn encode_header(g: &FieldGeometry) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[0..4].copy_from_slice(&MAGIC);
    h[4..8].copy_from_slice(&VERSION.to_le_bytes());
    let flags = if g.hemisphere_only { FLAG_HEMISPHERE } else { 0 };
    h[8..12].copy_from_slice(&flags.to_le_bytes());
    h[12..16].copy_from_slice(&g.origins.to_le_bytes());
    h[16..20].copy_from_slice(&g.directions.to_le_bytes());
    h[20..28].copy_from_slice(&g.radius.to_le_bytes());
    for (k, c) in g.center.to_array().iter().enumerate() {
        h[28 + 8 * k..36 + 8 * k].copy_from_slice(&c.to_le_bytes());
    }
    h[52..56].copy_from_slice(&TEXEL_FORMAT_RGBA8.to_le_bytes());
    h
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

/// Parses and validates a header.
pub fn decode_header(h: &[u8]) -> Result<FieldGeometry, LplfError> {
    if h.len() < HEADER_LEN {
        return Err(LplfError::Truncated {
            offset: h.len() as u64,
            expected: HEADER_LEN as u64,
            actual: h.len() as u64,
        });
    }
    let magic: [u8; 4] = h[0..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(LplfError::BadMagic { found: magic });
    }
    let version = u32_at(h, 4);
    if version != VERSION {
        return Err(LplfError::UnsupportedVersion { version });
    }
    let flags = u32_at(h, 8);
    if flags & !FLAG_HEMISPHERE != 0 {
        return Err(LplfError::UnknownFlags { flags });
    }
    let format = u32_at(h, 52);
    if format != TEXEL_FORMAT_RGBA8 {
        return Err(LplfError::UnsupportedTexelFormat { format });
    }
    let g = FieldGeometry::new(
        u32_at(h, 12),
        u32_at(h, 16),
        f64_at(h, 20),
        Vector::new(f64_at(h, 28), f64_at(h, 36), f64_at(h, 44)),
        flags & FLAG_HEMISPHERE != 0,
    );
    g.validate().map_err(|source| {
        let offset = match source {
            FieldError::TooFewOrigins(_) => 12,
            FieldError::TooFewDirections(_) => 16,
            FieldError::BadRadius(_) => 20,
            _ => 28,
        };
        LplfError::InvalidHeader { offset, source }
    })?;
    Ok(g)
}

/// Total file size for a geometry.
pub fn file_len(g: &FieldGeometry) -> u64 {
    HEADER_LEN as u64 + g.payload_len() + 4
}

pub fn write_to(lf: &LightField, mut w: impl Write) -> Result<u64, LplfError> {
    w.write_all(&encode_header(lf.geometry()))?;
    w.write_all(lf.payload())?;
    w.write_all(&crc32fast::hash(lf.payload()).to_le_bytes())?;
    w.flush()?;
    Ok(file_len(lf.geometry()))
}

/// Writes `lf` to `path`; returns the number of bytes written.
pub fn save(lf: &LightField, path: impl AsRef<Path>) -> Result<u64, LplfError> {
    let file = File::create(path)?;
    write_to(lf, BufWriter::new(file))
}

pub fn to_bytes(lf: &LightField) -> Vec<u8> {
    let mut out = Vec::with_capacity(file_len(lf.geometry()) as usize);
    write_to(lf, &mut out).expect("writing to memory");
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<LightField, LplfError> {
    let g = decode_header(bytes)?;
    let expected = file_len(&g);
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(LplfError::Truncated {
            offset: actual,
            expected,
            actual,
        });
    }
    if actual > expected {
        return Err(LplfError::TrailingBytes {
            offset: expected,
            extra: actual - expected,
        });
    }
    let end = HEADER_LEN + g.payload_len() as usize;
    let payload = &bytes[HEADER_LEN..end];
    check_crc(payload, u32_at(bytes, end), end as u64)?;
    Ok(LightField::new(g, payload.to_vec())?)
}

fn check_crc(payload: &[u8], stored: u32, offset: u64) -> Result<(), LplfError> {
    let actual = crc32fast::hash(payload);
    if actual != stored {
        return Err(LplfError::Checksum {
            offset,
            expected: stored,
            actual,
        });
    }
    Ok(())
}

/// Reads a field from `path`, streaming the payload into a single allocation.
pub fn load(path: impl AsRef<Path>) -> Result<LightField, LplfError> {
    let mut file = File::open(path)?;
    let actual = file.metadata()?.len();
    let mut header = [0u8; HEADER_LEN];
    let got = read_full(&mut file, &mut header)?;
    let g = decode_header(&header[..got])?;
    let expected = file_len(&g);
    if actual < expected {
        return Err(LplfError::Truncated {
            offset: actual,
            expected,
            actual,
        });
    }
    if actual > expected {
        return Err(LplfError::TrailingBytes {
            offset: expected,
            extra: actual - expected,
        });
    }
    let mut payload = allocate(g.payload_len())?;
    let got = read_full(&mut file, &mut payload)?;
    let mut crc = [0u8; 4];
    let got_crc = read_full(&mut file, &mut crc)?;
    if got != payload.len() || got_crc != 4 {
        let have = HEADER_LEN as u64 + got as u64 + got_crc as u64;
        return Err(LplfError::Truncated {
            offset: have,
            expected,
            actual: have,
        });
    }
    check_crc(&payload, u32::from_le_bytes(crc), HEADER_LEN as u64 + payload.len() as u64)?;
    Ok(LightField::new(g, payload)?)
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}
