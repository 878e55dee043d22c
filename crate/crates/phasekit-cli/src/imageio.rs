//! Binary image file format: a fixed header followed by the raw row-major
//! complex payload.
//!
//! Layout (all little-endian):
//! - bytes 0..4  — magic `PKIM`
//! - bytes 4..8  — dtype tag `c128` (complex128: two f64 per pixel)
//! - bytes 8..12 — width  (u32)
//! - bytes 12..16 — height (u32)
//! - payload — 16·width·height bytes of (re, im) f64 pairs, row-major

use std::path::Path;

use num_complex::Complex64;
use phasekit::{ComplexImage, PhaseError, Result};

const MAGIC: &[u8; 4] = b"PKIM";
const DTYPE: &[u8; 4] = b"c128";
const HEADER_LEN: usize = 16;

pub fn encode_image(img: &ComplexImage) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * w * h);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(DTYPE);
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    for c in img.as_slice() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn decode_image(bytes: &[u8]) -> Result<ComplexImage> {
    if bytes.len() < HEADER_LEN {
        return Err(PhaseError::Parse(format!(
            "image file truncated: {} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(PhaseError::Parse("image file: bad magic, expected PKIM".into()));
    }
    if &bytes[4..8] != DTYPE {
        return Err(PhaseError::Parse("image file: unsupported dtype, expected c128".into()));
    }
    let w = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let want = 16usize
        .checked_mul(w)
        .and_then(|v| v.checked_mul(h))
        .ok_or_else(|| PhaseError::Parse("image file: dimensions overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != want {
        return Err(PhaseError::Parse(format!(
            "image file: payload is {} bytes, {w}×{h} complex128 needs {want}",
            payload.len()
        )));
    }
    let mut data = Vec::with_capacity(w * h);
    for px in payload.chunks_exact(16) {
        let re = f64::from_le_bytes(px[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(px[8..16].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    ComplexImage::new(h, w, data)
}

pub fn write_image(path: &Path, img: &ComplexImage) -> Result<()> {
    std::fs::write(path, encode_image(img))?;
    Ok(())
}

pub fn read_image(path: &Path) -> Result<ComplexImage> {
    let bytes = std::fs::read(path)?;
    decode_image(&bytes)
}
