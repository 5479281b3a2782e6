//! Portable FloatMap serialization for irradiance maps.
//!
//! The format is a tiny text header (`PF` for color, `Pf` for grayscale,
//! then width, height, and a scale whose sign encodes endianness) followed
//! by rows of raw `f32` samples, bottom row first. Samples pass through a
//! 32-bit float on disk, so round-trips are exact only to f32 precision.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::image::IrradianceMap;

#[derive(Debug, Error)]
pub enum PfmError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("sample data holds {got} bytes, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

/// Serializes a map as little-endian color PFM bytes.
pub fn encode_pfm(map: &IrradianceMap) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut out = format!("PF\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 12);
    for y in (0..h).rev() {
        let row = &map.data()[y * w * 3..(y + 1) * w * 3];
        for &v in row {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn write_pfm(path: &Path, map: &IrradianceMap) -> Result<(), PfmError> {
    fs::write(path, encode_pfm(map))?;
    Ok(())
}

/// Parses color or grayscale PFM bytes; grayscale is replicated across the
/// three channels.
pub fn decode_pfm(bytes: &[u8]) -> Result<IrradianceMap, PfmError> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)?;
    let channels = match magic.as_str() {
        "PF" => 3usize,
        "Pf" => 1,
        other => return Err(PfmError::BadHeader(format!("unknown magic {other:?}"))),
    };
    let w: usize = parse_token(bytes, &mut pos, "width")?;
    let h: usize = parse_token(bytes, &mut pos, "height")?;
    let scale: f64 = parse_token(bytes, &mut pos, "scale")?;
    if w == 0 || h == 0 {
        return Err(PfmError::BadHeader(format!("degenerate size {w}x{h}")));
    }
    if !scale.is_finite() || scale == 0.0 {
        return Err(PfmError::BadHeader(format!("invalid scale {scale}")));
    }
    let little_endian = scale < 0.0;
    let gain = scale.abs();

    let data = &bytes[pos..];
    let expected = w * h * channels * 4;
    if data.len() != expected {
        return Err(PfmError::SizeMismatch { expected, got: data.len() });
    }

    let mut map = IrradianceMap::new(w, h);
    for (i, chunk) in data.chunks_exact(4).enumerate() {
        let raw: [u8; 4] = chunk.try_into().expect("chunks_exact yields 4 bytes");
        let sample = if little_endian { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) }
            as f64
            * gain;
        // file rows run bottom-to-top
        let (file_row, rest) = (i / (w * channels), i % (w * channels));
        let (x, c) = (rest / channels, rest % channels);
        let y = h - 1 - file_row;
        let base = (y * w + x) * 3;
        if channels == 3 {
            map.data_mut()[base + c] = sample;
        } else {
            map.data_mut()[base..base + 3].fill(sample);
        }
    }
    Ok(map)
}

pub fn read_pfm(path: &Path) -> Result<IrradianceMap, PfmError> {
    decode_pfm(&fs::read(path)?)
}

/// Reads the next whitespace-delimited header token and consumes exactly one
/// trailing whitespace byte, which is all that separates the header from the
/// sample data.
fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String, PfmError> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos == start {
        return Err(PfmError::BadHeader("truncated header".into()));
    }
    let token = std::str::from_utf8(&bytes[start..*pos])
        .map_err(|_| PfmError::BadHeader("non-ascii header".into()))?
        .to_owned();
    if *pos < bytes.len() {
        *pos += 1;
    }
    Ok(token)
}

fn parse_token<T: std::str::FromStr>(
    bytes: &[u8],
    pos: &mut usize,
    what: &str,
) -> Result<T, PfmError> {
    let token = next_token(bytes, pos)?;
    token.parse().map_err(|_| PfmError::BadHeader(format!("unreadable {what} {token:?}")))
}
