//! File plumbing: bracket expansion, integer image decode/encode, exposure
//! time lists, and float-map passthrough.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use image::DynamicImage;
use ltip::algebra::clamp_pixel;
use ltip::image::{Image, IrradianceMap};
use ltip::pfm;

/// A single directory argument expands to its image files sorted by name;
/// explicit file lists keep their order.
pub fn expand_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    if paths.len() == 1 && paths[0].is_dir() {
        let mut found: Vec<PathBuf> = fs::read_dir(&paths[0])
            .with_context(|| format!("reading directory {}", paths[0].display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
                    Some("png" | "jpg" | "jpeg")
                )
            })
            .collect();
        found.sort();
        if found.is_empty() {
            bail!("no PNG or JPEG files in {}", paths[0].display());
        }
        return Ok(found);
    }
    Ok(paths.to_vec())
}

/// Decodes one 8- or 16-bit PNG/JPEG into the pixel domain: integer code v
/// of depth b maps to v/(2^b - 1) and is clamped into [0, 1-eps). Alpha is
/// dropped; grayscale is promoted to three identical channels.
pub fn decode_image(path: &Path) -> Result<Image> {
    let decoded = image::open(path).with_context(|| format!("decoding {}", path.display()))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let (samples, channels): (Vec<f64>, usize) = match decoded {
        DynamicImage::ImageLuma8(b) => (scale8(b.into_raw()), 1),
        DynamicImage::ImageLumaA8(b) => (scale8(b.into_raw()), 2),
        DynamicImage::ImageRgb8(b) => (scale8(b.into_raw()), 3),
        DynamicImage::ImageRgba8(b) => (scale8(b.into_raw()), 4),
        DynamicImage::ImageLuma16(b) => (scale16(b.into_raw()), 1),
        DynamicImage::ImageLumaA16(b) => (scale16(b.into_raw()), 2),
        DynamicImage::ImageRgb16(b) => (scale16(b.into_raw()), 3),
        DynamicImage::ImageRgba16(b) => (scale16(b.into_raw()), 4),
        other => bail!("{}: unsupported pixel format {:?}", path.display(), other.color()),
    };
    Ok(Image::from_fn(w, h, |x, y| {
        let base = (y * w + x) * channels;
        let rgb = if channels < 3 {
            [samples[base]; 3]
        } else {
            [samples[base], samples[base + 1], samples[base + 2]]
        };
        rgb.map(clamp_pixel)
    }))
}

fn scale8(raw: Vec<u8>) -> Vec<f64> {
    raw.into_iter().map(|v| v as f64 / 255.0).collect()
}

fn scale16(raw: Vec<u16>) -> Vec<f64> {
    raw.into_iter().map(|v| v as f64 / 65535.0).collect()
}

pub fn decode_frames(paths: &[PathBuf]) -> Result<Vec<Image>> {
    if paths.is_empty() {
        bail!("no input frames given");
    }
    let frames: Vec<Image> = paths.iter().map(|p| decode_image(p)).collect::<Result<_>>()?;
    let first = &frames[0];
    for (frame, path) in frames.iter().zip(paths) {
        if !frame.same_dims(first) {
            bail!(
                "mixed dimensions: {} is {}x{}, expected {}x{}",
                path.display(),
                frame.width(),
                frame.height(),
                first.width(),
                first.height()
            );
        }
    }
    Ok(frames)
}

/// Writes a result image: `.png` quantizes each sample with
/// `floor(v * 255 + 0.5)`, `.pfm` passes the float samples through.
pub fn encode_output(path: &Path, image: &Image) -> Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => {
            let bytes: Vec<u8> =
                image.data().iter().map(|&v| (v * 255.0 + 0.5).floor() as u8).collect();
            let buf = image::RgbImage::from_raw(image.width() as u32, image.height() as u32, bytes)
                .expect("buffer sized from the image");
            buf.save(path).with_context(|| format!("writing {}", path.display()))?;
        }
        Some("pfm") => {
            let map = IrradianceMap::from_vec(image.width(), image.height(), image.data().to_vec())
                .expect("image data is well-formed");
            pfm::write_pfm(path, &map).with_context(|| format!("writing {}", path.display()))?;
        }
        _ => bail!("{}: output must be .png or .pfm", path.display()),
    }
    Ok(())
}

pub fn write_map(path: &Path, map: &IrradianceMap) -> Result<()> {
    if path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref()
        != Some("pfm")
    {
        bail!("{}: irradiance output must be .pfm", path.display());
    }
    pfm::write_pfm(path, map).with_context(|| format!("writing {}", path.display()))
}

pub fn read_map(path: &Path) -> Result<IrradianceMap> {
    pfm::read_pfm(path).with_context(|| format!("reading {}", path.display()))
}

/// Parses an exposure-time list: one positive decimal per non-empty line,
/// frame order, exactly one entry per frame.
pub fn parse_times(text: &str, frame_count: usize) -> Result<Vec<f64>> {
    let mut times = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let t: f64 = line
            .parse()
            .with_context(|| format!("line {}: bad exposure time {line:?}", lineno + 1))?;
        if !(t.is_finite() && t > 0.0) {
            bail!("line {}: exposure time must be positive, got {line}", lineno + 1);
        }
        times.push(t);
    }
    if times.len() != frame_count {
        bail!("exposure list has {} entries for {} frames", times.len(), frame_count);
    }
    Ok(times)
}

pub fn read_times(path: &Path, frame_count: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading exposure times {}", path.display()))?;
    parse_times(&text, frame_count)
}
