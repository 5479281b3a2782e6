//! Exposure fusion under a configurable pixel algebra.
//!
//! Frames are carried into transform space once, blended there with ordinary
//! arithmetic (optionally multi-scale), and carried back once. For the flat
//! mode this equals the chained algebra operations exactly, because with
//! normalized weights the weighted transform-space mean is the pullback of
//! the weighted algebra sum; `fuse_flat_direct` keeps the chained form
//! around so the identity stays executable.

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{clamp_pixel, Algebra};
use crate::image::{Image, Plane};
use crate::lut::{Lut, LutError, LutKind, DEFAULT_RESOLUTION};
use crate::pyramid::{auto_levels, bandpass_pyramid, collapse_pyramid, gaussian_pyramid};
use crate::weights::{weight_stack, WeightError, WeightParams, WeightStack};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("need at least one frame")]
    EmptyFrameList,
    #[error("frames have mismatched dimensions")]
    DimensionMismatch,
    #[error("weight stack does not match the frame stack")]
    StackMismatch,
    #[error("weight stack must be normalized")]
    UnnormalizedWeights,
    #[error("pyramid needs at least one level")]
    InvalidLevels,
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Lut(#[from] LutError),
}

/// Blend structure: single-scale weighted sums or band-pass pyramids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMode {
    Flat,
    Pyramid,
}

/// Pyramid depth: derived from the image extents or pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSpec {
    Auto,
    Fixed(usize),
}

impl LevelSpec {
    pub fn resolve(self, width: usize, height: usize) -> Result<usize, FusionError> {
        match self {
            LevelSpec::Auto => Ok(auto_levels(width, height)),
            LevelSpec::Fixed(0) => Err(FusionError::InvalidLevels),
            LevelSpec::Fixed(n) => Ok(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub algebra: Algebra,
    pub mode: FusionMode,
    pub levels: LevelSpec,
    pub weights: WeightParams,
    pub use_lut: bool,
    pub lut_resolution: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            algebra: Algebra::Ltip,
            mode: FusionMode::Pyramid,
            levels: LevelSpec::Auto,
            weights: WeightParams::default(),
            use_lut: false,
            lut_resolution: DEFAULT_RESOLUTION,
        }
    }
}

/// Transform evaluation path: closed forms or interpolation tables.
enum TransformEval<'a> {
    Direct(Algebra),
    Tables { fwd: &'a Lut, inv: &'a Lut },
}

impl TransformEval<'_> {
    #[inline]
    fn fwd(&self, x: f64) -> f64 {
        match self {
            TransformEval::Direct(a) => a.phi_raw(x),
            TransformEval::Tables { fwd, .. } => fwd.eval(x),
        }
    }

    #[inline]
    fn inv_ext(&self, y: f64) -> f64 {
        match self {
            TransformEval::Direct(a) => a.phi_inv_extended(y),
            TransformEval::Tables { inv, .. } => inv.eval(y),
        }
    }
}

fn validate_inputs(frames: &[Image], stack: &WeightStack) -> Result<(), FusionError> {
    let first = frames.first().ok_or(FusionError::EmptyFrameList)?;
    if frames.iter().any(|f| !f.same_dims(first)) {
        return Err(FusionError::DimensionMismatch);
    }
    if stack.len() != frames.len()
        || stack.maps()[0].width() != first.width()
        || stack.maps()[0].height() != first.height()
    {
        return Err(FusionError::StackMismatch);
    }
    if !stack.is_normalized() {
        return Err(FusionError::UnnormalizedWeights);
    }
    Ok(())
}

/// Maps a frame's channels into transform space.
pub fn to_transform_space(frame: &Image, algebra: Algebra) -> [Plane; 3] {
    let eval = TransformEval::Direct(algebra);
    [
        transform_channel(frame, 0, &eval),
        transform_channel(frame, 1, &eval),
        transform_channel(frame, 2, &eval),
    ]
}

fn transform_channel(frame: &Image, c: usize, eval: &TransformEval) -> Plane {
    let mut plane = frame.channel(c);
    match eval {
        TransformEval::Direct(a) => {
            let a = *a;
            plane.map_in_place(move |v| a.phi_raw(v));
        }
        TransformEval::Tables { fwd, .. } => {
            plane.map_in_place(|v| fwd.eval(v));
        }
    }
    plane
}

/// Single-scale fusion in transform space: per pixel and channel, the
/// weighted transform mean mapped back and clamped. Wants a normalized stack.
pub fn fuse_flat(
    frames: &[Image],
    stack: &WeightStack,
    algebra: Algebra,
) -> Result<Image, FusionError> {
    validate_inputs(frames, stack)?;
    Ok(fuse_flat_eval(frames, stack, &TransformEval::Direct(algebra)))
}

fn fuse_flat_eval(frames: &[Image], stack: &WeightStack, eval: &TransformEval) -> Image {
    let (w, h) = (frames[0].width(), frames[0].height());
    let mut out = Image::new(w, h);
    out.data_mut().par_chunks_mut(w * 3).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            let px = y * w + x;
            let mut acc = [0.0f64; 3];
            // fixed frame order keeps the sums bit-stable across schedules
            for (frame, map) in frames.iter().zip(stack.maps()) {
                let wi = map.data()[px];
                let s = &frame.data()[px * 3..px * 3 + 3];
                for c in 0..3 {
                    acc[c] += wi * eval.fwd(s[c]);
                }
            }
            for c in 0..3 {
                row[x * 3 + c] = clamp_pixel(eval.inv_ext(acc[c]));
            }
        }
    });
    out
}

/// Same blend as `fuse_flat` but evaluated as chained algebra operations
/// (weighted scalar products folded with the pullback addition). Slower;
/// kept as the executable form of the flat-fusion identity.
pub fn fuse_flat_direct(
    frames: &[Image],
    stack: &WeightStack,
    algebra: Algebra,
) -> Result<Image, FusionError> {
    validate_inputs(frames, stack)?;
    let (w, h) = (frames[0].width(), frames[0].height());
    let mut out = Image::new(w, h);
    out.data_mut().par_chunks_mut(w * 3).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            let px = y * w + x;
            for c in 0..3 {
                let mut acc = 0.0f64;
                for (frame, map) in frames.iter().zip(stack.maps()) {
                    let wi = map.data()[px];
                    let term = algebra.smul_raw(wi, frame.data()[px * 3 + c]);
                    acc = algebra.add_raw(acc, term);
                }
                row[x * 3 + c] = clamp_pixel(acc);
            }
        }
    });
    Ok(out)
}

/// Multi-scale fusion: frame channels are decomposed into band-pass pyramids
/// in transform space, weights into smoothed pyramids in ordinary space, the
/// stacks blended level by level, collapsed, mapped back, and clamped.
pub fn fuse_pyramid(
    frames: &[Image],
    stack: &WeightStack,
    algebra: Algebra,
    levels: usize,
) -> Result<Image, FusionError> {
    validate_inputs(frames, stack)?;
    if levels == 0 {
        return Err(FusionError::InvalidLevels);
    }
    Ok(fuse_pyramid_eval(frames, stack, &TransformEval::Direct(algebra), levels))
}

fn fuse_pyramid_eval(
    frames: &[Image],
    stack: &WeightStack,
    eval: &TransformEval,
    levels: usize,
) -> Image {
    let weight_pyrs: Vec<Vec<Plane>> =
        stack.maps().iter().map(|m| gaussian_pyramid(m, levels)).collect();

    let mut channels = Vec::with_capacity(3);
    for c in 0..3 {
        let band_pyrs: Vec<Vec<Plane>> = frames
            .iter()
            .map(|f| bandpass_pyramid(&transform_channel(f, c, eval), levels))
            .collect();

        let blended: Vec<Plane> = (0..levels)
            .map(|l| {
                let mut acc = Plane::new(band_pyrs[0][l].width(), band_pyrs[0][l].height());
                // frame order fixed; parallelism only across pixels
                for (bands, wpyr) in band_pyrs.iter().zip(&weight_pyrs) {
                    acc.data_mut()
                        .par_iter_mut()
                        .zip(bands[l].data().par_iter().zip(wpyr[l].data()))
                        .for_each(|(a, (b, w))| *a += w * b);
                }
                acc
            })
            .collect();

        let mut plane = collapse_pyramid(&blended);
        plane.map_in_place(|y| clamp_pixel(eval.inv_ext(y)));
        channels.push(plane);
    }
    Image::from_channels(&channels[0], &channels[1], &channels[2])
        .expect("channels share the frame dimensions")
}

/// Whole pipeline: weight maps from the frames, per-pixel normalization,
/// then the configured blend. Output samples stay strictly below 1.
pub fn fuse(frames: &[Image], config: &FusionConfig) -> Result<Image, FusionError> {
    let first = frames.first().ok_or(FusionError::EmptyFrameList)?;
    if frames.iter().any(|f| !f.same_dims(first)) {
        return Err(FusionError::DimensionMismatch);
    }
    let stack = weight_stack(frames, &config.weights)?.normalize();
    let luts = if config.use_lut {
        Some((
            Lut::build(LutKind::Phi, config.algebra, config.lut_resolution)?,
            Lut::build(LutKind::PhiInv, config.algebra, config.lut_resolution)?,
        ))
    } else {
        None
    };
    let eval = match &luts {
        Some((fwd, inv)) => TransformEval::Tables { fwd, inv },
        None => TransformEval::Direct(config.algebra),
    };
    let out = match config.mode {
        FusionMode::Flat => {
            validate_inputs(frames, &stack)?;
            fuse_flat_eval(frames, &stack, &eval)
        }
        FusionMode::Pyramid => {
            let levels = config.levels.resolve(first.width(), first.height())?;
            validate_inputs(frames, &stack)?;
            fuse_pyramid_eval(frames, &stack, &eval, levels)
        }
    };
    Ok(out)
}
