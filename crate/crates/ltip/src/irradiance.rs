//! Irradiance recovery and HDR merging.
//!
//! A stored pixel is modeled as the transform-compressed product of scene
//! irradiance and exposure time: `f = phi_inv(E * dt)`. Inverting per frame
//! gives irradiance estimates, a weighted per-pixel average merges them, and
//! the transform maps the merged map back to display range. At unit exposure
//! this whole route collapses to flat transform-space fusion, which
//! `verify_equivalence` measures directly.

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{clamp_pixel, Algebra};
use crate::fusion::{fuse_flat_direct, FusionError};
use crate::image::{Image, IrradianceMap};
use crate::weights::{weight_stack, WeightError, WeightParams, WeightStack};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IrradianceError {
    #[error("need at least one exposure")]
    EmptyFrameList,
    #[error("exposures have mismatched dimensions")]
    DimensionMismatch,
    #[error("exposure time must be positive and finite, got {0}")]
    InvalidExposureTime(f64),
    #[error("weight stack does not match the exposure stack")]
    StackMismatch,
    #[error("the fusion identity is stated for unit exposure times")]
    NonUnitExposure,
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

/// A display-referred frame tagged with its capture time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposedFrame {
    image: Image,
    exposure_time: f64,
}

impl ExposedFrame {
    pub fn new(image: Image, exposure_time: f64) -> Result<Self, IrradianceError> {
        if !(exposure_time.is_finite() && exposure_time > 0.0) {
            return Err(IrradianceError::InvalidExposureTime(exposure_time));
        }
        Ok(ExposedFrame { image, exposure_time })
    }

    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn exposure_time(&self) -> f64 {
        self.exposure_time
    }
}

/// Per-channel irradiance estimate: `phi(f) / dt`.
pub fn recover_irradiance(frame: &ExposedFrame, algebra: Algebra) -> IrradianceMap {
    let scale = 1.0 / frame.exposure_time;
    let (w, h) = (frame.image.width(), frame.image.height());
    let mut map = IrradianceMap::new(w, h);
    map.data_mut()
        .par_iter_mut()
        .zip(frame.image.data().par_iter())
        .for_each(|(e, &v)| *e = algebra.phi_raw(v) * scale);
    map
}

/// Weighted per-pixel average of irradiance estimates. The stack need not be
/// normalized; a pixel whose weights sum to zero falls back to the plain mean,
/// matching the uniform fallback used when normalizing weight stacks.
pub fn merge_irradiance(
    maps: &[IrradianceMap],
    stack: &WeightStack,
) -> Result<IrradianceMap, IrradianceError> {
    let first = maps.first().ok_or(IrradianceError::EmptyFrameList)?;
    if maps.iter().any(|m| !m.same_dims(first)) {
        return Err(IrradianceError::DimensionMismatch);
    }
    if stack.len() != maps.len()
        || stack.maps()[0].width() != first.width()
        || stack.maps()[0].height() != first.height()
    {
        return Err(IrradianceError::StackMismatch);
    }
    let (w, h) = (first.width(), first.height());
    let mut out = IrradianceMap::new(w, h);
    out.data_mut().par_chunks_mut(w * 3).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            let px = y * w + x;
            let mut total = 0.0f64;
            let mut acc = [0.0f64; 3];
            for (map, wm) in maps.iter().zip(stack.maps()) {
                let wi = wm.data()[px];
                total += wi;
                for (c, a) in acc.iter_mut().enumerate() {
                    *a += wi * map.data()[px * 3 + c];
                }
            }
            if total > 0.0 {
                for c in 0..3 {
                    row[x * 3 + c] = acc[c] / total;
                }
            } else {
                let n = maps.len() as f64;
                for c in 0..3 {
                    let sum: f64 = maps.iter().map(|m| m.data()[px * 3 + c]).sum();
                    row[x * 3 + c] = sum / n;
                }
            }
        }
    });
    Ok(out)
}

/// Maps an irradiance map back into display range, clamped to the open
/// pixel domain.
pub fn tonemap(map: &IrradianceMap, algebra: Algebra) -> Image {
    let (w, h) = (map.width(), map.height());
    let mut out = Image::new(w, h);
    out.data_mut()
        .par_iter_mut()
        .zip(map.data().par_iter())
        .for_each(|(v, &e)| *v = clamp_pixel(algebra.phi_inv_extended(e)));
    out
}

/// Full merge pipeline: recover each exposure, weight by the source frames'
/// quality measures, and average. Returns the merged irradiance map.
pub fn merge_exposures(
    frames: &[ExposedFrame],
    algebra: Algebra,
    params: &WeightParams,
) -> Result<IrradianceMap, IrradianceError> {
    let first = frames.first().ok_or(IrradianceError::EmptyFrameList)?;
    if frames.iter().any(|f| !f.image.same_dims(&first.image)) {
        return Err(IrradianceError::DimensionMismatch);
    }
    let images: Vec<Image> = frames.iter().map(|f| f.image.clone()).collect();
    let stack = weight_stack(&images, params)?;
    let maps: Vec<IrradianceMap> = frames.iter().map(|f| recover_irradiance(f, algebra)).collect();
    merge_irradiance(&maps, &stack)
}

/// Measures how far the irradiance route drifts from flat transform-space
/// fusion at unit exposure: returns the worst absolute per-sample difference
/// between the two results. Mathematically the two paths coincide, so the
/// returned value is pure floating-point noise.
pub fn verify_equivalence(
    frames: &[ExposedFrame],
    algebra: Algebra,
    params: &WeightParams,
) -> Result<f64, IrradianceError> {
    if frames.is_empty() {
        return Err(IrradianceError::EmptyFrameList);
    }
    if frames.iter().any(|f| f.exposure_time != 1.0) {
        return Err(IrradianceError::NonUnitExposure);
    }
    let images: Vec<Image> = frames.iter().map(|f| f.image.clone()).collect();
    let stack = weight_stack(&images, params)?;

    let fused = fuse_flat_direct(&images, &stack.clone().normalize(), algebra)?;

    let maps: Vec<IrradianceMap> = frames.iter().map(|f| recover_irradiance(f, algebra)).collect();
    let merged = merge_irradiance(&maps, &stack)?;
    let via_irradiance = tonemap(&merged, algebra);

    Ok(fused
        .data()
        .iter()
        .zip(via_irradiance.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
