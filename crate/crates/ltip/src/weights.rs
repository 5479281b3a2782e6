//! Per-frame quality weight maps: local contrast, channel saturation, and
//! well-exposedness, combined multiplicatively and normalized across the
//! stack. Weights are computed on the acquired frame values with ordinary
//! arithmetic regardless of which pixel algebra fusion later runs under.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::image::{Image, Plane};

/// Added to every combined weight so per-pixel normalization never divides
/// by zero, even where all three factors vanish.
pub const STABILIZER_DELTA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("weight stack needs at least one map")]
    EmptyStack,
    #[error("weight maps have mismatched dimensions")]
    DimensionMismatch,
    #[error("sigma2 = {0} must be positive and finite")]
    InvalidSigma(f64),
    #[error("exponent {0} must be non-negative and finite")]
    InvalidExponent(f64),
}

/// Knobs for the weight pipeline. `mu`/`sigma2` shape the well-exposedness
/// bell (the default mid-point 0.37 deliberately favours darker tones to
/// offset the bright drift of logarithmic accumulation); the three exponents
/// gate each factor, with 0 disabling it entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightParams {
    pub mu: f64,
    pub sigma2: f64,
    pub contrast_exp: f64,
    pub saturation_exp: f64,
    pub exposedness_exp: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            mu: 0.37,
            sigma2: 0.2,
            contrast_exp: 1.0,
            saturation_exp: 1.0,
            exposedness_exp: 1.0,
        }
    }
}

impl WeightParams {
    pub fn validate(&self) -> Result<(), WeightError> {
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(WeightError::InvalidSigma(self.sigma2));
        }
        for e in [self.contrast_exp, self.saturation_exp, self.exposedness_exp] {
            if !(e.is_finite() && e >= 0.0) {
                return Err(WeightError::InvalidExponent(e));
            }
        }
        Ok(())
    }
}

/// One weight plane per frame. Normalization makes the planes a per-pixel
/// partition of unity.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStack {
    maps: Vec<Plane>,
    normalized: bool,
}

impl WeightStack {
    pub fn from_maps(maps: Vec<Plane>) -> Result<Self, WeightError> {
        let first = maps.first().ok_or(WeightError::EmptyStack)?;
        if maps.iter().any(|m| !m.same_dims(first)) {
            return Err(WeightError::DimensionMismatch);
        }
        Ok(WeightStack { maps, normalized: false })
    }

    pub fn maps(&self) -> &[Plane] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Rescales every pixel so the maps sum to one across frames. A pixel
    /// whose total weight is not strictly positive falls back to a uniform
    /// split (cannot happen for stacks built by `combine_weights`, whose
    /// stabilizer keeps totals positive).
    pub fn normalize(mut self) -> WeightStack {
        if self.normalized {
            return self;
        }
        let n = self.maps.len();
        let pixels = self.maps[0].data().len();
        let uniform = 1.0 / n as f64;
        // split borrows: one mutable slice per map
        let mut datas: Vec<&mut [f64]> = self.maps.iter_mut().map(|m| m.data_mut()).collect();
        for i in 0..pixels {
            let total: f64 = datas.iter().map(|d| d[i]).sum();
            if total > 0.0 {
                for d in datas.iter_mut() {
                    d[i] /= total;
                }
            } else {
                for d in datas.iter_mut() {
                    d[i] = uniform;
                }
            }
        }
        self.normalized = true;
        self
    }
}

/// Absolute 4-neighbour Laplacian response of the frame's luminance,
/// replicating samples at the borders.
pub fn contrast_weight(frame: &Image) -> Plane {
    let lum = frame.luminance();
    let (w, h) = (lum.width(), lum.height());
    let src = lum.data();
    let mut out = Plane::new(w, h);
    out.data_mut().par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let up = y.saturating_sub(1);
        let down = (y + 1).min(h - 1);
        for x in 0..w {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(w - 1);
            let lap = src[up * w + x] + src[down * w + x] + src[y * w + left] + src[y * w + right]
                - 4.0 * src[y * w + x];
            row[x] = lap.abs();
        }
    });
    out
}

/// Population standard deviation of the three channel values per pixel;
/// zero on achromatic pixels.
pub fn saturation_weight(frame: &Image) -> Plane {
    let w = frame.width();
    let mut out = Plane::new(w, frame.height());
    out.data_mut().par_iter_mut().zip(frame.data().par_chunks_exact(3)).for_each(|(dst, p)| {
        let mean = (p[0] + p[1] + p[2]) / 3.0;
        let var = ((p[0] - mean).powi(2) + (p[1] - mean).powi(2) + (p[2] - mean).powi(2)) / 3.0;
        *dst = var.sqrt();
    });
    out
}

/// Product over channels of an unnormalized Gaussian bell around `mu`:
/// `exp(-(v - mu)^2 / (2 sigma2))` per channel.
pub fn well_exposedness_weight(frame: &Image, mu: f64, sigma2: f64) -> Plane {
    let inv = 1.0 / (2.0 * sigma2);
    let w = frame.width();
    let mut out = Plane::new(w, frame.height());
    out.data_mut().par_iter_mut().zip(frame.data().par_chunks_exact(3)).for_each(|(dst, p)| {
        let g = |v: f64| (-(v - mu) * (v - mu) * inv).exp();
        *dst = g(p[0]) * g(p[1]) * g(p[2]);
    });
    out
}

/// Pointwise `c^wc * s^ws * e^we + delta`. A zero base with zero exponent
/// counts as 1, so an exponent of 0 disables its factor; with all exponents
/// zero the map is uniform `1 + delta`.
pub fn combine_weights(
    contrast: &Plane,
    saturation: &Plane,
    exposedness: &Plane,
    params: &WeightParams,
) -> Result<Plane, WeightError> {
    params.validate()?;
    if !contrast.same_dims(saturation) || !contrast.same_dims(exposedness) {
        return Err(WeightError::DimensionMismatch);
    }
    let mut out = Plane::new(contrast.width(), contrast.height());
    let (wc, ws, we) = (params.contrast_exp, params.saturation_exp, params.exposedness_exp);
    // powf(0, 0) is 1 per IEEE, which is exactly the gating we want
    let pw = |b: f64, e: f64| if e == 1.0 { b } else { b.powf(e) };
    out.data_mut().par_iter_mut().enumerate().for_each(|(i, dst)| {
        let c = pw(contrast.data()[i], wc);
        let s = pw(saturation.data()[i], ws);
        let e = pw(exposedness.data()[i], we);
        *dst = c * s * e + STABILIZER_DELTA;
    });
    Ok(out)
}

/// Full weight pipeline for a frame stack: the three factors per frame,
/// combined, as an unnormalized stack.
pub fn weight_stack(frames: &[Image], params: &WeightParams) -> Result<WeightStack, WeightError> {
    params.validate()?;
    let first = frames.first().ok_or(WeightError::EmptyStack)?;
    if frames.iter().any(|f| !f.same_dims(first)) {
        return Err(WeightError::DimensionMismatch);
    }
    let maps = frames
        .iter()
        .map(|f| {
            let c = contrast_weight(f);
            let s = saturation_weight(f);
            let e = well_exposedness_weight(f, params.mu, params.sigma2);
            combine_weights(&c, &s, &e, params)
        })
        .collect::<Result<Vec<_>, _>>()?;
    WeightStack::from_maps(maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, v: f64) -> Image {
        Image::from_fn(w, h, |_, _| [v, v, v])
    }

    #[test]
    fn contrast_peaks_on_impulse() {
        let mut img = gray(5, 5, 0.0);
        img.set_pixel(2, 2, [0.8, 0.8, 0.8]);
        let c = contrast_weight(&img);
        let peak = c.get(2, 2);
        assert!((peak - 3.2).abs() < 1e-12); // |-4 * 0.8|
        for y in 0..5 {
            for x in 0..5 {
                assert!(c.get(x, y) <= peak);
            }
        }
        // flat image has zero response everywhere, including borders
        let flat = contrast_weight(&gray(4, 4, 0.7));
        assert!(flat.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saturation_values() {
        let pure_red = Image::from_fn(2, 2, |_, _| [1.0, 0.0, 0.0]);
        let s = saturation_weight(&pure_red);
        assert!((s.get(0, 0) - (2.0f64 / 9.0).sqrt()).abs() < 1e-12);
        let neutral = saturation_weight(&gray(2, 2, 0.42));
        assert!(neutral.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn well_exposedness_bell() {
        let at_mu = well_exposedness_weight(&gray(1, 1, 0.37), 0.37, 0.2);
        assert!((at_mu.get(0, 0) - 1.0).abs() < 1e-15);
        // 0.5 away from mu: exp(-0.25 / 0.4) per channel
        let off = well_exposedness_weight(&gray(1, 1, 0.87), 0.37, 0.2);
        let per_channel = (-0.25f64 / 0.4).exp();
        assert!((off.get(0, 0) - per_channel.powi(3)).abs() < 1e-12);
        // white under mid-centred bell
        let white = well_exposedness_weight(&gray(1, 1, 1.0), 0.5, 0.2);
        assert!((white.get(0, 0) - per_channel.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn combine_gates_by_exponent() {
        let zero = Plane::new(2, 2);
        let ones = Plane::filled(2, 2, 1.0);
        let params = WeightParams {
            contrast_exp: 0.0,
            saturation_exp: 0.0,
            exposedness_exp: 0.0,
            ..WeightParams::default()
        };
        let w = combine_weights(&zero, &zero, &ones, &params).unwrap();
        assert!(w.data().iter().all(|&v| (v - (1.0 + STABILIZER_DELTA)).abs() < 1e-15));

        let default = combine_weights(&zero, &ones, &ones, &WeightParams::default()).unwrap();
        assert!(default.data().iter().all(|&v| v == STABILIZER_DELTA));
    }

    #[test]
    fn combine_rejects_bad_params() {
        let p = Plane::new(2, 2);
        let bad = WeightParams { sigma2: 0.0, ..WeightParams::default() };
        assert!(combine_weights(&p, &p, &p, &bad).is_err());
        let neg = WeightParams { contrast_exp: -1.0, ..WeightParams::default() };
        assert!(combine_weights(&p, &p, &p, &neg).is_err());
        let mismatched = Plane::new(3, 2);
        assert!(combine_weights(&p, &p, &mismatched, &WeightParams::default()).is_err());
    }

    #[test]
    fn normalize_sums_to_one() {
        let a = Plane::filled(3, 3, 0.2);
        let b = Plane::filled(3, 3, 1.7);
        let c = Plane::filled(3, 3, STABILIZER_DELTA);
        let stack = WeightStack::from_maps(vec![a, b, c]).unwrap().normalize();
        assert!(stack.is_normalized());
        for i in 0..9 {
            let total: f64 = stack.maps().iter().map(|m| m.data()[i]).sum();
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn all_delta_normalizes_uniform() {
        let maps = vec![Plane::filled(2, 2, STABILIZER_DELTA); 4];
        let stack = WeightStack::from_maps(maps).unwrap().normalize();
        for m in stack.maps() {
            assert!(m.data().iter().all(|&v| (v - 0.25).abs() <= 1e-12));
        }
    }

    #[test]
    fn empty_stack_rejected() {
        assert!(matches!(WeightStack::from_maps(vec![]), Err(WeightError::EmptyStack)));
        assert!(weight_stack(&[], &WeightParams::default()).is_err());
    }
}
