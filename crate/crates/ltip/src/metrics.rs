//! Quality assessment for tonemapped results.
//!
//! Three ingredients: a structural score comparing the output against the
//! log-compressed irradiance it came from, a statistical naturalness score
//! rewarding mid-range brightness and healthy contrast, and a weighted
//! power-mean of the two as the headline number. Baseline comparisons (RMSE
//! and SSIM against a reference image) ride along when a reference exists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{Image, IrradianceMap, Plane};

/// SSIM window size on full-size inputs; shrunk (keeping it odd) when an
/// image is smaller than the window.
const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("images have mismatched dimensions")]
    DimensionMismatch,
    #[error("image has no pixels")]
    EmptyImage,
    #[error("invalid metric parameter: {0}")]
    InvalidParams(String),
}

/// Mixing weights for the overall score `a * s^alpha + (1 - a) * n^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityWeights {
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for QualityWeights {
    fn default() -> Self {
        QualityWeights { a: 0.8012, alpha: 0.3046, beta: 0.7088 }
    }
}

impl QualityWeights {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(self.a.is_finite() && (0.0..=1.0).contains(&self.a)) {
            return Err(MetricsError::InvalidParams(format!("a = {}", self.a)));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MetricsError::InvalidParams(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Gaussian targets for luminance statistics: means near `mean_target` and
/// standard deviations near `std_target` score high, falling off with the
/// respective spreads (themselves standard deviations of the falloff).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalnessParams {
    pub mean_target: f64,
    pub mean_spread: f64,
    pub std_target: f64,
    pub std_spread: f64,
}

impl Default for NaturalnessParams {
    fn default() -> Self {
        NaturalnessParams { mean_target: 0.5, mean_spread: 0.2, std_target: 0.25, std_spread: 0.1 }
    }
}

impl NaturalnessParams {
    pub fn validate(&self) -> Result<(), MetricsError> {
        for (name, v) in [("mean_target", self.mean_target), ("std_target", self.std_target)] {
            if !v.is_finite() {
                return Err(MetricsError::InvalidParams(format!("{name} = {v}")));
            }
        }
        for (name, v) in [("mean_spread", self.mean_spread), ("std_spread", self.std_spread)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MetricsError::InvalidParams(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

fn gaussian_kernel(len: usize, sigma: f64) -> Vec<f64> {
    let c = (len - 1) as f64 / 2.0;
    let mut k: Vec<f64> = (0..len)
        .map(|i| (-((i as f64 - c) * (i as f64 - c)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    for v in &mut k {
        *v /= total;
    }
    k
}

/// Correlation with the kernel without padding: output shrinks by the kernel
/// length minus one along the filtered axis.
fn valid_filter_rows(p: &Plane, kernel: &[f64]) -> Plane {
    let (w, h) = (p.width(), p.height());
    let out_w = w - kernel.len() + 1;
    Plane::from_fn(out_w, h, |x, y| {
        kernel.iter().enumerate().map(|(i, &k)| k * p.get(x + i, y)).sum()
    })
}

fn valid_filter_cols(p: &Plane, kernel: &[f64]) -> Plane {
    let (w, h) = (p.width(), p.height());
    let out_h = h - kernel.len() + 1;
    Plane::from_fn(w, out_h, |x, y| {
        kernel.iter().enumerate().map(|(i, &k)| k * p.get(x, y + i)).sum()
    })
}

fn valid_filter(p: &Plane, kernel: &[f64]) -> Plane {
    valid_filter_cols(&valid_filter_rows(p, kernel), kernel)
}

fn product_plane(a: &Plane, b: &Plane) -> Plane {
    Plane::from_fn(a.width(), a.height(), |x, y| a.get(x, y) * b.get(x, y))
}

/// Mean structural similarity between two planes over the region where the
/// Gaussian window fits entirely inside both.
pub fn ssim_mean(a: &Plane, b: &Plane) -> Result<f64, MetricsError> {
    if !a.same_dims(b) {
        return Err(MetricsError::DimensionMismatch);
    }
    let (w, h) = (a.width(), a.height());
    if w == 0 || h == 0 {
        return Err(MetricsError::EmptyImage);
    }
    let mut win = SSIM_WINDOW.min(w).min(h);
    if win % 2 == 0 {
        win -= 1;
    }
    let kernel = gaussian_kernel(win, SSIM_SIGMA);

    let mu_a = valid_filter(a, &kernel);
    let mu_b = valid_filter(b, &kernel);
    let m_aa = valid_filter(&product_plane(a, a), &kernel);
    let m_bb = valid_filter(&product_plane(b, b), &kernel);
    let m_ab = valid_filter(&product_plane(a, b), &kernel);

    let n = mu_a.data().len() as f64;
    let mut total = 0.0f64;
    for i in 0..mu_a.data().len() {
        let (ma, mb) = (mu_a.data()[i], mu_b.data()[i]);
        let va = m_aa.data()[i] - ma * ma;
        let vb = m_bb.data()[i] - mb * mb;
        let cov = m_ab.data()[i] - ma * mb;
        let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
        let den = (ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2);
        total += num / den;
    }
    Ok(total / n)
}

/// Rescales a plane onto [0, 1]; a constant plane maps to all zeros.
fn minmax_normalize(p: &mut Plane) {
    let lo = p.data().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = p.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        let span = hi - lo;
        p.map_in_place(move |v| (v - lo) / span);
    } else {
        p.map_in_place(|_| 0.0);
    }
}

/// Structural fidelity of a tonemapped image against the irradiance it was
/// built from: SSIM between the output luminance and the log-compressed,
/// range-normalized irradiance luminance, clamped onto [0, 1].
pub fn structural_fidelity(ldr: &Image, map: &IrradianceMap) -> Result<f64, MetricsError> {
    if ldr.width() != map.width() || ldr.height() != map.height() {
        return Err(MetricsError::DimensionMismatch);
    }
    let mut reference = map.luminance();
    reference.map_in_place(f64::ln_1p);
    minmax_normalize(&mut reference);
    let s = ssim_mean(&ldr.luminance(), &reference)?;
    Ok(s.clamp(0.0, 1.0))
}

/// Population mean and standard deviation of a plane.
fn mean_std(p: &Plane) -> (f64, f64) {
    let n = p.data().len() as f64;
    let mean = p.data().iter().sum::<f64>() / n;
    let var = p.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn gaussian_score(value: f64, target: f64, spread: f64) -> f64 {
    let d = value - target;
    (-d * d / (2.0 * spread * spread)).exp()
}

/// Statistical naturalness of the output luminance in [0, 1]: the product of
/// Gaussian scores for its mean and its standard deviation.
pub fn statistical_naturalness(
    ldr: &Image,
    params: &NaturalnessParams,
) -> Result<f64, MetricsError> {
    params.validate()?;
    if ldr.data().is_empty() {
        return Err(MetricsError::EmptyImage);
    }
    let (mean, std) = mean_std(&ldr.luminance());
    Ok(gaussian_score(mean, params.mean_target, params.mean_spread)
        * gaussian_score(std, params.std_target, params.std_spread))
}

/// Headline score: `a * s^alpha + (1 - a) * n^beta`. Both inputs are clamped
/// onto [0, 1] first, so the result lives there too.
pub fn overall_quality(
    structural: f64,
    naturalness: f64,
    weights: &QualityWeights,
) -> Result<f64, MetricsError> {
    weights.validate()?;
    let s = structural.clamp(0.0, 1.0);
    let n = naturalness.clamp(0.0, 1.0);
    Ok(weights.a * s.powf(weights.alpha) + (1.0 - weights.a) * n.powf(weights.beta))
}

/// Root-mean-square difference across all channel samples.
pub fn rmse_to_baseline(image: &Image, baseline: &Image) -> Result<f64, MetricsError> {
    if !image.same_dims(baseline) {
        return Err(MetricsError::DimensionMismatch);
    }
    if image.data().is_empty() {
        return Err(MetricsError::EmptyImage);
    }
    let sum: f64 = image.data().iter().zip(baseline.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sum / image.data().len() as f64).sqrt())
}

/// Luminance SSIM against a reference image.
pub fn ssim_to_baseline(image: &Image, baseline: &Image) -> Result<f64, MetricsError> {
    if !image.same_dims(baseline) {
        return Err(MetricsError::DimensionMismatch);
    }
    ssim_mean(&image.luminance(), &baseline.luminance())
}

/// Everything the assessment produces, ready for serialization. Baseline
/// fields appear only when a reference image was supplied; `log_rmse` is
/// additionally withheld when the RMSE is too small for its logarithm to
/// mean anything (below 1e-12).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub structural: f64,
    pub naturalness: f64,
    pub quality: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ssim: Option<f64>,
    pub weights: QualityWeights,
    pub naturalness_params: NaturalnessParams,
}

/// Runs the full assessment of a tonemapped image against its source
/// irradiance, optionally comparing to a baseline rendition as well.
pub fn quality_report(
    ldr: &Image,
    map: &IrradianceMap,
    baseline: Option<&Image>,
    weights: &QualityWeights,
    naturalness_params: &NaturalnessParams,
) -> Result<QualityReport, MetricsError> {
    let structural = structural_fidelity(ldr, map)?;
    let naturalness = statistical_naturalness(ldr, naturalness_params)?;
    let quality = overall_quality(structural, naturalness, weights)?;
    let (mut rmse, mut log_rmse, mut ssim) = (None, None, None);
    if let Some(reference) = baseline {
        let r = rmse_to_baseline(ldr, reference)?;
        log_rmse = (r >= 1e-12).then(|| r.ln());
        rmse = Some(r);
        ssim = Some(ssim_to_baseline(ldr, reference)?);
    }
    Ok(QualityReport {
        structural,
        naturalness,
        quality,
        rmse,
        log_rmse,
        ssim,
        weights: *weights,
        naturalness_params: *naturalness_params,
    })
}
