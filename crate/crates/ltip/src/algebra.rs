//! Pixel algebras over the normalized intensity domain.
//!
//! Each algebra is generated by an isomorphism `phi` that carries the bounded
//! pixel domain `[0, 1)` onto an unbounded transform axis. Addition and scalar
//! multiplication are the pullbacks of ordinary `+` and `*` through `phi`, so
//! both operations are closed on `[0, 1)`: accumulating bright values drifts
//! toward saturation but never reaches it. `RealBaseline` opts out of the
//! transform (identity `phi`, ordinary arithmetic) so the same fusion code can
//! run with plain averaging for comparison.

use thiserror::Error;

/// Margin kept between the brightest representable pixel and 1.0, so that
/// `phi` stays finite on every stored value. An 8-bit white (255/255) decodes
/// to `1 - CLAMP_MARGIN`.
pub const CLAMP_MARGIN: f64 = 1.0 / (1u32 << 20) as f64;

/// Largest valid pixel value, `1 - CLAMP_MARGIN`.
pub const PIXEL_MAX: f64 = 1.0 - CLAMP_MARGIN;

/// Contract violations for the algebra operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("pixel value {0} outside [0, 1)")]
    PixelOutOfDomain(f64),
    #[error("transform value {0} outside (-1, inf)")]
    TransformOutOfDomain(f64),
    #[error("scalar {0} must be non-negative")]
    NegativeScalar(f64),
    #[error("exponent m = {0} must be positive and finite")]
    InvalidExponent(f64),
    #[error("semisaturation {0} must be positive and finite")]
    InvalidSemisaturation(f64),
    #[error("intensity {0} must be non-negative")]
    NegativeIntensity(f64),
}

/// A pixel value validated into `[0, PIXEL_MAX]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PixelValue(f64);

impl PixelValue {
    /// Accepts only finite values already inside the clamped domain.
    pub fn new(v: f64) -> Result<Self, AlgebraError> {
        if v.is_finite() && (0.0..=PIXEL_MAX).contains(&v) {
            Ok(PixelValue(v))
        } else {
            Err(AlgebraError::PixelOutOfDomain(v))
        }
    }

    /// Forces an arbitrary real into the domain; NaN maps to 0.
    pub fn clamped(v: f64) -> Self {
        if v.is_nan() {
            PixelValue(0.0)
        } else {
            PixelValue(v.clamp(0.0, PIXEL_MAX))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Clamp helper used at every image boundary (decode, fusion output).
#[inline]
pub fn clamp_pixel(v: f64) -> f64 {
    PixelValue::clamped(v).get()
}

/// Largest double below 1.0. The saturating curves approach 1 asymptotically,
/// and for extreme operands the correctly rounded result of their closed
/// forms is exactly 1.0 (e.g. `1 - (1-u)^alpha` once `(1-u)^alpha` drops
/// under half an ulp). Results are pinned here instead so every operation
/// lands inside the open interval it is defined on.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

/// The pixel arithmetic a pipeline runs under.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Algebra {
    /// `phi(x) = x / (1 - x)`. Mimics the retinal saturation response with
    /// full-range output; the default model.
    #[default]
    Ltip,
    /// Classical logarithmic model at unit scale: `phi(x) = -ln(1 - x)`.
    ClassicalLip,
    /// Exponent-warped variant, `phi(x) = x^m / (1 - x^m)`; `m = 1` is `Ltip`.
    ParametricLtip { m: f64 },
    /// Ordinary real arithmetic (identity transform); the comparison baseline.
    RealBaseline,
}

impl std::fmt::Display for Algebra {
    /// Prints the model under the same names the command line accepts.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algebra::Ltip => write!(f, "ltip"),
            Algebra::ClassicalLip => write!(f, "lip"),
            Algebra::ParametricLtip { m } => write!(f, "parametric (m = {m})"),
            Algebra::RealBaseline => write!(f, "real"),
        }
    }
}

impl Algebra {
    fn check_exponent(&self) -> Result<(), AlgebraError> {
        if let Algebra::ParametricLtip { m } = self {
            if !(m.is_finite() && *m > 0.0) {
                return Err(AlgebraError::InvalidExponent(*m));
            }
        }
        Ok(())
    }

    /// Forward isomorphism. Monotone increasing with `phi(0) = 0`; rejects
    /// inputs outside `[0, 1)`.
    pub fn phi(&self, x: f64) -> Result<f64, AlgebraError> {
        self.check_exponent()?;
        if !x.is_finite() || !(0.0..1.0).contains(&x) {
            return Err(AlgebraError::PixelOutOfDomain(x));
        }
        Ok(self.phi_raw(x))
    }

    /// Inverse isomorphism. Accepts the extended range `y > -1` (negative
    /// inputs return the odd-symmetric extension, sign matching the input);
    /// rejects `y <= -1`.
    pub fn phi_inv(&self, y: f64) -> Result<f64, AlgebraError> {
        self.check_exponent()?;
        if !y.is_finite() || y <= -1.0 {
            return Err(AlgebraError::TransformOutOfDomain(y));
        }
        Ok(self.phi_inv_extended(y))
    }

    /// Pullback addition; closed on `[0, 1)`.
    pub fn add(&self, u: f64, v: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u) || *self == Algebra::RealBaseline);
        debug_assert!((0.0..1.0).contains(&v) || *self == Algebra::RealBaseline);
        self.add_raw(u, v)
    }

    /// Pullback scalar multiplication; rejects negative scalars.
    pub fn scalar_mul(&self, alpha: f64, u: f64) -> Result<f64, AlgebraError> {
        self.check_exponent()?;
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(AlgebraError::NegativeScalar(alpha));
        }
        Ok(self.smul_raw(alpha, u))
    }

    /// Pullback subtraction, `phi_inv_extended(phi(u) - phi(v))`. Total over
    /// valid pixel pairs; the result lies in `(-1, 1)` and is the signed
    /// mirror of `add`'s argument: `sub(u, v) = -sub(v, u)`.
    pub fn sub(&self, u: f64, v: f64) -> f64 {
        if *self == Algebra::RealBaseline {
            return u - v;
        }
        self.phi_inv_extended(self.phi_raw(u) - self.phi_raw(v))
    }

    /// Odd-symmetric extension of `phi` to `(-1, 1)`, the signed coefficient
    /// domain produced by `sub`.
    pub fn phi_extended(&self, x: f64) -> f64 {
        if x < 0.0 {
            -self.phi_raw(-x)
        } else {
            self.phi_raw(x)
        }
    }

    /// Odd-symmetric extension of the inverse isomorphism to all reals,
    /// `sign(y) * phi_inv(|y|)`; maps onto `(-1, 1)`. Band-pass coefficients
    /// reconstructed in transform space come back through this.
    pub fn phi_inv_extended(&self, y: f64) -> f64 {
        if y < 0.0 {
            -self.phi_inv_raw(-y)
        } else {
            self.phi_inv_raw(y)
        }
    }

    #[inline]
    pub(crate) fn phi_raw(&self, x: f64) -> f64 {
        match *self {
            Algebra::Ltip => x / (1.0 - x),
            Algebra::ClassicalLip => -(-x).ln_1p(),
            Algebra::ParametricLtip { m } => {
                if m == 1.0 {
                    x / (1.0 - x)
                } else {
                    let xm = x.powf(m);
                    xm / (1.0 - xm)
                }
            }
            Algebra::RealBaseline => x,
        }
    }

    #[inline]
    pub(crate) fn phi_inv_raw(&self, y: f64) -> f64 {
        match *self {
            Algebra::Ltip => (y / (y + 1.0)).min(ONE_BELOW),
            Algebra::ClassicalLip => (-(-y).exp_m1()).min(ONE_BELOW),
            Algebra::ParametricLtip { m } => {
                if m == 1.0 {
                    (y / (y + 1.0)).min(ONE_BELOW)
                } else {
                    (y / (y + 1.0)).powf(1.0 / m).min(ONE_BELOW)
                }
            }
            Algebra::RealBaseline => y,
        }
    }

    #[inline]
    pub(crate) fn add_raw(&self, u: f64, v: f64) -> f64 {
        // the rational sum is written so that adding zero is exact
        match *self {
            Algebra::Ltip => ((u + v - 2.0 * u * v) / (1.0 - u * v)).min(ONE_BELOW),
            Algebra::ClassicalLip => (u + v - u * v).min(ONE_BELOW),
            Algebra::ParametricLtip { m } => {
                if m == 1.0 {
                    ((u + v - 2.0 * u * v) / (1.0 - u * v)).min(ONE_BELOW)
                } else {
                    let (um, vm) = (u.powf(m), v.powf(m));
                    ((um + vm - 2.0 * um * vm) / (1.0 - um * vm)).powf(1.0 / m).min(ONE_BELOW)
                }
            }
            Algebra::RealBaseline => u + v,
        }
    }

    #[inline]
    pub(crate) fn smul_raw(&self, alpha: f64, u: f64) -> f64 {
        match *self {
            Algebra::Ltip => (alpha * u / (1.0 + (alpha - 1.0) * u)).min(ONE_BELOW),
            Algebra::ClassicalLip => (1.0 - (1.0 - u).powf(alpha)).min(ONE_BELOW),
            Algebra::ParametricLtip { m } => {
                if m == 1.0 {
                    (alpha * u / (1.0 + (alpha - 1.0) * u)).min(ONE_BELOW)
                } else {
                    let um = u.powf(m);
                    (u * (alpha / (1.0 + (alpha - 1.0) * um)).powf(1.0 / m)).min(ONE_BELOW)
                }
            }
            Algebra::RealBaseline => alpha * u,
        }
    }
}

/// Retinal response parameters: semisaturation intensity and response
/// exponent. The defaults put the half response at unit intensity with the
/// physiological exponent 0.74; at exponent 1 and unit semisaturation the
/// response curve coincides with the `Ltip` inverse isomorphism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvsParams {
    pub semisaturation: f64,
    pub exponent: f64,
}

impl Default for HvsParams {
    fn default() -> Self {
        HvsParams { semisaturation: 1.0, exponent: 0.74 }
    }
}

/// Saturating photoreceptor response `i^n / (i^n + s^n)` for intensity `i`,
/// semisaturation `s`, exponent `n`. Returns exactly `1/2` at `i == s`.
pub fn michaelis_menten(intensity: f64, params: HvsParams) -> Result<f64, AlgebraError> {
    let HvsParams { semisaturation, exponent } = params;
    if !(semisaturation.is_finite() && semisaturation > 0.0) {
        return Err(AlgebraError::InvalidSemisaturation(semisaturation));
    }
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(AlgebraError::InvalidExponent(exponent));
    }
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(AlgebraError::NegativeIntensity(intensity));
    }
    let num = intensity.powf(exponent);
    let den = semisaturation.powf(exponent);
    Ok((num / (num + den)).min(ONE_BELOW))
}

/// Unit-exponent response `i / (i + s)`. With `s = 1` this is bit-identical
/// to `Algebra::Ltip.phi_inv` on non-negative inputs.
pub fn naka_rushton(intensity: f64, semisaturation: f64) -> Result<f64, AlgebraError> {
    if !(semisaturation.is_finite() && semisaturation > 0.0) {
        return Err(AlgebraError::InvalidSemisaturation(semisaturation));
    }
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(AlgebraError::NegativeIntensity(intensity));
    }
    Ok((intensity / (intensity + semisaturation)).min(ONE_BELOW))
}
