//! Linear-interpolation lookup tables for the transform pair.
//!
//! The forward transform has a pole at 1, so a uniform table cannot hold a
//! useful error bound over the whole pixel domain. Tables therefore cover
//! `[0, knee]` (and `[0, phi(knee)]` for the inverse); beyond the knee the
//! closed form is evaluated directly, which keeps `eval` a drop-in for the
//! exact functions over their full domains. The build measures interpolation
//! error on a dense probe grid and refuses resolutions that cannot meet the
//! `1/resolution` bound.

use thiserror::Error;

use crate::algebra::Algebra;

/// Upper edge of the tabulated pixel range; the closed form takes over above.
pub const TABLE_KNEE: f64 = 1.0 - 1.0 / 32.0;

/// Default sample count.
pub const DEFAULT_RESOLUTION: usize = 65536;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LutError {
    #[error("lut needs at least 2 samples, got {0}")]
    ResolutionTooSmall(usize),
    #[error(
        "resolution {resolution} cannot meet the error bound for the {algebra} {kind}: \
         measured max error {measured:.3e} > {bound:.3e}"
    )]
    ErrorBoundExceeded {
        resolution: usize,
        algebra: Algebra,
        kind: LutKind,
        measured: f64,
        bound: f64,
    },
}

/// Which half of the transform pair a table approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LutKind {
    Phi,
    PhiInv,
}

impl std::fmt::Display for LutKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LutKind::Phi => write!(f, "forward transform"),
            LutKind::PhiInv => write!(f, "inverse transform"),
        }
    }
}

/// Uniformly sampled table with linear interpolation and a measured error
/// ceiling.
#[derive(Debug, Clone)]
pub struct Lut {
    kind: LutKind,
    algebra: Algebra,
    samples: Vec<f64>,
    x_max: f64,
    inv_step: f64,
    max_abs_error: f64,
}

impl Lut {
    /// Tabulates `phi` or `phi_inv` for `algebra` at `resolution` samples.
    /// Fails if fewer than 2 samples are requested or if the measured
    /// interpolation error exceeds `1/resolution` (steeply curved transforms,
    /// e.g. strongly warped exponents, genuinely cannot be tabulated this way).
    pub fn build(kind: LutKind, algebra: Algebra, resolution: usize) -> Result<Self, LutError> {
        if resolution < 2 {
            return Err(LutError::ResolutionTooSmall(resolution));
        }
        let x_max = match kind {
            LutKind::Phi => TABLE_KNEE,
            LutKind::PhiInv => algebra.phi_raw(TABLE_KNEE),
        };
        let exact = |x: f64| match kind {
            LutKind::Phi => algebra.phi_raw(x),
            LutKind::PhiInv => algebra.phi_inv_raw(x),
        };
        let step = x_max / (resolution - 1) as f64;
        let samples: Vec<f64> = (0..resolution).map(|i| exact(i as f64 * step)).collect();

        // Dense probe pass: 8 interior probes per cell, worst deviation from
        // the closed form, inflated 5% to cover the gaps between probes.
        let mut measured = 0.0f64;
        for cell in 0..resolution - 1 {
            let x0 = cell as f64 * step;
            for p in 1..=8 {
                let t = p as f64 / 9.0;
                let x = x0 + t * step;
                let lerp = samples[cell] * (1.0 - t) + samples[cell + 1] * t;
                measured = measured.max((lerp - exact(x)).abs());
            }
        }
        let max_abs_error = measured * 1.05 + f64::EPSILON;

        let bound = 1.0 / resolution as f64;
        if max_abs_error > bound {
            return Err(LutError::ErrorBoundExceeded {
                resolution,
                algebra,
                kind,
                measured: max_abs_error,
                bound,
            });
        }
        Ok(Lut {
            kind,
            algebra,
            samples,
            x_max,
            inv_step: (resolution - 1) as f64 / x_max,
            max_abs_error,
        })
    }

    /// Interpolated evaluation. Forward tables accept `[0, 1)`; inverse
    /// tables accept all reals, negative inputs via the odd-symmetric
    /// extension. Inputs beyond the tabulated knee use the closed form.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            LutKind::Phi => self.eval_table_or(x, |a, v| a.phi_raw(v)),
            LutKind::PhiInv => {
                if x < 0.0 {
                    -self.eval_table_or(-x, |a, v| a.phi_inv_raw(v))
                } else {
                    self.eval_table_or(x, |a, v| a.phi_inv_raw(v))
                }
            }
        }
    }

    #[inline]
    fn eval_table_or(&self, x: f64, exact: impl Fn(&Algebra, f64) -> f64) -> f64 {
        if x > self.x_max {
            return exact(&self.algebra, x);
        }
        let pos = x * self.inv_step;
        let cell = (pos as usize).min(self.samples.len() - 2);
        let t = pos - cell as f64;
        self.samples[cell] * (1.0 - t) + self.samples[cell + 1] * t
    }

    /// Measured worst-case interpolation error over the tabulated range.
    pub fn max_abs_error(&self) -> f64 {
        self.max_abs_error
    }

    pub fn resolution(&self) -> usize {
        self.samples.len()
    }

    pub fn kind(&self) -> LutKind {
        self.kind
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }
}
