//! HDR exposure merging under logarithmic-type pixel arithmetic.
//!
//! Display-referred pixel values live in the half-open interval `[0, 1)`,
//! where `0` is black and values approach `1` toward saturation. Each
//! supported pixel algebra supplies a strictly increasing transform `phi`
//! from that interval onto `[0, inf)` together with its inverse; addition
//! and scaling of pixels are defined by pulling ordinary addition and
//! scaling back through the transform, so the pixel domain is closed under
//! both and saturation is approached asymptotically instead of by clipping.
//!
//! On top of the arithmetic sit the pieces of an HDR merging pipeline:
//!
//! * [`weights`]: per-pixel quality measures (contrast, saturation,
//!   well-exposedness) combined into normalized blend weights.
//! * [`fusion`]: single-scale and multi-scale exposure fusion carried out in
//!   transform space, optionally through interpolation tables ([`lut`]).
//! * [`irradiance`]: irradiance recovery from exposure-timed frames, weighted
//!   merging, tonemapping, and a check that the irradiance route agrees with
//!   direct fusion at unit exposure.
//! * [`crf`]: measured camera response curves and gain fits of the transform
//!   family against them.
//! * [`metrics`]: structural fidelity, statistical naturalness, and combined
//!   quality scores for the results.
//! * [`pfm`]: float-image serialization for irradiance maps.
//!
//! ```
//! use ltip::algebra::Algebra;
//! use ltip::fusion::{fuse, FusionConfig};
//! use ltip::image::Image;
//!
//! let frames: Vec<Image> = (0..3)
//!     .map(|i| {
//!         Image::from_fn(32, 24, |x, y| {
//!             let v = ((x + y + i * 8) % 32) as f64 / 40.0;
//!             [v, v * 0.8, 0.9 - v * 0.5]
//!         })
//!     })
//!     .collect();
//!
//! let fused = fuse(&frames, &FusionConfig::default()).unwrap();
//! assert!(fused.data().iter().all(|&v| (0.0..1.0).contains(&v)));
//!
//! // the arithmetic itself never leaves the pixel domain
//! let bright = Algebra::Ltip.add(0.9, 0.9);
//! assert!(bright < 1.0 && bright > 0.9);
//! ```

pub mod algebra;
pub mod crf;
pub mod fusion;
pub mod image;
pub mod irradiance;
pub mod lut;
pub mod metrics;
pub mod pfm;
pub mod pyramid;
pub mod weights;

pub use algebra::{Algebra, AlgebraError, HvsParams, PixelValue, CLAMP_MARGIN, PIXEL_MAX};
pub use fusion::{fuse, FusionConfig, FusionError, FusionMode, LevelSpec};
pub use image::{Image, ImageError, IrradianceMap, Plane};
pub use irradiance::{ExposedFrame, IrradianceError};
pub use metrics::{quality_report, QualityReport, QualityWeights};
pub use weights::{WeightParams, WeightStack};
