//! Dense f64 raster containers: single-channel planes, RGB images in the
//! clamped unit domain, and linear irradiance maps.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImageError {
    #[error("buffer length {len} does not match {width}x{height}x{channels}")]
    BufferLength { len: usize, width: usize, height: usize, channels: usize },
    #[error("dimensions {got_w}x{got_h} do not match expected {want_w}x{want_h}")]
    DimensionMismatch { want_w: usize, want_h: usize, got_w: usize, got_h: usize },
    #[error("image dimensions must be non-zero")]
    EmptyDimensions,
}

/// Single-channel plane, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Plane { width, height, data: vec![0.0; width * height] }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Plane { width, height, data: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane { width, height, data }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        if data.len() != width * height {
            return Err(ImageError::BufferLength { len: data.len(), width, height, channels: 1 });
        }
        Ok(Plane { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_dims(&self, other: &Plane) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Maps every sample through `f` in place.
    pub fn map_in_place(&mut self, f: impl Fn(f64) -> f64 + Sync) {
        use rayon::prelude::*;
        self.data.par_chunks_mut(4096).for_each(|chunk| {
            for v in chunk {
                *v = f(*v);
            }
        });
    }
}

/// RGB image, interleaved row-major samples in `[0, PIXEL_MAX]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// Per-channel linear irradiance, interleaved row-major, non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

macro_rules! rgb_container {
    ($ty:ident) => {
        impl $ty {
            pub fn new(width: usize, height: usize) -> Self {
                $ty { width, height, data: vec![0.0; width * height * 3] }
            }

            pub fn from_fn(
                width: usize,
                height: usize,
                mut f: impl FnMut(usize, usize) -> [f64; 3],
            ) -> Self {
                let mut data = Vec::with_capacity(width * height * 3);
                for y in 0..height {
                    for x in 0..width {
                        data.extend_from_slice(&f(x, y));
                    }
                }
                $ty { width, height, data }
            }

            pub fn from_vec(
                width: usize,
                height: usize,
                data: Vec<f64>,
            ) -> Result<Self, ImageError> {
                if data.len() != width * height * 3 {
                    return Err(ImageError::BufferLength {
                        len: data.len(),
                        width,
                        height,
                        channels: 3,
                    });
                }
                Ok($ty { width, height, data })
            }

            pub fn width(&self) -> usize {
                self.width
            }

            pub fn height(&self) -> usize {
                self.height
            }

            #[inline]
            pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
                let i = (y * self.width + x) * 3;
                [self.data[i], self.data[i + 1], self.data[i + 2]]
            }

            #[inline]
            pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f64; 3]) {
                let i = (y * self.width + x) * 3;
                self.data[i..i + 3].copy_from_slice(&rgb);
            }

            pub fn data(&self) -> &[f64] {
                &self.data
            }

            pub fn data_mut(&mut self) -> &mut [f64] {
                &mut self.data
            }

            pub fn same_dims(&self, other: &$ty) -> bool {
                self.width == other.width && self.height == other.height
            }

            /// Extracts channel `c` (0..3) as a plane.
            pub fn channel(&self, c: usize) -> Plane {
                assert!(c < 3);
                let data = self.data[c..].iter().step_by(3).copied().collect();
                Plane { width: self.width, height: self.height, data }
            }

            /// Mean of the three channels per pixel.
            pub fn luminance(&self) -> Plane {
                let data = self.data.chunks_exact(3).map(|p| (p[0] + p[1] + p[2]) / 3.0).collect();
                Plane { width: self.width, height: self.height, data }
            }
        }
    };
}

rgb_container!(Image);
rgb_container!(IrradianceMap);

impl Image {
    /// Assembles an image from three equally sized channel planes.
    pub fn from_channels(r: &Plane, g: &Plane, b: &Plane) -> Result<Self, ImageError> {
        if !r.same_dims(g) || !r.same_dims(b) {
            return Err(ImageError::DimensionMismatch {
                want_w: r.width,
                want_h: r.height,
                got_w: g.width.max(b.width),
                got_h: g.height.max(b.height),
            });
        }
        let mut img = Image::new(r.width, r.height);
        for (i, out) in img.data.chunks_exact_mut(3).enumerate() {
            out[0] = r.data[i];
            out[1] = g.data[i];
            out[2] = b.data[i];
        }
        Ok(img)
    }
}

impl IrradianceMap {
    pub fn from_channels(r: &Plane, g: &Plane, b: &Plane) -> Result<Self, ImageError> {
        if !r.same_dims(g) || !r.same_dims(b) {
            return Err(ImageError::DimensionMismatch {
                want_w: r.width,
                want_h: r.height,
                got_w: g.width.max(b.width),
                got_h: g.height.max(b.height),
            });
        }
        let mut map = IrradianceMap::new(r.width, r.height);
        for (i, out) in map.data.chunks_exact_mut(3).enumerate() {
            out[0] = r.data[i];
            out[1] = g.data[i];
            out[2] = b.data[i];
        }
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_roundtrip() {
        let mut p = Plane::new(4, 3);
        p.set(2, 1, 0.5);
        assert_eq!(p.get(2, 1), 0.5);
        assert_eq!(p.get(0, 0), 0.0);
        assert!(Plane::from_vec(4, 3, vec![0.0; 11]).is_err());
    }

    #[test]
    fn channel_extraction_and_reassembly() {
        let img = Image::from_fn(3, 2, |x, y| [x as f64, y as f64, 0.25]);
        let r = img.channel(0);
        let g = img.channel(1);
        let b = img.channel(2);
        assert_eq!(r.get(2, 1), 2.0);
        assert_eq!(g.get(2, 1), 1.0);
        assert_eq!(b.get(0, 0), 0.25);
        let back = Image::from_channels(&r, &g, &b).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn luminance_is_channel_mean() {
        let img = Image::from_fn(2, 2, |_, _| [0.3, 0.6, 0.9]);
        let lum = img.luminance();
        assert!((lum.get(1, 1) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn mismatched_channels_rejected() {
        let a = Plane::new(2, 2);
        let b = Plane::new(3, 2);
        assert!(Image::from_channels(&a, &a, &b).is_err());
    }
}
