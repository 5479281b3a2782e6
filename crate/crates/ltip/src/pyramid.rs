//! Separable binomial image pyramids. Band-pass stacks hold the difference
//! between adjacent low-pass levels plus the final residual, so collapsing
//! telescopes back to the original plane exactly (up to round-off) whatever
//! the kernel does at borders.

use rayon::prelude::*;

use crate::image::Plane;

/// 5-tap binomial smoothing kernel, mass 1.
const KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Default level count for a given base size: one less than the dyadic depth
/// of the short side, never below one.
pub fn auto_levels(width: usize, height: usize) -> usize {
    let short = width.min(height).max(1);
    let depth = (usize::BITS - 1 - short.leading_zeros()) as usize; // floor(log2)
    depth.saturating_sub(1).max(1)
}

fn blur_rows(src: &Plane) -> Plane {
    let (w, h) = (src.width(), src.height());
    let mut out = Plane::new(w, h);
    let s = src.data();
    out.data_mut().par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let base = y * w;
        for (x, out_px) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, coef) in KERNEL.iter().enumerate() {
                let xi = (x + k).saturating_sub(2).min(w - 1);
                acc += coef * s[base + xi];
            }
            *out_px = acc;
        }
    });
    out
}

fn blur_cols(src: &Plane) -> Plane {
    let (w, h) = (src.width(), src.height());
    let mut out = Plane::new(w, h);
    let s = src.data();
    out.data_mut().par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, coef) in KERNEL.iter().enumerate() {
                let yi = (y + k).saturating_sub(2).min(h - 1);
                acc += coef * s[yi * w + x];
            }
            row[x] = acc;
        }
    });
    out
}

/// Binomial blur with replicated borders; preserves constants.
pub fn blur(src: &Plane) -> Plane {
    blur_cols(&blur_rows(src))
}

/// Blur then decimate by two per axis (ceiling sizes, so odd extents keep
/// their last sample's phase).
pub fn downsample(src: &Plane) -> Plane {
    let low = blur(src);
    let (w, h) = (src.width(), src.height());
    let (dw, dh) = (w.div_ceil(2), h.div_ceil(2));
    Plane::from_fn(dw, dh, |x, y| low.get((x * 2).min(w - 1), (y * 2).min(h - 1)))
}

/// Zero-insert to the exact target extents, then blur with the kernel scaled
/// by two per axis to restore unit mass over the interleaved zeros.
pub fn upsample(src: &Plane, target_w: usize, target_h: usize) -> Plane {
    debug_assert_eq!(target_w.div_ceil(2), src.width());
    debug_assert_eq!(target_h.div_ceil(2), src.height());
    let mut z = Plane::new(target_w, target_h);
    for y in 0..src.height() {
        for x in 0..src.width() {
            z.set((x * 2).min(target_w - 1), (y * 2).min(target_h - 1), src.get(x, y));
        }
    }
    let mut out = blur_cols(&blur_rows(&z));
    out.map_in_place(|v| v * 4.0);
    out
}

/// Successively smoothed and decimated copies; `levels` entries, full
/// resolution first.
pub fn gaussian_pyramid(base: &Plane, levels: usize) -> Vec<Plane> {
    assert!(levels >= 1);
    let mut out = Vec::with_capacity(levels);
    out.push(base.clone());
    for _ in 1..levels {
        let next = downsample(out.last().expect("non-empty"));
        out.push(next);
    }
    out
}

/// `levels - 1` difference bands (fine to coarse) plus the residual low-pass
/// as the last entry. With `levels == 1` the stack is just the input plane.
pub fn bandpass_pyramid(base: &Plane, levels: usize) -> Vec<Plane> {
    let gauss = gaussian_pyramid(base, levels);
    let mut out = Vec::with_capacity(levels);
    for i in 0..levels - 1 {
        let up = upsample(&gauss[i + 1], gauss[i].width(), gauss[i].height());
        let mut band = gauss[i].clone();
        band.data_mut().iter_mut().zip(up.data()).for_each(|(b, u)| *b -= u);
        out.push(band);
    }
    out.push(gauss[levels - 1].clone());
    out
}

/// Folds a band-pass stack back into a plane, coarsest first.
pub fn collapse_pyramid(stack: &[Plane]) -> Plane {
    assert!(!stack.is_empty());
    let mut acc = stack[stack.len() - 1].clone();
    for band in stack[..stack.len() - 1].iter().rev() {
        let up = upsample(&acc, band.width(), band.height());
        acc = band.clone();
        acc.data_mut().iter_mut().zip(up.data()).for_each(|(a, u)| *a += u);
    }
    acc
}
