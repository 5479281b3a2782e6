//! Helpers shared by the integration test targets.

#![allow(dead_code)] // each test target uses its own subset

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ltip::algebra::{clamp_pixel, Algebra};
use ltip::image::{Image, IrradianceMap};
use rand::Rng;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ltip-hdr")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawning the tool")
}

pub fn run_with_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawning the tool")
}

pub fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Bright checkerboard plateau with chroma variation and a clipped circular
/// highlight; block edges give the blend pyramids real structure to overshoot
/// on, the highlight keeps every exposure saturated somewhere.
pub fn scene_irradiance(w: usize, h: usize, plateau: f64) -> IrradianceMap {
    let (cy, cx, r) = (h as f64 / 2.0, w as f64 / 4.0, 10.0);
    IrradianceMap::from_fn(w, h, |x, y| {
        let checker = (y / 8 + x / 8) % 2 == 1;
        let mut base = if checker { 1.0 } else { plateau };
        let (dy, dx) = (y as f64 - cy, x as f64 - cx);
        if dy * dy + dx * dx < r * r {
            base = 1e8;
        }
        [
            base * (1.0 + 0.2 * (x as f64 / 5.0).sin()),
            base,
            base * (1.0 - 0.2 * (y as f64 / 7.0).cos()),
        ]
    })
}

/// Captures the scene at one exposure through the rational response curve.
pub fn simulated_frame(scene: &IrradianceMap, t: f64) -> Image {
    let response = Algebra::Ltip;
    Image::from_fn(scene.width(), scene.height(), |x, y| {
        scene.pixel(x, y).map(|e| clamp_pixel(response.phi_inv_extended(e * t)))
    })
}

pub fn simulated_bracket(scene: &IrradianceMap, ratios: &[f64]) -> Vec<Image> {
    ratios.iter().map(|&t| simulated_frame(scene, t)).collect()
}

/// 8-bit PNG with the tool's own quantization rule.
pub fn write_png(path: &Path, image: &Image) {
    let bytes: Vec<u8> = image.data().iter().map(|&v| (v * 255.0 + 0.5).floor() as u8).collect();
    image::RgbImage::from_raw(image.width() as u32, image.height() as u32, bytes)
        .expect("buffer matches dimensions")
        .save(path)
        .expect("writing test png");
}

pub fn write_bracket(dir: &Path, frames: &[Image]) -> Vec<PathBuf> {
    frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let path = dir.join(format!("frame_{i}.png"));
            write_png(&path, frame);
            path
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random frame with smooth structure plus noise, staying inside [0, 1).
pub fn random_frame(rng: &mut impl Rng, w: usize, h: usize) -> Image {
    let (fx, fy) = (rng.gen_range(0.02..0.2), rng.gen_range(0.02..0.2));
    let (px, py) = (rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0));
    let gain = rng.gen_range(0.3..1.0);
    Image::from_fn(w, h, |x, y| {
        let wave = 0.5 + 0.45 * (x as f64 * fx + px).sin() * (y as f64 * fy + py).cos();
        [
            clamp_pixel(gain * wave + 0.04 * rng.gen::<f64>()),
            clamp_pixel(gain * (1.0 - wave) + 0.04 * rng.gen::<f64>()),
            clamp_pixel(gain * wave * wave + 0.04 * rng.gen::<f64>()),
        ]
    })
}

pub fn random_bracket(rng: &mut impl Rng, n: usize, w: usize, h: usize) -> Vec<Image> {
    (0..n).map(|_| random_frame(rng, w, h)).collect()
}
