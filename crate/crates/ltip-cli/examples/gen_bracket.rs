//! Generates a synthetic exposure bracket for trying out the tools.
//!
//! The scene is a bright checkerboard plateau with strong block edges, mild
//! chroma variation, and a fully clipped circular highlight. Each frame is
//! the scene irradiance scaled by an exposure time and pushed through the
//! rational response curve, which is exactly the capture model the
//! `irradiance` and `verify` subcommands invert.
//!
//! Usage: `cargo run --example gen_bracket -- <out-dir> [plateau]`

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use ltip::algebra::{clamp_pixel, Algebra};
use ltip::image::Image;

const RATIOS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

fn scene_irradiance(w: usize, h: usize, plateau: f64) -> Vec<[f64; 3]> {
    let mut scene = Vec::with_capacity(w * h);
    let (cy, cx, r) = (h as f64 / 2.0, w as f64 / 4.0, 10.0);
    for y in 0..h {
        for x in 0..w {
            let checker = (y / 8 + x / 8) % 2 == 1;
            let mut base = if checker { 1.0 } else { plateau };
            let (dy, dx) = (y as f64 - cy, x as f64 - cx);
            if dy * dy + dx * dx < r * r {
                base = 1e8;
            }
            scene.push([
                base * (1.0 + 0.2 * (x as f64 / 5.0).sin()),
                base,
                base * (1.0 - 0.2 * (y as f64 / 7.0).cos()),
            ]);
        }
    }
    scene
}

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let out_dir = PathBuf::from(args.next().context("usage: gen_bracket <out-dir> [plateau]")?);
    // Keep the default plateau low enough that the longest exposure encodes it
    // just under code 255. Then the only clipped pixels in the frames are the
    // highlight disk, which is clipped in every frame; codes at 255 decode to
    // the top of the pixel range, where the log-domain transform is enormous,
    // so a plateau that quantizes to 255 would drag whole blend regions into
    // saturation and muddy the comparison the bracket is meant to show.
    let plateau: f64 = match args.next() {
        Some(s) => s.parse().context("plateau must be a number")?,
        None => 80.0,
    };
    fs::create_dir_all(&out_dir)?;

    let (w, h) = (128usize, 96usize);
    let scene = scene_irradiance(w, h, plateau);
    let response = Algebra::Ltip;

    let mut times = String::new();
    for (i, t) in RATIOS.iter().enumerate() {
        let frame = Image::from_fn(w, h, |x, y| {
            scene[y * w + x].map(|e| clamp_pixel(response.phi_inv_extended(e * t)))
        });
        let bytes: Vec<u8> =
            frame.data().iter().map(|&v| (v * 255.0 + 0.5).floor() as u8).collect();
        let path = out_dir.join(format!("frame_{i}.png"));
        image::RgbImage::from_raw(w as u32, h as u32, bytes)
            .expect("buffer matches dimensions")
            .save(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        times.push_str(&format!("{t}\n"));
    }
    fs::write(out_dir.join("times.txt"), times)?;
    println!("wrote {} frames and times.txt to {}", RATIOS.len(), out_dir.display());
    Ok(())
}
