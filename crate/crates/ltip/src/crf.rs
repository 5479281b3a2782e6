//! Camera response curves: parsing a line-oriented measurement database and
//! fitting the pixel transform against them.
//!
//! Each record in the database is six non-blank lines: a curve name, a type
//! line, an `I =` marker followed by one line of normalized irradiance
//! samples, then a `B =` marker followed by one line of brightness samples.
//! Malformed records are skipped with a warning instead of failing the whole
//! file.
//!
//! Fitting asks how closely a measured curve is matched by the inverse pixel
//! transform applied to gained irradiance, `B ~ phi_inv(k * I)`, which is the
//! response shape the merging model assumes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::Algebra;

#[derive(Debug, Error)]
pub enum CrfError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("no readable curves in the database")]
    NoCurves,
    #[error("curve needs at least two finite samples")]
    BadSamples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrfCurve {
    pub name: String,
    pub kind: String,
    /// Normalized irradiance sample positions, expected ascending in [0, 1].
    pub irradiance: Vec<f64>,
    /// Normalized brightness responses at those positions.
    pub brightness: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct CrfDatabase {
    pub curves: Vec<CrfCurve>,
    pub warnings: Vec<String>,
}

/// One fitted gain: the scale on irradiance that brings the modeled response
/// closest to the measured curve, with the residual that remains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainFit {
    pub gain: f64,
    pub rmse: f64,
}

fn is_marker(line: &str, letter: char) -> bool {
    let mut chars = line.chars();
    chars.next() == Some(letter) && line.contains('=')
}

fn parse_samples(line: &str) -> Option<Vec<f64>> {
    let values: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
    match values {
        Ok(v) if v.len() >= 2 && v.iter().all(|x| x.is_finite()) => Some(v),
        _ => None,
    }
}

fn try_record(lines: &[&str], at: usize) -> Result<CrfCurve, String> {
    if at + 6 > lines.len() {
        return Err("truncated record".into());
    }
    let name = lines[at];
    if !is_marker(lines[at + 2], 'I') {
        return Err(format!("{name:?}: expected an I = marker"));
    }
    if !is_marker(lines[at + 4], 'B') {
        return Err(format!("{name:?}: expected a B = marker"));
    }
    let irradiance =
        parse_samples(lines[at + 3]).ok_or_else(|| format!("{name:?}: unreadable I samples"))?;
    let brightness =
        parse_samples(lines[at + 5]).ok_or_else(|| format!("{name:?}: unreadable B samples"))?;
    if irradiance.len() != brightness.len() {
        return Err(format!(
            "{name:?}: {} I samples but {} B samples",
            irradiance.len(),
            brightness.len()
        ));
    }
    Ok(CrfCurve { name: name.to_owned(), kind: lines[at + 1].to_owned(), irradiance, brightness })
}

/// Parses a curve database, skipping malformed records with warnings.
/// Errors only when nothing readable remains.
pub fn parse_database(text: &str) -> Result<CrfDatabase, CrfError> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let mut db = CrfDatabase::default();
    let mut i = 0usize;
    while i < lines.len() {
        match try_record(&lines, i) {
            Ok(curve) => {
                db.curves.push(curve);
                i += 6;
            }
            Err(reason) => {
                db.warnings.push(format!("skipping record at line {i}: {reason}"));
                // resync: the next plausible record starts two lines above
                // the next I = marker beyond the one this record claimed
                let next = (i + 3..lines.len())
                    .find(|&j| is_marker(lines[j], 'I'))
                    .map(|j| j - 2)
                    .unwrap_or(lines.len());
                i = next.max(i + 1);
            }
        }
    }
    if db.curves.is_empty() {
        return Err(CrfError::NoCurves);
    }
    Ok(db)
}

pub fn read_database(path: &Path) -> Result<CrfDatabase, CrfError> {
    parse_database(&fs::read_to_string(path)?)
}

fn rmse_at(curve: &CrfCurve, algebra: Algebra, gain: f64) -> f64 {
    let n = curve.irradiance.len() as f64;
    let sum: f64 = curve
        .irradiance
        .iter()
        .zip(&curve.brightness)
        .map(|(&i, &b)| {
            let modeled = algebra.phi_inv_extended(gain * i);
            (modeled - b) * (modeled - b)
        })
        .sum();
    (sum / n).sqrt()
}

/// Fits the gain `k` in `B ~ phi_inv(k * I)` over `k` in `[2^-12, 2^12]`:
/// a coarse sweep in log space followed by a golden-section refinement of
/// the best bracket.
pub fn fit_gain(curve: &CrfCurve, algebra: Algebra) -> Result<GainFit, CrfError> {
    if curve.irradiance.len() < 2
        || curve.irradiance.len() != curve.brightness.len()
        || curve.irradiance.iter().chain(&curve.brightness).any(|v| !v.is_finite())
    {
        return Err(CrfError::BadSamples);
    }

    let objective = |log2k: f64| rmse_at(curve, algebra, log2k.exp2());

    let mut best_e = -12.0f64;
    let mut best = f64::INFINITY;
    let mut e = -12.0f64;
    while e <= 12.0 {
        let r = objective(e);
        if r < best {
            best = r;
            best_e = e;
        }
        e += 0.25;
    }

    let (mut lo, mut hi) = (best_e - 0.25, best_e + 0.25);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..70 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(x2);
        }
    }
    let log2k = 0.5 * (lo + hi);
    let gain = log2k.exp2();
    Ok(GainFit { gain, rmse: rmse_at(curve, algebra, gain) })
}

/// Index and fit of the database curve the transform reproduces best.
pub fn best_match(curves: &[CrfCurve], algebra: Algebra) -> Result<(usize, GainFit), CrfError> {
    let mut best: Option<(usize, GainFit)> = None;
    for (i, curve) in curves.iter().enumerate() {
        let fit = fit_gain(curve, algebra)?;
        if best.is_none_or(|(_, b)| fit.rmse < b.rmse) {
            best = Some((i, fit));
        }
    }
    best.ok_or(CrfError::NoCurves)
}

/// Pointwise average response: every curve is resampled by linear
/// interpolation onto a shared uniform grid and the brightnesses averaged.
pub fn average_curve(curves: &[CrfCurve], grid_len: usize) -> Result<CrfCurve, CrfError> {
    if curves.is_empty() || grid_len < 2 {
        return Err(CrfError::NoCurves);
    }
    let grid: Vec<f64> = (0..grid_len).map(|i| i as f64 / (grid_len - 1) as f64).collect();
    let mut mean = vec![0.0f64; grid_len];
    for curve in curves {
        for (m, &x) in mean.iter_mut().zip(&grid) {
            *m += sample_curve(curve, x);
        }
    }
    for m in &mut mean {
        *m /= curves.len() as f64;
    }
    Ok(CrfCurve {
        name: "average".into(),
        kind: format!("pointwise mean of {} curves", curves.len()),
        irradiance: grid,
        brightness: mean,
    })
}

/// Linear interpolation along a curve, clamped to its end values.
fn sample_curve(curve: &CrfCurve, x: f64) -> f64 {
    let xs = &curve.irradiance;
    let ys = &curve.brightness;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let hi = xs.partition_point(|&v| v < x).max(1);
    let (x0, x1) = (xs[hi - 1], xs[hi]);
    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    ys[hi - 1] + t * (ys[hi] - ys[hi - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_curve(name: &str, gain: f64, algebra: Algebra, n: usize) -> CrfCurve {
        let irradiance: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let brightness = irradiance.iter().map(|&i| algebra.phi_inv_extended(gain * i)).collect();
        CrfCurve { name: name.into(), kind: "synthetic".into(), irradiance, brightness }
    }

    fn render(curves: &[CrfCurve]) -> String {
        let mut out = String::new();
        for c in curves {
            out.push_str(&format!("{}\n{}\nI =\n", c.name, c.kind));
            let i: Vec<String> = c.irradiance.iter().map(|v| v.to_string()).collect();
            let b: Vec<String> = c.brightness.iter().map(|v| v.to_string()).collect();
            out.push_str(&i.join(" "));
            out.push_str("\nB =\n");
            out.push_str(&b.join(" "));
            out.push('\n');
        }
        out
    }

    #[test]
    fn well_formed_database_parses_cleanly() {
        let curves = vec![
            synthetic_curve("alpha", 1.0, Algebra::Ltip, 33),
            synthetic_curve("beta", 2.0, Algebra::Ltip, 17),
        ];
        let db = parse_database(&render(&curves)).unwrap();
        assert_eq!(db.curves.len(), 2);
        assert!(db.warnings.is_empty());
        assert_eq!(db.curves[0].name, "alpha");
        assert_eq!(db.curves[1].irradiance.len(), 17);
        assert_eq!(db.curves[0], curves[0]);
    }

    #[test]
    fn malformed_record_is_skipped_with_warning() {
        let good = synthetic_curve("keeper", 1.5, Algebra::Ltip, 9);
        let text = format!(
            "broken\nmystery type\nI =\n0.0 0.5 oops\nB =\n0.0 0.1 0.2\n{}",
            render(std::slice::from_ref(&good))
        );
        let db = parse_database(&text).unwrap();
        assert_eq!(db.curves.len(), 1);
        assert_eq!(db.curves[0].name, "keeper");
        assert_eq!(db.warnings.len(), 1);
        assert!(db.warnings[0].contains("broken"));
    }

    #[test]
    fn empty_database_is_an_error() {
        assert!(matches!(parse_database(""), Err(CrfError::NoCurves)));
        assert!(matches!(parse_database("just\nnoise\nwith = signs\n"), Err(CrfError::NoCurves)));
    }

    #[test]
    fn gain_recovery_on_synthetic_curves() {
        for algebra in [Algebra::Ltip, Algebra::ClassicalLip] {
            for k in [0.5, 2.0, 5.0] {
                let curve = synthetic_curve("s", k, algebra, 257);
                let fit = fit_gain(&curve, algebra).unwrap();
                assert!((fit.gain - k).abs() <= 1e-3, "{algebra:?} k={k}: got {}", fit.gain);
                assert!(fit.rmse <= 1e-6, "{algebra:?} k={k}: rmse {}", fit.rmse);
            }
        }
    }

    #[test]
    fn rescaling_irradiance_rescales_the_gain() {
        let k = 2.0;
        let mut curve = synthetic_curve("s", k, Algebra::Ltip, 129);
        let c = 4.0;
        for x in &mut curve.irradiance {
            *x *= c;
        }
        let fit = fit_gain(&curve, Algebra::Ltip).unwrap();
        assert!((fit.gain - k / c).abs() <= 1e-6, "got {}", fit.gain);
    }

    #[test]
    fn best_match_prefers_the_model_shape() {
        let inlier = synthetic_curve("model-like", 1.7, Algebra::Ltip, 65);
        let mut gamma = synthetic_curve("gamma-ish", 1.0, Algebra::Ltip, 65);
        for (b, &i) in gamma.brightness.iter_mut().zip(&gamma.irradiance) {
            *b = i.powf(1.0 / 2.2);
        }
        let curves = vec![gamma, inlier];
        let (idx, fit) = best_match(&curves, Algebra::Ltip).unwrap();
        assert_eq!(idx, 1);
        assert!(fit.rmse <= 1e-6);
    }

    #[test]
    fn average_curve_is_the_pointwise_mean() {
        let mut low = synthetic_curve("low", 1.0, Algebra::RealBaseline, 11);
        let mut high = low.clone();
        for b in &mut low.brightness {
            *b = 0.2;
        }
        for b in &mut high.brightness {
            *b = 0.6;
        }
        let mean = average_curve(&[low, high], 11).unwrap();
        for &b in &mean.brightness {
            assert!((b - 0.4).abs() <= 1e-12);
        }
    }

    #[test]
    fn interpolation_clamps_to_curve_ends() {
        let curve = CrfCurve {
            name: "c".into(),
            kind: "t".into(),
            irradiance: vec![0.2, 0.4, 0.8],
            brightness: vec![0.1, 0.3, 0.9],
        };
        assert_eq!(sample_curve(&curve, 0.0), 0.1);
        assert_eq!(sample_curve(&curve, 1.0), 0.9);
        assert!((sample_curve(&curve, 0.3) - 0.2).abs() <= 1e-12);
        assert!((sample_curve(&curve, 0.6) - 0.6).abs() <= 1e-12);
    }
}
