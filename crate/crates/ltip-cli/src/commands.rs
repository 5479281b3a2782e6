//! Subcommand execution.
//!
//! Exit codes: 0 success, 1 input error, 2 verification failure, 3 internal
//! error. Input errors cover everything a caller can fix (files, flags,
//! config values); internal errors are states the tool should never reach.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ltip::fusion::{fuse, FusionConfig, FusionError};
use ltip::image::{Image, IrradianceMap};
use ltip::irradiance::{merge_exposures, recover_irradiance, verify_equivalence, ExposedFrame};
use ltip::metrics::{quality_report, NaturalnessParams, QualityReport};
use serde::Serialize;

use crate::args::{Cli, Command, CrfArgs, FuseArgs, IrradianceArgs, MetricsArgs, VerifyArgs};
use crate::config::{resolve, ConfigEcho, Overrides, Resolved};
use crate::imgio;

pub struct CliError {
    pub code: i32,
    pub message: String,
}

fn input_err(e: anyhow::Error) -> CliError {
    CliError { code: 1, message: format!("{e:#}") }
}

fn internal_err(e: anyhow::Error) -> CliError {
    CliError { code: 3, message: format!("{e:#}") }
}

pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Fuse(args) => run_fuse(args),
        Command::Irradiance(args) => run_irradiance(args),
        Command::Verify(args) => run_verify(args),
        Command::Metrics(args) => run_metrics(args),
        Command::Crf(args) => run_crf(args),
    }
}

fn decode_bracket(inputs: &[PathBuf]) -> Result<(Vec<PathBuf>, Vec<Image>), CliError> {
    let paths = imgio::expand_inputs(inputs).map_err(input_err)?;
    let frames = imgio::decode_frames(&paths).map_err(input_err)?;
    Ok((paths, frames))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let json =
        serde_json::to_string_pretty(value).context("serializing report").map_err(internal_err)?;
    fs::write(path, json + "\n")
        .with_context(|| format!("writing {}", path.display()))
        .map_err(input_err)
}

#[derive(Serialize)]
struct FuseReport {
    command: &'static str,
    inputs: Vec<String>,
    output: String,
    config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    quality: Option<QualityReport>,
}

/// Loads the reference irradiance for quality scoring: a float map directly,
/// or an LDR baseline carried through the model's own response inverse.
fn reference_map(
    resolved: &Resolved,
    baseline: Option<&Image>,
    hdr: Option<&PathBuf>,
) -> Result<Option<IrradianceMap>, CliError> {
    if let Some(path) = hdr {
        return Ok(Some(imgio::read_map(path).map_err(input_err)?));
    }
    Ok(baseline.map(|img| {
        let frame = ExposedFrame::new(img.clone(), 1.0).expect("unit time is valid");
        recover_irradiance(&frame, resolved.algebra)
    }))
}

fn run_fuse(args: FuseArgs) -> Result<i32, CliError> {
    let resolved = resolve(
        &args.common,
        &Overrides {
            weights: Some(&args.weights),
            mode: args.mode,
            levels: args.levels,
            lut: args.lut,
            lut_resolution: args.lut_resolution,
            ..Overrides::default()
        },
    )
    .map_err(input_err)?;
    let (paths, frames) = decode_bracket(&args.input)?;

    let mut config = FusionConfig {
        algebra: resolved.algebra,
        mode: resolved.mode,
        levels: resolved.levels,
        weights: resolved.weights,
        use_lut: resolved.lut,
        lut_resolution: resolved.lut_resolution,
    };
    let fused = match fuse(&frames, &config) {
        Ok(image) => image,
        Err(FusionError::Lut(e)) => {
            eprintln!("warning: {e}; falling back to direct evaluation");
            config.use_lut = false;
            fuse(&frames, &config).context("fusing bracket").map_err(internal_err)?
        }
        Err(e) => return Err(internal_err(anyhow::Error::new(e).context("fusing bracket"))),
    };
    imgio::encode_output(&args.out, &fused).map_err(input_err)?;

    if let Some(report_path) = &args.report {
        let baseline = match &args.baseline {
            Some(p) => Some(imgio::decode_image(p).map_err(input_err)?),
            None => None,
        };
        let map = reference_map(&resolved, baseline.as_ref(), args.hdr.as_ref())?;
        let quality = match &map {
            Some(map) => Some(
                quality_report(
                    &fused,
                    map,
                    baseline.as_ref(),
                    &resolved.quality,
                    &NaturalnessParams::default(),
                )
                .context("scoring fused output")
                .map_err(input_err)?,
            ),
            None => None,
        };
        let report = FuseReport {
            command: "fuse",
            inputs: paths.iter().map(|p| p.display().to_string()).collect(),
            output: args.out.display().to_string(),
            config: resolved.echo(),
            quality,
        };
        write_json(report_path, &report)?;
    }
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn run_irradiance(args: IrradianceArgs) -> Result<i32, CliError> {
    let resolved =
        resolve(&args.common, &Overrides { weights: Some(&args.weights), ..Overrides::default() })
            .map_err(input_err)?;
    let (_, frames) = decode_bracket(&args.input)?;
    let times = match &args.times {
        Some(path) => imgio::read_times(path, frames.len()).map_err(input_err)?,
        None => vec![1.0; frames.len()],
    };
    let exposed: Vec<ExposedFrame> = frames
        .into_iter()
        .zip(times)
        .map(|(image, t)| ExposedFrame::new(image, t))
        .collect::<Result<_, _>>()
        .context("pairing frames with exposure times")
        .map_err(input_err)?;
    let merged = merge_exposures(&exposed, resolved.algebra, &resolved.weights)
        .context("merging exposures")
        .map_err(internal_err)?;
    imgio::write_map(&args.out, &merged).map_err(input_err)?;
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn run_verify(args: VerifyArgs) -> Result<i32, CliError> {
    let resolved = resolve(
        &args.common,
        &Overrides { weights: Some(&args.weights), tol: args.tol, ..Overrides::default() },
    )
    .map_err(input_err)?;
    let (_, frames) = decode_bracket(&args.input)?;
    let exposed: Vec<ExposedFrame> = frames
        .into_iter()
        .map(|image| ExposedFrame::new(image, 1.0).expect("unit time is valid"))
        .collect();
    let drift = verify_equivalence(&exposed, resolved.algebra, &resolved.weights)
        .context("comparing fusion routes")
        .map_err(internal_err)?;
    let pass = drift <= resolved.tol;
    println!(
        "max difference {drift:.3e} against tolerance {:.1e}: {}",
        resolved.tol,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 2 })
}

#[derive(Serialize)]
struct MetricsReport {
    command: &'static str,
    test: String,
    reference: String,
    config: ConfigEcho,
    quality: QualityReport,
}

fn run_metrics(args: MetricsArgs) -> Result<i32, CliError> {
    let resolved = resolve(&args.common, &Overrides::default()).map_err(input_err)?;
    let test = imgio::decode_image(&args.test).map_err(input_err)?;
    let baseline = match &args.baseline {
        Some(p) => Some(imgio::decode_image(p).map_err(input_err)?),
        None => None,
    };
    let map = reference_map(&resolved, baseline.as_ref(), args.hdr.as_ref())?
        .expect("clap guarantees a reference");
    let quality = quality_report(
        &test,
        &map,
        baseline.as_ref(),
        &resolved.quality,
        &NaturalnessParams::default(),
    )
    .context("scoring test image")
    .map_err(input_err)?;
    println!("s {:.6}  n {:.6}  q {:.6}", quality.structural, quality.naturalness, quality.quality);
    let reference = args
        .baseline
        .as_ref()
        .or(args.hdr.as_ref())
        .expect("clap guarantees a reference")
        .display()
        .to_string();
    let report = MetricsReport {
        command: "metrics",
        test: args.test.display().to_string(),
        reference,
        config: resolved.echo(),
        quality,
    };
    write_json(&args.report, &report)?;
    Ok(0)
}

#[derive(Serialize)]
struct CurveFit {
    name: String,
    kind: String,
    gain: f64,
    rmse: f64,
}

#[derive(Serialize)]
struct CrfReport {
    command: &'static str,
    database: String,
    config: ConfigEcho,
    curves: Vec<CurveFit>,
    best: CurveFit,
    average: CurveFit,
}

fn run_crf(args: CrfArgs) -> Result<i32, CliError> {
    let resolved = resolve(&args.common, &Overrides::default()).map_err(input_err)?;
    let db = ltip::crf::read_database(&args.dorf)
        .with_context(|| format!("reading {}", args.dorf.display()))
        .map_err(input_err)?;
    for warning in &db.warnings {
        eprintln!("warning: {warning}");
    }

    let fit_one = |curve: &ltip::crf::CrfCurve| -> Result<CurveFit> {
        let fit = ltip::crf::fit_gain(curve, resolved.algebra)
            .with_context(|| format!("fitting {:?}", curve.name))?;
        Ok(CurveFit {
            name: curve.name.clone(),
            kind: curve.kind.clone(),
            gain: fit.gain,
            rmse: fit.rmse,
        })
    };
    let curves: Vec<CurveFit> =
        db.curves.iter().map(fit_one).collect::<Result<_>>().map_err(input_err)?;
    let (best_idx, _) = ltip::crf::best_match(&db.curves, resolved.algebra)
        .context("ranking curves")
        .map_err(internal_err)?;
    let average = ltip::crf::average_curve(&db.curves, 1024)
        .and_then(|c| ltip::crf::fit_gain(&c, resolved.algebra).map(|f| (c, f)))
        .map(|(c, f)| CurveFit { name: c.name, kind: c.kind, gain: f.gain, rmse: f.rmse })
        .context("fitting the average curve")
        .map_err(internal_err)?;

    let best = &curves[best_idx];
    println!(
        "best match {:?}: gain {:.6}, rmse {:.3e} ({} curves)",
        best.name,
        best.gain,
        best.rmse,
        curves.len()
    );
    let report = CrfReport {
        command: "crf",
        database: args.dorf.display().to_string(),
        config: resolved.echo(),
        best: CurveFit {
            name: best.name.clone(),
            kind: best.kind.clone(),
            gain: best.gain,
            rmse: best.rmse,
        },
        curves,
        average,
    };
    write_json(&args.report, &report)?;
    Ok(0)
}
