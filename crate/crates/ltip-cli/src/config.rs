//! Layered run configuration: built-in defaults, then a flat key=value file,
//! then explicit flags, later layers winning.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use ltip::algebra::Algebra;
use ltip::fusion::{FusionMode, LevelSpec};
use ltip::lut::DEFAULT_RESOLUTION;
use ltip::metrics::QualityWeights;
use ltip::weights::WeightParams;
use serde::Serialize;

use crate::args::{parse_levels, CommonOpts, ModeArg, ModelArg, WeightOpts};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Values read from a config file; every field optional.
#[derive(Debug, Default)]
pub struct FileConfig {
    model: Option<ModelArg>,
    m: Option<f64>,
    mode: Option<ModeArg>,
    levels: Option<LevelSpec>,
    mu: Option<f64>,
    sigma2: Option<f64>,
    wc: Option<f64>,
    ws: Option<f64>,
    we: Option<f64>,
    lut: Option<bool>,
    lut_resolution: Option<usize>,
    tol: Option<f64>,
    quality_a: Option<f64>,
    quality_alpha: Option<f64>,
    quality_beta: Option<f64>,
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => bail!("expected a boolean, got {other:?}"),
    }
}

pub fn load_file(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut cfg = FileConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("line {}: expected key=value, got {raw:?}", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let fail = || format!("line {}: bad value for {key}: {value:?}", lineno + 1);
        match key {
            "model" => {
                cfg.model =
                    Some(ModelArg::from_str(value, true).map_err(|_| anyhow::anyhow!(fail()))?)
            }
            "m" => cfg.m = Some(value.parse().with_context(fail)?),
            "mode" => {
                cfg.mode =
                    Some(ModeArg::from_str(value, true).map_err(|_| anyhow::anyhow!(fail()))?)
            }
            "levels" => {
                cfg.levels =
                    Some(parse_levels(value).map_err(|e| anyhow::anyhow!(e)).with_context(fail)?)
            }
            "mu" => cfg.mu = Some(value.parse().with_context(fail)?),
            "sigma2" => cfg.sigma2 = Some(value.parse().with_context(fail)?),
            "wc" => cfg.wc = Some(value.parse().with_context(fail)?),
            "ws" => cfg.ws = Some(value.parse().with_context(fail)?),
            "we" => cfg.we = Some(value.parse().with_context(fail)?),
            "lut" => cfg.lut = Some(parse_bool(value).with_context(fail)?),
            "lut_resolution" => cfg.lut_resolution = Some(value.parse().with_context(fail)?),
            "tol" => cfg.tol = Some(value.parse().with_context(fail)?),
            "quality_a" => cfg.quality_a = Some(value.parse().with_context(fail)?),
            "quality_alpha" => cfg.quality_alpha = Some(value.parse().with_context(fail)?),
            "quality_beta" => cfg.quality_beta = Some(value.parse().with_context(fail)?),
            other => bail!("line {}: unknown config key {other:?}", lineno + 1),
        }
    }
    Ok(cfg)
}

/// Flag values a subcommand wants folded over the file layer. Subcommands
/// without a flag for some knob leave it `None` and get file/default values.
#[derive(Debug, Default)]
pub struct Overrides<'a> {
    pub weights: Option<&'a WeightOpts>,
    pub mode: Option<ModeArg>,
    pub levels: Option<LevelSpec>,
    pub lut: bool,
    pub lut_resolution: Option<usize>,
    pub tol: Option<f64>,
}

/// The fully layered parameter set a run executes with.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub algebra: Algebra,
    pub model: ModelArg,
    pub m: f64,
    pub mode: FusionMode,
    pub levels: LevelSpec,
    pub weights: WeightParams,
    pub lut: bool,
    pub lut_resolution: usize,
    pub tol: f64,
    pub quality: QualityWeights,
}

pub fn resolve(common: &CommonOpts, over: &Overrides) -> Result<Resolved> {
    let file = match &common.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let flags_w = over.weights;

    let model = common.model.or(file.model).unwrap_or(ModelArg::Ltip);
    let m = common.m.or(file.m).unwrap_or(1.0);
    if !(m.is_finite() && m > 0.0) {
        bail!("transform exponent m must be positive and finite, got {m}");
    }
    let algebra = match model {
        ModelArg::Ltip => Algebra::Ltip,
        ModelArg::Lip => Algebra::ClassicalLip,
        ModelArg::Parametric => Algebra::ParametricLtip { m },
        ModelArg::Real => Algebra::RealBaseline,
    };

    let defaults = WeightParams::default();
    let weights = WeightParams {
        mu: flags_w.and_then(|w| w.mu).or(file.mu).unwrap_or(defaults.mu),
        sigma2: flags_w.and_then(|w| w.sigma2).or(file.sigma2).unwrap_or(defaults.sigma2),
        contrast_exp: flags_w.and_then(|w| w.wc).or(file.wc).unwrap_or(defaults.contrast_exp),
        saturation_exp: flags_w.and_then(|w| w.ws).or(file.ws).unwrap_or(defaults.saturation_exp),
        exposedness_exp: flags_w.and_then(|w| w.we).or(file.we).unwrap_or(defaults.exposedness_exp),
    };
    weights.validate().context("invalid weight parameters")?;

    let qd = QualityWeights::default();
    let quality = QualityWeights {
        a: file.quality_a.unwrap_or(qd.a),
        alpha: file.quality_alpha.unwrap_or(qd.alpha),
        beta: file.quality_beta.unwrap_or(qd.beta),
    };
    quality.validate().context("invalid quality weights")?;

    let mode = match over.mode.or(file.mode).unwrap_or(ModeArg::Pyramid) {
        ModeArg::Pyramid => FusionMode::Pyramid,
        ModeArg::Flat => FusionMode::Flat,
    };

    Ok(Resolved {
        algebra,
        model,
        m,
        mode,
        levels: over.levels.or(file.levels).unwrap_or(LevelSpec::Auto),
        weights,
        lut: over.lut || file.lut.unwrap_or(false),
        lut_resolution: over.lut_resolution.or(file.lut_resolution).unwrap_or(DEFAULT_RESOLUTION),
        tol: over.tol.or(file.tol).unwrap_or(DEFAULT_TOLERANCE),
        quality,
    })
}

/// The resolved parameters as they appear in every JSON report.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub model: &'static str,
    pub m: f64,
    pub mode: &'static str,
    pub levels: String,
    pub mu: f64,
    pub sigma2: f64,
    pub contrast_exp: f64,
    pub saturation_exp: f64,
    pub exposedness_exp: f64,
    pub lut: bool,
    pub lut_resolution: usize,
}

impl Resolved {
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            model: match self.model {
                ModelArg::Ltip => "ltip",
                ModelArg::Lip => "lip",
                ModelArg::Parametric => "parametric",
                ModelArg::Real => "real",
            },
            m: self.m,
            mode: match self.mode {
                FusionMode::Pyramid => "pyramid",
                FusionMode::Flat => "flat",
            },
            levels: match self.levels {
                LevelSpec::Auto => "auto".to_owned(),
                LevelSpec::Fixed(n) => n.to_string(),
            },
            mu: self.weights.mu,
            sigma2: self.weights.sigma2,
            contrast_exp: self.weights.contrast_exp,
            saturation_exp: self.weights.saturation_exp,
            exposedness_exp: self.weights.exposedness_exp,
            lut: self.lut,
            lut_resolution: self.lut_resolution,
        }
    }
}
