//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ltip::fusion::LevelSpec;

#[derive(Debug, Parser)]
#[command(
    name = "ltip-hdr",
    version,
    about = "HDR exposure fusion and merging under saturation-free pixel arithmetic"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse an exposure bracket into one display-ready image
    Fuse(FuseArgs),
    /// Merge a bracket into a floating-point irradiance map
    Irradiance(IrradianceArgs),
    /// Check that direct fusion and the irradiance route agree on a bracket
    Verify(VerifyArgs),
    /// Score a tonemapped image against a reference
    Metrics(MetricsArgs),
    /// Fit the pixel transform against a measured response-curve database
    Crf(CrfArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    /// Rational transform x / (1 - x)
    Ltip,
    /// Classical logarithmic transform -ln(1 - x)
    Lip,
    /// Rational transform of x^m, tuned by --m
    Parametric,
    /// Ordinary arithmetic (comparison baseline)
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Pyramid,
    Flat,
}

pub fn parse_levels(s: &str) -> Result<LevelSpec, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(LevelSpec::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(LevelSpec::Fixed(n)),
        _ => Err(format!("expected 'auto' or a positive integer, got {s:?}")),
    }
}

/// Options shared by every subcommand: the config file and the pixel model.
#[derive(Debug, Args)]
pub struct CommonOpts {
    /// Flat key=value file supplying defaults; explicit flags override it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Pixel arithmetic model
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,

    /// Transform exponent for the parametric model
    #[arg(long, value_name = "F")]
    pub m: Option<f64>,
}

/// Weight-map tuning shared by the fusing subcommands.
#[derive(Debug, Args)]
pub struct WeightOpts {
    /// Well-exposedness target
    #[arg(long, value_name = "F")]
    pub mu: Option<f64>,

    /// Well-exposedness variance
    #[arg(long, value_name = "F")]
    pub sigma2: Option<f64>,

    /// Contrast exponent
    #[arg(long, value_name = "F")]
    pub wc: Option<f64>,

    /// Saturation exponent
    #[arg(long, value_name = "F")]
    pub ws: Option<f64>,

    /// Well-exposedness exponent
    #[arg(long, value_name = "F")]
    pub we: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Input bracket: a directory of images or the frame files in order
    #[arg(long = "in", value_name = "PATH", num_args = 1.., required = true)]
    pub input: Vec<PathBuf>,

    /// Output image (.png, or .pfm for float passthrough)
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Blend structure
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Pyramid depth: 'auto' or a positive integer
    #[arg(long, value_parser = parse_levels, value_name = "N")]
    pub levels: Option<LevelSpec>,

    /// Evaluate the transform through interpolation tables
    #[arg(long)]
    pub lut: bool,

    /// Table resolution for --lut
    #[arg(long, value_name = "N")]
    pub lut_resolution: Option<usize>,

    /// Write a JSON run report here
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,

    /// Reference rendition: adds quality scores to the report
    #[arg(long, value_name = "FILE", conflicts_with = "hdr")]
    pub baseline: Option<PathBuf>,

    /// Reference irradiance map (.pfm): adds quality scores to the report
    #[arg(long, value_name = "FILE")]
    pub hdr: Option<PathBuf>,

    #[command(flatten)]
    pub weights: WeightOpts,

    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Args)]
pub struct IrradianceArgs {
    /// Input bracket: a directory of images or the frame files in order
    #[arg(long = "in", value_name = "PATH", num_args = 1.., required = true)]
    pub input: Vec<PathBuf>,

    /// Exposure times, one positive decimal per line in frame order
    /// (default: 1.0 for every frame)
    #[arg(long, value_name = "FILE")]
    pub times: Option<PathBuf>,

    /// Output irradiance map (.pfm)
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    #[command(flatten)]
    pub weights: WeightOpts,

    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Input bracket: a directory of images or the frame files in order
    #[arg(long = "in", value_name = "PATH", num_args = 1.., required = true)]
    pub input: Vec<PathBuf>,

    /// Largest acceptable per-sample difference between the two routes
    #[arg(long, value_name = "F")]
    pub tol: Option<f64>,

    #[command(flatten)]
    pub weights: WeightOpts,

    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Image under assessment
    #[arg(long, value_name = "FILE")]
    pub test: PathBuf,

    /// Reference rendition (also serves as the structural reference)
    #[arg(long, value_name = "FILE", required_unless_present = "hdr", conflicts_with = "hdr")]
    pub baseline: Option<PathBuf>,

    /// Reference irradiance map (.pfm)
    #[arg(long, value_name = "FILE")]
    pub hdr: Option<PathBuf>,

    /// Write the JSON quality report here
    #[arg(long, value_name = "FILE")]
    pub report: PathBuf,

    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Debug, Args)]
pub struct CrfArgs {
    /// Response-curve database (text records)
    #[arg(long, value_name = "FILE")]
    pub dorf: PathBuf,

    /// Write the JSON fit report here
    #[arg(long, value_name = "FILE")]
    pub report: PathBuf,

    #[command(flatten)]
    pub common: CommonOpts,
}
