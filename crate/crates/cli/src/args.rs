//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcbfire::{BinarizeMethod, DetectionFormat, SubtractMode};

#[derive(Debug, Parser)]
#[command(name = "pcbfire", version, about = "Missing-component inspection for assembled PCBs")]
pub struct Cli {
    /// TOML file with flag defaults (flags win over the file)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare a test board against its design and report missing components.
    ///
    /// Exit status: 0 when nothing is missing, 2 when missing components were
    /// found, 1 on error.
    Inspect(InspectArgs),
    /// Build test images with k components erased, plus ground truth.
    Inject(InjectArgs),
    /// Score predictions against ground truth per component class.
    Eval(EvalArgs),
    /// Apply per-class non-maximum suppression to a detections file.
    Nms(NmsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Darknet,
    Json,
}

impl From<FormatArg> for DetectionFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Darknet => DetectionFormat::Darknet,
            FormatArg::Json => DetectionFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubtractArg {
    Saturating,
    Absolute,
}

impl From<SubtractArg> for SubtractMode {
    fn from(m: SubtractArg) -> Self {
        match m {
            SubtractArg::Saturating => SubtractMode::Saturating,
            SubtractArg::Absolute => SubtractMode::Absolute,
        }
    }
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in 0.0..=1.0"))
    }
}

fn parse_binarize(s: &str) -> Result<BinarizeMethod, String> {
    s.parse().map_err(|e: pcbfire::Error| e.to_string())
}

fn parse_min_pixels(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(_) => Err(format!("{s:?} is not a positive integer")),
    }
}

/// `WxH`
fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad width {w:?}"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad height {h:?}"))?;
    if w == 0 || h == 0 {
        return Err("size must be positive".into());
    }
    Ok((w, h))
}

/// `X,Y,W,H`
fn parse_rect(s: &str) -> Result<pcbfire::BBox, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err("expected X,Y,W,H".into());
    }
    let x: i32 = parts[0].parse().map_err(|_| "bad X")?;
    let y: i32 = parts[1].parse().map_err(|_| "bad Y")?;
    let w: u32 = parts[2].parse().map_err(|_| "bad W")?;
    let h: u32 = parts[3].parse().map_err(|_| "bad H")?;
    pcbfire::BBox::new(x, y, w, h).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    /// Design (reference) board image, PNG or PGM
    pub design: PathBuf,
    /// Test board image, pixel-aligned with the design
    pub test: PathBuf,
    /// Detections on the design image (.json or darknet .txt)
    pub detections: PathBuf,

    /// Detections file format [default: from extension]
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Subtraction of test from design [default: saturating]
    #[arg(long, value_enum)]
    pub subtract_mode: Option<SubtractArg>,

    /// Diff pixels a box needs before it is flagged [default: 1]
    #[arg(long, value_parser = parse_min_pixels, value_name = "N")]
    pub min_diff_pixels: Option<usize>,

    /// Input binarization: `mean` or a fixed 0-255 level [default: mean]
    #[arg(long, value_parser = parse_binarize, value_name = "mean|N")]
    pub binarize_threshold: Option<BinarizeMethod>,

    /// Run NMS over the detections before matching
    #[arg(long)]
    pub nms: bool,

    /// NMS IoU threshold; a box is suppressed only when IoU > threshold [default: 0.45]
    #[arg(long, value_parser = parse_unit, value_name = "F")]
    pub iou_threshold: Option<f64>,

    /// NMS minimum confidence [default: 0.25]
    #[arg(long, value_parser = parse_unit, value_name = "F")]
    pub score_threshold: Option<f64>,

    /// Write the fault report JSON here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Write the test image with missing components outlined (PNG)
    #[arg(long, value_name = "PATH")]
    pub annotate: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InjectArgs {
    /// Board image to erase components from
    pub image: PathBuf,
    /// Detections on that image
    pub detections: PathBuf,

    /// Components erased per generated image
    #[arg(long, short)]
    pub k: usize,

    /// Seed for combination sampling [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory
    #[arg(long, alias = "out-dir", value_name = "DIR")]
    pub out: PathBuf,

    /// Detections file format [default: from extension]
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Binarization used to recognise bare board [default: mean]
    #[arg(long, value_parser = parse_binarize, value_name = "mean|N")]
    pub binarize_threshold: Option<BinarizeMethod>,

    /// Take patches from this bare rectangle instead of scanning for one
    #[arg(long, value_parser = parse_rect, value_name = "X,Y,W,H")]
    pub patch_region: Option<pcbfire::BBox>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Predicted detections: detections JSON or an `inspect` report
    pub predictions: PathBuf,
    /// Ground-truth detections JSON (or an `inspect` report)
    pub truth: PathBuf,

    /// Minimum IoU for a prediction to match a truth box [default: 0.5]
    #[arg(long, value_parser = parse_unit, value_name = "F")]
    pub iou_threshold: Option<f64>,

    /// Write the evaluation JSON here
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NmsArgs {
    /// Detections file (.json or darknet .txt)
    pub detections: PathBuf,

    /// Detections file format [default: from extension]
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Image size for darknet input, e.g. 640x480
    #[arg(long, value_parser = parse_size, value_name = "WxH")]
    pub image_size: Option<(u32, u32)>,

    /// Suppress a box only when its IoU with a kept box is > threshold;
    /// 1.0 keeps everything, including exact duplicates [default: 0.45]
    #[arg(long, value_parser = parse_unit, value_name = "F")]
    pub iou_threshold: Option<f64>,

    /// Drop boxes below this confidence [default: 0.25]
    #[arg(long, value_parser = parse_unit, value_name = "F")]
    pub score_threshold: Option<f64>,

    /// Write the filtered detections JSON here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
