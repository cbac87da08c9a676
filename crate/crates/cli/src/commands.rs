//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pcbfire::detect::{parse_detections_json, DEFAULT_IOU_THRESHOLD, DEFAULT_SCORE_THRESHOLD};
use pcbfire::evalkit::DEFAULT_MATCH_IOU;
use pcbfire::faultgen::{build_test_set, case_file_name, GroundTruth, GroundTruthCase};
use pcbfire::{
    decode_image, encode_image, inspect, load_detections, match_predictions, nms, BareRegion, BareScan, Detection,
    DetectionFormat, DetectionsDocument, EvalReport, FaultReport, ImageDims, ImageFormat, InspectParams, NmsParams,
    PatchFinder, RasterImage, TestSetOptions,
};

use crate::args::{EvalArgs, FormatArg, InjectArgs, InspectArgs, NmsArgs};
use crate::config::Config;
use crate::render::{annotate, encode_rgb_png, ClassColorMap};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Success; for `inspect`, no missing components.
    Clean = 0,
    Error = 1,
    /// `inspect` found missing components.
    FaultsFound = 2,
}

impl Verdict {
    pub fn code(self) -> i32 {
        self as i32
    }
}

pub fn read_image(path: &Path) -> Result<RasterImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode_image(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn detection_format(path: &Path, flag: Option<FormatArg>, cfg: &Config) -> Result<DetectionFormat> {
    if let Some(f) = flag {
        return Ok(f.into());
    }
    if let Some(f) = path
        .extension()
        .and_then(|e| e.to_str())
        .and_then(DetectionFormat::from_extension)
    {
        return Ok(f);
    }
    cfg.format.ok_or_else(|| {
        anyhow!(
            "cannot infer detections format of {}; pass --format",
            path.display()
        )
    })
}

pub fn read_detections(path: &Path, format: DetectionFormat, dims: (u32, u32)) -> Result<Vec<Detection>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_detections(&bytes, format, dims).with_context(|| format!("loading detections from {}", path.display()))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.write_all(b"\n")?;
            Ok(())
        }
    }
}

pub fn inspect_params(args: &InspectArgs, cfg: &Config) -> InspectParams {
    let defaults = InspectParams::default();
    InspectParams {
        subtract_mode: args
            .subtract_mode
            .map(Into::into)
            .or(cfg.subtract_mode)
            .unwrap_or(defaults.subtract_mode),
        binarize_threshold: args
            .binarize_threshold
            .or(cfg.binarize_threshold)
            .unwrap_or(defaults.binarize_threshold),
        min_diff_pixels: args
            .min_diff_pixels
            .or(cfg.min_diff_pixels)
            .unwrap_or(defaults.min_diff_pixels),
        nms: args.nms.then(|| NmsParams {
            iou_threshold: args.iou_threshold.or(cfg.iou_threshold).unwrap_or(DEFAULT_IOU_THRESHOLD),
            score_threshold: args
                .score_threshold
                .or(cfg.score_threshold)
                .unwrap_or(DEFAULT_SCORE_THRESHOLD),
        }),
    }
}

pub fn run_inspect(args: &InspectArgs, cfg: &Config) -> Result<(Verdict, FaultReport)> {
    let colors = ClassColorMap::with_overrides(&cfg.colors)?;
    let design = read_image(&args.design)?;
    let test = read_image(&args.test)?;
    let format = detection_format(&args.detections, args.format, cfg)?;
    let detections = read_detections(&args.detections, format, design.dims())?;
    let params = inspect_params(args, cfg);

    let report = inspect(&design, &test, &detections, &params)?;
    let json = report.to_json();
    write_or_print(args.out.as_deref(), &json)?;
    if let Some(path) = &args.annotate {
        let rgb = annotate(&test, &report.missing, &colors);
        let png = encode_rgb_png(test.width(), test.height(), &rgb)?;
        fs::write(path, png).with_context(|| format!("writing {}", path.display()))?;
    }
    if args.out.is_some() {
        println!(
            "{} of {} components missing",
            report.missing.len(),
            report.total_detections
        );
    }
    let verdict = if report.is_clean() {
        Verdict::Clean
    } else {
        Verdict::FaultsFound
    };
    Ok((verdict, report))
}

/// Returns the paths written, images first, sidecar last.
pub fn run_inject(args: &InjectArgs, cfg: &Config) -> Result<Vec<std::path::PathBuf>> {
    let image = read_image(&args.image)?;
    let format = detection_format(&args.detections, args.format, cfg)?;
    let detections = read_detections(&args.detections, format, image.dims())?;
    if args.k == 0 || args.k > detections.len() {
        bail!(
            "k = {} is out of range: {} holds {} detections",
            args.k,
            args.detections.display(),
            detections.len()
        );
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let method = args
        .binarize_threshold
        .or(cfg.binarize_threshold)
        .unwrap_or_default();
    let scan = BareScan { method };
    let region = args.patch_region.map(BareRegion);
    let finder: &dyn PatchFinder = match &region {
        Some(r) => r,
        None => &scan,
    };
    let opts = TestSetOptions {
        seed,
        ..TestSetOptions::default()
    };
    let set = build_test_set(&image, &detections, args.k, finder, &opts)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let stem = args
        .image
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("board")
        .to_string();
    let mut written = Vec::with_capacity(set.cases.len() + 1);
    let mut cases = Vec::with_capacity(set.cases.len());
    for (i, case) in set.cases.iter().enumerate() {
        let name = case_file_name(&stem, args.k, i);
        let path = args.out.join(&name);
        fs::write(&path, encode_image(&case.image, ImageFormat::Png)?)
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        cases.push(GroundTruthCase {
            file: name,
            erased: case.erased.clone(),
        });
    }
    let truth = GroundTruth {
        source: args
            .image
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string(),
        image: image.dims().into(),
        k: args.k,
        seed,
        sampled: set.sampled,
        cases,
    };
    let sidecar = args.out.join(format!("{stem}_missing{}_truth.json", args.k));
    fs::write(&sidecar, serde_json::to_string_pretty(&truth)?)
        .with_context(|| format!("writing {}", sidecar.display()))?;
    written.push(sidecar);
    Ok(written)
}

/// Detections from a detections document or from the `missing` list of an
/// inspect report.
pub fn read_scored_detections(path: &Path) -> Result<(ImageDims, Vec<Detection>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("missing").is_some() {
        let report: FaultReport =
            serde_json::from_value(value).with_context(|| format!("parsing report {}", path.display()))?;
        let dets = report.missing_detections();
        Ok((report.image, dets))
    } else {
        let doc = parse_detections_json(&bytes).with_context(|| format!("parsing detections {}", path.display()))?;
        Ok((doc.image, doc.detections))
    }
}

pub fn run_eval(args: &EvalArgs, cfg: &Config) -> Result<EvalReport> {
    let (_, predicted) = read_scored_detections(&args.predictions)?;
    let (_, truth) = read_scored_detections(&args.truth)?;
    let t = args
        .iou_threshold
        .or(cfg.match_iou_threshold)
        .unwrap_or(DEFAULT_MATCH_IOU);
    let stats = match_predictions(&predicted, &truth, t);
    let report = EvalReport::from_stats(&stats, t);
    print!("{}", report.to_table());
    if let Some(out) = &args.out {
        fs::write(out, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(report)
}

pub fn run_nms(args: &NmsArgs, cfg: &Config) -> Result<DetectionsDocument> {
    let format = detection_format(&args.detections, args.format, cfg)?;
    let bytes = fs::read(&args.detections).with_context(|| format!("reading {}", args.detections.display()))?;
    let (dims, dets) = match format {
        DetectionFormat::Json => {
            let doc = parse_detections_json(&bytes)
                .with_context(|| format!("parsing detections {}", args.detections.display()))?;
            let dims = args.image_size.unwrap_or((doc.image.width, doc.image.height));
            (dims, load_detections(&bytes, format, dims)?)
        }
        DetectionFormat::Darknet => {
            let dims = args
                .image_size
                .ok_or_else(|| anyhow!("darknet input needs --image-size WxH"))?;
            (dims, load_detections(&bytes, format, dims)?)
        }
    };
    let iou_t = args.iou_threshold.or(cfg.iou_threshold).unwrap_or(DEFAULT_IOU_THRESHOLD);
    let score_t = args
        .score_threshold
        .or(cfg.score_threshold)
        .unwrap_or(DEFAULT_SCORE_THRESHOLD);
    let doc = DetectionsDocument::new(dims, nms(&dets, iou_t, score_t));
    write_or_print(args.out.as_deref(), &doc.to_json())?;
    Ok(doc)
}
