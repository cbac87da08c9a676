//! End-to-end inspection of one aligned design/test pair.

use crate::detect::{nms, Detection};
use crate::diffcore::{extract_diff_pixels, subtract_with, threshold_diff_with, DiffPixelSet};
use crate::error::Result;
use crate::exec::Execution;
use crate::matcher::{classify_missing_with, FaultReport, InspectParams};
use crate::raster::{binarize_with, RasterImage};

/// Binarize both images, subtract, threshold the difference and collect
/// its white pixels.
pub fn diff_pixels(
    design: &RasterImage,
    test: &RasterImage,
    params: &InspectParams,
    exec: Execution,
) -> Result<DiffPixelSet> {
    let design_b = binarize_with(design, params.binarize_threshold, exec);
    let test_b = binarize_with(test, params.binarize_threshold, exec);
    let sub = subtract_with(&design_b, &test_b, params.subtract_mode, exec)?;
    Ok(extract_diff_pixels(&threshold_diff_with(&sub, exec)))
}

/// Full pipeline: optional NMS, diff extraction, box matching.
///
/// `detections` describe components found on the design image.
pub fn inspect(
    design: &RasterImage,
    test: &RasterImage,
    detections: &[Detection],
    params: &InspectParams,
) -> Result<FaultReport> {
    inspect_with(design, test, detections, params, Execution::default())
}

pub fn inspect_with(
    design: &RasterImage,
    test: &RasterImage,
    detections: &[Detection],
    params: &InspectParams,
    exec: Execution,
) -> Result<FaultReport> {
    let diff = diff_pixels(design, test, params, exec)?;
    match params.nms {
        Some(n) => {
            let kept = nms(detections, n.iou_threshold, n.score_threshold);
            classify_missing_with(design, &kept, &diff, params, exec)
        }
        None => classify_missing_with(design, detections, &diff, params, exec),
    }
}
