//! Flag a detection as a missing component when the thresholded difference
//! has a white pixel inside its box.
//!
//! All public coordinates are `(x, y)` = (column, row). Raster memory is
//! row-major, so the scans below index `(row, column)`; that inversion is
//! confined to this module.

use serde::{Deserialize, Serialize};

use crate::detect::{BBox, Detection, ImageDims, PixelRect};
use crate::diffcore::{DiffPixelSet, SubtractMode};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::raster::{BinarizeMethod, PixelCoord, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmsParams {
    pub iou_threshold: f64,
    pub score_threshold: f64,
}

impl Default for NmsParams {
    fn default() -> Self {
        Self {
            iou_threshold: crate::detect::DEFAULT_IOU_THRESHOLD,
            score_threshold: crate::detect::DEFAULT_SCORE_THRESHOLD,
        }
    }
}

/// Every knob that influences a verdict; echoed verbatim in the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InspectParams {
    pub subtract_mode: SubtractMode,
    pub binarize_threshold: BinarizeMethod,
    /// Diff pixels a box must contain before it is flagged.
    pub min_diff_pixels: usize,
    /// NMS applied to the detections before matching, if any.
    pub nms: Option<NmsParams>,
}

impl Default for InspectParams {
    fn default() -> Self {
        Self {
            subtract_mode: SubtractMode::Saturating,
            binarize_threshold: BinarizeMethod::Mean,
            min_diff_pixels: 1,
            nms: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlaggedDetection {
    #[serde(flatten)]
    pub detection: Detection,
    /// Smallest `(y, x)` diff pixel inside the clipped box.
    pub matched_pixel: PixelCoord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultReport {
    pub image: ImageDims,
    pub parameters: InspectParams,
    pub total_detections: usize,
    pub missing: Vec<FlaggedDetection>,
}

impl FaultReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn missing_detections(&self) -> Vec<Detection> {
        self.missing.iter().map(|f| f.detection).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// First diff pixel inside `bbox` in `(y, x)` order, after clipping the box
/// to the diff image.
pub fn box_contains_diff_pixel(bbox: &BBox, diff: &DiffPixelSet) -> Option<PixelCoord> {
    let (w, h) = diff.source_dims();
    let rect = bbox.clip(w, h)?;
    if (diff.len() as u64) < u64::from(rect.width()) * u64::from(rect.height()) {
        first_in_rect_sparse(&rect, diff)
    } else {
        first_in_rect_dense(&rect, diff)
    }
}

/// Number of diff pixels inside the clipped box, counting no further than
/// `cap`.
pub fn count_diff_pixels_in_box(bbox: &BBox, diff: &DiffPixelSet, cap: usize) -> usize {
    let (w, h) = diff.source_dims();
    let Some(rect) = bbox.clip(w, h) else {
        return 0;
    };
    let mut n = 0;
    for row in rect.y0..rect.y1 {
        for col in rect.x0..rect.x1 {
            if diff.at_row_col(row, col) {
                n += 1;
                if n >= cap {
                    return n;
                }
            }
        }
    }
    n
}

// Walk the mask row by row; the first hit is the smallest (y, x).
fn first_in_rect_dense(rect: &PixelRect, diff: &DiffPixelSet) -> Option<PixelCoord> {
    for row in rect.y0..rect.y1 {
        for col in rect.x0..rect.x1 {
            if diff.at_row_col(row, col) {
                return Some(PixelCoord::new(col, row));
            }
        }
    }
    None
}

// Walk the row-major pixel list from the first pixel on row y0.
fn first_in_rect_sparse(rect: &PixelRect, diff: &DiffPixelSet) -> Option<PixelCoord> {
    let pixels = diff.pixels();
    let start = pixels.partition_point(|p| p.y < rect.y0);
    pixels[start..]
        .iter()
        .take_while(|p| p.y < rect.y1)
        .find(|p| p.x >= rect.x0 && p.x < rect.x1)
        .copied()
}

/// Build the fault report for `detections` against a diff computed from
/// `design` and its test image.
pub fn classify_missing(
    design: &RasterImage,
    detections: &[Detection],
    diff: &DiffPixelSet,
    params: &InspectParams,
) -> Result<FaultReport> {
    classify_missing_with(design, detections, diff, params, Execution::default())
}

pub fn classify_missing_with(
    design: &RasterImage,
    detections: &[Detection],
    diff: &DiffPixelSet,
    params: &InspectParams,
    exec: Execution,
) -> Result<FaultReport> {
    if design.dims() != diff.source_dims() {
        return Err(Error::DimensionMismatch {
            left: design.dims(),
            right: diff.source_dims(),
        });
    }
    if params.min_diff_pixels == 0 {
        return Err(Error::InvalidArgument("min_diff_pixels must be at least 1".into()));
    }
    let min = params.min_diff_pixels;
    let flags = exec.map_items(detections, |d| {
        let hit = box_contains_diff_pixel(&d.bbox, diff)?;
        if min > 1 && count_diff_pixels_in_box(&d.bbox, diff, min) < min {
            return None;
        }
        Some(FlaggedDetection {
            detection: *d,
            matched_pixel: hit,
        })
    });
    Ok(FaultReport {
        image: design.dims().into(),
        parameters: *params,
        total_detections: detections.len(),
        missing: flags.into_iter().flatten().collect(),
    })
}
