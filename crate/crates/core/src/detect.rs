//! Component detections: classes, boxes, IoU, NMS, and annotation files.
//!
//! Detections enter the pipeline from files rather than live inference. Two
//! formats are read:
//!
//! * darknet text, one `class_id cx cy w h [confidence]` line per box with
//!   coordinates normalized to the image size;
//! * the detections JSON document (see [`DetectionsDocument`]).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentClass {
    Capacitor,
    Resistor,
    Inductor,
    Ic,
}

impl ComponentClass {
    pub const ALL: [ComponentClass; 4] = [
        ComponentClass::Capacitor,
        ComponentClass::Resistor,
        ComponentClass::Inductor,
        ComponentClass::Ic,
    ];

    pub const COUNT: u32 = Self::ALL.len() as u32;

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn from_id(id: i64) -> Result<Self> {
        usize::try_from(id)
            .ok()
            .and_then(|i| Self::ALL.get(i).copied())
            .ok_or(Error::UnknownClassId(id))
    }

    /// Canonical name used in every JSON document.
    pub fn name(self) -> &'static str {
        match self {
            ComponentClass::Capacitor => "Capacitor",
            ComponentClass::Resistor => "Resistor",
            ComponentClass::Inductor => "Inductor",
            ComponentClass::Ic => "IC",
        }
    }
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComponentClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownClassName(s.to_string()))
    }
}

impl Serialize for ComponentClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ComponentClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Axis-aligned box covering the half-open pixel region
/// `[x, x + w) × [y, y + h)`.
///
/// The origin may be negative or past the image edge; callers clip with
/// [`BBox::clip`] before touching pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBBox")]
pub struct BBox {
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
}

#[derive(Deserialize)]
struct RawBBox {
    x: i32,
    y: i32,
    w: u32,
    h: u32,
}

impl TryFrom<RawBBox> for BBox {
    type Error = Error;

    fn try_from(r: RawBBox) -> Result<Self> {
        BBox::new(r.x, r.y, r.w, r.h)
    }
}

/// A box intersected with image bounds: columns `[x0, x1)`, rows `[y0, y1)`,
/// never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelRect {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }
}

impl BBox {
    pub fn new(x: i32, y: i32, w: u32, h: u32) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::InvalidArgument(format!(
                "bounding box must have positive size, got {w}x{h}"
            )));
        }
        if i64::from(x) + i64::from(w) > i64::from(i32::MAX) || i64::from(y) + i64::from(h) > i64::from(i32::MAX) {
            return Err(Error::InvalidArgument("bounding box extent overflows".into()));
        }
        Ok(Self { x, y, w, h })
    }

    /// Exclusive right edge.
    pub fn right(&self) -> i64 {
        i64::from(self.x) + i64::from(self.w)
    }

    /// Exclusive bottom edge.
    pub fn bottom(&self) -> i64 {
        i64::from(self.y) + i64::from(self.h)
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn intersection_area(&self, other: &BBox) -> u64 {
        let w = self.right().min(other.right()) - i64::from(self.x.max(other.x));
        let h = self.bottom().min(other.bottom()) - i64::from(self.y.max(other.y));
        if w <= 0 || h <= 0 {
            0
        } else {
            (w * h) as u64
        }
    }

    pub fn overlaps(&self, other: &BBox) -> bool {
        self.intersection_area(other) > 0
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= i64::from(self.x) && x < self.right() && y >= i64::from(self.y) && y < self.bottom()
    }

    /// Part of the box inside a `width × height` image, or `None` when
    /// nothing remains.
    pub fn clip(&self, width: u32, height: u32) -> Option<PixelRect> {
        let x0 = i64::from(self.x).clamp(0, i64::from(width));
        let y0 = i64::from(self.y).clamp(0, i64::from(height));
        let x1 = self.right().clamp(0, i64::from(width));
        let y1 = self.bottom().clamp(0, i64::from(height));
        (x1 > x0 && y1 > y0).then_some(PixelRect {
            x0: x0 as u32,
            y0: y0 as u32,
            x1: x1 as u32,
            y1: y1 as u32,
        })
    }

    /// True when the whole box lies within the image.
    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.x >= 0 && self.y >= 0 && self.right() <= i64::from(width) && self.bottom() <= i64::from(height)
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x={}, y={}, w={}, h={})", self.x, self.y, self.w, self.h)
    }
}

/// One component hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDetection")]
pub struct Detection {
    pub class: ComponentClass,
    pub bbox: BBox,
    pub confidence: f64,
}

#[derive(Deserialize)]
struct RawDetection {
    class: ComponentClass,
    bbox: BBox,
    #[serde(default = "full_confidence")]
    confidence: f64,
}

fn full_confidence() -> f64 {
    1.0
}

impl TryFrom<RawDetection> for Detection {
    type Error = Error;

    fn try_from(r: RawDetection) -> Result<Self> {
        Detection::new(r.class, r.bbox, r.confidence)
    }
}

impl Detection {
    pub fn new(class: ComponentClass, bbox: BBox, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidArgument(format!(
                "confidence must lie in [0, 1], got {confidence}"
            )));
        }
        Ok(Self {
            class,
            bbox,
            confidence,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

impl From<(u32, u32)> for ImageDims {
    fn from((width, height): (u32, u32)) -> Self {
        Self { width, height }
    }
}

/// `{"image": {"width", "height"}, "detections": [...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionsDocument {
    pub image: ImageDims,
    pub detections: Vec<Detection>,
}

impl DetectionsDocument {
    pub fn new(dims: impl Into<ImageDims>, detections: Vec<Detection>) -> Self {
        Self {
            image: dims.into(),
            detections,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("detections serialize")
    }
}

/// Number of filters in each YOLO head's final convolution:
/// `(classes + 5) * 3`.
pub fn filters_for_classes(num_classes: u32) -> Result<u32> {
    if num_classes < 1 {
        return Err(Error::InvalidArgument("num_classes must be at least 1".into()));
    }
    num_classes
        .checked_add(5)
        .and_then(|v| v.checked_mul(3))
        .ok_or_else(|| Error::InvalidArgument(format!("num_classes {num_classes} too large")))
}

/// A detector head configuration whose filter count is consistent with its
/// class count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorConfig {
    num_classes: u32,
    final_filters: u32,
}

impl DetectorConfig {
    pub fn new(num_classes: u32, final_filters: u32) -> Result<Self> {
        let expected = filters_for_classes(num_classes)?;
        if expected != final_filters {
            return Err(Error::FilterMismatch {
                num_classes,
                expected,
                actual: final_filters,
            });
        }
        Ok(Self {
            num_classes,
            final_filters,
        })
    }

    pub fn for_classes(num_classes: u32) -> Result<Self> {
        Ok(Self {
            num_classes,
            final_filters: filters_for_classes(num_classes)?,
        })
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    pub fn final_filters(&self) -> u32 {
        self.final_filters
    }
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.45;
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.25;

/// Greedy per-class hard NMS.
///
/// Drops detections below `score_threshold`, then walks the rest by
/// descending confidence (ties keep input order). A detection survives when
/// its IoU with every kept box of the same class is `<= iou_threshold`, so a
/// threshold of 1.0 suppresses nothing. Output is in walk order.
pub fn nms(dets: &[Detection], iou_threshold: f64, score_threshold: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len())
        .filter(|&i| dets[i].confidence >= score_threshold)
        .collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .confidence
            .partial_cmp(&dets[a].confidence)
            .unwrap_or(Ordering::Equal)
    });

    let mut kept: Vec<Detection> = Vec::with_capacity(order.len());
    for i in order {
        let cand = &dets[i];
        let suppressed = kept
            .iter()
            .any(|k| k.class == cand.class && iou(&k.bbox, &cand.bbox) > iou_threshold);
        if !suppressed {
            kept.push(*cand);
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionFormat {
    Darknet,
    Json,
}

impl DetectionFormat {
    /// `.txt` is darknet, `.json` is JSON.
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "txt" => Some(Self::Darknet),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

impl FromStr for DetectionFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "darknet" | "darknet-txt" | "txt" => Ok(Self::Darknet),
            "json" => Ok(Self::Json),
            _ => Err(Error::InvalidArgument(format!(
                "detections format must be `darknet` or `json`, got {s:?}"
            ))),
        }
    }
}

/// Read detections for an image of `image_dims`.
///
/// Darknet coordinates are denormalized against `image_dims`. A JSON
/// document carries its own dimensions, which must match `image_dims`.
/// Boxes that only partly overlap the image are kept; boxes with no pixel
/// inside it are rejected.
pub fn load_detections(bytes: &[u8], format: DetectionFormat, image_dims: (u32, u32)) -> Result<Vec<Detection>> {
    let dets = match format {
        DetectionFormat::Darknet => parse_darknet(bytes, image_dims)?,
        DetectionFormat::Json => {
            let doc = parse_detections_json(bytes)?;
            let doc_dims = (doc.image.width, doc.image.height);
            if doc_dims != image_dims {
                return Err(Error::DimensionMismatch {
                    left: doc_dims,
                    right: image_dims,
                });
            }
            doc.detections
        }
    };
    let (width, height) = image_dims;
    if let Some(d) = dets.iter().find(|d| d.bbox.clip(width, height).is_none()) {
        return Err(Error::BoxOutsideImage {
            bbox: d.bbox,
            width,
            height,
        });
    }
    Ok(dets)
}

/// Parse a detections JSON document without checking boxes against its
/// image size.
pub fn parse_detections_json(bytes: &[u8]) -> Result<DetectionsDocument> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        line: e.line(),
        reason: e.to_string(),
    })
}

fn parse_darknet(bytes: &[u8], (width, height): (u32, u32)) -> Result<Vec<Detection>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
        reason: "not valid UTF-8".into(),
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| Error::Parse {
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(5..=6).contains(&fields.len()) {
            return Err(err(format!(
                "expected `class_id cx cy w h [confidence]`, got {} fields",
                fields.len()
            )));
        }
        let class_id: i64 = fields[0]
            .parse()
            .map_err(|_| err(format!("class id {:?} is not an integer", fields[0])))?;
        let class = ComponentClass::from_id(class_id)?;
        let mut nums = [0.0f64; 5];
        for (slot, field) in nums.iter_mut().zip(&fields[1..]) {
            *slot = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("{field:?} is not a finite number")))?;
        }
        let [cx, cy, bw, bh, _] = nums;
        if bw <= 0.0 || bh <= 0.0 {
            return Err(err("box width and height must be positive".into()));
        }
        let confidence = if fields.len() == 6 { nums[4] } else { 1.0 };
        let (fw, fh) = (f64::from(width), f64::from(height));
        let to_i32 = |v: f64| -> Result<i32> {
            let r = v.round();
            if r < f64::from(i32::MIN) || r > f64::from(i32::MAX) {
                Err(err("box coordinate out of range".into()))
            } else {
                Ok(r as i32)
            }
        };
        let x = to_i32((cx - bw / 2.0) * fw)?;
        let y = to_i32((cy - bh / 2.0) * fh)?;
        let w = to_i32(bw * fw)?.max(1) as u32;
        let h = to_i32(bh * fh)?.max(1) as u32;
        let bbox = BBox::new(x, y, w, h).map_err(|e| err(e.to_string()))?;
        out.push(Detection::new(class, bbox, confidence).map_err(|e| err(e.to_string()))?);
    }
    Ok(out)
}

/// Write detections as darknet text (6 fields, normalized coordinates).
pub fn to_darknet(dets: &[Detection], (width, height): (u32, u32)) -> String {
    let (fw, fh) = (f64::from(width), f64::from(height));
    dets.iter()
        .map(|d| {
            let b = &d.bbox;
            format!(
                "{} {} {} {} {} {}\n",
                d.class.id(),
                (f64::from(b.x) + f64::from(b.w) / 2.0) / fw,
                (f64::from(b.y) + f64::from(b.h) / 2.0) / fh,
                f64::from(b.w) / fw,
                f64::from(b.h) / fh,
                d.confidence
            )
        })
        .collect()
}
