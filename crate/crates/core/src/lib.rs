//! # pcbfire
//!
//! Missing-component inspection for assembled printed circuit boards.
//!
//! Given an aligned design (reference) image, a test image of a produced
//! board, and the component detections found on the design image, the
//! pipeline
//!
//! 1. binarizes both images ([`raster::binarize`]),
//! 2. subtracts test from design and thresholds the difference at its mean
//!    ([`diffcore`]),
//! 3. collects the white pixels of the difference, and
//! 4. flags every detection whose box contains one of those pixels
//!    ([`matcher::classify_missing`]).
//!
//! Around that core sit detection ingestion and NMS ([`detect`]), synthetic
//! fault injection for building labelled test sets ([`faultgen`]) and
//! confusion-count scoring ([`evalkit`]).
//!
//! ```
//! use pcbfire::{inspect, BBox, ComponentClass, Detection, InspectParams, RasterImage};
//!
//! let mut design = RasterImage::filled(16, 8, 10).unwrap();
//! for y in 2..6 {
//!     for x in 2..6 {
//!         design.set(x, y, 240);
//!     }
//! }
//! let test = RasterImage::filled(16, 8, 10).unwrap();
//! let cap = Detection::new(ComponentClass::Capacitor, BBox::new(2, 2, 4, 4).unwrap(), 0.9).unwrap();
//!
//! let report = inspect(&design, &test, &[cap], &InspectParams::default()).unwrap();
//! assert_eq!(report.missing.len(), 1);
//! ```
//!
//! With the default `parallel` feature, per-pixel maps, per-detection box
//! scans and per-combination fault generation run on rayon. Every such entry
//! point has a `*_with` variant taking an explicit [`Execution`].

pub mod detect;
pub mod diffcore;
pub mod error;
pub mod evalkit;
pub mod exec;
pub mod faultgen;
pub mod matcher;
pub mod pipeline;
pub mod raster;
pub mod synth;

pub use detect::{
    filters_for_classes, iou, load_detections, nms, BBox, ComponentClass, Detection, DetectionFormat,
    DetectionsDocument, DetectorConfig, ImageDims,
};
pub use diffcore::{extract_diff_pixels, subtract, threshold_diff, DiffPixelSet, SubtractMode};
pub use error::{Error, Result};
pub use evalkit::{class_accuracy, match_predictions, sse, ClassStats, EvalReport, SampleSeries};
pub use exec::Execution;
pub use faultgen::{build_test_set, inject_fault, BareRegion, BareScan, FaultSpec, PatchFinder, TestSetOptions};
pub use matcher::{box_contains_diff_pixel, classify_missing, FaultReport, FlaggedDetection, InspectParams, NmsParams};
pub use pipeline::{inspect, inspect_with};
pub use raster::{binarize, decode_image, encode_image, BinarizeMethod, BinaryImage, ImageFormat, PixelCoord, RasterImage};
