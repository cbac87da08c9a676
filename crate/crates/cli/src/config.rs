//! Flag defaults from a TOML file.
//!
//! ```toml
//! subtract_mode = "absolute"
//! min_diff_pixels = 4
//! binarize_threshold = "mean"    # or an integer 0-255
//! iou_threshold = 0.45           # NMS
//! score_threshold = 0.25         # NMS
//! match_iou_threshold = 0.5      # eval
//! seed = 7
//! format = "json"
//!
//! [colors]
//! inductor = [255, 105, 180]
//! ```

use std::path::Path;

use anyhow::{Context, Result};
use pcbfire::{BinarizeMethod, DetectionFormat, SubtractMode};
use serde::Deserialize;

use crate::render::ColorOverrides;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub subtract_mode: Option<SubtractMode>,
    pub min_diff_pixels: Option<usize>,
    pub binarize_threshold: Option<BinarizeMethod>,
    pub iou_threshold: Option<f64>,
    pub score_threshold: Option<f64>,
    pub match_iou_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<DetectionFormat>,
    #[serde(default)]
    pub colors: ColorOverrides,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        for (name, v) in [
            ("iou_threshold", cfg.iou_threshold),
            ("score_threshold", cfg.score_threshold),
            ("match_iou_threshold", cfg.match_iou_threshold),
        ] {
            if let Some(v) = v {
                anyhow::ensure!((0.0..=1.0).contains(&v), "{name} = {v} is not in 0.0..=1.0");
            }
        }
        anyhow::ensure!(cfg.min_diff_pixels != Some(0), "min_diff_pixels must be at least 1");
        Ok(cfg)
    }
}
