//! Binary subtraction of a design/test pair and extraction of the changed
//! pixels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::raster::{mean_threshold, BinaryImage, PixelCoord, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubtractMode {
    /// `max(design - test, 0)`: fires only where the design has material the
    /// test lacks.
    #[default]
    Saturating,
    /// `|design - test|`: fires on any change.
    Absolute,
}

impl fmt::Display for SubtractMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubtractMode::Saturating => "saturating",
            SubtractMode::Absolute => "absolute",
        })
    }
}

impl FromStr for SubtractMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "saturating" => Ok(SubtractMode::Saturating),
            "absolute" => Ok(SubtractMode::Absolute),
            _ => Err(Error::InvalidArgument(format!(
                "subtract mode must be `saturating` or `absolute`, got {s:?}"
            ))),
        }
    }
}

pub fn subtract(design: &BinaryImage, test: &BinaryImage, mode: SubtractMode) -> Result<RasterImage> {
    subtract_with(design, test, mode, Execution::default())
}

pub fn subtract_with(
    design: &BinaryImage,
    test: &BinaryImage,
    mode: SubtractMode,
    exec: Execution,
) -> Result<RasterImage> {
    if design.dims() != test.dims() {
        return Err(Error::DimensionMismatch {
            left: design.dims(),
            right: test.dims(),
        });
    }
    let data = match mode {
        SubtractMode::Saturating => exec.zip_pixels(design.data(), test.data(), u8::saturating_sub),
        SubtractMode::Absolute => exec.zip_pixels(design.data(), test.data(), |a, b| a.abs_diff(b)),
    };
    Ok(design.as_raster().with_data(data))
}

/// White where the difference is strictly above its own exact mean.
///
/// An all-zero difference has mean 0 and therefore yields no white pixels.
pub fn threshold_diff(sub: &RasterImage) -> BinaryImage {
    threshold_diff_with(sub, Execution::default())
}

pub fn threshold_diff_with(sub: &RasterImage, exec: Execution) -> BinaryImage {
    mean_threshold(sub, exec)
}

/// The set of white pixels in a thresholded difference image.
///
/// Keeps both a row-major coordinate list and a dense mask so box queries
/// can scan only the box area.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffPixelSet {
    width: u32,
    height: u32,
    mask: Vec<bool>,
    pixels: Vec<PixelCoord>,
}

impl DiffPixelSet {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            mask: vec![false; width as usize * height as usize],
            pixels: Vec::new(),
        }
    }

    /// Build from arbitrary coordinates; duplicates collapse, out-of-range
    /// coordinates are rejected.
    pub fn from_coords<I>(width: u32, height: u32, coords: I) -> Result<Self>
    where
        I: IntoIterator<Item = PixelCoord>,
    {
        let mut set = Self::empty(width, height);
        for c in coords {
            if c.x >= width || c.y >= height {
                return Err(Error::PixelOutOfBounds {
                    x: c.x,
                    y: c.y,
                    width,
                    height,
                });
            }
            let i = c.y as usize * width as usize + c.x as usize;
            if !set.mask[i] {
                set.mask[i] = true;
                set.pixels.push(c);
            }
        }
        set.pixels.sort_unstable();
        Ok(set)
    }

    pub fn source_dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn contains(&self, c: PixelCoord) -> bool {
        c.x < self.width && c.y < self.height && self.mask[self.row_major(c.y, c.x)]
    }

    /// Coordinates in row-major order.
    pub fn pixels(&self) -> &[PixelCoord] {
        &self.pixels
    }

    pub fn iter(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        self.pixels.iter().copied()
    }

    /// Mask lookup by (row, column).
    #[inline]
    pub(crate) fn at_row_col(&self, row: u32, col: u32) -> bool {
        self.mask[self.row_major(row, col)]
    }

    #[inline]
    fn row_major(&self, row: u32, col: u32) -> usize {
        row as usize * self.width as usize + col as usize
    }
}

/// Every coordinate whose value is 255.
pub fn extract_diff_pixels(bin: &BinaryImage) -> DiffPixelSet {
    let (width, height) = bin.dims();
    let mask: Vec<bool> = bin.data().iter().map(|&v| v == 255).collect();
    let pixels = mask
        .iter()
        .enumerate()
        .filter(|(_, &white)| white)
        .map(|(i, _)| PixelCoord::new((i % width as usize) as u32, (i / width as usize) as u32))
        .collect();
    DiffPixelSet {
        width,
        height,
        mask,
        pixels,
    }
}
