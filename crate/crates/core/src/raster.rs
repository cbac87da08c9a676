//! Grayscale rasters, binary masks, and the PNG / PGM codecs.

use std::fmt;
use std::io::Cursor;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Single-channel 8-bit image, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("len", &self.data.len())
            .finish()
    }
}

impl RasterImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() as u64 != u64::from(width) * u64::from(height) {
            return Err(Error::InvalidDimensions {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        let len = (u64::from(width) * u64::from(height)) as usize;
        Self::new(width, height, vec![value; len])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    /// Value at column `x`, row `y`, or `None` outside the image.
    pub fn get(&self, x: u32, y: u32) -> Option<u8> {
        (x < self.width && y < self.height).then(|| self.data[self.index(x, y)])
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let i = self.index(x, y);
        self.data[i] = value;
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    /// Same dimensions, new pixel values.
    pub(crate) fn with_data(&self, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }

    #[inline]
    pub(crate) fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }
}

/// Raster whose every value is exactly 0 or 255.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage(RasterImage);

impl BinaryImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        Self::try_from(RasterImage::new(width, height, data)?)
    }

    pub(crate) fn from_raster_unchecked(raster: RasterImage) -> Self {
        debug_assert!(raster.data.iter().all(|&v| v == 0 || v == 255));
        Self(raster)
    }

    pub fn as_raster(&self) -> &RasterImage {
        &self.0
    }

    pub fn into_raster(self) -> RasterImage {
        self.0
    }

    pub fn width(&self) -> u32 {
        self.0.width
    }

    pub fn height(&self) -> u32 {
        self.0.height
    }

    pub fn dims(&self) -> (u32, u32) {
        self.0.dims()
    }

    pub fn data(&self) -> &[u8] {
        &self.0.data
    }

    pub fn is_white(&self, x: u32, y: u32) -> bool {
        self.0.get(x, y) == Some(255)
    }

    pub fn count_white(&self) -> usize {
        self.0.data.iter().filter(|&&v| v == 255).count()
    }
}

impl TryFrom<RasterImage> for BinaryImage {
    type Error = Error;

    fn try_from(raster: RasterImage) -> Result<Self> {
        if let Some((index, &value)) = raster
            .data
            .iter()
            .enumerate()
            .find(|(_, &v)| v != 0 && v != 255)
        {
            return Err(Error::NotBinary { index, value });
        }
        Ok(Self(raster))
    }
}

impl AsRef<RasterImage> for RasterImage {
    fn as_ref(&self) -> &RasterImage {
        self
    }
}

impl AsRef<RasterImage> for BinaryImage {
    fn as_ref(&self) -> &RasterImage {
        &self.0
    }
}

/// Pixel position; `x` is the column, `y` the row.
///
/// Ordering is row-major: `(y, x)` lexicographic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelCoord {
    pub x: u32,
    pub y: u32,
}

impl PixelCoord {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

impl Ord for PixelCoord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for PixelCoord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PixelCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Png,
    Pgm,
}

impl ImageFormat {
    /// Guess from a file extension (`png`, `pgm`), case-insensitive.
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "png" => Some(Self::Png),
            "pgm" => Some(Self::Pgm),
            _ => None,
        }
    }
}

/// How a grayscale raster becomes a binary mask.
///
/// Serialized as the string `"mean"` or as the bare fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "BinarizeRepr", try_from = "BinarizeRepr")]
pub enum BinarizeMethod {
    /// White where the pixel is strictly above the exact image mean.
    #[default]
    Mean,
    /// White where the pixel is strictly above the given value.
    Fixed(u8),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BinarizeRepr {
    Fixed(u8),
    Named(String),
}

impl From<BinarizeMethod> for BinarizeRepr {
    fn from(m: BinarizeMethod) -> Self {
        match m {
            BinarizeMethod::Mean => BinarizeRepr::Named("mean".into()),
            BinarizeMethod::Fixed(t) => BinarizeRepr::Fixed(t),
        }
    }
}

impl TryFrom<BinarizeRepr> for BinarizeMethod {
    type Error = Error;

    fn try_from(r: BinarizeRepr) -> Result<Self> {
        match r {
            BinarizeRepr::Fixed(t) => Ok(BinarizeMethod::Fixed(t)),
            BinarizeRepr::Named(s) => s.parse(),
        }
    }
}

impl fmt::Display for BinarizeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinarizeMethod::Mean => f.write_str("mean"),
            BinarizeMethod::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl std::str::FromStr for BinarizeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("mean") {
            return Ok(BinarizeMethod::Mean);
        }
        s.parse::<u8>().map(BinarizeMethod::Fixed).map_err(|_| {
            Error::InvalidArgument(format!(
                "binarize threshold must be `mean` or an integer 0..=255, got {s:?}"
            ))
        })
    }
}

/// Threshold at the exact arithmetic mean, strict `>`.
pub fn binarize(img: &RasterImage) -> BinaryImage {
    binarize_with(img, BinarizeMethod::Mean, Execution::default())
}

pub fn binarize_with(img: &RasterImage, method: BinarizeMethod, exec: Execution) -> BinaryImage {
    match method {
        BinarizeMethod::Mean => mean_threshold(img, exec),
        BinarizeMethod::Fixed(t) => {
            let data = exec.map_pixels(&img.data, |v| if v > t { 255 } else { 0 });
            BinaryImage::from_raster_unchecked(img.with_data(data))
        }
    }
}

/// `v > sum / n` evaluated exactly as `v * n > sum`.
pub(crate) fn mean_threshold(img: &RasterImage, exec: Execution) -> BinaryImage {
    let n = img.data.len() as u64;
    let sum = exec.sum_pixels(&img.data);
    let data = exec.map_pixels(&img.data, |v| {
        if u64::from(v) * n > sum {
            255
        } else {
            0
        }
    });
    BinaryImage::from_raster_unchecked(img.with_data(data))
}

/// Decode a PNG or binary PGM (P5) file into grayscale.
///
/// Color inputs are reduced with `0.299 R + 0.587 G + 0.114 B`, rounded to
/// nearest; alpha is dropped.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(b"P2") {
        Err(Error::UnsupportedFormat("ASCII PGM (P2)".into()))
    } else if bytes.len() < PNG_SIGNATURE.len() && PNG_SIGNATURE.starts_with(bytes) && !bytes.is_empty() {
        Err(Error::Decode {
            offset: bytes.len(),
            reason: "truncated PNG signature".into(),
        })
    } else {
        Err(Error::UnsupportedFormat(
            "expected PNG or binary PGM (P5) magic bytes".into(),
        ))
    }
}

pub fn encode_image(img: &RasterImage, format: ImageFormat) -> Result<Vec<u8>> {
    match format {
        ImageFormat::Png => encode_png(img),
        ImageFormat::Pgm => Ok(encode_pgm(img)),
    }
}

#[inline]
pub(crate) fn luminance(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((weighted + 500) / 1000) as u8
}

fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let png_err = |e: png::DecodingError| Error::Decode {
        offset: 0,
        reason: format!("png: {e}"),
    };
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let frame = reader.next_frame(&mut buf).map_err(png_err)?;
    if frame.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!(
            "PNG bit depth {:?} (only 8-bit is supported)",
            frame.bit_depth
        )));
    }
    let buf = &buf[..frame.buffer_size()];
    let (w, h) = (frame.width as usize, frame.height as usize);
    let mut data = Vec::with_capacity(w * h);
    for row in buf.chunks_exact(frame.line_size).take(h) {
        match frame.color_type {
            png::ColorType::Grayscale => data.extend_from_slice(&row[..w]),
            png::ColorType::GrayscaleAlpha => data.extend(row.chunks_exact(2).take(w).map(|p| p[0])),
            png::ColorType::Rgb => {
                data.extend(row.chunks_exact(3).take(w).map(|p| luminance(p[0], p[1], p[2])))
            }
            png::ColorType::Rgba => {
                data.extend(row.chunks_exact(4).take(w).map(|p| luminance(p[0], p[1], p[2])))
            }
            png::ColorType::Indexed => {
                return Err(Error::UnsupportedFormat("unexpanded indexed PNG".into()))
            }
        }
    }
    RasterImage::new(frame.width, frame.height, data)
}

fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width, img.height);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Encode(e.to_string()))?;
        writer
            .write_image_data(&img.data)
            .map_err(|e| Error::Encode(e.to_string()))?;
    }
    Ok(out)
}

fn encode_pgm(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PgmCursor<'_> {
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn header_field(&mut self, name: &str) -> Result<u32> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Decode {
                offset: start,
                reason: format!("expected PGM {name}"),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Decode {
                offset: start,
                reason: format!("PGM {name} out of range"),
            })
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<RasterImage> {
    let mut cur = PgmCursor { bytes, pos: 2 };
    let width = cur.header_field("width")?;
    let height = cur.header_field("height")?;
    let maxval_offset = cur.pos;
    let maxval = cur.header_field("maxval")?;
    if maxval == 0 {
        return Err(Error::Decode {
            offset: maxval_offset,
            reason: "PGM maxval must be positive".into(),
        });
    }
    if maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "16-bit PGM (maxval {maxval})"
        )));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(Error::Decode {
                offset: cur.pos,
                reason: "expected whitespace after PGM maxval".into(),
            })
        }
    }
    if width == 0 || height == 0 {
        return Err(Error::Decode {
            offset: 2,
            reason: format!("PGM has empty dimensions {width}x{height}"),
        });
    }
    let len = (u64::from(width) * u64::from(height)) as usize;
    let body = &bytes[cur.pos..];
    if body.len() < len {
        return Err(Error::Decode {
            offset: bytes.len(),
            reason: format!("PGM pixel data truncated: need {len} bytes, have {}", body.len()),
        });
    }
    let data = if maxval == 255 {
        body[..len].to_vec()
    } else {
        body[..len]
            .iter()
            .map(|&v| ((u32::from(v.min(maxval as u8)) * 255 + maxval / 2) / maxval) as u8)
            .collect()
    };
    RasterImage::new(width, height, data)
}
