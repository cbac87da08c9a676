//! Synthetic missing-component faults.
//!
//! A fault is made by copying a same-sized patch of bare board over a
//! component's box. [`build_test_set`] repeats that for every (or a seeded
//! sample of every) combination of `k` components, producing the test images
//! together with the ground-truth list of erased detections.

use std::collections::HashSet;

use itertools::Itertools;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detect::{BBox, Detection, ImageDims};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::raster::{binarize_with, BinarizeMethod, PixelCoord, RasterImage};

/// Upper bound on generated combinations per `k`.
pub const MAX_COMBINATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultSpec {
    pub target: Detection,
    pub patch_origin: PixelCoord,
}

impl FaultSpec {
    pub fn patch_box(&self) -> Result<BBox> {
        let b = &self.target.bbox;
        let x = i32::try_from(self.patch_origin.x)
            .map_err(|_| Error::InvalidArgument("patch origin out of range".into()))?;
        let y = i32::try_from(self.patch_origin.y)
            .map_err(|_| Error::InvalidArgument("patch origin out of range".into()))?;
        BBox::new(x, y, b.w, b.h)
    }

    fn validate(&self, (width, height): (u32, u32)) -> Result<BBox> {
        let target = self.target.bbox;
        if !target.fits_within(width, height) {
            return Err(Error::RegionOutOfBounds {
                bbox: target,
                width,
                height,
            });
        }
        let patch = self.patch_box()?;
        if !patch.fits_within(width, height) {
            return Err(Error::RegionOutOfBounds {
                bbox: patch,
                width,
                height,
            });
        }
        if patch.overlaps(&target) {
            return Err(Error::PatchOverlap { patch, target });
        }
        Ok(patch)
    }
}

/// Copy the patch region over the target box; everything else is untouched.
pub fn inject_fault(img: &RasterImage, spec: &FaultSpec) -> Result<RasterImage> {
    let mut out = img.clone();
    apply_fault(&mut out, img, spec)?;
    Ok(out)
}

// Reads patches from `source` so that several faults applied in sequence all
// sample the original board.
fn apply_fault(dst: &mut RasterImage, source: &RasterImage, spec: &FaultSpec) -> Result<()> {
    let patch = spec.validate(source.dims())?;
    let target = spec.target.bbox;
    let w = target.w as usize;
    let stride = source.width() as usize;
    for dy in 0..target.h as usize {
        let src = (patch.y as usize + dy) * stride + patch.x as usize;
        let dst_off = (target.y as usize + dy) * stride + target.x as usize;
        dst.data_mut()[dst_off..dst_off + w].copy_from_slice(&source.data()[src..src + w]);
    }
    Ok(())
}

/// Chooses where the bare-board patch for a target comes from.
pub trait PatchFinder: Sync {
    fn find_patch(&self, img: &RasterImage, target: &Detection, all: &[Detection]) -> Result<PixelCoord>;
}

/// Patches come from a user-supplied bare rectangle: the first placement
/// inside `region` (row-major) that avoids the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BareRegion(pub BBox);

impl PatchFinder for BareRegion {
    fn find_patch(&self, img: &RasterImage, target: &Detection, _all: &[Detection]) -> Result<PixelCoord> {
        let (width, height) = img.dims();
        let region = self.0.clip(width, height).ok_or(Error::RegionOutOfBounds {
            bbox: self.0,
            width,
            height,
        })?;
        let (tw, th) = (target.bbox.w, target.bbox.h);
        if tw > region.width() || th > region.height() {
            return Err(no_patch(target));
        }
        for y in region.y0..=region.y1 - th {
            for x in region.x0..=region.x1 - tw {
                let candidate = BBox::new(x as i32, y as i32, tw, th)?;
                if !candidate.overlaps(&target.bbox) {
                    return Ok(PixelCoord::new(x, y));
                }
            }
        }
        Err(no_patch(target))
    }
}

/// Automatic search for a region whose binarized content is all black and
/// which overlaps no detection. Scans origins in row-major order and takes
/// the first fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BareScan {
    pub method: BinarizeMethod,
}

impl PatchFinder for BareScan {
    fn find_patch(&self, img: &RasterImage, target: &Detection, all: &[Detection]) -> Result<PixelCoord> {
        let (width, height) = img.dims();
        let (tw, th) = (target.bbox.w, target.bbox.h);
        if tw > width || th > height {
            return Err(no_patch(target));
        }
        let bin = binarize_with(img, self.method, Execution::Sequential);
        let white = SummedArea::from_fn(width, height, |x, y| bin.is_white(x, y));

        let mut occupied = vec![false; width as usize * height as usize];
        for d in all.iter().chain(std::iter::once(target)) {
            if let Some(r) = d.bbox.clip(width, height) {
                for y in r.y0..r.y1 {
                    let row = y as usize * width as usize;
                    occupied[row + r.x0 as usize..row + r.x1 as usize].fill(true);
                }
            }
        }
        let busy = SummedArea::from_fn(width, height, |x, y| occupied[y as usize * width as usize + x as usize]);

        for y in 0..=height - th {
            for x in 0..=width - tw {
                if busy.count(x, y, tw, th) == 0 && white.count(x, y, tw, th) == 0 {
                    return Ok(PixelCoord::new(x, y));
                }
            }
        }
        Err(no_patch(target))
    }
}

fn no_patch(target: &Detection) -> Error {
    Error::NoBarePatch {
        class: target.class.to_string(),
        bbox: target.bbox,
    }
}

struct SummedArea {
    stride: usize,
    table: Vec<u32>,
}

impl SummedArea {
    fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let stride = width as usize + 1;
        let mut table = vec![0u32; stride * (height as usize + 1)];
        for y in 0..height {
            let mut row_sum = 0;
            for x in 0..width {
                row_sum += u32::from(f(x, y));
                let i = (y as usize + 1) * stride + x as usize + 1;
                table[i] = table[i - stride] + row_sum;
            }
        }
        Self { stride, table }
    }

    fn count(&self, x: u32, y: u32, w: u32, h: u32) -> u32 {
        let at = |x: u32, y: u32| self.table[y as usize * self.stride + x as usize];
        at(x + w, y + h) + at(x, y) - at(x + w, y) - at(x, y + h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestSetOptions {
    /// Seed for combination sampling; only used when there are more than
    /// `max_combinations` combinations.
    pub seed: u64,
    pub max_combinations: usize,
}

impl Default for TestSetOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_combinations: MAX_COMBINATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultCase {
    pub image: RasterImage,
    /// Indices into the input detections, ascending.
    pub erased_indices: Vec<usize>,
    pub erased: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    pub k: usize,
    pub seed: u64,
    /// True when combinations were sampled rather than enumerated.
    pub sampled: bool,
    pub cases: Vec<FaultCase>,
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Index combinations to erase: every one in lexicographic order when there
/// are at most `max` of them, otherwise `max` distinct seeded samples.
pub fn select_combinations(n: usize, k: usize, opts: &TestSetOptions) -> (Vec<Vec<usize>>, bool) {
    if binomial(n, k) <= opts.max_combinations as u64 {
        return ((0..n).combinations(k).collect(), false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut seen = HashSet::with_capacity(opts.max_combinations);
    let mut out = Vec::with_capacity(opts.max_combinations);
    while out.len() < opts.max_combinations {
        let mut combo = index::sample(&mut rng, n, k).into_vec();
        combo.sort_unstable();
        if seen.insert(combo.clone()) {
            out.push(combo);
        }
    }
    (out, true)
}

pub fn build_test_set(
    img: &RasterImage,
    detections: &[Detection],
    k: usize,
    finder: &dyn PatchFinder,
    opts: &TestSetOptions,
) -> Result<TestSet> {
    build_test_set_with(img, detections, k, finder, opts, Execution::default())
}

pub fn build_test_set_with(
    img: &RasterImage,
    detections: &[Detection],
    k: usize,
    finder: &dyn PatchFinder,
    opts: &TestSetOptions,
    exec: Execution,
) -> Result<TestSet> {
    if k == 0 || k > detections.len() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {k}",
            detections.len()
        )));
    }
    if opts.max_combinations == 0 {
        return Err(Error::InvalidArgument("max_combinations must be positive".into()));
    }
    let (combos, sampled) = select_combinations(detections.len(), k, opts);

    let mut needed: Vec<usize> = combos.iter().flatten().copied().collect();
    needed.sort_unstable();
    needed.dedup();
    let mut specs: Vec<Option<FaultSpec>> = vec![None; detections.len()];
    for i in needed {
        let target = detections[i];
        let patch_origin = finder.find_patch(img, &target, detections)?;
        let spec = FaultSpec { target, patch_origin };
        spec.validate(img.dims())?;
        specs[i] = Some(spec);
    }

    let cases = exec.map_items(&combos, |combo| -> Result<FaultCase> {
        let mut image = img.clone();
        for &i in combo {
            apply_fault(&mut image, img, specs[i].as_ref().expect("spec prepared"))?;
        }
        Ok(FaultCase {
            image,
            erased_indices: combo.clone(),
            erased: combo.iter().map(|&i| detections[i]).collect(),
        })
    });
    Ok(TestSet {
        k,
        seed: opts.seed,
        sampled,
        cases: cases.into_iter().collect::<Result<_>>()?,
    })
}

/// `<stem>_missing<k>_<index>.png`
pub fn case_file_name(stem: &str, k: usize, index: usize) -> String {
    format!("{stem}_missing{k}_{index}.png")
}

/// Sidecar written next to a generated test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub source: String,
    pub image: ImageDims,
    pub k: usize,
    pub seed: u64,
    pub sampled: bool,
    pub cases: Vec<GroundTruthCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthCase {
    pub file: String,
    pub erased: Vec<Detection>,
}
