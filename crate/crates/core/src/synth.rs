//! Seeded synthetic boards for closed-loop testing and benchmarks.
//!
//! The board is split into square cells. A random subset of cells holds one
//! component each: a bright rectangle (values in `component_range`) that is
//! also reported as a detection. Everything else is dark bare board with
//! noise in `bare_range`. Unused cells guarantee that a bare patch of any
//! component's size exists.

use rand::seq::index;
use rand::Rng;

use crate::detect::{BBox, ComponentClass, Detection};
use crate::raster::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoardSpec {
    pub cols: u32,
    pub rows: u32,
    /// Side of one cell in pixels.
    pub cell: u32,
    pub components: usize,
    pub bare_range: (u8, u8),
    pub component_range: (u8, u8),
}

impl Default for BoardSpec {
    fn default() -> Self {
        Self {
            cols: 6,
            rows: 4,
            cell: 20,
            components: 12,
            bare_range: (0, 20),
            component_range: (200, 255),
        }
    }
}

impl BoardSpec {
    pub fn dims(&self) -> (u32, u32) {
        (self.cols * self.cell, self.rows * self.cell)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBoard {
    pub image: RasterImage,
    pub detections: Vec<Detection>,
}

/// Generate a board; panics if the spec asks for more components than
/// cells, or cells smaller than 6 px.
pub fn synthetic_board<R: Rng + ?Sized>(rng: &mut R, spec: &BoardSpec) -> SyntheticBoard {
    let cells = (spec.cols * spec.rows) as usize;
    assert!(spec.components <= cells, "more components than cells");
    assert!(spec.cell >= 6, "cells must be at least 6 px");
    let (width, height) = spec.dims();
    let (blo, bhi) = spec.bare_range;
    let (clo, chi) = spec.component_range;

    let data = (0..width as usize * height as usize)
        .map(|_| rng.gen_range(blo..=bhi))
        .collect();
    let mut image = RasterImage::new(width, height, data).expect("board dims");

    let mut chosen = index::sample(rng, cells, spec.components).into_vec();
    chosen.sort_unstable();

    let mut detections = Vec::with_capacity(spec.components);
    for c in chosen {
        let (cx, cy) = ((c as u32 % spec.cols) * spec.cell, (c as u32 / spec.cols) * spec.cell);
        // 1 px gutter on every side keeps neighbouring components apart
        let max = spec.cell - 2;
        let w = rng.gen_range(spec.cell / 2..=max);
        let h = rng.gen_range(spec.cell / 2..=max);
        let x = cx + 1 + rng.gen_range(0..=max - w);
        let y = cy + 1 + rng.gen_range(0..=max - h);
        for py in y..y + h {
            for px in x..x + w {
                image.set(px, py, rng.gen_range(clo..=chi));
            }
        }
        let class = ComponentClass::ALL[rng.gen_range(0..ComponentClass::ALL.len())];
        let confidence = f64::from(rng.gen_range(50u32..=100)) / 100.0;
        let bbox = BBox::new(x as i32, y as i32, w, h).expect("positive box");
        detections.push(Detection::new(class, bbox, confidence).expect("valid confidence"));
    }
    SyntheticBoard { image, detections }
}
