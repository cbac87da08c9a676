//! Outlining missing components on the test image.

use anyhow::{ensure, Result};
use pcbfire::{ComponentClass, FlaggedDetection, RasterImage};
use serde::Deserialize;

pub type Rgb = [u8; 3];

/// Outline stroke width in pixels, drawn inward from the box edge.
pub const STROKE: u32 = 2;

/// One distinct outline colour per component class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassColorMap {
    colors: [Rgb; 4],
}

impl Default for ClassColorMap {
    fn default() -> Self {
        let mut colors = [[0; 3]; 4];
        colors[ComponentClass::Ic.id() as usize] = [255, 255, 0];
        colors[ComponentClass::Capacitor.id() as usize] = [0, 255, 0];
        colors[ComponentClass::Inductor.id() as usize] = [255, 105, 180];
        colors[ComponentClass::Resistor.id() as usize] = [255, 0, 0];
        Self { colors }
    }
}

/// `[colors]` table of the config file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorOverrides {
    pub capacitor: Option<Rgb>,
    pub resistor: Option<Rgb>,
    pub inductor: Option<Rgb>,
    pub ic: Option<Rgb>,
}

impl ClassColorMap {
    pub fn with_overrides(o: &ColorOverrides) -> Result<Self> {
        let mut map = Self::default();
        for (class, c) in [
            (ComponentClass::Capacitor, o.capacitor),
            (ComponentClass::Resistor, o.resistor),
            (ComponentClass::Inductor, o.inductor),
            (ComponentClass::Ic, o.ic),
        ] {
            if let Some(c) = c {
                map.colors[class.id() as usize] = c;
            }
        }
        for i in 0..4 {
            for j in i + 1..4 {
                ensure!(
                    map.colors[i] != map.colors[j],
                    "classes {} and {} share colour {:?}",
                    ComponentClass::ALL[i],
                    ComponentClass::ALL[j],
                    map.colors[i]
                );
            }
        }
        Ok(map)
    }

    pub fn color(&self, class: ComponentClass) -> Rgb {
        self.colors[class.id() as usize]
    }
}

/// RGB copy of `test` with a `STROKE`-wide rectangle inside each flagged
/// box (clipped to the image).
pub fn annotate(test: &RasterImage, missing: &[FlaggedDetection], colors: &ClassColorMap) -> Vec<u8> {
    let (w, h) = test.dims();
    let mut rgb: Vec<u8> = test.data().iter().flat_map(|&v| [v, v, v]).collect();
    for f in missing {
        let Some(r) = f.detection.bbox.clip(w, h) else {
            continue;
        };
        let color = colors.color(f.detection.class);
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                let on_stroke = x < r.x0 + STROKE || x + STROKE >= r.x1 || y < r.y0 + STROKE || y + STROKE >= r.y1;
                if on_stroke {
                    let i = 3 * (y as usize * w as usize + x as usize);
                    rgb[i..i + 3].copy_from_slice(&color);
                }
            }
        }
    }
    rgb
}

pub fn encode_rgb_png(width: u32, height: u32, rgb: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header()?;
        writer.write_image_data(rgb)?;
    }
    Ok(out)
}
