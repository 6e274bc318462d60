//! Lighting-specific corrections applied before segmentation.
//!
//! * overexposed: equalize the luma plane of the whole image.
//! * glare: swap blue and green over the whole image, then equalize luma
//!   independently inside each 500x500 block.
//! * typical: untouched.

mod equalize;
mod ycbcr;

use serde::{Deserialize, Serialize};

pub use equalize::{equalize_histogram, EqualizationLut};
pub use ycbcr::{rgb_to_ycbcr, rgb_to_ycbcr_pixel, ycbcr_to_rgb, ycbcr_to_rgb_pixel, YCbCrImage};

use crate::image::RgbImage;
use crate::lighting::LightingClass;
use crate::tiling::{disjoint_blocks, TileRect, DEFAULT_TILE};
use ycbcr::Tables;

/// Equalizes the Y plane and converts back; chroma planes are untouched.
fn equalize_luma(img: &RgbImage) -> RgbImage {
    let mut out = img.clone();
    equalize_luma_in(&mut out, TileRect::new(0, 0, img.width(), img.height()));
    out
}

/// [`equalize_luma`] restricted to `rect`, in place.
fn equalize_luma_in(img: &mut RgbImage, rect: TileRect) {
    let t = Tables::get();
    let stride = img.width() as usize * 3;
    let row_len = rect.w as usize * 3;
    let raw = img.as_raw_mut();
    let rows = || (rect.y0..rect.y1()).map(|y| y as usize * stride + rect.x0 as usize * 3);
    let mut luma = Vec::with_capacity(rect.w as usize * rect.h as usize);
    let mut hist = [0u64; 256];
    for start in rows() {
        for px in raw[start..start + row_len].chunks_exact(3) {
            let y = t.luma([px[0], px[1], px[2]]);
            hist[y as usize] += 1;
            luma.push(y);
        }
    }
    let lut = EqualizationLut::from_histogram(&hist);
    let mut ys = luma.iter();
    for start in rows() {
        for px in raw[start..start + row_len].chunks_exact_mut(3) {
            let (cb, cr) = t.chroma([px[0], px[1], px[2]]);
            let y = lut.map(*ys.next().expect("one luma per pixel"));
            px.copy_from_slice(&t.to_rgb(y, cb, cr));
        }
    }
}

/// Global luma equalization for overexposed images.
pub fn preprocess_overexposed(img: &RgbImage) -> RgbImage {
    equalize_luma(img)
}

/// `(R, G, B) -> (R, B, G)`.
pub fn swap_blue_green(img: &RgbImage) -> RgbImage {
    img.map_pixels(|[r, g, b]| [r, b, g])
}

/// Luma equalization confined to one glare tile. The caller has already
/// swapped blue and green on the full image.
pub fn preprocess_glare_tile(tile: &RgbImage) -> RgbImage {
    equalize_luma(tile)
}

/// Which tiles the glare equalization runs on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlareTiles {
    /// Non-overlapping blocks covering the image, before inference tiling.
    #[default]
    Disjoint,
    /// The overlapping inference tiles themselves, after cropping.
    Overlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreprocessStep {
    GlobalEqualization,
    SwapBlueGreen,
    TileEqualization,
}

/// Ordered corrections for one image, split into whole-image work and work
/// that runs on each inference tile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessPlan {
    pub class: LightingClass,
    pub steps: Vec<PreprocessStep>,
    pub glare_tiles: GlareTiles,
    pub block: (u32, u32),
}

impl PreprocessPlan {
    pub fn identity() -> Self {
        Self {
            class: LightingClass::Typical,
            steps: Vec::new(),
            glare_tiles: GlareTiles::Disjoint,
            block: (DEFAULT_TILE, DEFAULT_TILE),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn with_glare_tiles(mut self, mode: GlareTiles) -> Self {
        self.glare_tiles = mode;
        self
    }

    pub fn with_block(mut self, block: (u32, u32)) -> Self {
        self.block = block;
        self
    }

    /// Whole-image part of the plan. In `Overlap` mode the tile
    /// equalization is deferred to [`PreprocessPlan::apply_tile`].
    pub fn apply_image(&self, img: &RgbImage) -> RgbImage {
        let mut out = img.clone();
        for step in &self.steps {
            out = match step {
                PreprocessStep::GlobalEqualization => preprocess_overexposed(&out),
                PreprocessStep::SwapBlueGreen => swap_blue_green(&out),
                PreprocessStep::TileEqualization if self.glare_tiles == GlareTiles::Disjoint => {
                    equalize_blocks(out, self.block)
                }
                PreprocessStep::TileEqualization => out,
            };
        }
        out
    }

    /// Per-inference-tile part of the plan; identity unless glare
    /// equalization runs on overlapping tiles.
    pub fn apply_tile(&self, tile: &RgbImage) -> RgbImage {
        if self.needs_tile_pass() {
            preprocess_glare_tile(tile)
        } else {
            tile.clone()
        }
    }

    pub fn needs_tile_pass(&self) -> bool {
        self.glare_tiles == GlareTiles::Overlap && self.steps.contains(&PreprocessStep::TileEqualization)
    }
}

/// Correction plan for an image of the given lighting class.
pub fn preprocess_for(class: LightingClass) -> PreprocessPlan {
    let steps = match class {
        LightingClass::Typical => vec![],
        LightingClass::Overexposed => vec![PreprocessStep::GlobalEqualization],
        LightingClass::Glare => vec![PreprocessStep::SwapBlueGreen, PreprocessStep::TileEqualization],
    };
    PreprocessPlan {
        class,
        steps,
        ..PreprocessPlan::identity()
    }
}

fn equalize_blocks(mut img: RgbImage, block: (u32, u32)) -> RgbImage {
    for rect in disjoint_blocks(img.width(), img.height(), block) {
        equalize_luma_in(&mut img, rect);
    }
    img
}
