//! Segmentation backends: anything that turns an RGB tile into per-pixel
//! class probabilities.
//!
//! Two backends ship with the crate: [`ReferenceSegmenter`], a per-pixel
//! chroma classifier matched to the synthetic scene palette, and
//! [`PmapSegmenter`], which replays probability maps computed elsewhere.

mod pmap;
mod reference;

use serde::{Deserialize, Serialize};

pub use pmap::{file_backend_segment, read_pmap, write_pmap, PmapSegmenter, PMAP_MAGIC, PMAP_TOLERANCE};
pub use reference::{default_rules, reference_segment, ChromaRule, ReferenceSegmenter, RULE_PROBABILITY};

use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::maps::{ProbMap, NUM_CLASSES};
use crate::tiling::DEFAULT_TILE;

/// Largest tile a backend accepts and the number of classes it emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmenterContract {
    pub max_tile_w: u32,
    pub max_tile_h: u32,
    pub classes: usize,
}

impl Default for SegmenterContract {
    fn default() -> Self {
        Self {
            max_tile_w: DEFAULT_TILE,
            max_tile_h: DEFAULT_TILE,
            classes: NUM_CLASSES,
        }
    }
}

/// A deterministic tile segmenter. Implementations must return identical
/// maps for identical inputs and tolerate concurrent calls.
pub trait Segmenter: Send + Sync {
    fn contract(&self) -> SegmenterContract {
        SegmenterContract::default()
    }

    /// Probabilities for `tile`, the `tile_index`-th crop of the current image.
    fn segment_tile(&self, tile: &RgbImage, tile_index: usize) -> Result<ProbMap>;
}

/// Runs `backend` on `tile` while enforcing the contract: the tile must fit
/// the backend's size limit and the result must match the tile's shape.
pub fn segment(backend: &dyn Segmenter, tile: &RgbImage, tile_index: usize) -> Result<ProbMap> {
    let c = backend.contract();
    if tile.width() > c.max_tile_w || tile.height() > c.max_tile_h {
        return Err(Error::TileTooLarge {
            width: tile.width(),
            height: tile.height(),
            max_width: c.max_tile_w,
            max_height: c.max_tile_h,
        });
    }
    let pm = backend.segment_tile(tile, tile_index)?;
    if pm.width() != tile.width() || pm.height() != tile.height() {
        return Err(Error::BackendFailure(format!(
            "backend returned {}x{} for a {}x{} tile",
            pm.width(),
            pm.height(),
            tile.width(),
            tile.height()
        )));
    }
    Ok(pm)
}
