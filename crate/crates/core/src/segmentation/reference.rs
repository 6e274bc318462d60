use serde::{Deserialize, Serialize};

use super::Segmenter;
use crate::error::Result;
use crate::image::RgbImage;
use crate::maps::{ClassId, ProbMap, NUM_CLASSES};
use crate::synth::palette;

/// Probability assigned to the class of the matching rule.
pub const RULE_PROBABILITY: f32 = 0.99;

/// Colour rule for the reference segmenter.
///
/// Matching is done on chroma: both the pixel and `center` have their
/// channel mean subtracted, and every channel offset must lie within
/// `tolerance` of the centre's offset. Adding the same amount to all three
/// channels (which is what luma equalization does, up to clipping) leaves
/// the outcome unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChromaRule {
    pub class: ClassId,
    pub center: [u8; 3],
    pub tolerance: [u8; 3],
}

impl ChromaRule {
    pub fn new(class: ClassId, center: [u8; 3], tolerance: [u8; 3]) -> Self {
        Self {
            class,
            center,
            tolerance,
        }
    }

    /// Rule that claims every pixel; used as the background catch-all.
    pub fn catch_all(class: ClassId) -> Self {
        Self::new(class, [128, 128, 128], [255, 255, 255])
    }

    #[inline]
    pub fn matches(&self, px: [u8; 3]) -> bool {
        // Compare 3 * (channel - mean) in integers.
        let sp: i32 = px.iter().map(|&v| v as i32).sum();
        let sc: i32 = self.center.iter().map(|&v| v as i32).sum();
        (0..3).all(|c| {
            let op = 3 * px[c] as i32 - sp;
            let oc = 3 * self.center[c] as i32 - sc;
            (op - oc).abs() <= 3 * self.tolerance[c] as i32
        })
    }
}

/// Rules matched to the synthetic scene palette: calyx, branch, wire, then
/// background for everything else.
pub fn default_rules() -> Vec<ChromaRule> {
    vec![
        ChromaRule::new(
            ClassId::Calyx,
            palette::CALYX_RULE_CENTER,
            palette::CALYX_RULE_TOLERANCE,
        ),
        ChromaRule::new(ClassId::Branch, palette::BRANCH, [12, 12, 12]),
        ChromaRule::new(ClassId::Wire, palette::WIRE, [12, 12, 12]),
        ChromaRule::catch_all(ClassId::Background),
    ]
}

fn class_row(class: ClassId) -> [f32; NUM_CLASSES] {
    let rest = (1.0 - RULE_PROBABILITY) / (NUM_CLASSES - 1) as f32;
    let mut row = [rest; NUM_CLASSES];
    row[class.index()] = RULE_PROBABILITY;
    row
}

/// Labels each pixel with the first matching rule at probability 0.99 and
/// spreads the remainder evenly. Pixels no rule claims fall to background.
pub fn reference_segment(rules: &[ChromaRule], tile: &RgbImage) -> ProbMap {
    let rows: Vec<[f32; NUM_CLASSES]> = rules.iter().map(|r| class_row(r.class)).collect();
    let fallback = class_row(ClassId::Background);
    let mut values = Vec::with_capacity(tile.area() * NUM_CLASSES);
    for px in tile.pixels() {
        let row = rules.iter().position(|r| r.matches(px)).map_or(&fallback, |i| &rows[i]);
        values.extend_from_slice(row);
    }
    ProbMap::new(tile.width(), tile.height(), values).expect("rows are normalized")
}

/// Deterministic stand-in for a trained network on synthetic scenes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceSegmenter {
    pub rules: Vec<ChromaRule>,
}

impl Default for ReferenceSegmenter {
    fn default() -> Self {
        Self { rules: default_rules() }
    }
}

impl Segmenter for ReferenceSegmenter {
    fn segment_tile(&self, tile: &RgbImage, _tile_index: usize) -> Result<ProbMap> {
        Ok(reference_segment(&self.rules, tile))
    }
}
