//! The full per-image detection pipeline:
//! classify, preprocess, tile, segment, merge, blobs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::Detection;
use crate::blobs::{detect_calyces, BlobConfig};
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::image::RgbImage;
use crate::lighting::{classify_image, LightingClass, SaturationRule, SaturationStats, DEFAULT_SAT_THRESHOLD};
use crate::maps::{argmax_classmap, ClassMap};
use crate::preprocess::{preprocess_for, GlareTiles, PreprocessPlan};
use crate::segmentation::{segment, PmapSegmenter, ReferenceSegmenter, Segmenter};
use crate::tiling::{extract_tile, merge_class_maps, plan_tiles, TilePlan, DEFAULT_OVERLAP, DEFAULT_TILE};

/// Whether lighting-specific preprocessing runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreprocessMode {
    /// Correction chosen by the classified lighting.
    #[default]
    Auto,
    /// No correction at all; segmentation sees the raw image.
    Off,
    /// Correction for the given class regardless of the classifier.
    Force(LightingClass),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendConfig {
    #[default]
    Reference,
    /// Probability maps on disk. For an image `a/b/name.png` the maps are
    /// read from `<dir>/name/` when that directory exists, else from `<dir>`.
    Pmap { dir: PathBuf },
}

impl BackendConfig {
    pub fn for_image(&self, image: &Path) -> Box<dyn Segmenter> {
        match self {
            BackendConfig::Reference => Box::new(ReferenceSegmenter::default()),
            BackendConfig::Pmap { dir } => {
                let sub = image.file_stem().map(|s| dir.join(s));
                match sub {
                    Some(s) if s.is_dir() => Box::new(PmapSegmenter::new(s)),
                    _ => Box::new(PmapSegmenter::new(dir.clone())),
                }
            }
        }
    }
}

/// `reference` or `pmap:<dir>`.
impl std::str::FromStr for BackendConfig {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "reference" => Ok(BackendConfig::Reference),
            Some(("pmap", dir)) if !dir.is_empty() => Ok(BackendConfig::Pmap { dir: dir.into() }),
            _ => Err(format!("unknown backend '{s}', expected reference or pmap:<dir>")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub backend: BackendConfig,
    pub tile_width: u32,
    pub tile_height: u32,
    pub overlap: f64,
    pub sat_threshold: u8,
    pub saturation_rule: SaturationRule,
    pub preprocess: PreprocessMode,
    pub glare_tiles: GlareTiles,
    pub blobs: BlobConfig,
    pub eval: EvalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            backend: BackendConfig::Reference,
            tile_width: DEFAULT_TILE,
            tile_height: DEFAULT_TILE,
            overlap: DEFAULT_OVERLAP,
            sat_threshold: DEFAULT_SAT_THRESHOLD,
            saturation_rule: SaturationRule::Intersection,
            preprocess: PreprocessMode::Auto,
            glare_tiles: GlareTiles::Disjoint,
            blobs: BlobConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tile_width == 0 || self.tile_height == 0 {
            return Err(Error::InvalidParam("tile size must be positive".into()));
        }
        if self.sat_threshold == 0 {
            return Err(Error::InvalidParam("saturation threshold must be at least 1".into()));
        }
        self.blobs.validate()?;
        self.eval.validate()?;
        // Overlap is checked against the tile size by the planner.
        plan_tiles(
            self.tile_width,
            self.tile_height,
            (self.tile_width, self.tile_height),
            self.overlap,
        )?;
        Ok(())
    }

    /// Correction plan for an image the classifier labelled `class`.
    pub fn preprocess_plan(&self, class: LightingClass) -> PreprocessPlan {
        let plan = match self.preprocess {
            PreprocessMode::Auto => preprocess_for(class),
            PreprocessMode::Off => PreprocessPlan::identity(),
            PreprocessMode::Force(forced) => preprocess_for(forced),
        };
        plan.with_glare_tiles(self.glare_tiles)
            .with_block((self.tile_width, self.tile_height))
    }
}

/// Wall-clock milliseconds spent in each stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub classify_ms: f64,
    pub preprocess_ms: f64,
    pub tile_ms: f64,
    pub segment_ms: f64,
    pub merge_ms: f64,
    pub blobs_ms: f64,
    pub total_ms: f64,
}

impl StageTimings {
    pub fn add(&mut self, o: &StageTimings) {
        self.classify_ms += o.classify_ms;
        self.preprocess_ms += o.preprocess_ms;
        self.tile_ms += o.tile_ms;
        self.segment_ms += o.segment_ms;
        self.merge_ms += o.merge_ms;
        self.blobs_ms += o.blobs_ms;
        self.total_ms += o.total_ms;
    }

    pub fn scaled(&self, k: f64) -> StageTimings {
        StageTimings {
            classify_ms: self.classify_ms * k,
            preprocess_ms: self.preprocess_ms * k,
            tile_ms: self.tile_ms * k,
            segment_ms: self.segment_ms * k,
            merge_ms: self.merge_ms * k,
            blobs_ms: self.blobs_ms * k,
            total_ms: self.total_ms * k,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub stats: SaturationStats,
    pub lighting: LightingClass,
    pub preprocess: PreprocessPlan,
    pub tiles: TilePlan,
    pub merged: ClassMap,
    pub detections: Vec<Detection>,
    pub timings: StageTimings,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs every stage on one image. Tiles are segmented on the current rayon
/// pool; the result does not depend on scheduling.
pub fn run_pipeline(img: &RgbImage, cfg: &PipelineConfig, backend: &dyn Segmenter) -> Result<PipelineOutput> {
    let start = Instant::now();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let (stats, lighting) = classify_image(img, cfg.sat_threshold, cfg.saturation_rule);
    timings.classify_ms = ms(t);

    let t = Instant::now();
    let plan = cfg.preprocess_plan(lighting);
    let prepared = if plan.is_identity() {
        None
    } else {
        Some(plan.apply_image(img))
    };
    let prepared = prepared.as_ref().unwrap_or(img);
    timings.preprocess_ms = ms(t);

    let t = Instant::now();
    let tiles = plan_tiles(
        img.width(),
        img.height(),
        (cfg.tile_width, cfg.tile_height),
        cfg.overlap,
    )?;
    let crops = tiles
        .rects
        .iter()
        .map(|r| extract_tile(prepared, *r))
        .collect::<Result<Vec<_>>>()?;
    timings.tile_ms = ms(t);

    let t = Instant::now();
    let class_maps = crops
        .par_iter()
        .enumerate()
        .map(|(i, crop)| {
            let pm = if plan.needs_tile_pass() {
                segment(backend, &plan.apply_tile(crop), i)?
            } else {
                segment(backend, crop, i)?
            };
            Ok(argmax_classmap(&pm))
        })
        .collect::<Result<Vec<_>>>()?;
    timings.segment_ms = ms(t);

    let t = Instant::now();
    let merged = merge_class_maps(&tiles, &class_maps)?;
    timings.merge_ms = ms(t);

    let t = Instant::now();
    let detections = detect_calyces(&merged, &cfg.blobs);
    timings.blobs_ms = ms(t);
    timings.total_ms = ms(start);

    Ok(PipelineOutput {
        stats,
        lighting,
        preprocess: plan,
        tiles,
        merged,
        detections,
        timings,
    })
}

/// Stage timings of one pipeline run.
pub fn time_pipeline(img: &RgbImage, cfg: &PipelineConfig, backend: &dyn Segmenter) -> Result<StageTimings> {
    Ok(run_pipeline(img, cfg, backend)?.timings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_scene, SceneSpec};

    #[test]
    fn defaults_match_reference_settings() {
        let c = PipelineConfig::default();
        assert_eq!((c.tile_width, c.tile_height, c.overlap), (500, 500, 0.2));
        assert_eq!((c.blobs.min_area, c.blobs.min_circularity), (150, 0.5));
        assert_eq!((c.eval.match_threshold, c.sat_threshold), (20.0, 255));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn config_json_overrides() {
        let c: PipelineConfig =
            serde_json::from_str(r#"{"overlap":0.3,"preprocess":"off","blobs":{"min_area":50}}"#).unwrap();
        assert_eq!(c.overlap, 0.3);
        assert_eq!(c.preprocess, PreprocessMode::Off);
        assert_eq!(c.blobs.min_area, 50);
        assert_eq!(c.blobs.min_circularity, 0.5);
        let forced: PipelineConfig = serde_json::from_str(r#"{"preprocess":{"force":"glare"}}"#).unwrap();
        assert_eq!(forced.preprocess, PreprocessMode::Force(LightingClass::Glare));
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"bogus":1}"#).is_err());
        let bad = PipelineConfig {
            overlap: 0.95,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn backend_from_str() {
        assert_eq!("reference".parse::<BackendConfig>(), Ok(BackendConfig::Reference));
        assert_eq!(
            "pmap:maps/run1".parse::<BackendConfig>(),
            Ok(BackendConfig::Pmap {
                dir: "maps/run1".into()
            })
        );
        assert!("pmap:".parse::<BackendConfig>().is_err());
        assert!("neural".parse::<BackendConfig>().is_err());
    }

    #[test]
    fn small_scene_end_to_end() {
        let spec = SceneSpec {
            width: 640,
            height: 480,
            n_calyces: 8,
            seed: 4,
            ..Default::default()
        };
        let scene = generate_scene(&spec).unwrap();
        let out = run_pipeline(&scene.image, &PipelineConfig::default(), &ReferenceSegmenter::default()).unwrap();
        assert_eq!(out.lighting, LightingClass::Typical);
        assert_eq!(out.detections.len(), 8);
        assert_eq!(out.tiles.len(), 2);
    }
}
