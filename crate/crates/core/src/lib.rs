//! Kiwifruit calyx detection from below-canopy images.
//!
//! The pipeline classifies the lighting of an image, applies a matching
//! correction, segments it in overlapping tiles through a pluggable backend,
//! merges the tiles by maximum confidence and extracts round calyx blobs.
//! [`eval`] scores detections against boxed ground truth, and [`synth`]
//! paints synthetic canopies with exact ground truth for end-to-end checks.
//!
//! ```
//! use kiwi_calyx::pipeline::{run_pipeline, PipelineConfig};
//! use kiwi_calyx::segmentation::ReferenceSegmenter;
//! use kiwi_calyx::synth::{generate_scene, SceneSpec};
//!
//! let scene = generate_scene(&SceneSpec { width: 600, height: 400, n_calyces: 5, ..Default::default() })?;
//! let out = run_pipeline(&scene.image, &PipelineConfig::default(), &ReferenceSegmenter::default())?;
//! assert_eq!(out.detections.len(), 5);
//! # Ok::<(), kiwi_calyx::Error>(())
//! ```

pub mod annotation;
pub mod blobs;
pub mod commands;
pub mod error;
pub mod eval;
pub mod image;
pub mod lighting;
pub mod manifest;
pub mod maps;
pub mod overlay;
pub mod pipeline;
pub mod preprocess;
pub mod segmentation;
pub mod synth;
pub mod tiling;

pub use annotation::{Detection, GroundTruthBox, Occluder};
pub use error::{Error, Result};
pub use image::{load_image, save_image, RgbImage};
pub use lighting::LightingClass;
pub use maps::{ClassId, ClassMap, ProbMap};
pub use pipeline::{run_pipeline, PipelineConfig};
