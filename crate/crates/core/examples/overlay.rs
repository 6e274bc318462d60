//! Renders detections over an occluded scene: matched calyces green,
//! false positives red, missed truth yellow.

use anyhow::Result;
use kiwi_calyx::eval::EvalConfig;
use kiwi_calyx::overlay::render_overlay;
use kiwi_calyx::segmentation::ReferenceSegmenter;
use kiwi_calyx::synth::{generate_scene, SceneSpec};
use kiwi_calyx::{run_pipeline, save_image, PipelineConfig};

pub fn main() -> Result<()> {
    let scene = generate_scene(&SceneSpec {
        width: 1000,
        height: 700,
        n_calyces: 30,
        occluded_fraction: 0.3,
        seed: 5,
        ..Default::default()
    })?;
    let out = run_pipeline(&scene.image, &PipelineConfig::default(), &ReferenceSegmenter::default())?;
    let img = render_overlay(
        &scene.image,
        &out.detections,
        Some(&scene.truth),
        &EvalConfig::default(),
    );
    let dir = std::env::temp_dir().join("kiwi-calyx-examples");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("overlay.png");
    save_image(&img, &path)?;
    println!("{} detections drawn to {}", out.detections.len(), path.display());
    Ok(())
}
