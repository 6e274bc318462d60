//! Per-stage timings on one worker thread for each lighting condition.

use anyhow::Result;
use kiwi_calyx::eval::{time_pipeline, StageTimings};
use kiwi_calyx::segmentation::ReferenceSegmenter;
use kiwi_calyx::synth::{generate_scene, SceneSpec};
use kiwi_calyx::{LightingClass, PipelineConfig};

const RUNS: usize = 3;

pub fn main() -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let cfg = PipelineConfig::default();
    let backend = ReferenceSegmenter::default();
    println!(
        "{:<12} {:>9} {:>11} {:>8} {:>9} {:>8} {:>8} {:>9}",
        "lighting", "classify", "preprocess", "tile", "segment", "merge", "blobs", "total"
    );
    for lighting in LightingClass::ALL {
        let scene = generate_scene(&SceneSpec {
            lighting,
            seed: 1,
            ..Default::default()
        })?;
        let mut sum = StageTimings::default();
        for _ in 0..RUNS {
            sum.add(&pool.install(|| time_pipeline(&scene.image, &cfg, &backend))?);
        }
        let m = sum.scaled(1.0 / RUNS as f64);
        println!(
            "{:<12} {:>9.1} {:>11.1} {:>8.1} {:>9.1} {:>8.1} {:>8.1} {:>9.1}",
            lighting.name(),
            m.classify_ms,
            m.preprocess_ms,
            m.tile_ms,
            m.segment_ms,
            m.merge_ms,
            m.blobs_ms,
            m.total_ms
        );
    }
    println!("(milliseconds, 1936x1216, mean of {RUNS})");
    Ok(())
}
