//! Replays precomputed probability maps through the pipeline. The maps are
//! produced here by the reference rules, standing in for an external model
//! that writes one `tile_<i>.pmap` per tile.

use anyhow::Result;
use kiwi_calyx::segmentation::{default_rules, reference_segment, write_pmap, PmapSegmenter, ReferenceSegmenter};
use kiwi_calyx::synth::{generate_scene, SceneSpec};
use kiwi_calyx::tiling::{extract_tile, plan_tiles};
use kiwi_calyx::{run_pipeline, PipelineConfig};

pub fn main() -> Result<()> {
    let scene = generate_scene(&SceneSpec {
        width: 900,
        height: 700,
        n_calyces: 20,
        seed: 2,
        ..Default::default()
    })?;
    let cfg = PipelineConfig::default();
    let dir = std::env::temp_dir().join("kiwi-calyx-examples").join("pmaps");
    std::fs::create_dir_all(&dir)?;
    let plan = plan_tiles(900, 700, (cfg.tile_width, cfg.tile_height), cfg.overlap)?;
    let rules = default_rules();
    for (i, rect) in plan.rects.iter().enumerate() {
        let pm = reference_segment(&rules, &extract_tile(&scene.image, *rect)?);
        write_pmap(&pm, dir.join(format!("tile_{i}.pmap")))?;
    }
    let replayed = run_pipeline(&scene.image, &cfg, &PmapSegmenter::new(&dir))?;
    let live = run_pipeline(&scene.image, &cfg, &ReferenceSegmenter::default())?;
    println!("{} tiles written to {}", plan.len(), dir.display());
    println!(
        "replayed {} detections, live {} detections, identical: {}",
        replayed.detections.len(),
        live.detections.len(),
        replayed.detections == live.detections
    );
    Ok(())
}
