//! Full pipeline on one synthetic scene with the reference backend, scored
//! against the scene's own ground truth.

use anyhow::Result;
use kiwi_calyx::eval::{match_detections, metrics, occlusion_breakdown, EvalConfig};
use kiwi_calyx::segmentation::ReferenceSegmenter;
use kiwi_calyx::synth::{generate_scene, SceneSpec};
use kiwi_calyx::{run_pipeline, PipelineConfig};

pub fn main() -> Result<()> {
    let scene = generate_scene(&SceneSpec {
        occluded_fraction: 0.22,
        seed: 11,
        ..Default::default()
    })?;
    let out = run_pipeline(&scene.image, &PipelineConfig::default(), &ReferenceSegmenter::default())?;
    let report = match_detections(&out.detections, &scene.truth, &EvalConfig::default());
    let m = metrics(&report);
    let occ = occlusion_breakdown(&report, &scene.truth)?;
    println!(
        "{} tiles, {} detections for {} calyces ({} occluded)",
        out.tiles.len(),
        out.detections.len(),
        scene.truth.len(),
        occ.occluded
    );
    println!("TP {} FP {} FN {}", report.tp, report.fp, report.fn_);
    println!("recall {:.3} precision {:.3} F1 {:.3}", m.recall, m.precision, m.f1);
    println!(
        "recall on visible {:.3}, on occluded {:.3}",
        occ.recall_non_occluded, occ.recall_occluded
    );
    for d in out.detections.iter().take(3) {
        println!(
            "  ({:.1}, {:.1}) r={:.1} conf={:.2}",
            d.center_x, d.center_y, d.radius, d.confidence
        );
    }
    Ok(())
}
