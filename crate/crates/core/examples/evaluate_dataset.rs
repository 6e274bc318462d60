//! Synthesizes a dataset, detects on every image, and prints the
//! evaluation per lighting condition with and without preprocessing.

use anyhow::Result;
use kiwi_calyx::commands::{cmd_detect, cmd_evaluate, cmd_synth, Averaging, DetectInput, DetectOptions, SynthOptions};
use kiwi_calyx::pipeline::{PipelineConfig, PreprocessMode};
use kiwi_calyx::synth::SceneSpec;
use kiwi_calyx::LightingClass;

pub fn main() -> Result<()> {
    let root = std::env::temp_dir().join("kiwi-calyx-examples").join("evaluate");
    let manifest = cmd_synth(&SynthOptions {
        out_dir: root.join("data"),
        count: 6,
        lighting: LightingClass::ALL.to_vec(),
        base: SceneSpec {
            occluded_fraction: 0.22,
            ..Default::default()
        },
        seed: 20,
    })?;
    for (label, mode) in [("auto", PreprocessMode::Auto), ("off", PreprocessMode::Off)] {
        let cfg = PipelineConfig {
            preprocess: mode,
            ..Default::default()
        };
        let dets = root.join(format!("dets_{label}"));
        let opts = DetectOptions {
            out_dir: Some(dets.clone()),
            dump_tiles: false,
        };
        cmd_detect(&cfg, &DetectInput::from_manifest(&manifest), &opts)?;
        let report = cmd_evaluate(&manifest, &dets, &cfg, Averaging::Micro)?;
        println!("preprocessing {label}");
        for (lighting, g) in &report.per_lighting {
            println!(
                "  {:<12} R {:.2} P {:.2} F1 {:.2}",
                lighting.name(),
                g.metrics.recall,
                g.metrics.precision,
                g.metrics.f1
            );
        }
        if let Some(o) = &report.occlusion {
            println!(
                "  visible {:.1}% of truth, recall visible {:.2} occluded {:.2}",
                100.0 * o.percent_non_occluded,
                o.recall_non_occluded,
                o.recall_occluded
            );
        }
    }
    Ok(())
}
