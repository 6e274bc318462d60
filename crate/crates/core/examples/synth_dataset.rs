//! Writes a small mixed-lighting dataset: PNG scenes, annotation JSON and a
//! manifest.

use anyhow::Result;
use kiwi_calyx::commands::{cmd_synth, SynthOptions};
use kiwi_calyx::synth::SceneSpec;
use kiwi_calyx::LightingClass;

pub fn main() -> Result<()> {
    let out_dir = std::env::temp_dir().join("kiwi-calyx-examples").join("dataset");
    let manifest = cmd_synth(&SynthOptions {
        out_dir: out_dir.clone(),
        count: 6,
        lighting: LightingClass::ALL.to_vec(),
        base: SceneSpec {
            width: 960,
            height: 640,
            n_calyces: 25,
            occluded_fraction: 0.2,
            ..Default::default()
        },
        seed: 100,
    })?;
    for e in &manifest.entries {
        println!("{} {} {:?}", e.image.display(), e.annotation.display(), e.lighting);
    }
    println!("manifest at {}", out_dir.join("manifest.json").display());
    Ok(())
}
