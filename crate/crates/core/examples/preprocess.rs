//! Lighting correction on a glare scene: channel swap on the whole image,
//! then luma equalization per 500x500 block. Writes before and after PNGs.

use anyhow::Result;
use kiwi_calyx::lighting::{classify_image, SaturationRule};
use kiwi_calyx::preprocess::preprocess_for;
use kiwi_calyx::synth::{generate_scene, SceneSpec};
use kiwi_calyx::{save_image, LightingClass};

pub fn main() -> Result<()> {
    let out = std::env::temp_dir().join("kiwi-calyx-examples");
    std::fs::create_dir_all(&out)?;
    let scene = generate_scene(&SceneSpec {
        lighting: LightingClass::Glare,
        seed: 3,
        ..Default::default()
    })?;
    let (before, class) = classify_image(&scene.image, 255, SaturationRule::Intersection);
    let plan = preprocess_for(class);
    let fixed = plan.apply_image(&scene.image);
    let (after, _) = classify_image(&fixed, 255, SaturationRule::Intersection);
    println!("classified {class}, steps {:?}", plan.steps);
    println!("blue saturated share {:.3} -> {:.3}", before.b_ratio(), after.b_ratio());
    save_image(&scene.image, out.join("glare_before.png"))?;
    save_image(&fixed, out.join("glare_after.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
