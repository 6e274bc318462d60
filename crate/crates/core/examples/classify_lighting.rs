//! Classifies one synthetic scene per lighting condition and prints the
//! channel saturation ratios the decision is based on.

use anyhow::Result;
use kiwi_calyx::lighting::{classify_image, SaturationRule};
use kiwi_calyx::synth::{generate_scene, SceneSpec};
use kiwi_calyx::LightingClass;

pub fn main() -> Result<()> {
    println!(
        "{:<12} {:<12} {:>7} {:>7} {:>7} {:>7}",
        "rendered", "classified", "R", "G", "B", "RGB"
    );
    for lighting in LightingClass::ALL {
        let scene = generate_scene(&SceneSpec {
            width: 800,
            height: 600,
            n_calyces: 20,
            lighting,
            seed: 7,
            ..Default::default()
        })?;
        let (stats, class) = classify_image(&scene.image, 255, SaturationRule::Intersection);
        println!(
            "{:<12} {:<12} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
            lighting.name(),
            class.name(),
            stats.r_ratio(),
            stats.g_ratio(),
            stats.b_ratio(),
            stats.tri_ratio()
        );
    }
    Ok(())
}
