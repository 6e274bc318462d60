//! End-to-end acceptance checks. Runs serially with a custom main so the
//! timing budgets are measured on one worker thread.

mod common;

use std::path::Path;
use std::time::Instant;

use anyhow::{ensure, Result};
use kiwi_calyx::annotation::{save_annotations, GroundTruthBox, Occluder};
use kiwi_calyx::commands::{cmd_detect, cmd_evaluate, cmd_synth, Averaging, DetectInput, DetectOptions, SynthOptions};
use kiwi_calyx::eval::{density, hungarian_assign, match_detections, EvalConfig, Metrics, OcclusionTally};
use kiwi_calyx::lighting::{classify_lighting, saturation_stats};
use kiwi_calyx::manifest::{DatasetManifest, ManifestEntry};
use kiwi_calyx::pipeline::{run_pipeline, PreprocessMode, StageTimings};
use kiwi_calyx::preprocess::{
    equalize_histogram, rgb_to_ycbcr_pixel, swap_blue_green, ycbcr_to_rgb_pixel, EqualizationLut,
};
use kiwi_calyx::segmentation::ReferenceSegmenter;
use kiwi_calyx::synth::{generate_scene, SceneRng, SceneSpec};
use kiwi_calyx::tiling::plan_tiles;
use kiwi_calyx::{LightingClass, PipelineConfig, RgbImage};

type Outcome = Result<String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn check(cond: bool, detail: String) -> Outcome {
    ensure!(cond, "{detail}");
    Ok(detail)
}

fn metric_arithmetic() -> Outcome {
    let rows = [
        (0.74, 0.92, 0.82),
        (0.41, 0.70, 0.52),
        (0.45, 0.70, 0.55),
        (0.07, 0.64, 0.13),
        (0.30, 0.71, 0.42),
    ];
    let mut worst: f64 = 0.0;
    for (r, p, f) in rows {
        worst = worst.max((Metrics::from_rates(r, p).f1 - f).abs());
    }
    check(worst <= 0.005, format!("5 rows, worst F1 deviation {worst:.4}"))
}

fn hungarian_oracle() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for seed in 0..200 {
        let c = common::random_matrix(&mut SceneRng::new(seed));
        if hungarian_assign(&c).total != common::brute_force_min(&c) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        mismatches == 0 && secs < 5.0,
        format!("200 matrices, {mismatches} mismatches, {secs:.3} s"),
    )
}

/// Exact pixel coverage: the rect edges cut the image into cells that are
/// each either fully inside or fully outside every rect.
fn fully_covered(w: u32, h: u32) -> Result<bool> {
    let plan = plan_tiles(w, h, (500, 500), 0.2)?;
    let cuts = |edges: Vec<u32>, extent: u32| {
        let mut c: Vec<u32> = edges.into_iter().chain([0, extent]).collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    let xs = cuts(plan.rects.iter().flat_map(|r| [r.x0, r.x1()]).collect(), w);
    let ys = cuts(plan.rects.iter().flat_map(|r| [r.y0, r.y1()]).collect(), h);
    for y in ys.windows(2) {
        for x in xs.windows(2) {
            if !plan.rects.iter().any(|r| r.fits(w, h) && r.contains(x[0], y[0])) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn tiling() -> Outcome {
    let plan = plan_tiles(1936, 1216, (500, 500), 0.2)?;
    let layout_ok =
        plan.len() == 15 && plan.x_anchors() == [0, 400, 800, 1200, 1436] && plan.y_anchors() == [0, 400, 716];
    let mut rng = SceneRng::new(31);
    let mut uncovered = 0;
    for _ in 0..500 {
        let (w, h) = (1 + rng.below(3000) as u32, 1 + rng.below(3000) as u32);
        uncovered += !fully_covered(w, h)? as usize;
    }
    check(
        layout_ok && uncovered == 0,
        format!(
            "{} tiles, x {:?}, y {:?}; 500 random sizes, {uncovered} with gaps",
            plan.len(),
            plan.x_anchors(),
            plan.y_anchors()
        ),
    )
}

fn image_with(counts: &[(usize, [u8; 3])]) -> Result<RgbImage> {
    let mut px = Vec::new();
    for &(n, c) in counts {
        px.extend(std::iter::repeat_n(c, n));
    }
    Ok(RgbImage::from_raw(px.len() as u32, 1, px.concat())?)
}

fn classifier_boundaries() -> Outcome {
    let white = [255, 255, 255];
    let blue = [10, 10, 255];
    let grey = [120, 120, 120];
    let cases = [
        (vec![(25, white), (75, grey)], LightingClass::Overexposed),
        (vec![(25, white), (25, blue), (50, grey)], LightingClass::Glare),
        (vec![(24, white), (26, blue), (50, grey)], LightingClass::Typical),
        (vec![(25, white), (24, blue), (51, grey)], LightingClass::Overexposed),
        (vec![(100, grey)], LightingClass::Typical),
    ];
    let mut wrong = Vec::new();
    for (i, (counts, want)) in cases.iter().enumerate() {
        let got = classify_lighting(&saturation_stats(&image_with(counts)?, 255));
        if got != *want {
            wrong.push(format!("case {i}: {got} != {want}"));
        }
    }
    check(
        wrong.is_empty(),
        format!(
            "{} boundary cases, {} misclassified {:?}",
            cases.len(),
            wrong.len(),
            wrong
        ),
    )
}

fn preprocessing() -> Outcome {
    let mut rng = SceneRng::new(5);
    let (mut non_monotone, mut idem_dev) = (0, 0i32);
    for _ in 0..1000 {
        let n = 1 + rng.below(4096);
        let lo = rng.below(200) as u64;
        let span = 1 + rng.below(256 - lo as usize) as u64;
        let plane: Vec<u8> = (0..n).map(|_| (lo + rng.next_u64() % span) as u8).collect();
        non_monotone += !EqualizationLut::for_plane(&plane).is_monotone() as usize;
        let (once, _) = equalize_histogram(&plane);
        let (twice, _) = equalize_histogram(&once);
        for (a, b) in once.iter().zip(&twice) {
            idem_dev = idem_dev.max((*a as i32 - *b as i32).abs());
        }
    }
    let img = RgbImage::from_fn(300, 200, |_, _| {
        let v = rng.next_u64();
        [v as u8, (v >> 8) as u8, (v >> 16) as u8]
    })?;
    let involution = swap_blue_green(&swap_blue_green(&img)) == img;
    let mut rt_dev = 0i32;
    for _ in 0..100_000 {
        let v = rng.next_u64();
        let p = [v as u8, (v >> 8) as u8, (v >> 16) as u8];
        let back = ycbcr_to_rgb_pixel(rgb_to_ycbcr_pixel(p));
        for c in 0..3 {
            rt_dev = rt_dev.max((back[c] as i32 - p[c] as i32).abs());
        }
    }
    check(
        non_monotone == 0 && idem_dev <= 1 && involution && rt_dev <= 1,
        format!(
            "1000 planes: {non_monotone} non-monotone LUTs, re-equalization max dev {idem_dev}; \
             swap involution {involution}; 1e5 pixels YCbCr round-trip max dev {rt_dev}"
        ),
    )
}

#[derive(Default)]
struct Tally {
    tp: u64,
    fp: u64,
    fn_: u64,
    occlusion: OcclusionTally,
}

impl Tally {
    fn metrics(&self) -> Metrics {
        Metrics::from_counts(self.tp, self.fp, self.fn_)
    }
}

fn evaluate_scenes(spec: &SceneSpec, seeds: std::ops::Range<u64>, cfg: &PipelineConfig) -> Result<Tally> {
    let backend = ReferenceSegmenter::default();
    let mut t = Tally::default();
    for seed in seeds {
        let scene = generate_scene(&SceneSpec { seed, ..spec.clone() })?;
        let out = run_pipeline(&scene.image, cfg, &backend)?;
        let m = match_detections(&out.detections, &scene.truth, &EvalConfig::default());
        t.tp += m.tp;
        t.fp += m.fp;
        t.fn_ += m.fn_;
        t.occlusion.add(&OcclusionTally::from_match(&m, &scene.truth)?);
    }
    Ok(t)
}

fn typical_end_to_end() -> Outcome {
    let cfg = PipelineConfig::default();
    let clean = evaluate_scenes(&SceneSpec::default(), 100..120, &cfg)?.metrics();
    let occluded_spec = SceneSpec {
        occluded_fraction: 0.22,
        ..Default::default()
    };
    let split = evaluate_scenes(&occluded_spec, 200..220, &cfg)?.occlusion.breakdown();
    check(
        clean.recall >= 0.95
            && clean.precision >= 0.95
            && split.recall_non_occluded >= 0.9
            && split.recall_occluded < split.recall_non_occluded,
        format!(
            "clean R {:.3} P {:.3}; 22% occluded: visible R {:.3}, occluded R {:.3}",
            clean.recall, clean.precision, split.recall_non_occluded, split.recall_occluded
        ),
    )
}

fn glare_recovery() -> Outcome {
    let spec = SceneSpec {
        lighting: LightingClass::Glare,
        ..Default::default()
    };
    let with = evaluate_scenes(&spec, 300..310, &PipelineConfig::default())?.metrics();
    let off = PipelineConfig {
        preprocess: PreprocessMode::Off,
        ..Default::default()
    };
    let without = evaluate_scenes(&spec, 300..310, &off)?.metrics();
    let gain = with.recall - without.recall;
    check(
        without.f1 < with.f1 && gain >= 0.15,
        format!(
            "F1 {:.3} -> {:.3}, recall {:.3} -> {:.3} (gain {gain:.3})",
            without.f1, with.f1, without.recall, with.recall
        ),
    )
}

fn occlusion_bookkeeping(dir: &Path) -> Outcome {
    let data = dir.join("occluded");
    let manifest = cmd_synth(&SynthOptions {
        out_dir: data.clone(),
        count: 6,
        lighting: vec![LightingClass::Typical],
        base: SceneSpec {
            occluded_fraction: 0.22,
            ..Default::default()
        },
        seed: 400,
    })?;
    let cfg = PipelineConfig::default();
    let dets = dir.join("occluded_dets");
    let run = cmd_detect(
        &cfg,
        &DetectInput::from_manifest(&manifest),
        &DetectOptions {
            out_dir: Some(dets.clone()),
            dump_tiles: false,
        },
    )?;
    ensure!(run.failed == 0, "{} images failed detection", run.failed);
    let report = cmd_evaluate(&manifest, &dets, &cfg, Averaging::Micro)?;
    let pct = report.occlusion.map_or(f64::NAN, |o| o.percent_non_occluded);
    check(
        (pct - 0.78).abs() <= 0.02,
        format!("percent_non_occluded {pct:.4} over {} images", report.images.len()),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn throughput() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let backend = ReferenceSegmenter::default();
    let cfg = PipelineConfig::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for (lighting, pre_budget) in [
        (LightingClass::Typical, f64::INFINITY),
        (LightingClass::Overexposed, 30.0),
        (LightingClass::Glare, 100.0),
    ] {
        let scene = generate_scene(&SceneSpec {
            lighting,
            seed: 500,
            ..Default::default()
        })?;
        let runs: Vec<StageTimings> = pool.install(|| {
            (0..7)
                .map(|_| run_pipeline(&scene.image, &cfg, &backend).map(|o| o.timings))
                .collect::<kiwi_calyx::Result<_>>()
        })?;
        let total = median(runs.iter().map(|t| t.total_ms).collect());
        let pre = median(runs.iter().map(|t| t.preprocess_ms).collect());
        ok &= total <= 2000.0 && pre <= pre_budget;
        lines.push(format!("{lighting} total {total:.0} ms, preprocess {pre:.1} ms"));
    }
    check(ok, format!("1 thread, median of 7: {}", lines.join("; ")))
}

fn density_fixture(dir: &Path) -> Outcome {
    let root = dir.join("density");
    std::fs::create_dir_all(&root)?;
    let mut entries = Vec::new();
    for i in 0..50 {
        let n = if i < 35 { 63 } else { 62 };
        let boxes: Vec<GroundTruthBox> = (0..n)
            .map(|k| GroundTruthBox::new(k * 20, 0, k * 20 + 10, 10, Occluder::None))
            .collect::<kiwi_calyx::Result<_>>()?;
        let annotation = format!("img_{i:02}.json");
        save_annotations(&boxes, root.join(&annotation))?;
        entries.push(ManifestEntry {
            image: format!("img_{i:02}.png").into(),
            annotation: annotation.into(),
            lighting: None,
        });
    }
    let manifest = DatasetManifest::new("density", entries, &root)?;
    manifest.save(root.join("manifest.json"))?;
    let loaded = DatasetManifest::load(root.join("manifest.json"))?;
    let d = density(&loaded)?;
    check(d == 62.7, format!("50 images, 3135 boxes, density {d}"))
}

fn main() -> Result<()> {
    let dir = tempfile::tempdir()?;
    let criteria: Vec<(&str, Criterion)> = vec![
        ("metric arithmetic", Box::new(metric_arithmetic)),
        ("assignment vs brute force", Box::new(hungarian_oracle)),
        ("tiling layout and coverage", Box::new(tiling)),
        ("lighting classifier boundaries", Box::new(classifier_boundaries)),
        ("preprocessing properties", Box::new(preprocessing)),
        ("typical lighting end to end", Box::new(typical_end_to_end)),
        ("glare recovery", Box::new(glare_recovery)),
        ("occlusion bookkeeping", Box::new(|| occlusion_bookkeeping(dir.path()))),
        ("throughput budget", Box::new(throughput)),
        ("density fixture", Box::new(|| density_fixture(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (status, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failed += 1;
                ("FAIL", format!("{e:#}"))
            }
        };
        println!(
            "criterion {:>2} {status} {name}: {detail} [{:.1} s]",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    ensure!(failed == 0, "{failed} acceptance criteria failed");
    Ok(())
}
