//! Batch commands behind the command-line tool. Each returns a
//! serializable report; the binary only parses flags and prints.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::{load_annotations, load_detections, save_annotations, save_detections, Detection};
use crate::error::{Error, Result};
use crate::eval::{match_detections, Metrics, OcclusionBreakdown, OcclusionTally};
use crate::image::{load_image, save_image};
use crate::lighting::{classify_image, LightingClass};
use crate::manifest::{DatasetManifest, ManifestEntry};
use crate::overlay::render_overlay;
use crate::pipeline::{run_pipeline, PipelineConfig, StageTimings};
use crate::preprocess::{GlareTiles, PreprocessStep};
use crate::synth::{generate_scene, SceneSpec};
use crate::tiling::TileRect;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

/// Where `detect` writes, and `evaluate` reads, the detections of `image`.
pub fn detections_path(dir: &Path, image: &Path) -> PathBuf {
    dir.join(format!("{}.json", stem(image)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRecord {
    pub image: PathBuf,
    pub lighting: Option<LightingClass>,
    pub r_ratio: f64,
    pub g_ratio: f64,
    pub b_ratio: f64,
    pub tri_ratio: f64,
    pub error: Option<String>,
}

impl ClassifyRecord {
    /// `path<TAB>class<TAB>r=… g=… b=…`, ratios to four decimals.
    pub fn line(&self) -> String {
        match (&self.lighting, &self.error) {
            (Some(c), _) => format!(
                "{}\t{}\tr={:.4} g={:.4} b={:.4}",
                self.image.display(),
                c,
                self.r_ratio,
                self.g_ratio,
                self.b_ratio
            ),
            (None, e) => format!("{}\terror\t{}", self.image.display(), e.as_deref().unwrap_or("")),
        }
    }
}

pub fn cmd_classify(images: &[PathBuf], cfg: &PipelineConfig) -> Vec<ClassifyRecord> {
    images
        .par_iter()
        .map(|p| match load_image(p) {
            Ok(img) => {
                let (s, c) = classify_image(&img, cfg.sat_threshold, cfg.saturation_rule);
                ClassifyRecord {
                    image: p.clone(),
                    lighting: Some(c),
                    r_ratio: s.r_ratio(),
                    g_ratio: s.g_ratio(),
                    b_ratio: s.b_ratio(),
                    tri_ratio: s.tri_ratio(),
                    error: None,
                }
            }
            Err(e) => ClassifyRecord {
                image: p.clone(),
                lighting: None,
                r_ratio: 0.0,
                g_ratio: 0.0,
                b_ratio: 0.0,
                tri_ratio: 0.0,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessRecord {
    pub lighting: LightingClass,
    pub steps: Vec<PreprocessStep>,
}

/// Writes the corrected image. Glare equalization always uses disjoint
/// blocks here, as there are no inference tiles.
pub fn cmd_preprocess(input: &Path, output: &Path, cfg: &PipelineConfig) -> Result<PreprocessRecord> {
    let img = load_image(input)?;
    let (_, lighting) = classify_image(&img, cfg.sat_threshold, cfg.saturation_rule);
    let plan = cfg.preprocess_plan(lighting).with_glare_tiles(GlareTiles::Disjoint);
    save_image(&plan.apply_image(&img), output)?;
    Ok(PreprocessRecord {
        lighting,
        steps: plan.steps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectInput {
    pub image: PathBuf,
    pub annotation: Option<PathBuf>,
}

impl DetectInput {
    pub fn image(image: impl Into<PathBuf>) -> Self {
        Self {
            image: image.into(),
            annotation: None,
        }
    }

    pub fn from_manifest(m: &DatasetManifest) -> Vec<DetectInput> {
        m.entries
            .iter()
            .map(|e| DetectInput {
                image: m.image_path(e),
                annotation: Some(m.annotation_path(e)),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DetectOptions {
    /// Directory receiving one detection file per image.
    pub out_dir: Option<PathBuf>,
    /// Include the tile rectangles of every image in the report.
    pub dump_tiles: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl MatchCounts {
    pub fn add(&mut self, o: MatchCounts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }

    pub fn metrics(&self) -> Metrics {
        Metrics::from_counts(self.tp, self.fp, self.fn_)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImageReport {
    pub image: PathBuf,
    pub lighting: Option<LightingClass>,
    pub preprocessing: Vec<PreprocessStep>,
    pub timings: Option<StageTimings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tiles: Option<Vec<TileRect>>,
    pub detections: Vec<Detection>,
    pub detections_file: Option<PathBuf>,
    pub matches: Option<MatchCounts>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub images: Vec<ImageReport>,
    pub failed: usize,
    /// Micro-averaged over images that had ground truth.
    pub metrics: Option<Metrics>,
}

fn detect_one(input: &DetectInput, cfg: &PipelineConfig, opts: &DetectOptions) -> Result<ImageReport> {
    let img = load_image(&input.image)?;
    let backend = cfg.backend.for_image(&input.image);
    let out = run_pipeline(&img, cfg, backend.as_ref())?;
    let detections_file = match &opts.out_dir {
        Some(dir) => {
            let p = detections_path(dir, &input.image);
            save_detections(&out.detections, &p)?;
            Some(p)
        }
        None => None,
    };
    let matches = match &input.annotation {
        Some(a) => {
            let gts = load_annotations(a)?;
            let r = match_detections(&out.detections, &gts, &cfg.eval);
            Some(MatchCounts {
                tp: r.tp,
                fp: r.fp,
                fn_: r.fn_,
            })
        }
        None => None,
    };
    Ok(ImageReport {
        image: input.image.clone(),
        lighting: Some(out.lighting),
        preprocessing: out.preprocess.steps,
        timings: Some(out.timings),
        tiles: opts.dump_tiles.then_some(out.tiles.rects),
        detections: out.detections,
        detections_file,
        matches,
        error: None,
    })
}

/// Runs the pipeline on every input. Failures are recorded per image and
/// never stop the batch.
pub fn cmd_detect(cfg: &PipelineConfig, inputs: &[DetectInput], opts: &DetectOptions) -> Result<RunReport> {
    cfg.validate()?;
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let images: Vec<ImageReport> = inputs
        .par_iter()
        .map(|input| {
            detect_one(input, cfg, opts).unwrap_or_else(|e| ImageReport {
                image: input.image.clone(),
                error: Some(e.to_string()),
                ..Default::default()
            })
        })
        .collect();
    let failed = images.iter().filter(|r| r.error.is_some()).count();
    let mut total = MatchCounts::default();
    let mut any = false;
    for m in images.iter().filter_map(|r| r.matches) {
        total.add(m);
        any = true;
    }
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        images,
        failed,
        metrics: any.then(|| total.metrics()),
    })
}

/// How per-image results are combined into one score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Sum TP / FP / FN over images, then compute the metrics once.
    #[default]
    Micro,
    /// Mean of per-image recall and precision; F1 of those means.
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEval {
    pub image: PathBuf,
    pub lighting: Option<LightingClass>,
    pub counts: Option<MatchCounts>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEval {
    pub images: usize,
    pub counts: MatchCounts,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub averaging: Averaging,
    pub overall: GroupEval,
    pub per_lighting: BTreeMap<LightingClass, GroupEval>,
    /// Absent when some box lacks an occlusion label.
    pub occlusion: Option<OcclusionBreakdown>,
    /// Mean annotated calyces per image over the whole manifest.
    pub density: f64,
    pub images: Vec<ImageEval>,
    pub failed: usize,
}

struct Evaluated {
    row: ImageEval,
    occlusion: Option<OcclusionTally>,
    truths: usize,
}

fn evaluate_one(m: &DatasetManifest, e: &ManifestEntry, det_dir: &Path, cfg: &PipelineConfig) -> Result<Evaluated> {
    let image = m.image_path(e);
    let gts = load_annotations(m.annotation_path(e))?;
    let dets = load_detections(detections_path(det_dir, &image))?;
    let lighting = match e.lighting {
        Some(l) => l,
        None => classify_image(&load_image(&image)?, cfg.sat_threshold, cfg.saturation_rule).1,
    };
    let r = match_detections(&dets, &gts, &cfg.eval);
    Ok(Evaluated {
        occlusion: OcclusionTally::from_match(&r, &gts).ok(),
        truths: gts.len(),
        row: ImageEval {
            image,
            lighting: Some(lighting),
            counts: Some(MatchCounts {
                tp: r.tp,
                fp: r.fp,
                fn_: r.fn_,
            }),
            error: None,
        },
    })
}

fn group(counts: &[MatchCounts], averaging: Averaging) -> GroupEval {
    let mut total = MatchCounts::default();
    for c in counts {
        total.add(*c);
    }
    let metrics = match averaging {
        Averaging::Micro => total.metrics(),
        Averaging::Macro => Metrics::macro_average(&counts.iter().map(MatchCounts::metrics).collect::<Vec<_>>()),
    };
    GroupEval {
        images: counts.len(),
        counts: total,
        metrics,
    }
}

/// Scores the detection files in `det_dir` against a manifest.
pub fn cmd_evaluate(
    manifest: &DatasetManifest,
    det_dir: &Path,
    cfg: &PipelineConfig,
    averaging: Averaging,
) -> Result<EvalReport> {
    cfg.eval.validate()?;
    let results: Vec<std::result::Result<Evaluated, ImageEval>> = manifest
        .entries
        .par_iter()
        .map(|e| {
            evaluate_one(manifest, e, det_dir, cfg).map_err(|err| ImageEval {
                image: manifest.image_path(e),
                lighting: e.lighting,
                counts: None,
                error: Some(err.to_string()),
            })
        })
        .collect();

    let mut all = Vec::new();
    let mut by_light: BTreeMap<LightingClass, Vec<MatchCounts>> = BTreeMap::new();
    let mut occ = Some(OcclusionTally::default());
    let mut rows = Vec::with_capacity(results.len());
    let mut truths = 0usize;
    for r in results {
        match r {
            Ok(ev) => {
                let c = ev.row.counts.expect("evaluated rows carry counts");
                all.push(c);
                by_light
                    .entry(ev.row.lighting.expect("evaluated rows carry lighting"))
                    .or_default()
                    .push(c);
                occ = match (occ, ev.occlusion) {
                    (Some(mut acc), Some(t)) => {
                        acc.add(&t);
                        Some(acc)
                    }
                    _ => None,
                };
                truths += ev.truths;
                rows.push(ev.row);
            }
            Err(row) => rows.push(row),
        }
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        averaging,
        overall: group(&all, averaging),
        per_lighting: by_light.into_iter().map(|(k, v)| (k, group(&v, averaging))).collect(),
        occlusion: occ.filter(|_| !all.is_empty()).map(|t| t.breakdown()),
        density: if all.is_empty() {
            0.0
        } else {
            truths as f64 / all.len() as f64
        },
        images: rows,
        failed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub out_dir: PathBuf,
    pub count: usize,
    /// Lighting of scene `i` is `lighting[i % lighting.len()]`.
    pub lighting: Vec<LightingClass>,
    /// Everything except lighting and seed.
    pub base: SceneSpec,
    /// Scene `i` uses seed `seed + i`.
    pub seed: u64,
}

/// Writes `scene_NNNN.png`, `scene_NNNN.json` and `manifest.json`.
pub fn cmd_synth(opts: &SynthOptions) -> Result<DatasetManifest> {
    if opts.count == 0 || opts.lighting.is_empty() {
        return Err(Error::InvalidParam(
            "synth needs a positive count and at least one lighting class".into(),
        ));
    }
    opts.base.validate()?;
    let dir = &opts.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let entries = (0..opts.count)
        .into_par_iter()
        .map(|i| {
            let spec = SceneSpec {
                lighting: opts.lighting[i % opts.lighting.len()],
                seed: opts.seed.wrapping_add(i as u64),
                ..opts.base.clone()
            };
            let scene = generate_scene(&spec)?;
            let image = PathBuf::from(format!("scene_{i:04}.png"));
            let annotation = PathBuf::from(format!("scene_{i:04}.json"));
            save_image(&scene.image, dir.join(&image))?;
            save_annotations(&scene.truth, dir.join(&annotation))?;
            Ok(ManifestEntry {
                image,
                annotation,
                lighting: Some(scene.lighting_label),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "synth".into());
    let manifest = DatasetManifest::new(name, entries, dir.clone())?;
    manifest.save(dir.join("manifest.json"))?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub lighting: LightingClass,
    pub images: usize,
    pub mean: StageTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<12} {:>6} {:>9} {:>11} {:>8} {:>9} {:>8} {:>8} {:>9}",
            "lighting", "images", "classify", "preprocess", "tile", "segment", "merge", "blobs", "total"
        );
        for r in &self.rows {
            let m = &r.mean;
            let _ = writeln!(
                s,
                "{:<12} {:>6} {:>9.1} {:>11.1} {:>8.1} {:>9.1} {:>8.1} {:>8.1} {:>9.1}",
                r.lighting.name(),
                r.images,
                m.classify_ms,
                m.preprocess_ms,
                m.tile_ms,
                m.segment_ms,
                m.merge_ms,
                m.blobs_ms,
                m.total_ms
            );
        }
        s.push_str("(milliseconds, mean per image)\n");
        s
    }
}

/// Mean stage times per classified lighting condition. Images run one
/// after another so stages do not compete for cores across images.
pub fn cmd_bench(cfg: &PipelineConfig, manifest: &DatasetManifest) -> Result<BenchReport> {
    cfg.validate()?;
    if manifest.entries.is_empty() {
        return Err(Error::Schema("manifest has no entries".into()));
    }
    let mut sums: BTreeMap<LightingClass, (usize, StageTimings)> = BTreeMap::new();
    for e in &manifest.entries {
        let path = manifest.image_path(e);
        let img = load_image(&path)?;
        let backend = cfg.backend.for_image(&path);
        let out = run_pipeline(&img, cfg, backend.as_ref())?;
        let slot = sums.entry(out.lighting).or_default();
        slot.0 += 1;
        slot.1.add(&out.timings);
    }
    Ok(BenchReport {
        schema_version: REPORT_SCHEMA_VERSION,
        rows: sums
            .into_iter()
            .map(|(lighting, (n, t))| BenchRow {
                lighting,
                images: n,
                mean: t.scaled(1.0 / n as f64),
            })
            .collect(),
    })
}

/// Renders detections (and optionally ground truth) over an image.
pub fn cmd_overlay(
    image: &Path,
    detections: &Path,
    truth: Option<&Path>,
    cfg: &PipelineConfig,
    out: &Path,
) -> Result<()> {
    let img = load_image(image)?;
    let dets = load_detections(detections)?;
    let gts = truth.map(load_annotations).transpose()?;
    save_image(&render_overlay(&img, &dets, gts.as_deref(), &cfg.eval), out)
}
