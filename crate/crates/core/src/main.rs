use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kiwi_calyx::commands::{
    cmd_bench, cmd_classify, cmd_detect, cmd_evaluate, cmd_overlay, cmd_preprocess, cmd_synth, Averaging, DetectInput,
    DetectOptions, SynthOptions,
};
use kiwi_calyx::lighting::SaturationRule;
use kiwi_calyx::manifest::DatasetManifest;
use kiwi_calyx::pipeline::{BackendConfig, PipelineConfig, PreprocessMode};
use kiwi_calyx::preprocess::GlareTiles;
use kiwi_calyx::synth::SceneSpec;
use kiwi_calyx::{Error, LightingClass};

#[derive(Parser)]
#[command(name = "kiwi-calyx", version, about = "Kiwifruit calyx detection pipeline")]
struct Cli {
    /// JSON file overriding pipeline defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for synthetic data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Reading of the all-channels-saturated count used for overexposure.
    #[arg(long, global = true, value_enum)]
    saturation_rule: Option<SaturationArg>,
    /// Tiles the glare equalization runs on during detection.
    #[arg(long, global = true, value_enum)]
    glare_tiles: Option<GlareTilesArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lighting {
    Typical,
    Overexposed,
    Glare,
}

impl From<Lighting> for LightingClass {
    fn from(l: Lighting) -> Self {
        match l {
            Lighting::Typical => LightingClass::Typical,
            Lighting::Overexposed => LightingClass::Overexposed,
            Lighting::Glare => LightingClass::Glare,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SaturationArg {
    Intersection,
    PerChannel,
}

#[derive(Clone, Copy, ValueEnum)]
enum GlareTilesArg {
    Disjoint,
    Overlap,
}

#[derive(Clone, Copy, ValueEnum)]
enum AveragingArg {
    Micro,
    Macro,
}

#[derive(Subcommand)]
enum Command {
    /// Print the lighting class and channel saturation ratios of images.
    ClassifyLighting {
        images: Vec<PathBuf>,
        /// Additional image; may repeat.
        #[arg(long = "image")]
        image_flags: Vec<PathBuf>,
        /// Channel value counted as saturated.
        #[arg(long)]
        sat_threshold: Option<u8>,
    },
    /// Apply the lighting-specific correction and write the result.
    Preprocess {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Correct as this class instead of the classified one.
        #[arg(long, value_enum)]
        force: Option<Lighting>,
    },
    /// Detect calyces in images or in every image of a manifest.
    Detect {
        images: Vec<PathBuf>,
        #[arg(long, conflicts_with = "images")]
        manifest: Option<PathBuf>,
        /// Directory for per-image detection files.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Report file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_preprocess: bool,
        #[arg(long, value_enum, conflicts_with = "no_preprocess")]
        force_preprocess: Option<Lighting>,
        #[arg(long)]
        dump_tiles: bool,
        /// `reference` or `pmap:<dir>`.
        #[arg(long)]
        backend: Option<BackendConfig>,
    },
    /// Score detection files against a manifest.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long, value_enum, default_value = "micro")]
        averaging: AveragingArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset with ground truth and a manifest.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Comma-separated classes, cycled over the scenes.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "typical")]
        lighting: Vec<Lighting>,
        #[arg(long, default_value_t = 60)]
        density: usize,
        #[arg(long, default_value_t = 0.0)]
        occluded_frac: f64,
        #[arg(long, default_value_t = 1936)]
        width: u32,
        #[arg(long, default_value_t = 1216)]
        height: u32,
    },
    /// Mean per-stage processing time per lighting class.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw detections and optional ground truth over an image.
    Overlay {
        image: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParam(_) | Error::InvalidSpec(_) => Failure::Usage(e.to_string()),
            e => Failure::Run(e.to_string()),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Failure> {
    let cfg = match path {
        None => PipelineConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Run(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Run(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Returns whether some item of a batch failed.
fn run(cli: Cli) -> Result<bool, Failure> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(r) = cli.saturation_rule {
        cfg.saturation_rule = match r {
            SaturationArg::Intersection => SaturationRule::Intersection,
            SaturationArg::PerChannel => SaturationRule::PerChannel,
        };
    }
    if let Some(t) = cli.glare_tiles {
        cfg.glare_tiles = match t {
            GlareTilesArg::Disjoint => GlareTiles::Disjoint,
            GlareTilesArg::Overlap => GlareTiles::Overlap,
        };
    }
    match cli.command {
        Command::ClassifyLighting {
            mut images,
            image_flags,
            sat_threshold,
        } => {
            images.extend(image_flags);
            if images.is_empty() {
                return Err(Failure::Usage("classify-lighting needs at least one image".into()));
            }
            if let Some(t) = sat_threshold {
                cfg.sat_threshold = t;
                cfg.validate()?;
            }
            let records = cmd_classify(&images, &cfg);
            for r in &records {
                println!("{}", r.line());
            }
            Ok(records.iter().any(|r| r.error.is_some()))
        }
        Command::Preprocess { input, out, force } => {
            if let Some(f) = force {
                cfg.preprocess = PreprocessMode::Force(f.into());
            }
            let rec = cmd_preprocess(&input, &out, &cfg)?;
            emit(&rec, None)?;
            Ok(false)
        }
        Command::Detect {
            images,
            manifest,
            out_dir,
            out,
            no_preprocess,
            force_preprocess,
            dump_tiles,
            backend,
        } => {
            if let Some(b) = backend {
                cfg.backend = b;
            }
            if no_preprocess {
                cfg.preprocess = PreprocessMode::Off;
            } else if let Some(f) = force_preprocess {
                cfg.preprocess = PreprocessMode::Force(f.into());
            }
            let inputs = match manifest {
                Some(m) => DetectInput::from_manifest(&DatasetManifest::load(m)?),
                None if images.is_empty() => return Err(Failure::Usage("detect needs images or --manifest".into())),
                None => images.into_iter().map(DetectInput::image).collect(),
            };
            let report = cmd_detect(&cfg, &inputs, &DetectOptions { out_dir, dump_tiles })?;
            for r in &report.images {
                if let Some(e) = &r.error {
                    eprintln!("{}: {e}", r.image.display());
                }
            }
            emit(&report, out.as_deref())?;
            Ok(report.failed > 0)
        }
        Command::Evaluate {
            manifest,
            detections,
            averaging,
            out,
        } => {
            let averaging = match averaging {
                AveragingArg::Micro => Averaging::Micro,
                AveragingArg::Macro => Averaging::Macro,
            };
            let report = cmd_evaluate(&DatasetManifest::load(manifest)?, &detections, &cfg, averaging)?;
            for r in &report.images {
                if let Some(e) = &r.error {
                    eprintln!("{}: {e}", r.image.display());
                }
            }
            emit(&report, out.as_deref())?;
            Ok(report.failed > 0)
        }
        Command::Synth {
            out_dir,
            count,
            lighting,
            density,
            occluded_frac,
            width,
            height,
        } => {
            let opts = SynthOptions {
                out_dir,
                count,
                lighting: lighting.into_iter().map(Into::into).collect(),
                base: SceneSpec {
                    width,
                    height,
                    n_calyces: density,
                    occluded_fraction: occluded_frac,
                    ..Default::default()
                },
                seed: cli.seed,
            };
            let manifest = cmd_synth(&opts)?;
            eprintln!("wrote {} scenes to {}", manifest.entries.len(), opts.out_dir.display());
            Ok(false)
        }
        Command::Bench { manifest, out } => {
            let report = cmd_bench(&cfg, &DatasetManifest::load(manifest)?)?;
            eprint!("{}", report.table());
            emit(&report, out.as_deref())?;
            Ok(false)
        }
        Command::Overlay {
            image,
            detections,
            truth,
            out,
        } => {
            cmd_overlay(&image, &detections, truth.as_deref(), &cfg, &out)?;
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: invalid --workers {n}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
