//! Synthetic canopy scenes with exact ground truth.
//!
//! A scene is painted back to front: canopy background, clutter (leaves,
//! branches, wires, timber), one fruit disk under every calyx, the calyx
//! disks in the calyx key colour, and finally the occluders chosen to cover
//! a fixed share of the calyces. Lighting degradations are applied last.

mod degrade;
pub mod palette;
mod rng;
mod shapes;

use serde::{Deserialize, Serialize};

pub use degrade::{apply_glare, apply_overexposure, GLARE_HOTSPOT_FRACTION, GLARE_RED_GAIN};
pub use rng::SceneRng;
pub use shapes::Shape;

use crate::annotation::{GroundTruthBox, Occluder};
use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::lighting::{classify_image, LightingClass, SaturationRule, DEFAULT_SAT_THRESHOLD};

pub const DEFAULT_WIDTH: u32 = 1936;
pub const DEFAULT_HEIGHT: u32 = 1216;
pub const DEFAULT_OVEREXPOSED_TARGET: f64 = 0.3;
pub const DEFAULT_GLARE_TARGET: f64 = 0.65;
/// Attempts allowed for placing a single calyx.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;
/// Covered share of a calyx disk from which it counts as occluded.
pub const OCCLUSION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub n_calyces: usize,
    /// Inclusive calyx radius range in pixels.
    pub radius_range: (f64, f64),
    /// Share of calyces given a dedicated occluder; the count is rounded.
    pub occluded_fraction: f64,
    /// Relative weights in [`Occluder::KINDS`] order.
    pub occluder_mix: [f64; 6],
    pub lighting: LightingClass,
    /// Degradation strength: tri-saturated share for overexposure, blue
    /// saturated share for glare. `None` picks the defaults.
    pub lighting_target: Option<f64>,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            n_calyces: 60,
            radius_range: (10.0, 16.0),
            occluded_fraction: 0.0,
            occluder_mix: [1.0; 6],
            lighting: LightingClass::Typical,
            lighting_target: None,
            seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        let (lo, hi) = self.radius_range;
        if !(8.0..=60.0).contains(&lo) || !(8.0..=60.0).contains(&hi) || lo > hi {
            return bad(format!("radius range ({lo}, {hi}) not within [8, 60]"));
        }
        if !(0.0..=1.0).contains(&self.occluded_fraction) {
            return bad(format!("occluded fraction {} not in [0, 1]", self.occluded_fraction));
        }
        if self.occluder_mix.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("occluder weights must be finite and non-negative".into());
        }
        if self.occluded_fraction > 0.0 && self.occluder_mix.iter().sum::<f64>() <= 0.0 {
            return bad("occluded calyces requested but every occluder weight is zero".into());
        }
        let need = 2.0 * hi + 6.0;
        if (self.width as f64) < need || (self.height as f64) < need {
            return bad(format!("{}x{} too small for radius {hi}", self.width, self.height));
        }
        Ok(())
    }

    pub fn n_occluded(&self) -> usize {
        (self.n_calyces as f64 * self.occluded_fraction).round() as usize
    }
}

/// One painted calyx and how much of it ended up covered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthCalyx {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub disk_pixels: usize,
    pub covered_pixels: usize,
    pub occluder: Occluder,
}

impl SynthCalyx {
    pub fn disk(&self) -> Shape {
        Shape::Disk {
            cx: self.cx,
            cy: self.cy,
            r: self.radius,
        }
    }

    pub fn coverage(&self) -> f64 {
        self.covered_pixels as f64 / self.disk_pixels as f64
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub image: RgbImage,
    pub truth: Vec<GroundTruthBox>,
    pub lighting_label: LightingClass,
    pub calyces: Vec<SynthCalyx>,
}

struct Canvas {
    img: RgbImage,
    /// Calyx index + 1 per pixel, 0 elsewhere.
    owner: Vec<u32>,
    /// Occluder kind index + 1 per pixel, 0 where no occluder was painted.
    occ: Vec<u8>,
}

impl Canvas {
    fn idx(&self, x: u32, y: u32) -> usize {
        y as usize * self.img.width() as usize + x as usize
    }

    /// Paints `color` shifted by a brightness offset, plus independent
    /// per-channel noise of amplitude `noise`.
    fn paint(&mut self, px: &[(u32, u32)], color: [u8; 3], bright: i32, noise: i32, rng: &mut SceneRng) {
        for &(x, y) in px {
            let mut c = [0u8; 3];
            for (k, v) in c.iter_mut().enumerate() {
                let n = if noise > 0 { rng.jitter(noise) } else { 0 };
                *v = (color[k] as i32 + bright + n).clamp(0, 255) as u8;
            }
            self.img.put(x, y, c);
        }
    }
}

fn occluder_color(kind: Occluder) -> [u8; 3] {
    match kind {
        Occluder::Leaf => palette::LEAF,
        Occluder::Branch => palette::BRANCH,
        Occluder::Wire => palette::WIRE,
        Occluder::Fruit => palette::FRUIT,
        Occluder::Post | Occluder::Beam | Occluder::None => palette::TIMBER,
    }
}

fn paint_background(canvas: &mut Canvas, rng: &mut SceneRng) {
    let (w, h) = (canvas.img.width(), canvas.img.height());
    // Three slow brightness waves.
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let angle = rng.range(0.0, std::f64::consts::TAU);
            let period = rng.range(300.0, 900.0);
            let phase = rng.range(0.0, std::f64::consts::TAU);
            (angle.cos() / period, angle.sin() / period, phase, rng.range(4.0, 7.0))
        })
        .collect();
    for y in 0..h {
        for x in 0..w {
            let b: f64 = waves
                .iter()
                .map(|(fx, fy, ph, a)| a * (std::f64::consts::TAU * (fx * x as f64 + fy * y as f64) + ph).sin())
                .sum();
            let mut c = [0u8; 3];
            for (k, v) in c.iter_mut().enumerate() {
                *v = (palette::CANOPY[k] as f64 + b + rng.jitter(6) as f64)
                    .round()
                    .clamp(0.0, 255.0) as u8;
            }
            canvas.img.put(x, y, c);
        }
    }
}

fn paint_clutter(canvas: &mut Canvas, rng: &mut SceneRng) {
    let (w, h) = (canvas.img.width() as f64, canvas.img.height() as f64);
    let scale = (w * h / (DEFAULT_WIDTH as f64 * DEFAULT_HEIGHT as f64)).max(0.05);
    for _ in 0..(80.0 * scale).round() as usize {
        let s = Shape::Ellipse {
            cx: rng.range(0.0, w),
            cy: rng.range(0.0, h),
            a: rng.range(15.0, 45.0),
            b: rng.range(8.0, 20.0),
            theta: rng.range(0.0, std::f64::consts::PI),
        };
        let bright = rng.jitter(15);
        canvas.paint(&s.pixels(w as u32, h as u32), palette::LEAF, bright, 5, rng);
    }
    for _ in 0..(6.0 * scale).round() as usize {
        let (x0, y0) = (rng.range(0.0, w), rng.range(0.0, h));
        let len = rng.range(150.0, 500.0);
        let a = rng.range(0.0, std::f64::consts::TAU);
        let s = Shape::Bar {
            x0,
            y0,
            x1: x0 + len * a.cos(),
            y1: y0 + len * a.sin(),
            half_width: rng.range(4.0, 10.0),
        };
        let bright = rng.jitter(10);
        canvas.paint(&s.pixels(w as u32, h as u32), palette::BRANCH, bright, 4, rng);
    }
    for _ in 0..2 + rng.below(2) {
        let y0 = rng.range(0.0, h);
        let s = Shape::Bar {
            x0: 0.0,
            y0,
            x1: w,
            y1: y0 + rng.range(-0.1, 0.1) * w,
            half_width: rng.range(1.5, 2.5),
        };
        canvas.paint(&s.pixels(w as u32, h as u32), palette::WIRE, 0, 3, rng);
    }
    if rng.unit() < 0.5 {
        let y0 = rng.range(0.0, h);
        let s = Shape::Bar {
            x0: 0.0,
            y0,
            x1: w,
            y1: y0,
            half_width: rng.range(12.0, 20.0),
        };
        let bright = rng.jitter(10);
        canvas.paint(&s.pixels(w as u32, h as u32), palette::TIMBER, bright, 4, rng);
    }
}

/// Occluder of `kind` for the calyx at `(cx, cy)`, displaced by `t` along
/// `(ux, uy)`. Bars run perpendicular to the displacement.
fn occluder_shape(kind: Occluder, cx: f64, cy: f64, t: f64, geom: &OccluderGeom) -> Shape {
    let (ux, uy) = geom.dir;
    let (ox, oy) = (cx + t * ux, cy + t * uy);
    match kind {
        Occluder::Leaf => Shape::Ellipse {
            cx: ox,
            cy: oy,
            a: geom.a,
            b: geom.b,
            theta: geom.theta,
        },
        Occluder::Fruit => Shape::Disk {
            cx: ox,
            cy: oy,
            r: geom.a,
        },
        _ => Shape::Bar {
            x0: ox - geom.b * uy,
            y0: oy + geom.b * ux,
            x1: ox + geom.b * uy,
            y1: oy - geom.b * ux,
            half_width: geom.a,
        },
    }
}

struct OccluderGeom {
    dir: (f64, f64),
    /// Leaf semi-major axis, fruit radius, or bar half width.
    a: f64,
    /// Leaf semi-minor axis or bar half length.
    b: f64,
    theta: f64,
}

fn occluder_geom(kind: Occluder, r: f64, rng: &mut SceneRng) -> OccluderGeom {
    let phi = rng.range(0.0, std::f64::consts::TAU);
    let mut dir = (phi.cos(), phi.sin());
    let (a, b) = match kind {
        Occluder::Leaf => (rng.range(1.5, 2.1) * r, rng.range(1.1, 1.4) * r),
        Occluder::Fruit => (rng.range(2.2, 2.8) * r, 0.0),
        Occluder::Wire => (rng.range(0.5, 0.6) * r, rng.range(4.0, 7.0) * r),
        Occluder::Branch => (rng.range(0.6, 0.9) * r, rng.range(3.0, 6.0) * r),
        Occluder::Post | Occluder::Beam | Occluder::None => (rng.range(0.9, 1.3) * r, rng.range(5.0, 8.0) * r),
    };
    // Posts stand vertical and beams lie horizontal.
    if kind == Occluder::Post {
        dir = (dir.0.signum(), 0.0);
    } else if kind == Occluder::Beam {
        dir = (0.0, dir.1.signum());
    }
    OccluderGeom {
        dir,
        a,
        b,
        theta: rng.range(0.0, std::f64::consts::PI),
    }
}

fn covered(shape: &Shape, disk: &[(u32, u32)]) -> usize {
    disk.iter()
        .filter(|&&(x, y)| shape.contains(x as f64, y as f64))
        .count()
}

/// Smallest displacement search: the shape is slid away from the calyx
/// centre until its coverage would drop below `target`.
fn place_occluder(
    kind: Occluder,
    cx: f64,
    cy: f64,
    r: f64,
    disk: &[(u32, u32)],
    target: f64,
    geom: &OccluderGeom,
) -> Shape {
    let need = (target * disk.len() as f64).ceil() as usize;
    let (mut lo, mut hi) = (0.0, r + geom.a.max(geom.b) + 2.0);
    if covered(&occluder_shape(kind, cx, cy, lo, geom), disk) <= need {
        return occluder_shape(kind, cx, cy, lo, geom);
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if covered(&occluder_shape(kind, cx, cy, mid, geom), disk) >= need {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    occluder_shape(kind, cx, cy, lo, geom)
}

/// Paints a full scene. Deterministic in `spec`.
pub fn generate_scene(spec: &SceneSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = SceneRng::new(spec.seed);
    let mut canvas = Canvas {
        img: RgbImage::filled(w, h, palette::CANOPY)?,
        owner: vec![0; w as usize * h as usize],
        occ: vec![0; w as usize * h as usize],
    };
    paint_background(&mut canvas, &mut rng);
    paint_clutter(&mut canvas, &mut rng);

    // Calyx placement: centres at least 1.6 * (r_i + r_j) + 4 apart.
    let (rlo, rhi) = spec.radius_range;
    let mut placed: Vec<(f64, f64, f64)> = Vec::with_capacity(spec.n_calyces);
    for i in 0..spec.n_calyces {
        let mut ok = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let r = rng.range(rlo, rhi.max(rlo + f64::EPSILON)).min(rhi);
            let cx = rng.range(r + 2.0, w as f64 - r - 3.0);
            let cy = rng.range(r + 2.0, h as f64 - r - 3.0);
            if placed
                .iter()
                .all(|&(x, y, q)| (x - cx).hypot(y - cy) >= 1.6 * (r + q) + 4.0)
            {
                ok = Some((cx, cy, r));
                break;
            }
        }
        match ok {
            Some(c) => placed.push(c),
            None => {
                return Err(Error::InvalidSpec(format!(
                    "could not place calyx {i} of {} after {MAX_PLACEMENT_ATTEMPTS} attempts",
                    spec.n_calyces
                )))
            }
        }
    }

    for &(cx, cy, r) in &placed {
        let fruit = Shape::Disk {
            cx,
            cy,
            r: rng.range(2.2, 2.8) * r,
        };
        let bright = rng.jitter(10);
        canvas.paint(&fruit.pixels(w, h), palette::FRUIT, bright, 5, &mut rng);
    }
    let disks: Vec<Vec<(u32, u32)>> = placed
        .iter()
        .map(|&(cx, cy, r)| Shape::Disk { cx, cy, r }.pixels(w, h))
        .collect();
    for (i, px) in disks.iter().enumerate() {
        let bright = rng.jitter(8);
        for &(x, y) in px {
            let v = bright + rng.jitter(3);
            let c = palette::CALYX.map(|c| (c as i32 + v).clamp(0, 255) as u8);
            canvas.img.put(x, y, c);
            let k = canvas.idx(x, y);
            canvas.owner[k] = i as u32 + 1;
        }
    }

    // Occluders: an exact number of calyces, chosen by shuffling.
    let mut order: Vec<usize> = (0..placed.len()).collect();
    rng.shuffle(&mut order);
    let mut targeted: Vec<usize> = order.into_iter().take(spec.n_occluded()).collect();
    targeted.sort_unstable();
    for &i in &targeted {
        let (cx, cy, r) = placed[i];
        let kind = Occluder::KINDS[rng.weighted(&spec.occluder_mix)];
        let geom = occluder_geom(kind, r, &mut rng);
        let target = rng.range(0.55, 0.9);
        let shape = place_occluder(kind, cx, cy, r, &disks[i], target, &geom);
        // Occluders never reach into other calyces.
        let px: Vec<(u32, u32)> = shape
            .pixels(w, h)
            .into_iter()
            .filter(|&(x, y)| {
                let o = canvas.owner[canvas.idx(x, y)];
                o == 0 || o as usize == i + 1
            })
            .collect();
        let bright = rng.jitter(10);
        canvas.paint(&px, occluder_color(kind), bright, 4, &mut rng);
        let kind_id = Occluder::KINDS.iter().position(|k| *k == kind).unwrap() as u8 + 1;
        for (x, y) in px {
            let k = canvas.idx(x, y);
            canvas.occ[k] = kind_id;
        }
    }

    let mut calyces = Vec::with_capacity(placed.len());
    let mut truth = Vec::with_capacity(placed.len());
    for (&(cx, cy, r), px) in placed.iter().zip(&disks) {
        let mut counts = [0usize; 6];
        for &(x, y) in px {
            let o = canvas.occ[canvas.idx(x, y)];
            if o > 0 {
                counts[o as usize - 1] += 1;
            }
        }
        let covered_pixels: usize = counts.iter().sum();
        let occluder = if covered_pixels as f64 >= OCCLUSION_THRESHOLD * px.len() as f64 {
            let best = (0..6).max_by_key(|&k| (counts[k], std::cmp::Reverse(k))).unwrap();
            Occluder::KINDS[best]
        } else {
            Occluder::None
        };
        let x_min = px.iter().map(|p| p.0).min().unwrap();
        let x_max = px.iter().map(|p| p.0).max().unwrap();
        let y_min = px.iter().map(|p| p.1).min().unwrap();
        let y_max = px.iter().map(|p| p.1).max().unwrap();
        truth.push(GroundTruthBox::new(x_min, y_min, x_max, y_max, occluder)?);
        calyces.push(SynthCalyx {
            cx,
            cy,
            radius: r,
            disk_pixels: px.len(),
            covered_pixels,
            occluder,
        });
    }

    let degrade_seed = rng.next_u64();
    let image = match spec.lighting {
        LightingClass::Typical => canvas.img,
        LightingClass::Overexposed => apply_overexposure(
            &canvas.img,
            spec.lighting_target.unwrap_or(DEFAULT_OVEREXPOSED_TARGET),
            degrade_seed,
        )?,
        LightingClass::Glare => apply_glare(
            &canvas.img,
            spec.lighting_target.unwrap_or(DEFAULT_GLARE_TARGET),
            degrade_seed,
        )?,
    };
    let (_, lighting_label) = classify_image(&image, DEFAULT_SAT_THRESHOLD, SaturationRule::Intersection);
    Ok(SynthOutput {
        image,
        truth,
        lighting_label,
        calyces,
    })
}
