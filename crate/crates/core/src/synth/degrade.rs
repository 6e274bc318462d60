//! Parametric lighting degradations: smooth overexposure and purple glare.

use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::lighting::{saturation_stats, GLARE_BLUE_RATIO, OVEREXPOSED_RATIO};

use super::rng::SceneRng;

/// Share of the image washed out to pure white at the centre of a glare.
pub const GLARE_HOTSPOT_FRACTION: f64 = 0.3;
/// Red gain applied where blue is saturated by glare.
pub const GLARE_RED_GAIN: f64 = 0.35;

/// Isotropic Gaussian light field in `(0, 1]`, one value per pixel.
fn light_field(width: u32, height: u32, cx: f64, cy: f64, sigma: f64) -> Vec<f64> {
    let k = -0.5 / (sigma * sigma);
    let mut out = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        let dy2 = (y as f64 - cy).powi(2);
        for x in 0..width {
            out.push((((x as f64 - cx).powi(2) + dy2) * k).exp());
        }
    }
    out
}

/// Value `t` such that at least `ceil(frac * n)` entries are `>= t`.
fn upper_quantile(values: &[f64], frac: f64) -> f64 {
    let k = ((frac * values.len() as f64).ceil() as usize).clamp(1, values.len());
    let mut v = values.to_vec();
    let (_, t, _) = v.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    *t
}

fn smoothstep(lo: f64, hi: f64, x: f64) -> f64 {
    let t = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn to_u8(v: f64) -> u8 {
    // The float-to-int cast saturates at 0 and 255 and truncates, which is
    // floor on the non-negative range.
    (v + 0.5) as u8
}

/// Adds a smooth Gaussian brightness bump so that at least `target` of the
/// pixels saturate in all three channels.
///
/// The bump height is drawn first; its spread is then the smallest one that
/// meets the target. If that already saturates half of the blue channel the
/// result would read as glare and `Unreachable` is returned.
pub fn apply_overexposure(img: &RgbImage, target: f64, seed: u64) -> Result<RgbImage> {
    if !(OVEREXPOSED_RATIO..=0.9).contains(&target) {
        return Err(Error::InvalidParam(format!(
            "overexposure target {target} outside [0.25, 0.9]"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let mut rng = SceneRng::new(seed);
    let cx = rng.range(0.0, w as f64);
    let cy = rng.range(0.0, h as f64);
    let amp = rng.range(2.5, 3.5) * 255.0;

    // A pixel at squared distance d2 with darkest channel m saturates once
    // 2 sigma^2 >= d2 / ln(amp / (255 - m)).
    let mut d2 = Vec::with_capacity(img.area());
    let mut needed = Vec::with_capacity(img.area());
    for (i, [r, g, b]) in img.pixels().enumerate() {
        let (x, y) = ((i % w as usize) as f64, (i / w as usize) as f64);
        let dist2 = (x - cx).powi(2) + (y - cy).powi(2);
        let gap = 255.0 - r.min(g).min(b) as f64;
        d2.push(dist2);
        needed.push(if gap <= 0.0 { 0.0 } else { dist2 / (amp / gap).ln() });
    }
    let k = ((target * needed.len() as f64).ceil() as usize).clamp(1, needed.len());
    let mut two_sigma2 = *needed.clone().select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b)).1;
    two_sigma2 = two_sigma2.max(1.0);
    loop {
        let raw = img
            .as_raw()
            .chunks_exact(3)
            .zip(&d2)
            .flat_map(|(px, d)| {
                let lift = amp * (-d / two_sigma2).exp();
                px.iter().map(move |&c| to_u8(c as f64 + lift))
            })
            .collect();
        let out = RgbImage::from_raw(w, h, raw)?;
        let stats = saturation_stats(&out, 255);
        if stats.b_ratio() >= GLARE_BLUE_RATIO {
            return Err(Error::Unreachable(format!(
                "tri-saturated share {target} forces blue saturation {:.3}",
                stats.b_ratio()
            )));
        }
        if stats.tri_ratio() >= target {
            return Ok(out);
        }
        two_sigma2 *= 1.001;
    }
}

/// Purple glare: a smooth sun field saturates blue over `target_blue` of
/// the image and lifts red, while green keeps the scene except inside a
/// white hotspot covering [`GLARE_HOTSPOT_FRACTION`] of the pixels.
pub fn apply_glare(img: &RgbImage, target_blue: f64, seed: u64) -> Result<RgbImage> {
    if !(GLARE_BLUE_RATIO..=0.95).contains(&target_blue) {
        return Err(Error::InvalidParam(format!(
            "glare target {target_blue} outside [0.5, 0.95]"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let mut rng = SceneRng::new(seed);
    let diag = (w as f64).hypot(h as f64);
    // Sun centre near a random point of the border.
    let (cx, cy) = match rng.below(4) {
        0 => (rng.range(0.0, w as f64), 0.0),
        1 => (rng.range(0.0, w as f64), h as f64),
        2 => (0.0, rng.range(0.0, h as f64)),
        _ => (w as f64, rng.range(0.0, h as f64)),
    };
    let sigma = rng.range(0.45, 0.65) * diag;
    let field = light_field(w, h, cx, cy, sigma);
    let t_blue = upper_quantile(&field, target_blue);
    let t_hot = upper_quantile(&field, GLARE_HOTSPOT_FRACTION);

    let mut raw = Vec::with_capacity(img.as_raw().len());
    for ([r, g, b], &c) in img.pixels().zip(&field) {
        if c >= t_hot {
            raw.extend_from_slice(&[255, 255, 255]);
            continue;
        }
        let rb = if c >= t_blue {
            1.0
        } else {
            smoothstep(0.7 * t_blue, t_blue, c)
        };
        let rg = smoothstep(0.9 * t_hot, t_hot, c);
        let (r, g, b) = (r as f64, g as f64, b as f64);
        raw.push(to_u8(r + GLARE_RED_GAIN * (255.0 - r) * rb));
        raw.push(to_u8(g + (255.0 - g) * rg));
        raw.push(if c >= t_blue { 255 } else { to_u8(b + (255.0 - b) * rb) });
    }
    RgbImage::from_raw(w, h, raw)
}
