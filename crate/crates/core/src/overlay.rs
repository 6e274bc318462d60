//! Inspection overlays: detections as circles, ground truth as boxes.

use crate::annotation::{Detection, GroundTruthBox};
use crate::eval::{match_detections, EvalConfig};
use crate::image::RgbImage;

pub const DETECTION_COLOR: [u8; 3] = [0, 255, 255];
pub const MATCHED_COLOR: [u8; 3] = [0, 255, 0];
pub const FALSE_POSITIVE_COLOR: [u8; 3] = [255, 0, 0];
pub const MISSED_COLOR: [u8; 3] = [255, 255, 0];

fn put(img: &mut RgbImage, x: i64, y: i64, c: [u8; 3]) {
    if x >= 0 && y >= 0 && x < img.width() as i64 && y < img.height() as i64 {
        img.put(x as u32, y as u32, c);
    }
}

/// Circle outline `thickness` pixels wide, drawn inward from radius `r`.
pub fn draw_circle(img: &mut RgbImage, cx: f64, cy: f64, r: f64, thickness: f64, c: [u8; 3]) {
    let inner = (r - thickness).max(0.0);
    let (x0, x1) = ((cx - r).floor() as i64, (cx + r).ceil() as i64);
    let (y0, y1) = ((cy - r).floor() as i64, (cy + r).ceil() as i64);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let d = (x as f64 - cx).hypot(y as f64 - cy);
            if d <= r && d > inner {
                put(img, x, y, c);
            }
        }
    }
}

/// Rectangle outline; `dashed` leaves every other run of 4 pixels blank.
pub fn draw_box(img: &mut RgbImage, b: &GroundTruthBox, c: [u8; 3], dashed: bool) {
    let on = |i: u32| !dashed || (i / 4).is_multiple_of(2);
    let (x0, y0, x1, y1) = (b.x_min as i64, b.y_min as i64, b.x_max as i64, b.y_max as i64);
    for (i, x) in (x0..=x1).enumerate() {
        if on(i as u32) {
            put(img, x, y0, c);
            put(img, x, y1, c);
        }
    }
    for (i, y) in (y0..=y1).enumerate() {
        if on(i as u32) {
            put(img, x0, y, c);
            put(img, x1, y, c);
        }
    }
}

/// Draws detections and, when given, ground truth. With truth, matched
/// pairs are green (solid box, circle), unmatched detections red and missed
/// boxes yellow and dashed. Without truth every detection is cyan.
pub fn render_overlay(
    img: &RgbImage,
    dets: &[Detection],
    truth: Option<&[GroundTruthBox]>,
    cfg: &EvalConfig,
) -> RgbImage {
    let mut out = img.clone();
    match truth {
        None => {
            for d in dets {
                draw_circle(&mut out, d.center_x, d.center_y, d.radius, 2.0, DETECTION_COLOR);
            }
        }
        Some(gts) => {
            let report = match_detections(dets, gts, cfg);
            let mut det_hit = vec![false; dets.len()];
            let mut gt_hit = vec![false; gts.len()];
            for p in &report.pairs {
                det_hit[p.detection] = true;
                gt_hit[p.truth] = true;
            }
            for (g, hit) in gts.iter().zip(&gt_hit) {
                if *hit {
                    draw_box(&mut out, g, MATCHED_COLOR, false);
                } else {
                    draw_box(&mut out, g, MISSED_COLOR, true);
                }
            }
            for (d, hit) in dets.iter().zip(&det_hit) {
                let c = if *hit { MATCHED_COLOR } else { FALSE_POSITIVE_COLOR };
                draw_circle(&mut out, d.center_x, d.center_y, d.radius, 2.0, c);
            }
        }
    }
    out
}
