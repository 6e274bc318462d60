//! Calyx extraction from a class map: connected components of the calyx
//! label, filtered by area and circularity, reported as circles.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::annotation::Detection;
use crate::error::{Error, Result};
use crate::maps::{ClassId, ClassMap};

pub const DEFAULT_MIN_AREA: u64 = 150;
pub const DEFAULT_MIN_CIRCULARITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    #[serde(rename = "4")]
    Four,
    #[default]
    #[serde(rename = "8")]
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlobConfig {
    pub min_area: u64,
    pub min_circularity: f64,
    pub connectivity: Connectivity,
}

impl Default for BlobConfig {
    fn default() -> Self {
        Self {
            min_area: DEFAULT_MIN_AREA,
            min_circularity: DEFAULT_MIN_CIRCULARITY,
            connectivity: Connectivity::Eight,
        }
    }
}

impl BlobConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_area < 1 {
            return Err(Error::InvalidParam("min_area must be at least 1".into()));
        }
        if !(self.min_circularity > 0.0 && self.min_circularity <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "min_circularity {} outside (0, 1]",
                self.min_circularity
            )));
        }
        Ok(())
    }
}

/// One connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub pixel_count: u64,
    /// Length of the traced outer contour through boundary pixel centres.
    pub perimeter: f64,
    pub centroid: (f64, f64),
    pub equivalent_radius: f64,
    pub mean_confidence: f64,
    /// Member pixels in raster order.
    pub pixels: Vec<(u32, u32)>,
}

impl Blob {
    /// `4 * pi * area / perimeter^2`. A lone pixel (zero perimeter) counts as round.
    pub fn circularity(&self) -> f64 {
        if self.perimeter <= 0.0 {
            1.0
        } else {
            4.0 * PI * self.pixel_count as f64 / (self.perimeter * self.perimeter)
        }
    }

    pub fn bbox(&self) -> (u32, u32, u32, u32) {
        let mut b = (u32::MAX, u32::MAX, 0, 0);
        for &(x, y) in &self.pixels {
            b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
        }
        b
    }
}

const RING: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Maximal connected sets of `cls` pixels, ordered by their first pixel in
/// raster order.
pub fn connected_components(cm: &ClassMap, cls: ClassId, connectivity: Connectivity) -> Vec<Blob> {
    let (w, h) = (cm.width() as usize, cm.height() as usize);
    let labels = cm.labels();
    let conf = cm.confidences();
    let mut visited = vec![false; w * h];
    let neighbours: &[(i32, i32)] = match connectivity {
        Connectivity::Four => &[(1, 0), (0, 1), (-1, 0), (0, -1)],
        Connectivity::Eight => &RING,
    };
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if visited[start] || labels[start] != cls {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            let (x, y) = ((i % w) as i32, (i / w) as i32);
            for &(dx, dy) in neighbours {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !visited[j] && labels[j] == cls {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        blobs.push(measure(&members, w, conf));
    }
    blobs
}

fn measure(members: &[usize], w: usize, conf: &[f32]) -> Blob {
    let n = members.len() as f64;
    let (mut sx, mut sy, mut sc) = (0.0, 0.0, 0.0);
    let pixels: Vec<(u32, u32)> = members
        .iter()
        .map(|&i| {
            let (x, y) = ((i % w) as u32, (i / w) as u32);
            sx += x as f64;
            sy += y as f64;
            sc += conf[i] as f64;
            (x, y)
        })
        .collect();
    Blob {
        pixel_count: members.len() as u64,
        perimeter: contour_length(&pixels),
        centroid: (sx / n, sy / n),
        equivalent_radius: (n / PI).sqrt(),
        mean_confidence: (sc / n).clamp(0.0, 1.0),
        pixels,
    }
}

/// Moore-neighbour trace of the outer boundary, summing unit steps for
/// axis moves and sqrt(2) for diagonal moves. Holes do not contribute.
fn contour_length(pixels: &[(u32, u32)]) -> f64 {
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
    for &(x, y) in pixels {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    // One pixel of padding so every neighbour lookup stays in bounds.
    let mw = (x1 - x0 + 3) as i32;
    let mh = (y1 - y0 + 3) as i32;
    let mut mask = vec![false; (mw * mh) as usize];
    for &(x, y) in pixels {
        mask[((y - y0 + 1) as i32 * mw + (x - x0 + 1) as i32) as usize] = true;
    }
    let fg = |x: i32, y: i32| mask[(y * mw + x) as usize];

    // Raster-first pixel; its west neighbour is background.
    let (sx, sy) = (pixels[0].0 as i32 - x0 as i32 + 1, pixels[0].1 as i32 - y0 as i32 + 1);
    let next_move = |px: i32, py: i32, back: usize| -> Option<usize> {
        (1..=8)
            .map(|i| (back + i) % 8)
            .find(|&k| fg(px + RING[k].0, py + RING[k].1))
    };

    let Some(first) = next_move(sx, sy, 4) else {
        return 0.0;
    };
    let (mut px, mut py, mut k) = (sx, sy, first);
    let mut length = 0.0;
    let limit = 8 * pixels.len() + 16;
    for _ in 0..limit {
        length += if k % 2 == 0 { 1.0 } else { SQRT_2 };
        px += RING[k].0;
        py += RING[k].1;
        // Backtrack: the ring cell preceding the new pixel, seen from it.
        let back = (k + 4 + 1) % 8;
        let nk = next_move(px, py, back).expect("a traced pixel has at least one neighbour");
        if px == sx && py == sy && nk == first {
            return length;
        }
        k = nk;
    }
    length
}

/// Keeps blobs with at least `min_area` pixels and circularity at least
/// `min_circularity`.
pub fn filter_blobs(blobs: Vec<Blob>, cfg: &BlobConfig) -> Vec<Blob> {
    blobs
        .into_iter()
        .filter(|b| b.pixel_count >= cfg.min_area && b.circularity() >= cfg.min_circularity)
        .collect()
}

/// One detection per blob: centroid, equivalent-area radius, and the mean
/// per-pixel confidence from `cm`. Sorted by descending confidence.
pub fn blobs_to_detections(blobs: &[Blob], cm: &ClassMap) -> Vec<Detection> {
    let mut dets: Vec<Detection> = blobs
        .iter()
        .map(|b| {
            let sum: f64 = b.pixels.iter().map(|&(x, y)| cm.confidence(x, y) as f64).sum();
            let confidence = (sum / b.pixel_count as f64).clamp(0.0, 1.0);
            Detection::new(b.centroid.0, b.centroid.1, b.equivalent_radius, confidence)
                .expect("blob statistics are finite and positive")
        })
        .collect();
    dets.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    dets
}

/// Components of the calyx class, filtered and converted to detections.
pub fn detect_calyces(cm: &ClassMap, cfg: &BlobConfig) -> Vec<Detection> {
    let blobs = filter_blobs(connected_components(cm, ClassId::Calyx, cfg.connectivity), cfg);
    blobs_to_detections(&blobs, cm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_from(w: u32, h: u32, f: impl Fn(u32, u32) -> bool) -> ClassMap {
        let mut labels = Vec::new();
        for y in 0..h {
            for x in 0..w {
                labels.push(if f(x, y) { ClassId::Calyx } else { ClassId::Background });
            }
        }
        ClassMap::new(w, h, labels, vec![0.99; (w * h) as usize]).unwrap()
    }

    fn disk(cx: f64, cy: f64, r: f64) -> impl Fn(u32, u32) -> bool {
        move |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            dx * dx + dy * dy <= r * r
        }
    }

    fn disk_pixels(r: f64) -> u64 {
        let ri = r.ceil() as i64;
        (-ri..=ri)
            .flat_map(|y| (-ri..=ri).map(move |x| (x, y)))
            .filter(|&(x, y)| ((x * x + y * y) as f64) <= r * r)
            .count() as u64
    }

    #[test]
    fn empty_map_has_no_blobs() {
        let cm = map_from(10, 10, |_, _| false);
        assert!(connected_components(&cm, ClassId::Calyx, Connectivity::Eight).is_empty());
        assert!(blobs_to_detections(&[], &cm).is_empty());
    }

    #[test]
    fn square_blob() {
        let cm = map_from(40, 40, |x, y| (5..25).contains(&x) && (10..30).contains(&y));
        let blobs = connected_components(&cm, ClassId::Calyx, Connectivity::Eight);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].pixel_count, 400);
        assert_eq!(blobs[0].centroid, (14.5, 19.5));
        assert!((blobs[0].perimeter - 76.0).abs() < 1e-9);
    }

    #[test]
    fn two_disks() {
        let (a, b) = (disk(20.0, 20.0, 8.0), disk(60.0, 25.0, 12.0));
        let cm = map_from(90, 50, |x, y| a(x, y) || b(x, y));
        let blobs = connected_components(&cm, ClassId::Calyx, Connectivity::Eight);
        assert_eq!(blobs.len(), 2);
        assert_eq!(blobs[0].pixel_count, disk_pixels(8.0));
        assert_eq!(blobs[1].pixel_count, disk_pixels(12.0));
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let cm = map_from(4, 4, |x, y| (x, y) == (1, 1) || (x, y) == (2, 2));
        assert_eq!(connected_components(&cm, ClassId::Calyx, Connectivity::Eight).len(), 1);
        assert_eq!(connected_components(&cm, ClassId::Calyx, Connectivity::Four).len(), 2);
    }

    #[test]
    fn filter_examples() {
        let cfg = BlobConfig::default();
        let cm = map_from(60, 60, disk(30.0, 30.0, 10.0));
        let blobs = connected_components(&cm, ClassId::Calyx, Connectivity::Eight);
        assert!(blobs[0].circularity() > 0.9, "{}", blobs[0].circularity());
        assert_eq!(filter_blobs(blobs, &cfg).len(), 1);

        let cm = map_from(60, 60, disk(30.0, 30.0, 6.0));
        let blobs = connected_components(&cm, ClassId::Calyx, Connectivity::Eight);
        assert!(blobs[0].pixel_count < 150);
        assert!(filter_blobs(blobs, &cfg).is_empty());

        let cm = map_from(320, 3, |x, y| y == 1 && (10..310).contains(&x));
        let blobs = connected_components(&cm, ClassId::Calyx, Connectivity::Eight);
        assert_eq!(blobs[0].pixel_count, 300);
        assert!((blobs[0].perimeter - 598.0).abs() < 1e-9);
        assert!(blobs[0].circularity() < 0.02);
        assert!(filter_blobs(blobs, &cfg).is_empty());
    }

    #[test]
    fn hole_does_not_add_perimeter() {
        let ring = |x: u32, y: u32| {
            (2..12).contains(&x) && (2..12).contains(&y) && !((6..8).contains(&x) && (6..8).contains(&y))
        };
        let full = |x: u32, y: u32| (2..12).contains(&x) && (2..12).contains(&y);
        let pr = connected_components(&map_from(14, 14, ring), ClassId::Calyx, Connectivity::Eight)[0].perimeter;
        let pf = connected_components(&map_from(14, 14, full), ClassId::Calyx, Connectivity::Eight)[0].perimeter;
        assert_eq!(pr, pf);
    }

    #[test]
    fn pinch_point_traced_once_each_way() {
        // Two 3x3 squares meeting at one diagonal corner.
        let f = |x: u32, y: u32| {
            ((1..4).contains(&x) && (1..4).contains(&y)) || ((4..7).contains(&x) && (4..7).contains(&y))
        };
        let blobs = connected_components(&map_from(8, 8, f), ClassId::Calyx, Connectivity::Eight);
        assert_eq!(blobs.len(), 1);
        let expected = 2.0 * 8.0 + 2.0 * SQRT_2;
        assert!((blobs[0].perimeter - expected).abs() < 1e-9, "{}", blobs[0].perimeter);
    }

    #[test]
    fn detection_from_disk() {
        let cm = map_from(200, 200, disk(100.0, 100.0, 10.0));
        let dets = detect_calyces(&cm, &BlobConfig::default());
        assert_eq!(dets.len(), 1);
        let d = dets[0];
        assert!((d.center_x - 100.0).abs() <= 0.5 && (d.center_y - 100.0).abs() <= 0.5);
        assert!((d.radius - 10.0).abs() <= 1.0);
        assert!((d.confidence - 0.99).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        assert!(BlobConfig::default().validate().is_ok());
        assert!(BlobConfig {
            min_area: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BlobConfig {
            min_circularity: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(BlobConfig {
            min_circularity: 1.2,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
