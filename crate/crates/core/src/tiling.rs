//! Overlapping tile layout, tile extraction, and max-confidence merging of
//! per-tile predictions back into a full-image class map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::maps::{argmax_classmap, ClassId, ClassMap, ProbMap};

pub const DEFAULT_TILE: u32 = 500;
pub const DEFAULT_OVERLAP: f64 = 0.20;
pub const MAX_OVERLAP: f64 = 0.9;

/// Axis-aligned rectangle in image pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileRect {
    pub x0: u32,
    pub y0: u32,
    pub w: u32,
    pub h: u32,
}

impl TileRect {
    pub fn new(x0: u32, y0: u32, w: u32, h: u32) -> Self {
        Self { x0, y0, w, h }
    }

    pub fn x1(&self) -> u32 {
        self.x0 + self.w
    }

    pub fn y1(&self) -> u32 {
        self.y0 + self.h
    }

    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.w > 0 && self.h > 0 && self.x1() <= width && self.y1() <= height
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x0..self.x1()).contains(&x) && (self.y0..self.y1()).contains(&y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilePlan {
    pub image_w: u32,
    pub image_h: u32,
    pub tile_w: u32,
    pub tile_h: u32,
    pub overlap_frac: f64,
    /// Row-major: all tiles of the first row of anchors, then the next row.
    pub rects: Vec<TileRect>,
}

impl TilePlan {
    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn x_anchors(&self) -> Vec<u32> {
        let mut xs: Vec<u32> = self.rects.iter().map(|r| r.x0).collect();
        xs.sort_unstable();
        xs.dedup();
        xs
    }

    pub fn y_anchors(&self) -> Vec<u32> {
        let mut ys: Vec<u32> = self.rects.iter().map(|r| r.y0).collect();
        ys.sort_unstable();
        ys.dedup();
        ys
    }
}

/// Anchors along one axis: `0, stride, 2*stride, ...` with the last one
/// pulled back so the final tile ends on the image edge.
fn axis_anchors(extent: u32, tile: u32, stride: u32) -> (Vec<u32>, u32) {
    if extent <= tile {
        return (vec![0], extent);
    }
    let last = extent - tile;
    let mut anchors = Vec::new();
    let mut a = 0u32;
    loop {
        let a_clamped = a.min(last);
        if anchors.last() != Some(&a_clamped) {
            anchors.push(a_clamped);
        }
        if a_clamped == last {
            break;
        }
        a += stride;
    }
    (anchors, tile)
}

/// Lays out `tile` sized crops over an `img_w x img_h` image with adjacent
/// crops overlapping by `round(overlap_frac * tile)` pixels. An axis shorter
/// than the tile gets a single crop spanning it.
pub fn plan_tiles(img_w: u32, img_h: u32, tile: (u32, u32), overlap_frac: f64) -> Result<TilePlan> {
    let (tile_w, tile_h) = tile;
    if tile_w == 0 || tile_h == 0 {
        return Err(Error::InvalidParam(format!(
            "tile size {tile_w}x{tile_h} must be positive"
        )));
    }
    if img_w == 0 || img_h == 0 {
        return Err(Error::InvalidParam(format!(
            "image size {img_w}x{img_h} must be positive"
        )));
    }
    if !(0.0..=MAX_OVERLAP).contains(&overlap_frac) {
        return Err(Error::InvalidParam(format!(
            "overlap fraction {overlap_frac} outside [0, {MAX_OVERLAP}]"
        )));
    }
    let stride = |t: u32| (t - (overlap_frac * t as f64).round() as u32).max(1);
    let (xs, w) = axis_anchors(img_w, tile_w, stride(tile_w));
    let (ys, h) = axis_anchors(img_h, tile_h, stride(tile_h));
    let rects = ys
        .iter()
        .flat_map(|&y0| xs.iter().map(move |&x0| TileRect::new(x0, y0, w, h)))
        .collect();
    Ok(TilePlan {
        image_w: img_w,
        image_h: img_h,
        tile_w,
        tile_h,
        overlap_frac,
        rects,
    })
}

/// Non-overlapping partition of the image into `block` sized cells; cells on
/// the right and bottom edges are cropped to the image.
pub fn disjoint_blocks(img_w: u32, img_h: u32, block: (u32, u32)) -> Vec<TileRect> {
    let (bw, bh) = (block.0.max(1), block.1.max(1));
    let mut rects = Vec::new();
    for y0 in (0..img_h).step_by(bh as usize) {
        for x0 in (0..img_w).step_by(bw as usize) {
            rects.push(TileRect::new(x0, y0, bw.min(img_w - x0), bh.min(img_h - y0)));
        }
    }
    rects
}

pub fn extract_tile(img: &RgbImage, rect: TileRect) -> Result<RgbImage> {
    if !rect.fits(img.width(), img.height()) {
        return Err(Error::OutOfBounds(format!(
            "{rect:?} does not fit in {}x{}",
            img.width(),
            img.height()
        )));
    }
    let row = img.width() as usize * 3;
    let src = img.as_raw();
    let mut pixels = Vec::with_capacity(rect.w as usize * rect.h as usize * 3);
    for y in rect.y0..rect.y1() {
        let start = y as usize * row + rect.x0 as usize * 3;
        pixels.extend_from_slice(&src[start..start + rect.w as usize * 3]);
    }
    RgbImage::from_raw(rect.w, rect.h, pixels)
}

/// Writes `tile` back into `img` at `rect`.
pub fn paste_tile(img: &mut RgbImage, rect: TileRect, tile: &RgbImage) -> Result<()> {
    if !rect.fits(img.width(), img.height()) || tile.width() != rect.w || tile.height() != rect.h {
        return Err(Error::ShapeMismatch(format!(
            "tile {}x{} cannot be pasted at {rect:?}",
            tile.width(),
            tile.height()
        )));
    }
    for y in 0..rect.h {
        for x in 0..rect.w {
            img.put(rect.x0 + x, rect.y0 + y, tile.get(x, y));
        }
    }
    Ok(())
}

/// Full-image class map assembled from tile predictions.
pub type MergedMap = ClassMap;

/// Merges per-tile probability maps: each pixel takes the class of the
/// covering tile whose top class probability there is highest. Equal
/// confidences keep the lowest tile index.
pub fn merge_maps(plan: &TilePlan, tiles: &[ProbMap]) -> Result<MergedMap> {
    if tiles.len() != plan.rects.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} tile maps for {} planned tiles",
            tiles.len(),
            plan.rects.len()
        )));
    }
    let class_maps: Vec<ClassMap> = tiles.iter().map(argmax_classmap).collect();
    merge_class_maps(plan, &class_maps)
}

/// Same merge rule as [`merge_maps`], for tiles already reduced to argmax.
pub fn merge_class_maps(plan: &TilePlan, tiles: &[ClassMap]) -> Result<MergedMap> {
    if tiles.len() != plan.rects.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} tile maps for {} planned tiles",
            tiles.len(),
            plan.rects.len()
        )));
    }
    let (w, h) = (plan.image_w, plan.image_h);
    let n = w as usize * h as usize;
    let mut labels = vec![ClassId::Background; n];
    let mut best = vec![f32::NEG_INFINITY; n];
    for (i, (rect, tile)) in plan.rects.iter().zip(tiles).enumerate() {
        if !rect.fits(w, h) || tile.width() != rect.w || tile.height() != rect.h {
            return Err(Error::ShapeMismatch(format!(
                "tile {i} is {}x{} but its rect is {rect:?}",
                tile.width(),
                tile.height()
            )));
        }
        let (tl, tc) = (tile.labels(), tile.confidences());
        for ty in 0..rect.h as usize {
            let dst = (rect.y0 as usize + ty) * w as usize + rect.x0 as usize;
            let src = ty * rect.w as usize;
            for tx in 0..rect.w as usize {
                let c = tc[src + tx];
                if c > best[dst + tx] {
                    best[dst + tx] = c;
                    labels[dst + tx] = tl[src + tx];
                }
            }
        }
    }
    if best.contains(&f32::NEG_INFINITY) {
        return Err(Error::ShapeMismatch("tile plan leaves pixels uncovered".into()));
    }
    ClassMap::new(w, h, labels, best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::NUM_CLASSES;

    #[test]
    fn camera_resolution_layout() {
        let plan = plan_tiles(1936, 1216, (500, 500), 0.20).unwrap();
        assert_eq!(plan.x_anchors(), vec![0, 400, 800, 1200, 1436]);
        assert_eq!(plan.y_anchors(), vec![0, 400, 716]);
        assert_eq!(plan.len(), 15);
    }

    #[test]
    fn exact_fit_and_small_image() {
        let plan = plan_tiles(500, 500, (500, 500), 0.2).unwrap();
        assert_eq!(plan.rects, vec![TileRect::new(0, 0, 500, 500)]);
        let plan = plan_tiles(300, 200, (500, 500), 0.2).unwrap();
        assert_eq!(plan.rects, vec![TileRect::new(0, 0, 300, 200)]);
    }

    #[test]
    fn bad_parameters() {
        assert!(plan_tiles(100, 100, (0, 500), 0.2).is_err());
        assert!(plan_tiles(100, 100, (50, 50), 0.95).is_err());
        assert!(plan_tiles(100, 100, (50, 50), -0.1).is_err());
    }

    #[test]
    fn tiny_tiles_still_advance() {
        let plan = plan_tiles(5, 1, (1, 1), 0.9).unwrap();
        assert_eq!(plan.x_anchors(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn crops() {
        let img = RgbImage::from_fn(6, 4, |x, y| [x as u8, y as u8, 9]).unwrap();
        let whole = extract_tile(&img, TileRect::new(0, 0, 6, 4)).unwrap();
        assert_eq!(whole, img);
        let mut corner = img.clone();
        corner.put(0, 0, [9, 8, 7]);
        let one = extract_tile(&corner, TileRect::new(0, 0, 1, 1)).unwrap();
        assert_eq!(one.get(0, 0), [9, 8, 7]);
        let a = extract_tile(&img, TileRect::new(0, 0, 4, 4)).unwrap();
        let b = extract_tile(&img, TileRect::new(2, 0, 4, 4)).unwrap();
        for y in 0..4 {
            for x in 2..4 {
                assert_eq!(a.get(x, y), b.get(x - 2, y));
            }
        }
        assert!(matches!(
            extract_tile(&img, TileRect::new(3, 0, 4, 4)),
            Err(Error::OutOfBounds(_))
        ));
    }

    #[test]
    fn disjoint_blocks_partition() {
        let blocks = disjoint_blocks(1936, 1216, (500, 500));
        assert_eq!(blocks.len(), 12);
        let area: u64 = blocks.iter().map(|r| r.w as u64 * r.h as u64).sum();
        assert_eq!(area, 1936 * 1216);
        assert_eq!(blocks.last().unwrap(), &TileRect::new(1500, 1000, 436, 216));
    }

    fn constant_map(w: u32, h: u32, px: [f32; NUM_CLASSES]) -> ProbMap {
        let values = px
            .iter()
            .copied()
            .cycle()
            .take(w as usize * h as usize * NUM_CLASSES)
            .collect();
        ProbMap::new(w, h, values).unwrap()
    }

    #[test]
    fn merge_single_tile_is_argmax() {
        let plan = plan_tiles(3, 2, (5, 5), 0.2).unwrap();
        let pm = constant_map(3, 2, [0.1, 0.2, 0.6, 0.1]);
        let merged = merge_maps(&plan, std::slice::from_ref(&pm)).unwrap();
        assert_eq!(merged, argmax_classmap(&pm));
    }

    #[test]
    fn merge_prefers_confident_tile_then_lowest_index() {
        let plan = TilePlan {
            image_w: 3,
            image_h: 1,
            tile_w: 2,
            tile_h: 1,
            overlap_frac: 0.5,
            rects: vec![TileRect::new(0, 0, 2, 1), TileRect::new(1, 0, 2, 1)],
        };
        let calyx = constant_map(2, 1, [0.1 / 3.0, 0.9, 0.1 / 3.0, 0.1 / 3.0]);
        let background = constant_map(2, 1, [0.6, 0.2, 0.1, 0.1]);
        let merged = merge_maps(&plan, &[calyx.clone(), background.clone()]).unwrap();
        assert_eq!(merged.label(1, 0), ClassId::Calyx);
        assert!((merged.confidence(1, 0) - 0.9).abs() < 1e-7);
        let merged = merge_maps(&plan, &[background, calyx]).unwrap();
        assert_eq!(merged.label(1, 0), ClassId::Calyx);

        let wire = constant_map(2, 1, [0.1, 0.1, 0.1, 0.7]);
        let branch = constant_map(2, 1, [0.1, 0.1, 0.7, 0.1]);
        let merged = merge_maps(&plan, &[wire.clone(), branch.clone()]).unwrap();
        assert_eq!(merged.label(1, 0), ClassId::Wire);
        let merged = merge_maps(&plan, &[branch, wire]).unwrap();
        assert_eq!(merged.label(1, 0), ClassId::Branch);
    }

    #[test]
    fn merge_shape_errors() {
        let plan = plan_tiles(4, 4, (2, 2), 0.0).unwrap();
        assert!(matches!(merge_maps(&plan, &[]), Err(Error::ShapeMismatch(_))));
        let wrong: Vec<_> = (0..plan.len())
            .map(|_| constant_map(3, 2, [1.0, 0.0, 0.0, 0.0]))
            .collect();
        assert!(matches!(merge_maps(&plan, &wrong), Err(Error::ShapeMismatch(_))));
    }
}
