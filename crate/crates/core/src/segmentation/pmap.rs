//! `.pmap` probability-map files.
//!
//! Little-endian: the magic bytes `PMAP`, then `u32` width, height and class
//! count, then `width * height * classes` `f32` values in pixel-major,
//! class-minor order.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::Segmenter;
use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::maps::{first_unnormalized, ProbMap, NORMALIZATION_TOLERANCE, NUM_CLASSES};

pub const PMAP_MAGIC: &[u8; 4] = b"PMAP";
/// Largest per-pixel deviation of the probability sum accepted from a file.
pub const PMAP_TOLERANCE: f64 = 1e-4;

pub fn write_pmap(pm: &ProbMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(16 + pm.values().len() * 4);
    buf.extend_from_slice(PMAP_MAGIC);
    buf.extend_from_slice(&pm.width().to_le_bytes());
    buf.extend_from_slice(&pm.height().to_le_bytes());
    buf.extend_from_slice(&(NUM_CLASSES as u32).to_le_bytes());
    for v in pm.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Reads and validates a `.pmap` file. Every failure is reported as
/// [`Error::BackendFailure`].
pub fn read_pmap(path: impl AsRef<Path>) -> Result<ProbMap> {
    let path = path.as_ref();
    let fail = |msg: String| Error::BackendFailure(format!("{}: {msg}", path.display()));
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| fail(e.to_string()))?;
    if bytes.len() < 16 || &bytes[..4] != PMAP_MAGIC {
        return Err(fail("missing PMAP header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let (w, h, classes) = (word(4), word(8), word(12));
    if classes as usize != NUM_CLASSES {
        return Err(fail(format!("{classes} classes, expected {NUM_CLASSES}")));
    }
    let count = w as usize * h as usize * NUM_CLASSES;
    if bytes.len() != 16 + count * 4 {
        return Err(fail(format!(
            "{} payload bytes for a {w}x{h} map, expected {}",
            bytes.len() - 16,
            count * 4
        )));
    }
    let mut values: Vec<f32> = bytes[16..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(p) = first_unnormalized(&values, PMAP_TOLERANCE) {
        return Err(fail(format!("pixel {p} is not a probability distribution")));
    }
    if first_unnormalized(&values, NORMALIZATION_TOLERANCE).is_some() {
        renormalize(&mut values);
    }
    ProbMap::new(w, h, values).map_err(|e| fail(e.to_string()))
}

/// Rescales rows whose sum drifts beyond the in-memory tolerance.
fn renormalize(values: &mut [f32]) {
    for px in values.chunks_exact_mut(NUM_CLASSES) {
        let sum: f64 = px.iter().map(|&v| v as f64).sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            for v in px.iter_mut() {
                *v = (*v as f64 / sum) as f32;
            }
        }
    }
}

/// Loads `tile_<tile_id>.pmap` from `dir`.
pub fn file_backend_segment(dir: impl AsRef<Path>, tile_id: usize) -> Result<ProbMap> {
    read_pmap(dir.as_ref().join(format!("tile_{tile_id}.pmap")))
}

/// Replays externally computed maps, one `tile_<index>.pmap` per tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmapSegmenter {
    pub dir: PathBuf,
}

impl PmapSegmenter {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl Segmenter for PmapSegmenter {
    fn segment_tile(&self, tile: &RgbImage, tile_index: usize) -> Result<ProbMap> {
        let pm = file_backend_segment(&self.dir, tile_index)?;
        if pm.width() != tile.width() || pm.height() != tile.height() {
            return Err(Error::BackendFailure(format!(
                "tile_{tile_index}.pmap is {}x{} but the tile is {}x{}",
                pm.width(),
                pm.height(),
                tile.width(),
                tile.height()
            )));
        }
        Ok(pm)
    }
}
