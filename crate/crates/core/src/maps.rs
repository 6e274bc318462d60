//! Per-pixel class probabilities and their argmax reduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of segmentation classes, background included.
pub const NUM_CLASSES: usize = 4;

/// Maximum deviation of a pixel's probability sum from one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum ClassId {
    Background = 0,
    Calyx = 1,
    Branch = 2,
    Wire = 3,
}

impl ClassId {
    pub const ALL: [ClassId; NUM_CLASSES] = [ClassId::Background, ClassId::Calyx, ClassId::Branch, ClassId::Wire];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// `width x height x NUM_CLASSES` probabilities, pixel-major and class-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl ProbMap {
    /// Validates shape, range and per-pixel normalisation.
    pub fn new(width: u32, height: u32, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Invalid("probability map must be non-empty".into()));
        }
        let expected = width as usize * height as usize * NUM_CLASSES;
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "probability map has {} values, expected {expected}",
                values.len()
            )));
        }
        if let Some(p) = first_unnormalized(&values, NORMALIZATION_TOLERANCE) {
            return Err(Error::Invalid(format!(
                "pixel {p} probabilities are out of range or do not sum to 1"
            )));
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Class probabilities of the pixel at `(x, y)`.
    pub fn pixel(&self, x: u32, y: u32) -> &[f32] {
        let i = (y as usize * self.width as usize + x as usize) * NUM_CLASSES;
        &self.values[i..i + NUM_CLASSES]
    }

    pub fn pixels(&self) -> impl Iterator<Item = &[f32]> {
        self.values.chunks_exact(NUM_CLASSES)
    }
}

/// Index of the first pixel whose probabilities leave `[0, 1]` or whose sum
/// is further than `tol` from one.
pub(crate) fn first_unnormalized(values: &[f32], tol: f64) -> Option<usize> {
    values.chunks_exact(NUM_CLASSES).position(|px| {
        let in_range = px.iter().all(|&v| (0.0..=1.0).contains(&v));
        let sum: f64 = px.iter().map(|&v| v as f64).sum();
        !in_range || (sum - 1.0).abs() > tol
    })
}

/// Winning class and its probability for one pixel; ties go to the lowest id.
#[inline]
pub(crate) fn argmax_pixel(px: &[f32]) -> (ClassId, f32) {
    let mut best = 0;
    for c in 1..NUM_CLASSES {
        if px[c] > px[best] {
            best = c;
        }
    }
    (ClassId::ALL[best], px[best])
}

/// Per-pixel label together with the probability of that label.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMap {
    width: u32,
    height: u32,
    labels: Vec<ClassId>,
    confidence: Vec<f32>,
}

impl ClassMap {
    pub fn new(width: u32, height: u32, labels: Vec<ClassId>, confidence: Vec<f32>) -> Result<Self> {
        let n = width as usize * height as usize;
        if n == 0 {
            return Err(Error::Invalid("class map must be non-empty".into()));
        }
        if labels.len() != n || confidence.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "class map {width}x{height} needs {n} labels and confidences, got {} and {}",
                labels.len(),
                confidence.len()
            )));
        }
        if confidence.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Invalid("confidence outside [0, 1]".into()));
        }
        Ok(Self {
            width,
            height,
            labels,
            confidence,
        })
    }

    /// Map with every pixel set to `label` at probability `confidence`.
    pub fn uniform(width: u32, height: u32, label: ClassId, confidence: f32) -> Result<Self> {
        let n = width as usize * height as usize;
        Self::new(width, height, vec![label; n], vec![confidence; n])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn confidences(&self) -> &[f32] {
        &self.confidence
    }

    pub fn label(&self, x: u32, y: u32) -> ClassId {
        self.labels[self.offset(x, y)]
    }

    pub fn confidence(&self, x: u32, y: u32) -> f32 {
        self.confidence[self.offset(x, y)]
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y as usize * self.width as usize + x as usize
    }
}

/// Per-pixel argmax of a probability map. Ties resolve to the lowest class id.
pub fn argmax_classmap(pm: &ProbMap) -> ClassMap {
    let (labels, confidence) = pm.pixels().map(argmax_pixel).unzip();
    ClassMap {
        width: pm.width,
        height: pm.height,
        labels,
        confidence,
    }
}
