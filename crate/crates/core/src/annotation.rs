//! Ground-truth boxes, detections, and their JSON files.
//!
//! Annotation file:
//! `{"boxes":[{"x_min":N,"y_min":N,"x_max":N,"y_max":N,"occluded":bool,"occluder":"none|leaf|..."}]}`
//!
//! Detection file:
//! `{"detections":[{"cx":F,"cy":F,"radius":F,"confidence":F}]}`

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};

/// What covers an occluded calyx. `None` marks a visible calyx.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Occluder {
    None,
    Leaf,
    Branch,
    Wire,
    Fruit,
    Post,
    Beam,
}

impl Occluder {
    /// The six real occluder kinds, `None` excluded.
    pub const KINDS: [Occluder; 6] = [
        Occluder::Leaf,
        Occluder::Branch,
        Occluder::Wire,
        Occluder::Fruit,
        Occluder::Post,
        Occluder::Beam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Occluder::None => "none",
            Occluder::Leaf => "leaf",
            Occluder::Branch => "branch",
            Occluder::Wire => "wire",
            Occluder::Fruit => "fruit",
            Occluder::Post => "post",
            Occluder::Beam => "beam",
        }
    }
}

/// A calyx hypothesis in image pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    #[serde(rename = "cx")]
    pub center_x: f64,
    #[serde(rename = "cy")]
    pub center_y: f64,
    pub radius: f64,
    pub confidence: f64,
}

impl Detection {
    pub fn new(center_x: f64, center_y: f64, radius: f64, confidence: f64) -> Result<Self> {
        if !(center_x.is_finite() && center_y.is_finite()) || center_x < 0.0 || center_y < 0.0 {
            return Err(Error::Invalid(format!(
                "detection centre ({center_x}, {center_y}) must be finite and non-negative"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Invalid(format!("detection radius {radius} must be positive")));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Invalid(format!(
                "detection confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(Self {
            center_x,
            center_y,
            radius,
            confidence,
        })
    }

    /// True when the centre lies inside a `width x height` image.
    pub fn inside(&self, width: u32, height: u32) -> bool {
        self.center_x < width as f64 && self.center_y < height as f64
    }
}

impl<'de> Deserialize<'de> for Detection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            cx: f64,
            cy: f64,
            radius: f64,
            confidence: f64,
        }
        let r = Raw::deserialize(d)?;
        Detection::new(r.cx, r.cy, r.radius, r.confidence).map_err(serde::de::Error::custom)
    }
}

/// A hand-labelled calyx bounding box. Coordinates are inclusive pixel
/// indices; `occlusion` is `None` when the box carries no occlusion label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundTruthBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
    occlusion: Option<Occluder>,
}

impl GroundTruthBox {
    /// Box with an occlusion label; `Occluder::None` means not occluded.
    pub fn new(x_min: u32, y_min: u32, x_max: u32, y_max: u32, occluder: Occluder) -> Result<Self> {
        Self::with_occlusion(x_min, y_min, x_max, y_max, Some(occluder))
    }

    /// Box whose occlusion status was never annotated.
    pub fn unlabelled(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Result<Self> {
        Self::with_occlusion(x_min, y_min, x_max, y_max, None)
    }

    fn with_occlusion(x_min: u32, y_min: u32, x_max: u32, y_max: u32, occlusion: Option<Occluder>) -> Result<Self> {
        if x_min >= x_max || y_min >= y_max {
            return Err(Error::Schema(format!(
                "degenerate box ({x_min},{y_min})-({x_max},{y_max})"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
            occlusion,
        })
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min as f64 + self.x_max as f64) / 2.0,
            (self.y_min as f64 + self.y_max as f64) / 2.0,
        )
    }

    pub fn occluder(&self) -> Option<Occluder> {
        self.occlusion
    }

    pub fn occluded(&self) -> Option<bool> {
        self.occlusion.map(|o| o != Occluder::None)
    }

    /// Point of the box closest to `(x, y)`.
    pub fn closest_point(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x.clamp(self.x_min as f64, self.x_max as f64),
            y.clamp(self.y_min as f64, self.y_max as f64),
        )
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxRecord {
    x_min: u32,
    y_min: u32,
    x_max: u32,
    y_max: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    occluded: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    occluder: Option<Occluder>,
}

impl BoxRecord {
    fn into_box(self, index: usize) -> Result<GroundTruthBox> {
        let occlusion = match (self.occluded, self.occluder) {
            (None, None) => None,
            (Some(false), None) | (Some(false), Some(Occluder::None)) => Some(Occluder::None),
            (None, Some(o)) => Some(o),
            (Some(true), Some(o)) if o != Occluder::None => Some(o),
            (occluded, occluder) => {
                return Err(Error::Schema(format!(
                    "box {index}: occluded={occluded:?} is inconsistent with occluder={occluder:?}"
                )))
            }
        };
        GroundTruthBox::with_occlusion(self.x_min, self.y_min, self.x_max, self.y_max, occlusion)
            .map_err(|e| Error::Schema(format!("box {index}: {e}")))
    }
}

impl From<&GroundTruthBox> for BoxRecord {
    fn from(b: &GroundTruthBox) -> Self {
        Self {
            x_min: b.x_min,
            y_min: b.y_min,
            x_max: b.x_max,
            y_max: b.y_max,
            occluded: b.occluded(),
            occluder: b.occlusion,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationFile {
    boxes: Vec<BoxRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionFile {
    detections: Vec<Detection>,
}

pub(crate) fn json_error(path: &Path, e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    let msg = format!("{}: {e}", path.display());
    match e.classify() {
        Category::Data => Error::Schema(msg),
        Category::Syntax | Category::Eof | Category::Io => Error::Parse(msg),
    }
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = std::str::from_utf8(&text).map_err(|e| Error::Parse(format!("{}: not UTF-8: {e}", path.display())))?;
    serde_json::from_str(text).map_err(|e| json_error(path, e))
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable value");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<GroundTruthBox>> {
    let path = path.as_ref();
    let file: AnnotationFile = read_json(path)?;
    file.boxes.into_iter().enumerate().map(|(i, b)| b.into_box(i)).collect()
}

pub fn save_annotations(boxes: &[GroundTruthBox], path: impl AsRef<Path>) -> Result<()> {
    let file = AnnotationFile {
        boxes: boxes.iter().map(BoxRecord::from).collect(),
    };
    write_json(&file, path.as_ref())
}

pub fn load_detections(path: impl AsRef<Path>) -> Result<Vec<Detection>> {
    let file: DetectionFile = read_json(path.as_ref())?;
    Ok(file.detections)
}

pub fn save_detections(dets: &[Detection], path: impl AsRef<Path>) -> Result<()> {
    let file = DetectionFile {
        detections: dets.to_vec(),
    };
    write_json(&file, path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn single_box() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.json",
            r#"{"boxes":[{"x_min":10,"y_min":10,"x_max":40,"y_max":40,"occluded":false,"occluder":"none"}]}"#,
        );
        let boxes = load_annotations(&p).unwrap();
        assert_eq!(
            boxes,
            vec![GroundTruthBox::new(10, 10, 40, 40, Occluder::None).unwrap()]
        );
        assert_eq!(boxes[0].center(), (25.0, 25.0));
    }

    #[test]
    fn degenerate_box_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.json",
            r#"{"boxes":[{"x_min":10,"y_min":10,"x_max":10,"y_max":40,"occluded":false,"occluder":"none"}]}"#,
        );
        assert!(matches!(load_annotations(&p), Err(Error::Schema(_))));
    }

    #[test]
    fn malformed_and_missing_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "bad.json", r#"{"boxes":[{"x_min":1,"#);
        assert!(matches!(load_annotations(&p), Err(Error::Parse(_))));
        let p = write(&dir, "missing.json", r#"{"boxes":[{"x_min":1,"y_min":1,"x_max":5}]}"#);
        assert!(matches!(load_annotations(&p), Err(Error::Schema(_))));
        let p = write(
            &dir,
            "clash.json",
            r#"{"boxes":[{"x_min":1,"y_min":1,"x_max":5,"y_max":5,"occluded":true,"occluder":"none"}]}"#,
        );
        assert!(matches!(load_annotations(&p), Err(Error::Schema(_))));
    }

    #[test]
    fn unlabelled_occlusion_is_kept_as_unknown() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "u.json",
            r#"{"boxes":[{"x_min":1,"y_min":1,"x_max":5,"y_max":5}]}"#,
        );
        let boxes = load_annotations(&p).unwrap();
        assert_eq!(boxes[0].occluded(), None);
    }

    #[test]
    fn sixty_two_boxes_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let boxes: Vec<_> = (0..62u32)
            .map(|i| {
                let occ = if i % 5 == 0 { Occluder::Leaf } else { Occluder::None };
                GroundTruthBox::new(i * 10, 3, i * 10 + 8, 11, occ).unwrap()
            })
            .collect();
        let p = dir.path().join("b.json");
        save_annotations(&boxes, &p).unwrap();
        assert_eq!(load_annotations(&p).unwrap(), boxes);
    }

    #[test]
    fn detections_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.json");
        save_detections(&[], &p).unwrap();
        assert!(load_detections(&p).unwrap().is_empty());
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"detections\": []"));

        let one = vec![Detection::new(100.5, 200.0, 12.0, 0.9).unwrap()];
        save_detections(&one, &p).unwrap();
        assert_eq!(load_detections(&p).unwrap(), one);

        let many: Vec<_> = (0..83)
            .map(|i| Detection::new(i as f64 * 3.25, 7.0, 9.5, i as f64 / 83.0).unwrap())
            .collect();
        save_detections(&many, &p).unwrap();
        assert_eq!(load_detections(&p).unwrap(), many);
    }

    #[test]
    fn invalid_detections_refused() {
        assert!(Detection::new(1.0, 1.0, 0.0, 0.5).is_err());
        assert!(Detection::new(1.0, 1.0, 2.0, 1.5).is_err());
        assert!(Detection::new(f64::NAN, 1.0, 2.0, 0.5).is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "d.json",
            r#"{"detections":[{"cx":1,"cy":1,"radius":-3,"confidence":0.5}]}"#,
        );
        assert!(matches!(load_detections(&p), Err(Error::Schema(_))));
    }
}
