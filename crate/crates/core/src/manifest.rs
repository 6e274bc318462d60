//! Dataset manifest: a named list of image / annotation pairs.
//!
//! `{"name":S,"entries":[{"image":path,"annotation":path,"lighting":"typical|overexposed|glare"|null}]}`
//!
//! Relative paths are resolved against the directory holding the manifest.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annotation::{read_json, write_json};
use crate::error::{Error, Result};
use crate::lighting::LightingClass;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub annotation: PathBuf,
    #[serde(default)]
    pub lighting: Option<LightingClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub entries: Vec<ManifestEntry>,
    #[serde(skip)]
    root: PathBuf,
}

impl DatasetManifest {
    /// Builds a manifest rooted at `root`; entries must be non-empty with
    /// unique image and annotation paths.
    pub fn new(name: impl Into<String>, entries: Vec<ManifestEntry>, root: impl Into<PathBuf>) -> Result<Self> {
        let m = Self {
            name: name.into(),
            entries,
            root: root.into(),
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Schema(format!("manifest '{}' has no entries", self.name)));
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            for p in [&e.image, &e.annotation] {
                if !seen.insert(p) {
                    return Err(Error::Schema(format!(
                        "manifest '{}' lists {} more than once",
                        self.name,
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut m: DatasetManifest = read_json(path)?;
        m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(self, path.as_ref())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// `p` joined onto the manifest root unless it is already absolute.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn image_path(&self, entry: &ManifestEntry) -> PathBuf {
        self.resolve(&entry.image)
    }

    pub fn annotation_path(&self, entry: &ManifestEntry) -> PathBuf {
        self.resolve(&entry.annotation)
    }
}
