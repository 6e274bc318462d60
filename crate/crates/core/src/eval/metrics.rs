//! Recall, precision, F1, occlusion-stratified recall and dataset density.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MatchReport;
use crate::annotation::{load_annotations, GroundTruthBox, Occluder};
use crate::error::{Error, Result};
use crate::manifest::DatasetManifest;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    /// False when `tp + fn == 0`; recall is then reported as 0.
    pub recall_defined: bool,
    /// False when `tp + fp == 0`; precision is then reported as 0.
    pub precision_defined: bool,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, false)
    } else {
        (num as f64 / den as f64, true)
    }
}

impl Metrics {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let (recall, recall_defined) = ratio(tp, tp + fn_);
        let (precision, precision_defined) = ratio(tp, tp + fp);
        Self {
            recall,
            precision,
            f1: f1_score(precision, recall),
            recall_defined,
            precision_defined,
        }
    }

    /// Metrics from already computed rates.
    pub fn from_rates(recall: f64, precision: f64) -> Self {
        Self {
            recall,
            precision,
            f1: f1_score(precision, recall),
            recall_defined: true,
            precision_defined: true,
        }
    }

    /// Mean of the defined per-image recalls and precisions, with F1 taken
    /// from those means.
    pub fn macro_average(per_image: &[Metrics]) -> Self {
        let mean = |vals: Vec<f64>| -> (f64, bool) {
            if vals.is_empty() {
                (0.0, false)
            } else {
                (vals.iter().sum::<f64>() / vals.len() as f64, true)
            }
        };
        let (recall, recall_defined) = mean(
            per_image
                .iter()
                .filter(|m| m.recall_defined)
                .map(|m| m.recall)
                .collect(),
        );
        let (precision, precision_defined) = mean(
            per_image
                .iter()
                .filter(|m| m.precision_defined)
                .map(|m| m.precision)
                .collect(),
        );
        Self {
            recall,
            precision,
            f1: f1_score(precision, recall),
            recall_defined,
            precision_defined,
        }
    }
}

pub fn metrics(report: &MatchReport) -> Metrics {
    Metrics::from_counts(report.tp, report.fp, report.fn_)
}

/// Summable per-image occlusion counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcclusionTally {
    pub non_occluded: u64,
    pub non_occluded_matched: u64,
    pub occluded: u64,
    pub occluded_matched: u64,
    pub occluders: BTreeMap<Occluder, u64>,
}

impl OcclusionTally {
    pub fn from_match(report: &MatchReport, gts: &[GroundTruthBox]) -> Result<Self> {
        let mut matched = vec![false; gts.len()];
        for p in &report.pairs {
            matched[p.truth] = true;
        }
        let mut t = OcclusionTally::default();
        for (i, gt) in gts.iter().enumerate() {
            match gt.occluder() {
                None => return Err(Error::MissingAnnotation(i)),
                Some(Occluder::None) => {
                    t.non_occluded += 1;
                    t.non_occluded_matched += matched[i] as u64;
                }
                Some(kind) => {
                    t.occluded += 1;
                    t.occluded_matched += matched[i] as u64;
                    *t.occluders.entry(kind).or_default() += 1;
                }
            }
        }
        Ok(t)
    }

    pub fn add(&mut self, other: &OcclusionTally) {
        self.non_occluded += other.non_occluded;
        self.non_occluded_matched += other.non_occluded_matched;
        self.occluded += other.occluded;
        self.occluded_matched += other.occluded_matched;
        for (k, v) in &other.occluders {
            *self.occluders.entry(*k).or_default() += v;
        }
    }

    pub fn breakdown(&self) -> OcclusionBreakdown {
        let (recall_non_occluded, non_occluded_defined) = ratio(self.non_occluded_matched, self.non_occluded);
        let (recall_occluded, occluded_defined) = ratio(self.occluded_matched, self.occluded);
        let (percent_non_occluded, _) = ratio(self.non_occluded, self.non_occluded + self.occluded);
        OcclusionBreakdown {
            recall_non_occluded,
            recall_occluded,
            non_occluded_defined,
            occluded_defined,
            occluder_histogram: self.occluders.clone(),
            percent_non_occluded,
            non_occluded: self.non_occluded,
            occluded: self.occluded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcclusionBreakdown {
    pub recall_non_occluded: f64,
    pub recall_occluded: f64,
    /// False when there were no visible calyces to recall.
    pub non_occluded_defined: bool,
    /// False when there were no occluded calyces to recall.
    pub occluded_defined: bool,
    pub occluder_histogram: BTreeMap<Occluder, u64>,
    /// Share of ground truth that is not occluded, in [0, 1].
    pub percent_non_occluded: f64,
    pub non_occluded: u64,
    pub occluded: u64,
}

/// Recall split by occlusion status. Every box must carry an occlusion label.
pub fn occlusion_breakdown(report: &MatchReport, gts: &[GroundTruthBox]) -> Result<OcclusionBreakdown> {
    Ok(OcclusionTally::from_match(report, gts)?.breakdown())
}

/// Mean number of annotated calyces per image.
pub fn density(manifest: &DatasetManifest) -> Result<f64> {
    let mut total = 0usize;
    for entry in &manifest.entries {
        total += load_annotations(manifest.annotation_path(entry))?.len();
    }
    Ok(total as f64 / manifest.entries.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::MatchPair;

    #[test]
    fn lighting_table_rows() {
        let rows = [
            (0.74, 0.92, 0.82),
            (0.41, 0.70, 0.52),
            (0.45, 0.70, 0.55),
            (0.07, 0.64, 0.13),
            (0.30, 0.71, 0.42),
        ];
        for (r, p, f) in rows {
            let m = Metrics::from_rates(r, p);
            assert!((m.f1 - f).abs() <= 0.005, "{r} {p} -> {}", m.f1);
        }
    }

    #[test]
    fn empty_scene_is_all_zero() {
        let m = Metrics::from_counts(0, 0, 0);
        assert_eq!((m.recall, m.precision, m.f1), (0.0, 0.0, 0.0));
        assert!(!m.recall_defined && !m.precision_defined);
    }

    #[test]
    fn macro_average_skips_undefined() {
        let a = Metrics::from_counts(1, 0, 1);
        let b = Metrics::from_counts(0, 0, 0);
        let m = Metrics::macro_average(&[a, b]);
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.precision, 1.0);
    }

    fn gt(occ: Occluder) -> GroundTruthBox {
        GroundTruthBox::new(0, 0, 10, 10, occ).unwrap()
    }

    #[test]
    fn histogram_of_occluders() {
        let mut gts = vec![];
        gts.extend((0..5).map(|_| gt(Occluder::Leaf)));
        gts.extend((0..3).map(|_| gt(Occluder::Wire)));
        gts.extend((0..2).map(|_| gt(Occluder::Fruit)));
        let report = MatchReport::default();
        let b = occlusion_breakdown(&report, &gts).unwrap();
        assert_eq!(b.occluder_histogram.get(&Occluder::Leaf), Some(&5));
        assert_eq!(b.occluder_histogram.get(&Occluder::Wire), Some(&3));
        assert_eq!(b.occluder_histogram.get(&Occluder::Fruit), Some(&2));
        assert_eq!(b.occluder_histogram.values().sum::<u64>(), 10);
        assert_eq!(b.percent_non_occluded, 0.0);
    }

    #[test]
    fn all_visible_all_matched() {
        let gts: Vec<_> = (0..4).map(|_| gt(Occluder::None)).collect();
        let report = MatchReport {
            tp: 4,
            fp: 0,
            fn_: 0,
            pairs: (0..4)
                .map(|i| MatchPair {
                    detection: i,
                    truth: i,
                    distance: 0.0,
                })
                .collect(),
        };
        let b = occlusion_breakdown(&report, &gts).unwrap();
        assert_eq!(b.recall_non_occluded, 1.0);
        assert_eq!(b.recall_occluded, 0.0);
        assert!(!b.occluded_defined);
        assert_eq!(b.percent_non_occluded, 1.0);
    }

    #[test]
    fn unlabelled_truth_is_rejected() {
        let gts = vec![gt(Occluder::None), GroundTruthBox::unlabelled(0, 0, 5, 5).unwrap()];
        assert!(matches!(
            occlusion_breakdown(&MatchReport::default(), &gts),
            Err(Error::MissingAnnotation(1))
        ));
    }
}
