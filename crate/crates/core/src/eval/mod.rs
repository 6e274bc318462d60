//! Calyx-level evaluation: distance-gated one-to-one matching of detections
//! to ground truth, followed by recall / precision / F1.

mod hungarian;
mod metrics;

use serde::{Deserialize, Serialize};

pub use hungarian::{hungarian_assign, Assignment, CostMatrix};
pub use metrics::{density, f1_score, metrics, occlusion_breakdown, Metrics, OcclusionBreakdown, OcclusionTally};

pub use crate::pipeline::{time_pipeline, StageTimings};

use crate::annotation::{Detection, GroundTruthBox};
use crate::error::{Error, Result};

pub const DEFAULT_MATCH_THRESHOLD: f64 = 20.0;
pub const DEFAULT_BIG_COST: f64 = 1e6;

/// Which point of a ground-truth box a detection centre is measured to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchPoint {
    #[default]
    BoxCenter,
    ClosestPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Largest centre distance, in pixels, that can count as a match.
    pub match_threshold: f64,
    /// Cost given to pairs beyond the threshold. It must exceed
    /// `min(#detections, #truths) * match_threshold` for the assignment to
    /// maximise the number of admissible pairs first.
    pub big_cost: f64,
    pub match_point: MatchPoint,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            match_threshold: DEFAULT_MATCH_THRESHOLD,
            big_cost: DEFAULT_BIG_COST,
            match_point: MatchPoint::BoxCenter,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.match_threshold > 0.0 && self.match_threshold.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "match threshold {} must be positive",
                self.match_threshold
            )));
        }
        if !(self.big_cost.is_finite() && self.big_cost > self.match_threshold) {
            return Err(Error::InvalidParam(format!(
                "big cost {} must be finite and exceed the match threshold",
                self.big_cost
            )));
        }
        Ok(())
    }

    pub fn distance(&self, det: &Detection, gt: &GroundTruthBox) -> f64 {
        let (tx, ty) = match self.match_point {
            MatchPoint::BoxCenter => gt.center(),
            MatchPoint::ClosestPoint => gt.closest_point(det.center_x, det.center_y),
        };
        (det.center_x - tx).hypot(det.center_y - ty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub detection: usize,
    pub truth: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub pairs: Vec<MatchPair>,
}

/// Detection-by-truth centre distances, with entries beyond the threshold
/// replaced by `big_cost`.
pub fn cost_matrix(dets: &[Detection], gts: &[GroundTruthBox], cfg: &EvalConfig) -> CostMatrix {
    let mut data = Vec::with_capacity(dets.len() * gts.len());
    for d in dets {
        for g in gts {
            let dist = cfg.distance(d, g);
            data.push(if dist > cfg.match_threshold { cfg.big_cost } else { dist });
        }
    }
    CostMatrix::new(dets.len(), gts.len(), data).expect("distances are finite")
}

/// One-to-one matching. Assigned pairs farther apart than the threshold are
/// dropped; what remains are the true positives.
pub fn match_detections(dets: &[Detection], gts: &[GroundTruthBox], cfg: &EvalConfig) -> MatchReport {
    let costs = cost_matrix(dets, gts, cfg);
    let assignment = hungarian_assign(&costs);
    let mut pairs: Vec<MatchPair> = assignment
        .pairs()
        .filter_map(|(d, g)| {
            let distance = cfg.distance(&dets[d], &gts[g]);
            (distance <= cfg.match_threshold).then_some(MatchPair {
                detection: d,
                truth: g,
                distance,
            })
        })
        .collect();
    pairs.sort_by_key(|p| p.detection);
    let tp = pairs.len() as u64;
    MatchReport {
        tp,
        fp: dets.len() as u64 - tp,
        fn_: gts.len() as u64 - tp,
        pairs,
    }
}
