//! Message attention arithmetic: score normalization, weighted aggregation,
//! and the smooth supervision labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeKey, NodeId, PoseGraph, Provenance};
use crate::se2::{pose_delta, relative, Pose};

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Raw per-edge scores in `[0, 1]` plus the ignore-all offset `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub raw_scores: BTreeMap<EdgeKey, f64>,
    pub alpha: f64,
}

pub const DEFAULT_ALPHA: f64 = 0.5;

impl ScoreSet {
    pub fn new(raw_scores: BTreeMap<EdgeKey, f64>, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        if let Some((k, s)) = raw_scores.iter().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidParameter(format!("score {s} on edge {k:?} outside [0, 1]")));
        }
        Ok(ScoreSet { raw_scores, alpha })
    }
}

/// `a(j -> i) = s(j -> i) / (alpha + sum_k s(k -> i))` over the edges into `i`.
pub fn normalize_weights(scores: &ScoreSet, i: NodeId) -> Result<BTreeMap<EdgeKey, f64>> {
    let incoming: Vec<(EdgeKey, f64)> = scores
        .raw_scores
        .iter()
        .filter(|((_, to), _)| *to == i)
        .map(|(&k, &s)| (k, s))
        .collect();
    if incoming.is_empty() {
        return Err(Error::IsolatedNode(i));
    }
    let denom = scores.alpha + incoming.iter().map(|(_, s)| s).sum::<f64>();
    if denom <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha and every score into node {i} are zero"
        )));
    }
    Ok(incoming.into_iter().map(|(k, s)| (k, s / denom)).collect())
}

/// Element-wise `sum_j a(j -> i) m(j -> i)`. Messages without a weight are skipped.
pub fn aggregate(messages: &BTreeMap<EdgeKey, Vec<f64>>, weights: &BTreeMap<EdgeKey, f64>) -> Result<Vec<f64>> {
    let len = messages.values().next().map_or(0, Vec::len);
    let mut out = vec![0.0; len];
    for (k, m) in messages {
        if m.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: m.len(),
            });
        }
        if let Some(&a) = weights.get(k) {
            for (o, v) in out.iter_mut().zip(m) {
                *o += a * v;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelConfig {
    pub gamma: f64,
    pub strong_fraction: f64,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            gamma: 0.9,
            strong_fraction: 0.5,
        }
    }
}

/// Smoothed clean/noisy label for a message from `j` to `i`.
pub fn label(provenance_j: Provenance, provenance_i: Provenance, cfg: &LabelConfig) -> f64 {
    match (provenance_j, provenance_i) {
        (Provenance::Weak, Provenance::Weak) => cfg.gamma,
        _ => 1.0 - cfg.gamma,
    }
}

/// Stand-in attention scorer driven by the ground-truth error of an edge's
/// current relative estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleScorer {
    pub sharpness: f64,
    /// Combined-error value at which the score is one half, meters.
    pub threshold: f64,
    /// Meters charged per degree of rotation error.
    pub meters_per_degree: f64,
}

impl Default for OracleScorer {
    fn default() -> Self {
        OracleScorer {
            sharpness: 6.0,
            threshold: 0.5,
            meters_per_degree: 0.1,
        }
    }
}

impl OracleScorer {
    pub fn score_error(&self, error: f64) -> f64 {
        sigmoid(self.sharpness * (self.threshold - error))
    }

    /// Scores edge `from -> to` given its current relative estimate.
    pub fn score(&self, graph: &PoseGraph, edge: EdgeKey, current: &Pose) -> Result<f64> {
        let (j, i) = edge;
        let (ti, tj) = match (graph.node(i)?.true_pose, graph.node(j)?.true_pose) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::InvalidGraph(format!(
                    "oracle scorer needs true poses for edge {j}->{i}"
                )))
            }
        };
        let d = pose_delta(current, &relative(&ti, &tj));
        Ok(self.score_error(d.translation_error + self.meters_per_degree * d.rotation_error))
    }
}
