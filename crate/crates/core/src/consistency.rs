//! Global pose consensus over a [`PoseGraph`].
//!
//! Every node carries a t-distributed belief over its absolute pose whose
//! location and scale are fit by weighted EM to the estimates implied by its
//! neighbors. Every directed edge carries a trust weight with a Gamma prior
//! centered on the footprint overlap. Inference alternates the two by
//! iterated conditional modes, starting from the noisy poses with unit
//! weights. There are no unary terms: the noisy poses only seed the
//! iteration.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::distributions::{mvn_logpdf, mvt_logpdf, GammaPrior, StudentTParams};
use crate::em::{two_node_estimate, weighted_mle, EmConfig, NodeModel, Observation};
use crate::error::{Error, Result};
use crate::graph::{EdgeKey, NodeId, PoseGraph, PoseMap, OVERLAP_FLOOR};
use crate::overlap::{overlap_fraction, MessageFootprint};
use crate::se2::{relative, Pose};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsistencyConfig {
    pub icm_iters: usize,
    /// Weight passes, run during the first `reweight_iters` ICM iterations.
    pub reweight_iters: usize,
    pub em: EmConfig,
    pub gamma_shape: f64,
    pub node_model: NodeModel,
    pub reweighting: bool,
    /// When set, overlaps are recomputed from the current estimates before
    /// every weight pass instead of being read from the graph.
    pub recompute_overlap: Option<MessageFootprint>,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        ConsistencyConfig {
            icm_iters: 15,
            reweight_iters: 10,
            em: EmConfig::default(),
            gamma_shape: 120.0,
            node_model: NodeModel::StudentT,
            reweighting: true,
            recompute_overlap: None,
        }
    }
}

impl ConsistencyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.icm_iters == 0 || self.reweight_iters == 0 {
            return Err(Error::InvalidParameter(
                "icm_iters and reweight_iters must be >= 1".into(),
            ));
        }
        if !(self.gamma_shape > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma_shape must be > 0, got {}",
                self.gamma_shape
            )));
        }
        self.em.validate()
    }
}

/// Estimates of `xi_i` implied by each neighbor `j`: one through `pred(j -> i)`
/// weighted by `w(j -> i)`, one through `pred(i -> j)` weighted by `w(i -> j)`.
pub fn build_observations(graph: &PoseGraph, poses: &PoseMap, i: NodeId) -> Result<Vec<Observation>> {
    graph.node(i)?;
    let mut out = Vec::new();
    for j in graph.neighbors(i) {
        let xi_j = poses.get(&j).ok_or(Error::UnknownNode(j))?;
        let ji = graph.edge(j, i).expect("neighbor edge");
        let ij = graph
            .edge(i, j)
            .ok_or_else(|| Error::InvalidGraph(format!("edge {j}->{i} has no reverse edge")))?;
        out.push(Observation::new(xi_j.compose(&ji.predicted.inverse()), ji.weight));
        out.push(Observation::new(xi_j.compose(&ij.predicted), ij.weight));
    }
    if out.is_empty() {
        return Err(Error::IsolatedNode(i));
    }
    Ok(out)
}

/// Log-density of `x` under a node belief.
pub fn node_log_density(x: &Vector3<f64>, params: &StudentTParams, model: NodeModel) -> Result<f64> {
    match model {
        NodeModel::StudentT => mvt_logpdf(x, params),
        NodeModel::Gaussian => mvn_logpdf(x, &params.location, &params.scale),
    }
}

/// Closed-form edge weight `o k / (k - L)` for a summed log-likelihood `L`.
pub fn reweight_closed_form(overlap: f64, shape: f64, log_likelihood_sum: f64) -> f64 {
    overlap * shape / (shape - log_likelihood_sum)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightUpdate {
    pub weight: f64,
    /// A log-density term was positive and was clamped to zero.
    pub clamped: bool,
}

/// New weight for edge `j -> i` carrying prediction `predicted`.
///
/// The two log-density terms are the estimate of `xi_i` implied from
/// `xi_j` under node `i`'s belief, and the estimate of `xi_j` implied from
/// `xi_i` under node `j`'s belief. Each term is clamped at zero so the
/// denominator stays at least `k`.
pub fn update_weight(
    predicted: &Pose,
    params_i: &StudentTParams,
    params_j: &StudentTParams,
    prior: &GammaPrior,
    model: NodeModel,
) -> Result<WeightUpdate> {
    let xi_i = Pose::from_vector(&params_i.location);
    let xi_j = Pose::from_vector(&params_j.location);
    let implied_i = xi_j.compose(&predicted.inverse()).to_vector();
    let implied_j = xi_i.compose(predicted).to_vector();
    let lp_i = node_log_density(&implied_i, params_i, model)?;
    let lp_j = node_log_density(&implied_j, params_j, model)?;
    let clamped = lp_i > 0.0 || lp_j > 0.0;
    let sum = lp_i.min(0.0) + lp_j.min(0.0);
    Ok(WeightUpdate {
        weight: reweight_closed_form(prior.mean, prior.shape, sum),
        clamped,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyncResult {
    pub poses: PoseMap,
    pub beliefs: BTreeMap<NodeId, StudentTParams>,
    pub weights: BTreeMap<EdgeKey, f64>,
    pub clamp_events: usize,
    pub weight_passes: usize,
    /// Largest node translation change in the final iteration, meters.
    pub last_step_m: f64,
}

/// Iterated conditional modes over node beliefs and edge weights.
///
/// With three or more nodes all beliefs are refit from the previous iterate
/// before any is replaced. A two-node graph has no third opinion to break
/// the symmetric swap that simultaneous updates produce, so its two nodes
/// are updated one after the other with the plain average.
pub fn icm_synchronize(graph: &PoseGraph, config: &ConsistencyConfig) -> Result<SyncResult> {
    config.validate()?;
    graph.validate()?;
    graph.ensure_connected()?;

    let mut g = graph.clone();
    let ids: Vec<NodeId> = g.nodes().iter().map(|n| n.id).collect();
    let mut poses = g.noisy_poses();
    let floor_scale = Matrix3::identity() * config.em.scale_floor.max(f64::MIN_POSITIVE);
    let mut beliefs: BTreeMap<NodeId, StudentTParams> = BTreeMap::new();
    let mut clamp_events = 0;
    let mut weight_passes = 0;
    let mut last_step_m = 0.0;

    for iter in 0..config.icm_iters {
        let prev = poses.clone();
        if ids.len() == 2 {
            for &i in &ids {
                let obs = build_observations(&g, &poses, i)?;
                let loc = two_node_estimate(&obs)?;
                poses.insert(i, Pose::from_vector(&loc));
                beliefs.insert(
                    i,
                    StudentTParams {
                        location: loc,
                        scale: floor_scale,
                        dof: config.em.dof,
                    },
                );
            }
        } else {
            let mut next = BTreeMap::new();
            for &i in &ids {
                let obs = build_observations(&g, &poses, i)?;
                next.insert(i, weighted_mle(&obs, &config.em, config.node_model)?);
            }
            poses = next.iter().map(|(&i, p)| (i, Pose::from_vector(&p.location))).collect();
            beliefs = next;
        }

        last_step_m = ids
            .iter()
            .map(|i| (poses[i].x - prev[i].x).hypot(poses[i].y - prev[i].y))
            .fold(0.0, f64::max);

        if config.reweighting && iter < config.reweight_iters {
            let mut updates = Vec::with_capacity(g.edges().len());
            for e in g.edges() {
                let overlap = match &config.recompute_overlap {
                    Some(fp) => overlap_fraction(&poses[&e.to], &poses[&e.from], fp).max(OVERLAP_FLOOR),
                    None => e.overlap,
                };
                let prior = GammaPrior::new(overlap, config.gamma_shape)?;
                let u = update_weight(&e.predicted, &beliefs[&e.to], &beliefs[&e.from], &prior, config.node_model)?;
                if u.clamped {
                    clamp_events += 1;
                }
                updates.push(u.weight);
            }
            g.set_weights(&updates);
            weight_passes += 1;
        }
    }

    Ok(SyncResult {
        poses,
        beliefs,
        weights: g.edges().iter().map(|e| (e.key(), e.weight)).collect(),
        clamp_events,
        weight_passes,
        last_step_m,
    })
}

/// Relative pose of every directed edge recomputed from absolute estimates.
pub fn corrected_relatives(graph: &PoseGraph, poses: &PoseMap) -> Result<BTreeMap<EdgeKey, Pose>> {
    graph
        .edges()
        .iter()
        .map(|e| {
            let xi_i = poses.get(&e.to).ok_or(Error::UnknownNode(e.to))?;
            let xi_j = poses.get(&e.from).ok_or(Error::UnknownNode(e.from))?;
            Ok((e.key(), relative(xi_i, xi_j)))
        })
        .collect()
}

/// Component-wise mean of poses with a circular heading mean.
pub fn average_poses(poses: &[Pose]) -> Result<Pose> {
    let obs: Vec<_> = poses.iter().map(|p| Observation::new(*p, 1.0)).collect();
    two_node_estimate(&obs).map(|v| Pose::from_vector(&v))
}

/// Averages each prediction with the inverse of its reverse prediction.
pub fn baseline_pairwise(graph: &PoseGraph) -> Result<BTreeMap<EdgeKey, Pose>> {
    let mut out = BTreeMap::new();
    for e in graph.edges() {
        if e.from > e.to {
            continue;
        }
        let rev = graph.edge(e.to, e.from).ok_or_else(|| {
            Error::InvalidGraph(format!("edge {}->{} has no reverse edge", e.from, e.to))
        })?;
        let avg = average_poses(&[e.predicted, rev.predicted.inverse()])?;
        out.insert(e.key(), avg);
        out.insert(rev.key(), avg.inverse());
    }
    Ok(out)
}

/// Relatives implied by the noisy absolute poses, i.e. no correction.
pub fn noisy_relatives(graph: &PoseGraph) -> Result<BTreeMap<EdgeKey, Pose>> {
    corrected_relatives(graph, &graph.noisy_poses())
}

impl PoseGraph {
    pub(crate) fn set_weights(&mut self, weights: &[f64]) {
        for (e, &w) in self.edges_mut().iter_mut().zip(weights) {
            e.weight = w;
        }
    }
}
