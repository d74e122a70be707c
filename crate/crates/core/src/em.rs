//! Weighted maximum-likelihood estimation of a node's pose under a
//! multivariate t model, by expectation-maximization over the latent
//! per-observation precision scale `eta`.
//!
//! Poses are treated as Euclidean 3-vectors `(x, y, theta)`; every residual
//! wraps its heading component against the current location, so the
//! estimator is valid while the observations of one node span well under
//! half a turn.

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::distributions::{
    circular_mean, mahalanobis_sq, mvn_logpdf, mvt_logpdf, pose_residual, StudentTParams,
};
use crate::error::{Error, Result};
use crate::se2::{wrap_angle, Pose};

/// One weighted estimate of a node's absolute pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub value: Pose,
    pub weight: f64,
}

impl Observation {
    pub fn new(value: Pose, weight: f64) -> Self {
        Observation { value, weight }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    pub num_iters: usize,
    pub dof: f64,
    /// Added to the diagonal of every scale update.
    pub scale_floor: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            num_iters: 15,
            dof: 2.0,
            scale_floor: 1e-6,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_iters == 0 {
            return Err(Error::InvalidParameter("em num_iters must be >= 1".into()));
        }
        if !(self.dof > 0.0) {
            return Err(Error::InvalidParameter(format!("em dof must be > 0, got {}", self.dof)));
        }
        if !(self.scale_floor >= 0.0) {
            return Err(Error::InvalidParameter("em scale_floor must be >= 0".into()));
        }
        Ok(())
    }
}

/// Density family used for node beliefs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeModel {
    StudentT,
    Gaussian,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-coordinate median of the observation values.
///
/// Headings are taken as residuals against their circular mean, and the
/// translations are expressed in the frame rotated by that mean heading, so
/// the result moves rigidly with the observations.
pub fn coordinatewise_median(obs: &[Observation]) -> Result<Vector3<f64>> {
    if obs.is_empty() {
        return Err(Error::EmptyObservations);
    }
    let reference = circular_mean(obs.iter().map(|o| o.value.theta)).unwrap_or(0.0);
    let (s, c) = reference.sin_cos();
    let mut xs = Vec::with_capacity(obs.len());
    let mut ys = Vec::with_capacity(obs.len());
    let mut ts = Vec::with_capacity(obs.len());
    for o in obs {
        let v = &o.value;
        xs.push(c * v.x + s * v.y);
        ys.push(-s * v.x + c * v.y);
        ts.push(wrap_angle(v.theta - reference));
    }
    let local = Vector2::new(median(&mut xs), median(&mut ys));
    Ok(Vector3::new(
        c * local[0] - s * local[1],
        s * local[0] + c * local[1],
        wrap_angle(reference + median(&mut ts)),
    ))
}

/// Posterior mean of the latent precision scale: `(nu + 3) / (nu + d^2)`.
pub fn em_expectation(delta: &Vector3<f64>, scale: &Matrix3<f64>, nu: f64) -> Result<f64> {
    let d2 = mahalanobis_sq(delta, scale)?;
    Ok((nu + 3.0) / (nu + d2))
}

/// Weighted log-likelihood before and after one location update, evaluated
/// with the scale held at its value for that iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocationStep {
    pub before: f64,
    pub after: f64,
}

pub fn weighted_log_likelihood(
    obs: &[Observation],
    location: &Vector3<f64>,
    scale: &Matrix3<f64>,
    model: NodeModel,
    dof: f64,
) -> Result<f64> {
    let params = StudentTParams {
        location: *location,
        scale: *scale,
        dof,
    };
    obs.iter().try_fold(0.0, |acc, o| {
        let x = o.value.to_vector();
        let lp = match model {
            NodeModel::StudentT => mvt_logpdf(&x, &params)?,
            NodeModel::Gaussian => mvn_logpdf(&x, location, scale)?,
        };
        Ok(acc + o.weight * lp)
    })
}

/// Weighted t-distribution MLE of location and scale.
pub fn weighted_t_mle(obs: &[Observation], config: &EmConfig) -> Result<StudentTParams> {
    weighted_mle(obs, config, NodeModel::StudentT)
}

/// Weighted MLE under either node model. The Gaussian model runs the same
/// iteration with every `eta` fixed to one.
pub fn weighted_mle(obs: &[Observation], config: &EmConfig, model: NodeModel) -> Result<StudentTParams> {
    run_em(obs, config, model, None)
}

/// Same as [`weighted_mle`], also returning the log-likelihood of each
/// location step.
pub fn weighted_mle_traced(
    obs: &[Observation],
    config: &EmConfig,
    model: NodeModel,
) -> Result<(StudentTParams, Vec<LocationStep>)> {
    let mut trace = Vec::with_capacity(config.num_iters);
    let params = run_em(obs, config, model, Some(&mut trace))?;
    Ok((params, trace))
}

fn run_em(
    obs: &[Observation],
    config: &EmConfig,
    model: NodeModel,
    mut trace: Option<&mut Vec<LocationStep>>,
) -> Result<StudentTParams> {
    config.validate()?;
    if obs.len() < 2 {
        return Err(Error::TooFewObservations(obs.len()));
    }
    if obs.iter().any(|o| !(o.weight >= 0.0)) {
        return Err(Error::InvalidParameter("observation weights must be >= 0".into()));
    }
    if obs.iter().all(|o| o.weight == 0.0) {
        return Err(Error::ZeroTotalWeight);
    }
    let nu = config.dof;
    let n = obs.len() as f64;
    let values: Vec<Vector3<f64>> = obs.iter().map(|o| o.value.to_vector()).collect();

    let mut location = coordinatewise_median(obs)?;
    let mut scale = Matrix3::identity();
    let mut deltas: Vec<Vector3<f64>> = values.iter().map(|v| pose_residual(v, &location)).collect();
    let mut eta = vec![1.0; obs.len()];

    for _ in 0..config.num_iters {
        if model == NodeModel::StudentT {
            for (e, d) in eta.iter_mut().zip(&deltas) {
                *e = em_expectation(d, &scale, nu)?;
            }
        }

        let before = match trace {
            Some(_) => Some(weighted_log_likelihood(obs, &location, &scale, model, nu)?),
            None => None,
        };
        let mut num = Vector3::zeros();
        let mut den = 0.0;
        for ((o, d), e) in obs.iter().zip(&deltas).zip(&eta) {
            num += d * (e * o.weight);
            den += e * o.weight;
        }
        let shift = num / den;
        location = Vector3::new(
            location[0] + shift[0],
            location[1] + shift[1],
            wrap_angle(location[2] + shift[2]),
        );
        if let (Some(t), Some(before)) = (trace.as_deref_mut(), before) {
            let after = weighted_log_likelihood(obs, &location, &scale, model, nu)?;
            t.push(LocationStep { before, after });
        }

        for (d, v) in deltas.iter_mut().zip(&values) {
            *d = pose_residual(v, &location);
        }
        // Observation weights are left out of the scale update.
        let mut s = Matrix3::zeros();
        for (d, e) in deltas.iter().zip(&eta) {
            s += d * d.transpose() * *e;
        }
        scale = s / n + Matrix3::identity() * config.scale_floor;
        scale = (scale + scale.transpose()) * 0.5;
    }

    Ok(StudentTParams {
        location,
        scale,
        dof: nu,
    })
}

/// Unweighted average used when a node has a single neighbor. Headings are
/// averaged on the circle.
pub fn two_node_estimate(obs: &[Observation]) -> Result<Vector3<f64>> {
    let first = obs.first().ok_or(Error::EmptyObservations)?;
    let n = obs.len() as f64;
    let x = obs.iter().map(|o| o.value.x).sum::<f64>() / n;
    let y = obs.iter().map(|o| o.value.y).sum::<f64>() / n;
    let theta = circular_mean(obs.iter().map(|o| o.value.theta)).unwrap_or_else(|| {
        let base = first.value.theta;
        wrap_angle(base + obs.iter().map(|o| wrap_angle(o.value.theta - base)).sum::<f64>() / n)
    });
    Ok(Vector3::new(x, y, theta))
}
