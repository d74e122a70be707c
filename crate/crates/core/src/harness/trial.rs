use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::consistency::{baseline_pairwise, corrected_relatives, icm_synchronize, noisy_relatives};
use crate::error::{Error, Result};
use crate::graph::{EdgeKey, PoseGraph};
use crate::se2::{pose_delta, relative, PoseDelta};
use crate::sim::{assign_and_apply_noise, build_graph, generate_scene};

/// Deterministic random stream for one trial of one sweep cell.
pub fn trial_rng(master_seed: u64, cell: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((cell as u64) << 32) | (trial as u64 & 0xffff_ffff));
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeError {
    pub from: usize,
    pub to: usize,
    pub method: Method,
    pub delta: PoseDelta,
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    pub position_rmse: f64,
    pub position_mae: f64,
    pub rotation_rmse: f64,
    pub rotation_mae: f64,
    pub edges: usize,
}

impl Aggregate {
    pub fn from_deltas<'a>(deltas: impl IntoIterator<Item = &'a PoseDelta>) -> Self {
        let (mut n, mut pa, mut ps, mut ra, mut rs) = (0usize, 0.0, 0.0, 0.0, 0.0);
        for d in deltas {
            n += 1;
            pa += d.translation_error;
            ps += d.translation_error * d.translation_error;
            ra += d.rotation_error;
            rs += d.rotation_error * d.rotation_error;
        }
        if n == 0 {
            return Aggregate::default();
        }
        let nf = n as f64;
        Aggregate {
            position_rmse: (ps / nf).sqrt(),
            position_mae: pa / nf,
            rotation_rmse: (rs / nf).sqrt(),
            rotation_mae: ra / nf,
            edges: n,
        }
    }
}

/// Per-method diagnostics from one synchronization run.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct MethodFlags {
    pub clamp_events: usize,
    /// Largest node translation change in the final ICM iteration, meters.
    pub last_step_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub experiment_id: String,
    pub trial: usize,
    pub num_agents: usize,
    pub noise_pos_sigma_m: f64,
    pub noise_rot_sigma_deg: f64,
    pub bias_pos_m: f64,
    pub bias_rot_deg: f64,
    pub outlier_rate: f64,
    pub per_edge: Vec<EdgeError>,
    pub aggregates: BTreeMap<Method, Aggregate>,
    pub flags: BTreeMap<Method, MethodFlags>,
}

/// Simulates the graph for one trial.
pub fn trial_graph(cfg: &ExperimentConfig, cell: usize, trial: usize) -> Result<PoseGraph> {
    let mut rng = trial_rng(cfg.seed, cell, trial);
    let truth = generate_scene(&cfg.scene, &mut rng)?;
    let nodes = assign_and_apply_noise(
        &truth,
        cfg.noise.strong_fraction,
        &cfg.noise.weak,
        &cfg.noise.strong,
        &mut rng,
    )?;
    build_graph(nodes, &cfg.measurement, &cfg.footprint, &mut rng)
}

/// Corrected relative pose of every directed edge under `method`.
pub fn run_method(
    graph: &PoseGraph,
    cfg: &ExperimentConfig,
    method: Method,
) -> Result<(BTreeMap<EdgeKey, crate::se2::Pose>, MethodFlags)> {
    match method.sync_settings() {
        None if method == Method::NoCorrection => Ok((noisy_relatives(graph)?, MethodFlags::default())),
        None => Ok((baseline_pairwise(graph)?, MethodFlags::default())),
        Some((node_model, reweighting)) => {
            let mut ccfg = cfg.consistency.clone();
            ccfg.node_model = node_model;
            ccfg.reweighting = reweighting;
            let out = icm_synchronize(graph, &ccfg)?;
            Ok((
                corrected_relatives(graph, &out.poses)?,
                MethodFlags {
                    clamp_events: out.clamp_events,
                    last_step_m: out.last_step_m,
                },
            ))
        }
    }
}

pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialReport> {
    run_cell_trial(cfg, 0, trial)
}

pub(crate) fn run_cell_trial(cfg: &ExperimentConfig, cell: usize, trial: usize) -> Result<TrialReport> {
    let wrap = |e: Error| Error::Trial {
        trial,
        source: Box::new(e),
    };
    let graph = trial_graph(cfg, cell, trial).map_err(wrap)?;
    let truth = graph
        .true_poses()
        .ok_or_else(|| wrap(Error::InvalidGraph("simulated graph lacks ground truth".into())))?;

    let mut per_edge = Vec::new();
    let mut aggregates = BTreeMap::new();
    let mut flags = BTreeMap::new();
    for &method in &cfg.methods {
        let (rel, f) = run_method(&graph, cfg, method).map_err(wrap)?;
        let start = per_edge.len();
        for (&(from, to), est) in &rel {
            let true_rel = relative(&truth[&to], &truth[&from]);
            per_edge.push(EdgeError {
                from,
                to,
                method,
                delta: pose_delta(est, &true_rel),
            });
        }
        aggregates.insert(method, Aggregate::from_deltas(per_edge[start..].iter().map(|e| &e.delta)));
        flags.insert(method, f);
    }

    let strong = &cfg.noise.strong;
    Ok(TrialReport {
        experiment_id: cfg.experiment_id.clone(),
        trial,
        num_agents: cfg.scene.num_agents,
        noise_pos_sigma_m: strong.position_sigma,
        noise_rot_sigma_deg: strong.heading_sigma,
        bias_pos_m: strong.position_bias[0].hypot(strong.position_bias[1]),
        bias_rot_deg: strong.heading_bias,
        outlier_rate: cfg.measurement.outlier_rate,
        per_edge,
        aggregates,
        flags,
    })
}

/// Runs every trial of `cfg`, in parallel, returned in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialReport>> {
    run_cell(cfg, 0)
}

pub(crate) fn run_cell(cfg: &ExperimentConfig, cell: usize) -> Result<Vec<TrialReport>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_cell_trial(cfg, cell, t))
        .collect()
}

/// Mean over trials of each per-trial aggregate.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct MethodSummary {
    pub position_rmse: f64,
    pub position_mae: f64,
    pub rotation_rmse: f64,
    pub rotation_mae: f64,
    pub trials: usize,
}

pub fn summarize(reports: &[TrialReport]) -> BTreeMap<Method, MethodSummary> {
    let mut out: BTreeMap<Method, MethodSummary> = BTreeMap::new();
    for r in reports {
        for (&m, a) in &r.aggregates {
            let s = out.entry(m).or_default();
            s.position_rmse += a.position_rmse;
            s.position_mae += a.position_mae;
            s.rotation_rmse += a.rotation_rmse;
            s.rotation_mae += a.rotation_mae;
            s.trials += 1;
        }
    }
    for s in out.values_mut() {
        let n = s.trials as f64;
        s.position_rmse /= n;
        s.position_mae /= n;
        s.rotation_rmse /= n;
        s.rotation_mae /= n;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::NoiseSpec;
    use crate::sim::MeasurementModel;

    fn small(trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            trials,
            scene: crate::sim::SceneSpec {
                num_agents: 4,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn aggregate_orders_rmse_over_mae() {
        let ds = [
            PoseDelta { translation_error: 0.1, rotation_error: 1.0 },
            PoseDelta { translation_error: 2.0, rotation_error: 0.0 },
            PoseDelta { translation_error: 0.0, rotation_error: 5.0 },
        ];
        let a = Aggregate::from_deltas(&ds);
        assert_eq!(a.edges, 3);
        assert!(a.position_rmse >= a.position_mae && a.rotation_rmse >= a.rotation_mae);
        assert!((a.position_mae - 0.7).abs() < 1e-12);
        assert_eq!(Aggregate::from_deltas(&[]), Aggregate::default());
    }

    #[test]
    fn zero_noise_everything_exact() {
        let mut cfg = small(3);
        cfg.noise.weak = NoiseSpec::ZERO;
        cfg.noise.strong = NoiseSpec::ZERO;
        cfg.measurement = MeasurementModel::EXACT;
        for r in run_experiment(&cfg).unwrap() {
            for a in r.aggregates.values() {
                assert!(a.position_rmse < 1e-6 && a.rotation_rmse < 1e-5);
            }
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = small(4);
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
        assert_ne!(trial_graph(&cfg, 0, 0).unwrap(), trial_graph(&cfg, 0, 1).unwrap());
        assert_ne!(trial_graph(&cfg, 0, 0).unwrap(), trial_graph(&cfg, 1, 0).unwrap());
    }

    #[test]
    fn no_correction_ignores_measurements() {
        let mut a = small(3);
        a.methods = vec![Method::NoCorrection];
        let mut b = a.clone();
        b.measurement = MeasurementModel::EXACT;
        let (ra, rb) = (run_experiment(&a).unwrap(), run_experiment(&b).unwrap());
        // The measurement draws come after scene and noise, so the noisy poses agree.
        for (x, y) in ra.iter().zip(&rb) {
            assert_eq!(x.aggregates, y.aggregates);
        }
    }

    #[test]
    fn per_edge_rows_cover_every_method() {
        let cfg = small(1);
        let r = run_trial(&cfg, 0).unwrap();
        assert_eq!(r.per_edge.len(), 12 * Method::ALL.len());
        assert_eq!(r.aggregates.len(), Method::ALL.len());
    }
}
