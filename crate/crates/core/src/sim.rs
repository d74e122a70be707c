//! Synthetic scenes: agent placement, pose noise, and a heavy-tailed
//! stand-in for the learned relative-pose regressor.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample_pose_noise, NoiseSpec};
use crate::error::{Error, Result};
use crate::graph::{Node, PoseGraph, Provenance};
use crate::overlap::{overlap_fraction, MessageFootprint};
use crate::se2::{relative, wrap_angle, Pose};

const PLACEMENT_ATTEMPTS: usize = 1000;
const SCENE_RESTARTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub num_agents: usize,
    /// Width and height of the placement area, meters, centered on the origin.
    pub extent: [f64; 2],
    pub min_spacing: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            num_agents: 7,
            extent: [60.0, 60.0],
            min_spacing: 8.0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_agents < 2 {
            return Err(Error::InvalidParameter(format!(
                "num_agents must be >= 2, got {}",
                self.num_agents
            )));
        }
        if !(self.min_spacing > 0.0) || !(self.extent[0] > 0.0) || !(self.extent[1] > 0.0) {
            return Err(Error::InvalidParameter("extent and min_spacing must be > 0".into()));
        }
        Ok(())
    }
}

/// Places agents uniformly in the extent, at least `min_spacing` apart, with
/// uniform headings.
pub fn generate_scene<R: Rng + ?Sized>(spec: &SceneSpec, rng: &mut R) -> Result<Vec<Pose>> {
    spec.validate()?;
    let [w, h] = spec.extent;
    if spec.min_spacing > w.hypot(h) {
        return Err(Error::InfeasibleScene(format!(
            "spacing {} exceeds the extent diagonal",
            spec.min_spacing
        )));
    }
    'restart: for _ in 0..SCENE_RESTARTS {
        let mut placed: Vec<[f64; 2]> = Vec::with_capacity(spec.num_agents);
        while placed.len() < spec.num_agents {
            let spot = (0..PLACEMENT_ATTEMPTS).find_map(|_| {
                let p = [w * (rng.random::<f64>() - 0.5), h * (rng.random::<f64>() - 0.5)];
                placed
                    .iter()
                    .all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) >= spec.min_spacing)
                    .then_some(p)
            });
            match spot {
                Some(p) => placed.push(p),
                None => continue 'restart,
            }
        }
        return Ok(placed
            .into_iter()
            .map(|[x, y]| Pose::new(x, y, wrap_angle(std::f64::consts::PI * (1.0 - 2.0 * rng.random::<f64>()))))
            .collect());
    }
    Err(Error::InfeasibleScene(format!(
        "could not place {} agents {} m apart in {}x{} m",
        spec.num_agents, spec.min_spacing, w, h
    )))
}

/// Weak and strong noise plus the fraction of agents drawing strong noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub weak: NoiseSpec,
    pub strong: NoiseSpec,
    pub strong_fraction: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            weak: NoiseSpec::weak(),
            strong: NoiseSpec::strong(),
            strong_fraction: 1.0,
        }
    }
}

/// Tags `round(p * n)` random agents strong, the rest weak, and composes
/// each agent's noise onto its true pose in the world frame.
pub fn assign_and_apply_noise<R: Rng + ?Sized>(
    poses: &[Pose],
    strong_fraction: f64,
    weak: &NoiseSpec,
    strong: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<Node>> {
    if !(0.0..=1.0).contains(&strong_fraction) {
        return Err(Error::InvalidParameter(format!(
            "strong fraction {strong_fraction} outside [0, 1]"
        )));
    }
    weak.validate()?;
    strong.validate()?;
    let n = poses.len();
    let n_strong = (strong_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut provenance = vec![Provenance::Weak; n];
    for &k in &order[..n_strong] {
        provenance[k] = Provenance::Strong;
    }
    Ok(poses
        .iter()
        .zip(provenance)
        .enumerate()
        .map(|(id, (p, prov))| {
            let spec = match prov {
                Provenance::Weak => weak,
                Provenance::Strong => strong,
            };
            let d = sample_pose_noise(spec, rng);
            Node {
                id,
                true_pose: Some(*p),
                noisy_pose: Pose::new(p.x + d[0], p.y + d[1], p.theta + d[2]),
                provenance: prov,
            }
        })
        .collect())
}

/// Mixture of an inlier and an outlier residual distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasurementModel {
    pub inlier: NoiseSpec,
    pub outlier: NoiseSpec,
    pub outlier_rate: f64,
}

impl Default for MeasurementModel {
    fn default() -> Self {
        MeasurementModel {
            inlier: NoiseSpec::unbiased(0.05, 0.5),
            outlier: NoiseSpec::unbiased(2.0, 15.0),
            outlier_rate: 0.2,
        }
    }
}

impl MeasurementModel {
    pub const EXACT: MeasurementModel = MeasurementModel {
        inlier: NoiseSpec::ZERO,
        outlier: NoiseSpec::ZERO,
        outlier_rate: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.outlier_rate) {
            return Err(Error::InvalidParameter(format!(
                "outlier_rate {} outside [0, 1]",
                self.outlier_rate
            )));
        }
        self.inlier.validate()?;
        self.outlier.validate()
    }
}

/// Draws one residual `r` and returns the prediction `r * true_rel`.
pub fn simulate_regression<R: Rng + ?Sized>(true_rel: &Pose, model: &MeasurementModel, rng: &mut R) -> Pose {
    let outlier = model.outlier_rate > 0.0 && rng.random::<f64>() < model.outlier_rate;
    let spec = if outlier { &model.outlier } else { &model.inlier };
    let d = sample_pose_noise(spec, rng);
    Pose::new(d[0], d[1], d[2]).compose(true_rel)
}

/// Complete directed graph over noisy agents with simulated predictions and
/// overlaps computed from the noisy poses.
pub fn build_graph<R: Rng + ?Sized>(
    nodes: Vec<Node>,
    model: &MeasurementModel,
    footprint: &MessageFootprint,
    rng: &mut R,
) -> Result<PoseGraph> {
    model.validate()?;
    let max = nodes.len().max(crate::graph::DEFAULT_MAX_NODES);
    let mut g = PoseGraph::with_max_nodes(nodes, max)?;
    let snapshot: Vec<Node> = g.nodes().to_vec();
    for ni in &snapshot {
        for nj in &snapshot {
            if ni.id == nj.id {
                continue;
            }
            let (ti, tj) = (ni.true_pose.unwrap(), nj.true_pose.unwrap());
            let predicted = simulate_regression(&relative(&ti, &tj), model, rng);
            let o = overlap_fraction(&ni.noisy_pose, &nj.noisy_pose, footprint);
            g.add_edge(nj.id, ni.id, predicted, o)?;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_agents_spaced() {
        let spec = SceneSpec {
            num_agents: 2,
            extent: [1e4, 1e4],
            min_spacing: 50.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = generate_scene(&spec, &mut rng).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0].x - s[1].x).hypot(s[0].y - s[1].y) >= 50.0);
    }

    #[test]
    fn scenes_are_seeded() {
        let spec = SceneSpec::default();
        let a = generate_scene(&spec, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = generate_scene(&spec, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_scene() {
        let spec = SceneSpec {
            num_agents: 7,
            extent: [10.0, 10.0],
            min_spacing: 9.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(generate_scene(&spec, &mut rng), Err(Error::InfeasibleScene(_))));
        let spec = SceneSpec {
            num_agents: 1,
            ..SceneSpec::default()
        };
        assert!(generate_scene(&spec, &mut rng).is_err());
    }

    #[test]
    fn spacing_holds_over_many_scenes() {
        let spec = SceneSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut min_seen = f64::INFINITY;
        for _ in 0..10_000 {
            let s = generate_scene(&spec, &mut rng).unwrap();
            for a in 0..s.len() {
                for b in a + 1..s.len() {
                    min_seen = min_seen.min((s[a].x - s[b].x).hypot(s[a].y - s[b].y));
                }
            }
        }
        assert!(min_seen >= spec.min_spacing);
    }

    #[test]
    fn noise_assignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let poses = generate_scene(&SceneSpec::default(), &mut rng).unwrap();
        let nodes = assign_and_apply_noise(&poses, 0.0, &NoiseSpec::weak(), &NoiseSpec::strong(), &mut rng).unwrap();
        assert!(nodes.iter().all(|n| n.provenance == Provenance::Weak));

        let nodes = assign_and_apply_noise(&poses, 0.7, &NoiseSpec::ZERO, &NoiseSpec::ZERO, &mut rng).unwrap();
        for (n, p) in nodes.iter().zip(&poses) {
            assert_eq!(n.noisy_pose, *p);
        }

        let nodes = assign_and_apply_noise(&poses[..4], 0.5, &NoiseSpec::weak(), &NoiseSpec::strong(), &mut rng).unwrap();
        assert_eq!(nodes.iter().filter(|n| n.provenance == Provenance::Strong).count(), 2);

        assert!(assign_and_apply_noise(&poses, 1.5, &NoiseSpec::weak(), &NoiseSpec::strong(), &mut rng).is_err());
    }

    #[test]
    fn exact_model_returns_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = Pose::from_degrees(12.0, -3.0, 44.0);
        assert_eq!(simulate_regression(&r, &MeasurementModel::EXACT, &mut rng), r);
    }

    #[test]
    fn outlier_residual_moments() {
        let model = MeasurementModel {
            inlier: NoiseSpec::ZERO,
            outlier: NoiseSpec::unbiased(1.5, 10.0),
            outlier_rate: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = Pose::from_degrees(5.0, 2.0, 30.0);
        let n = 100_000;
        let (mut sx, mut sxx, mut st) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let p = simulate_regression(&r, &model, &mut rng);
            let res = p.compose(&r.inverse());
            sx += res.x;
            sxx += res.x * res.x;
            st += res.theta * res.theta;
        }
        let mean = sx / n as f64;
        let sd = (sxx / n as f64 - mean * mean).sqrt();
        assert!(mean.abs() < 3.0 * 1.5 / (n as f64).sqrt());
        assert!((sd - 1.5).abs() < 0.02);
        assert!(((st / n as f64).sqrt().to_degrees() - 10.0).abs() < 0.3);
    }

    #[test]
    fn reverse_edges_uncorrelated() {
        let model = MeasurementModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (ti, tj) = (Pose::new(0.0, 0.0, 0.2), Pose::new(20.0, 5.0, -1.0));
        let (ji, ij) = (relative(&ti, &tj), relative(&tj, &ti));
        let n = 10_000;
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            a.push(simulate_regression(&ji, &model, &mut rng).compose(&ji.inverse()).x);
            b.push(simulate_regression(&ij, &model, &mut rng).compose(&ij.inverse()).x);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(&a), mean(&b));
        let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        assert!((cov / (va * vb).sqrt()).abs() < 0.05);
    }

    #[test]
    fn exact_correction_recovers_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let poses = generate_scene(&SceneSpec::default(), &mut rng).unwrap();
        let nodes = assign_and_apply_noise(&poses, 1.0, &NoiseSpec::weak(), &NoiseSpec::strong(), &mut rng).unwrap();
        for ni in &nodes {
            for nj in &nodes {
                let true_rel = relative(&ni.true_pose.unwrap(), &nj.true_pose.unwrap());
                let noisy_rel = relative(&ni.noisy_pose, &nj.noisy_pose);
                let c = true_rel.compose(&noisy_rel.inverse());
                assert!(crate::se2::apply_correction(&c, &noisy_rel).approx_eq(&true_rel, 1e-9));
            }
        }
    }

    #[test]
    fn complete_graph_built() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let poses = generate_scene(&SceneSpec::default(), &mut rng).unwrap();
        let nodes = assign_and_apply_noise(&poses, 1.0, &NoiseSpec::weak(), &NoiseSpec::strong(), &mut rng).unwrap();
        let g = build_graph(nodes, &MeasurementModel::default(), &MessageFootprint::default(), &mut rng).unwrap();
        assert_eq!(g.edges().len(), 42);
        g.validate().unwrap();
        assert!(g.edges().iter().all(|e| e.overlap > 0.0 && e.overlap <= 1.0));
    }
}
