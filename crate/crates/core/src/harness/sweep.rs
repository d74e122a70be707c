use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::emit::{rows_from_reports, ReportRow};
use super::trial::{run_cell, TrialReport};
use crate::error::{Error, Result};

/// Overrides applied to the base configuration for one sweep cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CellDelta {
    pub name: Option<String>,
    pub noise_pos_sigma_m: Option<f64>,
    pub noise_rot_sigma_deg: Option<f64>,
    /// Position bias along the agent's x axis, meters.
    pub bias_pos_m: Option<f64>,
    pub bias_rot_deg: Option<f64>,
    pub num_agents: Option<usize>,
    pub outlier_rate: Option<f64>,
    pub strong_fraction: Option<f64>,
    pub trials: Option<usize>,
}

impl CellDelta {
    pub fn apply(&self, base: &ExperimentConfig, index: usize) -> ExperimentConfig {
        let mut c = base.clone();
        let s = &mut c.noise.strong;
        if let Some(v) = self.noise_pos_sigma_m {
            s.position_sigma = v;
        }
        if let Some(v) = self.noise_rot_sigma_deg {
            s.heading_sigma = v;
        }
        if let Some(v) = self.bias_pos_m {
            s.position_bias = [v, 0.0];
        }
        if let Some(v) = self.bias_rot_deg {
            s.heading_bias = v;
        }
        if let Some(v) = self.num_agents {
            c.scene.num_agents = v;
        }
        if let Some(v) = self.outlier_rate {
            c.measurement.outlier_rate = v;
        }
        if let Some(v) = self.strong_fraction {
            c.noise.strong_fraction = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        let name = self.name.clone().unwrap_or_else(|| format!("cell{index}"));
        c.experiment_id = format!("{}/{}", base.experiment_id, name);
        c
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub cells: Vec<CellDelta>,
}

impl SweepSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Position and heading spread pairs, applied to every agent.
    pub fn noise_grid(base: ExperimentConfig, levels: &[(f64, f64)]) -> Self {
        let cells = levels
            .iter()
            .map(|&(p, r)| CellDelta {
                name: Some(format!("noise_{p}m_{r}deg")),
                noise_pos_sigma_m: Some(p),
                noise_rot_sigma_deg: Some(r),
                strong_fraction: Some(1.0),
                ..Default::default()
            })
            .collect();
        SweepSpec { base, cells }
    }

    /// Biased noise with 0.1 m / 1 deg spread on every agent.
    pub fn bias_grid(base: ExperimentConfig, levels: &[(f64, f64)]) -> Self {
        let cells = levels
            .iter()
            .map(|&(p, r)| CellDelta {
                name: Some(format!("bias_{p}m_{r}deg")),
                noise_pos_sigma_m: Some(0.1),
                noise_rot_sigma_deg: Some(1.0),
                bias_pos_m: Some(p),
                bias_rot_deg: Some(r),
                strong_fraction: Some(1.0),
                ..Default::default()
            })
            .collect();
        SweepSpec { base, cells }
    }

    pub fn agent_grid(base: ExperimentConfig, counts: &[usize]) -> Self {
        let cells = counts
            .iter()
            .map(|&n| CellDelta {
                name: Some(format!("agents_{n}")),
                num_agents: Some(n),
                ..Default::default()
            })
            .collect();
        SweepSpec { base, cells }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: usize,
    pub experiment_id: String,
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    pub reports: Vec<Vec<TrialReport>>,
    pub failures: Vec<CellFailure>,
}

impl SweepOutcome {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.reports.iter().flat_map(|r| rows_from_reports(r)).collect()
    }
}

/// Runs each cell in order. A failing cell is recorded and skipped.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    if spec.cells.is_empty() {
        return Err(Error::InvalidParameter("sweep has no cells".into()));
    }
    let mut out = SweepOutcome::default();
    for (idx, delta) in spec.cells.iter().enumerate() {
        let cfg = delta.apply(&spec.base, idx);
        match run_cell(&cfg, idx) {
            Ok(r) => out.reports.push(r),
            Err(e) => out.failures.push(CellFailure {
                cell: idx,
                experiment_id: cfg.experiment_id.clone(),
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            trials: 2,
            experiment_id: "t".into(),
            ..Default::default()
        }
    }

    #[test]
    fn delta_overrides_only_given_fields() {
        let d = CellDelta {
            num_agents: Some(3),
            bias_pos_m: Some(0.4),
            ..Default::default()
        };
        let c = d.apply(&base(), 4);
        assert_eq!(c.scene.num_agents, 3);
        assert_eq!(c.noise.strong.position_bias, [0.4, 0.0]);
        assert_eq!(c.noise.strong.position_sigma, base().noise.strong.position_sigma);
        assert_eq!(c.experiment_id, "t/cell4");
    }

    #[test]
    fn failed_cell_does_not_stop_sweep() {
        let mut spec = SweepSpec::agent_grid(base(), &[3, 2]);
        spec.cells.insert(
            1,
            CellDelta {
                noise_pos_sigma_m: Some(-1.0),
                ..Default::default()
            },
        );
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.reports.len(), 2);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].cell, 1);
        assert_eq!(out.failures[0].kind, "invalid_parameter");
    }

    #[test]
    fn cells_draw_different_scenes() {
        let out = run_sweep(&SweepSpec::noise_grid(base(), &[(0.1, 1.0), (0.1, 1.0)])).unwrap();
        assert_ne!(out.reports[0][0].aggregates, out.reports[1][0].aggregates);
    }
}
