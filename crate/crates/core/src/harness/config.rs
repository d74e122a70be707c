use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::consistency::ConsistencyConfig;
use crate::em::NodeModel;
use crate::error::{Error, Result};
use crate::overlap::MessageFootprint;
use crate::sim::{MeasurementModel, NoiseConfig, SceneSpec};

/// Correction methods compared by the harness, one per evaluation table row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NoCorrection,
    Pairwise,
    GaussianNoreweight,
    GaussianReweight,
    TNoreweight,
    TReweight,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::NoCorrection,
        Method::Pairwise,
        Method::GaussianNoreweight,
        Method::GaussianReweight,
        Method::TNoreweight,
        Method::TReweight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::NoCorrection => "no_correction",
            Method::Pairwise => "pairwise",
            Method::GaussianNoreweight => "gaussian_noreweight",
            Method::GaussianReweight => "gaussian_reweight",
            Method::TNoreweight => "t_noreweight",
            Method::TReweight => "t_reweight",
        }
    }

    /// Node model and reweighting switch for the synchronization methods.
    pub fn sync_settings(self) -> Option<(NodeModel, bool)> {
        match self {
            Method::NoCorrection | Method::Pairwise => None,
            Method::GaussianNoreweight => Some((NodeModel::Gaussian, false)),
            Method::GaussianReweight => Some((NodeModel::Gaussian, true)),
            Method::TNoreweight => Some((NodeModel::StudentT, false)),
            Method::TReweight => Some((NodeModel::StudentT, true)),
        }
    }

    /// Parses a comma-separated method list.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub scene: SceneSpec,
    pub noise: NoiseConfig,
    pub measurement: MeasurementModel,
    pub footprint: MessageFootprint,
    pub consistency: ConsistencyConfig,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment_id: "default".into(),
            scene: SceneSpec::default(),
            noise: NoiseConfig::default(),
            measurement: MeasurementModel::default(),
            footprint: MessageFootprint::default(),
            consistency: ConsistencyConfig::default(),
            methods: Method::ALL.to_vec(),
            trials: 100,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("method set is empty".into()));
        }
        self.scene.validate()?;
        self.noise.weak.validate()?;
        self.noise.strong.validate()?;
        self.measurement.validate()?;
        self.consistency.validate()
    }

    /// Evaluation setup where every agent draws noise with the given spread.
    pub fn with_noise(mut self, pos_sigma_m: f64, rot_sigma_deg: f64) -> Self {
        self.noise.strong.position_sigma = pos_sigma_m;
        self.noise.strong.heading_sigma = rot_sigma_deg;
        self.noise.strong_fraction = 1.0;
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert_eq!(
            Method::parse_list("t_reweight, pairwise").unwrap(),
            vec![Method::TReweight, Method::Pairwise]
        );
        assert!(Method::parse_list("ours").is_err());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"trials": 3, "scene": {"num_agents": 4}}"#).unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.scene.num_agents, 4);
        assert_eq!(cfg.consistency.icm_iters, 15);
        assert_eq!(cfg.consistency.em.num_iters, 15);
        assert_eq!(cfg.consistency.gamma_shape, 120.0);
        assert!(ExperimentConfig::from_json(r#"{"trials": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"methods": []}"#).is_err());
    }
}
