//! The JSON configuration file and its mapping onto library types.
//!
//! Every section and every field has a default, so `{}` is a complete
//! configuration describing the stock experiment: dimension 5, noise
//! bounds in [0.10, 0.13], parameter and initial estimates in [-5, 5],
//! stopping accuracy 1e-3. Unknown keys are rejected so typos surface
//! as usage errors instead of silently running the wrong experiment.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use setmember::harness::{CampaignConfig, ModeSpec, StopReference};
use setmember::network::{Topology, WeightRule};
use setmember::regression::{RegressorLaw, ScenarioConfig};

use crate::Failure;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub scenario: ScenarioSection,
    pub estimator: EstimatorSection,
    pub network: NetworkSection,
    pub campaign: CampaignSection,
}

/// Problem instance: sizes, generation ranges, and the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub dimension: usize,
    pub nodes: usize,
    pub seed: u64,
    pub theta_range: [f64; 2],
    pub init_range: [f64; 2],
    pub epsilon_range: [f64; 2],
    /// Fraction of the true noise bound assumed when building strips;
    /// below 1 the run eventually turns infeasible.
    pub assumed_bound_scale: f64,
    /// Direction law for the fixed regressors: `symmetric_cube`
    /// (coordinates in `[-1, 1]`, then normalized) or `positive_cube`
    /// (coordinates in `[0, 1]`).
    pub regressor_law: String,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            dimension: 5,
            nodes: 7,
            seed: 1,
            theta_range: [-5.0, 5.0],
            init_range: [-5.0, 5.0],
            epsilon_range: [0.10, 0.13],
            assumed_bound_scale: 1.0,
            regressor_law: "symmetric_cube".into(),
        }
    }
}

impl ScenarioSection {
    pub fn regressor_law(&self) -> Result<RegressorLaw, Failure> {
        match self.regressor_law.as_str() {
            "symmetric_cube" => Ok(RegressorLaw::SymmetricCube),
            "positive_cube" => Ok(RegressorLaw::PositiveCube),
            other => Err(Failure::Usage(format!(
                "unknown regressor law '{other}' (expected symmetric_cube or positive_cube)"
            ))),
        }
    }
}

/// Estimator mode and stopping parameters for single runs; `delta`,
/// `max_steps`, and `stop` also govern every campaign run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    /// One of `incremental_nstep`, `incremental_1step`,
    /// `incremental_1step_batched`, `distributed`.
    pub mode: String,
    pub delta: f64,
    pub max_steps: u64,
    /// What the stopping distance is measured against: `true_parameter`
    /// (the asymptotic target; the reference iteration counts use this)
    /// or `feasible_intersection` (the online surrogate, which fires
    /// earlier).
    pub stop: String,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            mode: "incremental_nstep".into(),
            delta: 1e-3,
            max_steps: 100_000,
            stop: "true_parameter".into(),
        }
    }
}

impl EstimatorSection {
    pub fn stop_reference(&self) -> Result<StopReference, Failure> {
        match self.stop.as_str() {
            "true_parameter" => Ok(StopReference::TrueParameter),
            "feasible_intersection" => Ok(StopReference::FeasibleIntersection),
            other => Err(Failure::Usage(format!(
                "unknown stop reference '{other}' (expected true_parameter or \
                 feasible_intersection)"
            ))),
        }
    }
}

/// Communication graph and consensus weights for distributed modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    /// One of `complete`, `ring`, `path`, `star`, `custom`.
    pub topology: String,
    /// Ring direction; ignored by other topologies.
    pub bidirectional: bool,
    /// One of `neighbor_average`, `metropolis`, `max_degree`.
    pub weights: String,
    /// Edge list for `custom`, as `[sender, receiver]` pairs.
    pub edges: Option<Vec<[usize; 2]>>,
    /// Whether `custom` edges are taken in both directions.
    pub symmetric: bool,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            topology: "ring".into(),
            bidirectional: true,
            weights: "neighbor_average".into(),
            edges: None,
            symmetric: true,
        }
    }
}

/// Monte Carlo comparison: network sizes, repetitions, contenders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignSection {
    pub node_counts: Vec<usize>,
    pub runs_per_n: usize,
    pub modes: Vec<ModeEntry>,
}

impl Default for CampaignSection {
    fn default() -> Self {
        Self {
            node_counts: vec![7, 20, 100],
            runs_per_n: 100,
            modes: vec![
                ModeEntry::plain("incremental_nstep"),
                ModeEntry::plain("incremental_1step"),
                ModeEntry::distributed("complete"),
                ModeEntry::distributed("ring"),
            ],
        }
    }
}

/// One campaign contender. Network fields left out fall back to the
/// `network` section; they are only allowed on distributed entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bidirectional: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<bool>,
}

impl ModeEntry {
    fn plain(mode: &str) -> Self {
        Self {
            mode: mode.into(),
            topology: None,
            bidirectional: None,
            weights: None,
            edges: None,
            symmetric: None,
        }
    }

    fn distributed(topology: &str) -> Self {
        Self { topology: Some(topology.into()), ..Self::plain("distributed") }
    }

    fn has_network_fields(&self) -> bool {
        self.topology.is_some()
            || self.bidirectional.is_some()
            || self.weights.is_some()
            || self.edges.is_some()
            || self.symmetric.is_some()
    }

    /// Resolves against the network section's defaults.
    pub fn to_spec(&self, net: &NetworkSection) -> Result<ModeSpec, Failure> {
        if self.mode != "distributed" && self.has_network_fields() {
            return Err(Failure::Usage(format!(
                "campaign mode '{}' does not take network fields",
                self.mode
            )));
        }
        let merged = NetworkSection {
            topology: self.topology.clone().unwrap_or_else(|| net.topology.clone()),
            bidirectional: self.bidirectional.unwrap_or(net.bidirectional),
            weights: self.weights.clone().unwrap_or_else(|| net.weights.clone()),
            edges: self.edges.clone().or_else(|| net.edges.clone()),
            symmetric: self.symmetric.unwrap_or(net.symmetric),
        };
        mode_spec(&self.mode, &merged)
    }
}

fn mode_spec(mode: &str, net: &NetworkSection) -> Result<ModeSpec, Failure> {
    match mode {
        "incremental_nstep" => Ok(ModeSpec::IncrementalNStep),
        "incremental_1step" => Ok(ModeSpec::Incremental1Step { batched: false }),
        "incremental_1step_batched" => Ok(ModeSpec::Incremental1Step { batched: true }),
        "distributed" => Ok(ModeSpec::Distributed {
            topology: net.topology_spec()?,
            weights: net.weight_rule()?,
        }),
        other => Err(Failure::Usage(format!(
            "unknown estimator mode '{other}' (expected incremental_nstep, \
             incremental_1step, incremental_1step_batched, or distributed)"
        ))),
    }
}

impl NetworkSection {
    pub fn topology_spec(&self) -> Result<Topology, Failure> {
        match self.topology.as_str() {
            "complete" => Ok(Topology::Complete),
            "ring" => Ok(Topology::Ring { bidirectional: self.bidirectional }),
            "path" => Ok(Topology::Path),
            "star" => Ok(Topology::Star),
            "custom" => {
                let edges = self
                    .edges
                    .as_ref()
                    .ok_or_else(|| Failure::Usage("custom topology needs an edge list".into()))?;
                Ok(Topology::Custom {
                    edges: edges.iter().map(|&[a, b]| (a, b)).collect(),
                    symmetric: self.symmetric,
                })
            }
            other => Err(Failure::Usage(format!(
                "unknown topology '{other}' (expected complete, ring, path, star, or custom)"
            ))),
        }
    }

    pub fn weight_rule(&self) -> Result<WeightRule, Failure> {
        match self.weights.as_str() {
            "neighbor_average" => Ok(WeightRule::NeighborAverage),
            "metropolis" => Ok(WeightRule::Metropolis),
            "max_degree" => Ok(WeightRule::MaxDegree),
            other => Err(Failure::Usage(format!(
                "unknown weight rule '{other}' (expected neighbor_average, metropolis, \
                 or max_degree)"
            ))),
        }
    }
}

impl FileConfig {
    /// Scenario generation parameters for the library.
    pub fn scenario_config(&self) -> Result<ScenarioConfig<f64>, Failure> {
        let pair = |r: [f64; 2]| (r[0], r[1]);
        Ok(ScenarioConfig {
            theta_range: pair(self.scenario.theta_range),
            init_range: pair(self.scenario.init_range),
            epsilon_range: pair(self.scenario.epsilon_range),
            assumed_bound_scale: self.scenario.assumed_bound_scale,
            regressor_law: self.scenario.regressor_law()?,
        })
    }

    /// The estimator for `run`, with distributed modes drawing their
    /// graph from the `network` section.
    pub fn run_mode_spec(&self) -> Result<ModeSpec, Failure> {
        mode_spec(&self.estimator.mode, &self.network)
    }

    /// The full campaign description for `campaign`.
    pub fn campaign_config(&self) -> Result<CampaignConfig<f64>, Failure> {
        let modes = self
            .campaign
            .modes
            .iter()
            .map(|entry| entry.to_spec(&self.network))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CampaignConfig {
            dimension: self.scenario.dimension,
            node_counts: self.campaign.node_counts.clone(),
            runs_per_n: self.campaign.runs_per_n,
            modes,
            delta: self.estimator.delta,
            max_steps: self.estimator.max_steps,
            seed: self.scenario.seed,
            stop: self.estimator.stop_reference()?,
            scenario: self.scenario_config()?,
        })
    }

    /// Hex SHA-256 of the effective configuration's canonical JSON,
    /// recorded in manifests so outputs are traceable to their inputs.
    pub fn sha256(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Loads a config file and applies the command-line seed override.
pub fn load_effective(path: &Path, seed_override: Option<u64>) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg: FileConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?;
    if let Some(seed) = seed_override {
        cfg.scenario.seed = seed;
    }
    Ok(cfg)
}
