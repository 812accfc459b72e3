//! Reference sets for stopping tests and deterministic Monte Carlo
//! campaigns over modes, topologies, and network sizes.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{run_until, EstimatorState, Recording, RunOutcome, StoppingRule};
use crate::geometry::{distance_to_intersection, FeasibleSet, Slab, Vector, DEFAULT_MAX_SWEEPS};
use crate::network::{Topology, WeightMatrix, WeightRule};
use crate::regression::{generate_scenario, RunningSlab, Scenario, ScenarioConfig};
use crate::rng::mix3;
use crate::scalar::Real;

/// The global feasible set at some horizon: one strip per node, the
/// intersection of everything that node has measured so far.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSet<T> {
    members: Vec<FeasibleSet<T>>,
}

impl<T: Real> ReferenceSet<T> {
    /// Wraps per-node slabs; at least one, all of one dimension.
    pub fn new(slabs: Vec<Slab<T>>) -> Result<Self> {
        let Some(first) = slabs.first() else {
            return Err(Error::InvalidSize("reference set needs at least one slab".into()));
        };
        let dim = first.dim();
        for s in &slabs {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: s.dim() });
            }
        }
        Ok(Self { members: slabs.into_iter().map(FeasibleSet::Slab).collect() })
    }

    /// Rebuilds the set a scenario reaches once node `i` has taken
    /// `counts[i]` measurements (each at least 1).
    pub fn at_counts(scenario: &Scenario<T>, counts: &[u64]) -> Result<Self> {
        if counts.len() != scenario.node_count() {
            return Err(Error::BatchSizeMismatch {
                expected: scenario.node_count(),
                got: counts.len(),
            });
        }
        let mut slabs = Vec::with_capacity(counts.len());
        for (i, &count) in counts.iter().enumerate() {
            if count == 0 {
                return Err(Error::InvalidSize(format!("node {i} needs at least one measurement")));
            }
            let model = scenario.assumed_sensor(i)?;
            let mut rs = RunningSlab::new(model, &scenario.measure(i, 1));
            for instant in 2..=count {
                rs.update(&scenario.measure(i, instant));
            }
            slabs.push(rs.slab()?);
        }
        Self::new(slabs)
    }

    /// Rebuilds the set at instant `k` of a batch schedule, where every
    /// node has measured `k` times.
    pub fn at_instant(scenario: &Scenario<T>, k: u64) -> Result<Self> {
        Self::at_counts(scenario, &vec![k; scenario.node_count()])
    }

    #[inline]
    pub fn members(&self) -> &[FeasibleSet<T>] {
        &self.members
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Flag check only, as for any intersection: a node's own
    /// measurements contradicted each other.
    pub fn is_empty(&self) -> bool {
        self.members.iter().any(FeasibleSet::is_empty)
    }
}

/// Distance from a point to the reference set, accurate to `tol`.
pub fn distance_to_reference<T: Real>(
    x: &Vector<T>,
    reference: &ReferenceSet<T>,
    tol: T,
) -> Result<T> {
    distance_to_intersection(&reference.members, x, tol, DEFAULT_MAX_SWEEPS)
}

/// One estimator configuration a campaign compares.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeSpec {
    IncrementalNStep,
    Incremental1Step { batched: bool },
    Distributed { topology: Topology, weights: WeightRule },
}

impl ModeSpec {
    /// Stable label keying rows in summaries and run records.
    pub fn label(&self) -> String {
        match self {
            ModeSpec::IncrementalNStep => "incremental_nstep".into(),
            ModeSpec::Incremental1Step { batched: false } => "incremental_1step".into(),
            ModeSpec::Incremental1Step { batched: true } => "incremental_1step_batched".into(),
            ModeSpec::Distributed { topology, weights } => {
                format!("distributed_{}_{}", topology.label(), weights.label())
            }
        }
    }

    /// Builds the weight matrix for a network of `n` nodes, or `None`
    /// for the incremental modes. The graph must be strongly connected;
    /// anything else cannot honor the convergence contract.
    pub fn build_weights<T: Real>(&self, n: usize) -> Result<Option<WeightMatrix<T>>> {
        match self {
            ModeSpec::Distributed { topology, weights } => {
                let graph = topology.build(n)?;
                if !graph.is_strongly_connected() {
                    return Err(Error::InvalidConfig(format!(
                        "{} graph on {n} nodes is not strongly connected",
                        topology.label()
                    )));
                }
                let w = weights.build(&graph)?;
                w.validate_for(&graph)?;
                Ok(Some(w))
            }
            _ => Ok(None),
        }
    }

    /// Builds a fresh estimator in this mode.
    pub fn make_state<T: Real>(
        &self,
        initial_estimates: Vec<Vector<T>>,
        weights: Option<WeightMatrix<T>>,
    ) -> Result<EstimatorState<T>> {
        match self {
            ModeSpec::IncrementalNStep => EstimatorState::incremental_nstep(initial_estimates),
            ModeSpec::Incremental1Step { batched } => {
                EstimatorState::incremental_onestep(initial_estimates, *batched)
            }
            ModeSpec::Distributed { .. } => {
                let w = weights.ok_or_else(|| {
                    Error::InvalidConfig("distributed mode needs a weight matrix".into())
                })?;
                EstimatorState::distributed(initial_estimates, w)
            }
        }
    }
}

/// Which set the stopping distance is measured against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StopReference {
    /// The true parameter, standing in for the asymptotic feasible set
    /// the strips tighten onto. This is what the reference iteration
    /// counts were measured with, so it is the campaign default.
    #[default]
    TrueParameter,
    /// The current-horizon feasible intersection, the surrogate
    /// available without ground truth. Fires earlier, most noticeably
    /// for the incremental modes whose estimates track the current
    /// intersection closely long before that intersection has tightened
    /// onto the truth.
    FeasibleIntersection,
}

impl StopReference {
    fn rule<T: Real>(self, delta: T) -> StoppingRule<T> {
        match self {
            StopReference::TrueParameter => StoppingRule::DistanceToTruth(delta),
            StopReference::FeasibleIntersection => StoppingRule::DistanceToReference(delta),
        }
    }
}

/// Everything a campaign needs: the problem sizes, the contenders, the
/// stopping accuracy, and the master seed.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig<T> {
    pub dimension: usize,
    pub node_counts: Vec<usize>,
    pub runs_per_n: usize,
    pub modes: Vec<ModeSpec>,
    pub delta: T,
    pub max_steps: u64,
    pub seed: u64,
    pub stop: StopReference,
    pub scenario: ScenarioConfig<T>,
}

impl<T: Real> CampaignConfig<T> {
    fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if self.node_counts.is_empty() || self.node_counts.contains(&0) {
            return Err(Error::InvalidConfig("node_counts must list sizes of at least 1".into()));
        }
        if self.runs_per_n == 0 {
            return Err(Error::InvalidConfig("runs_per_n must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidConfig("modes must not be empty".into()));
        }
        if !self.delta.is_finite() || self.delta <= T::zero() {
            return Err(Error::InvalidConfig("delta must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// How one run ended, as recorded in campaign output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Stopped,
    NoStop,
    Infeasible,
    Error,
}

/// One Monte Carlo run's result line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub mode: String,
    pub nodes: usize,
    pub run: usize,
    /// The run's own seed, derived from (campaign seed, nodes, run).
    pub seed: u64,
    pub status: RunStatus,
    /// Instants until the stopping rule fired; absent for censored runs.
    pub iterations: Option<u64>,
    pub final_disagreement: Option<f64>,
    /// Failure specifics for infeasible or errored runs.
    pub detail: Option<String>,
}

/// Statistics and raw records for one (mode, network size) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignCell {
    pub mode: String,
    pub nodes: usize,
    /// Mean and population standard deviation of the iteration counts of
    /// runs that stopped; absent when none did.
    pub mean_iterations: Option<f64>,
    pub std_iterations: Option<f64>,
    /// Runs that did not stop: budget exhaustion, infeasibility, errors.
    pub failures: usize,
    pub runs: Vec<RunRecord>,
}

/// All cells of a campaign, in the configured (mode, size) order.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult<T> {
    pub cells: Vec<CampaignCell>,
    pub config: CampaignConfig<T>,
}

impl<T: Real> CampaignResult<T> {
    /// Looks up a cell by mode label and network size.
    pub fn cell(&self, mode: &str, nodes: usize) -> Option<&CampaignCell> {
        self.cells.iter().find(|c| c.mode == mode && c.nodes == nodes)
    }
}

/// The seed for one run, shared by every mode so contenders face the
/// same scenarios.
pub fn run_seed(campaign_seed: u64, nodes: usize, run: usize) -> u64 {
    mix3(campaign_seed, nodes as u64, run as u64)
}

/// Runs the full campaign: every mode on every network size,
/// `runs_per_n` times, stopping each run when all estimates come within
/// `delta` of the global feasible set.
///
/// Deterministic in the config alone: run seeds fix scenarios and noise,
/// and records land in run order no matter how the runs are scheduled
/// across threads. Per-run failures are recorded; only configuration
/// errors abort the campaign.
pub fn run_campaign<T: Real>(cfg: &CampaignConfig<T>) -> Result<CampaignResult<T>> {
    cfg.validate()?;
    let mut cells = Vec::with_capacity(cfg.modes.len() * cfg.node_counts.len());
    for spec in &cfg.modes {
        for &nodes in &cfg.node_counts {
            let weights: Option<WeightMatrix<T>> = spec.build_weights(nodes)?;
            let runs: Vec<RunRecord> = (0..cfg.runs_per_n)
                .into_par_iter()
                .map(|run| one_run(cfg, spec, nodes, run, weights.clone()))
                .collect();
            cells.push(make_cell(spec.label(), nodes, runs));
        }
    }
    Ok(CampaignResult { cells, config: cfg.clone() })
}

fn one_run<T: Real>(
    cfg: &CampaignConfig<T>,
    spec: &ModeSpec,
    nodes: usize,
    run: usize,
    weights: Option<WeightMatrix<T>>,
) -> RunRecord {
    let seed = run_seed(cfg.seed, nodes, run);
    let mut record = RunRecord {
        mode: spec.label(),
        nodes,
        run,
        seed,
        status: RunStatus::Error,
        iterations: None,
        final_disagreement: None,
        detail: None,
    };

    let outcome =
        generate_scenario(cfg.dimension, nodes, seed, &cfg.scenario).and_then(|scenario| {
            let mut state = spec.make_state(scenario.initial_estimates().to_vec(), weights)?;
            run_until(
                &mut state,
                &scenario,
                &cfg.stop.rule(cfg.delta),
                cfg.max_steps,
                Recording::Light,
            )
        });

    match outcome {
        Ok(traj) => {
            record.final_disagreement = traj.final_disagreement.to_f64();
            match traj.outcome {
                RunOutcome::Stopped { at_step } => {
                    record.status = RunStatus::Stopped;
                    record.iterations = Some(at_step);
                }
                RunOutcome::NoStop => record.status = RunStatus::NoStop,
            }
        }
        Err(Error::InfeasibleAt { node, instant }) => {
            record.status = RunStatus::Infeasible;
            record.detail =
                Some(format!("feasible set of node {node} emptied at instant {instant}"));
        }
        Err(e) => {
            record.status = RunStatus::Error;
            record.detail = Some(e.to_string());
        }
    }
    record
}

fn make_cell(mode: String, nodes: usize, runs: Vec<RunRecord>) -> CampaignCell {
    let counts: Vec<f64> = runs.iter().filter_map(|r| r.iterations).map(|it| it as f64).collect();
    let failures = runs.len() - counts.len();
    let (mean, std) = if counts.is_empty() {
        (None, None)
    } else {
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / counts.len() as f64;
        (Some(mean), Some(var.sqrt()))
    };
    CampaignCell { mode, nodes, mean_iterations: mean, std_iterations: std, failures, runs }
}

/// One row of the final comparison table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub mode: String,
    pub nodes: usize,
    pub mean_iterations: Option<f64>,
    pub std_iterations: Option<f64>,
    pub failures: usize,
}

/// The comparison table, sorted by (mode, size) for stable emission.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

/// Collapses a campaign into its summary rows.
pub fn summarize<T: Real>(result: &CampaignResult<T>) -> SummaryTable {
    let mut rows: Vec<SummaryRow> = result
        .cells
        .iter()
        .map(|c| SummaryRow {
            mode: c.mode.clone(),
            nodes: c.nodes,
            mean_iterations: c.mean_iterations,
            std_iterations: c.std_iterations,
            failures: c.failures,
        })
        .collect();
    rows.sort_by(|a, b| a.mode.cmp(&b.mode).then(a.nodes.cmp(&b.nodes)));
    SummaryTable { rows }
}

impl SummaryTable {
    /// CSV with one row per (mode, size); empty mean/std fields mean
    /// every run of the cell was censored.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "mode,nodes,mean_iterations,std_iterations,failures")?;
        for r in &self.rows {
            let fmt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            writeln!(
                out,
                "{},{},{},{},{}",
                r.mode,
                r.nodes,
                fmt(r.mean_iterations),
                fmt(r.std_iterations),
                r.failures
            )?;
        }
        Ok(())
    }
}

/// JSON Lines dump of every run record, in (mode, size, run) order.
pub fn write_runs_jsonl<T: Real, W: std::io::Write>(
    result: &CampaignResult<T>,
    out: &mut W,
) -> std::io::Result<()> {
    for cell in &result.cells {
        for run in &cell.runs {
            let line = serde_json::to_string(run).map_err(std::io::Error::other)?;
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}
