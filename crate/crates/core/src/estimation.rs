//! The estimator step rules and the run driver.
//!
//! Three update schemes over one shared state shape. The incremental
//! N-step rule passes a single estimate around the full node cycle once
//! per measurement instant. The incremental 1-step rule activates one
//! node per instant, for networks where a full cycle cannot fit between
//! measurements. The distributed rule has every node average the
//! estimates it receives and project the average onto its own set, all
//! nodes simultaneously.
//!
//! The 1-step scheduler is built to be an exact slow-motion replay of the
//! N-step rule: nodes draw measurements from per-node streams, so the
//! projection sequence of `m` full cycles equals the first `m * N` 1-step
//! instants bit for bit, and stopping rules in 1-step mode are evaluated
//! only at cycle boundaries where the two schedules share a state. An
//! alternative schedule in which every node measures at every instant is
//! available as the *batched* 1-step variant; it consumes measurements
//! N times faster and gives up the replay property.

use crate::error::{Error, Result};
use crate::geometry::{
    distance_to_intersection, dykstra_project, FeasibleSet, Vector, DEFAULT_MAX_SWEEPS,
    DEFAULT_TOLERANCE, MEMBERSHIP_TOLERANCE,
};
use crate::network::WeightMatrix;
use crate::regression::Scenario;
use crate::scalar::Real;

/// Sweep budget for the projections inside stopping-rule evaluation,
/// lower than the general default because the evaluator treats a blown
/// budget as "not converged yet" and simply keeps running.
pub const STOP_RULE_MAX_SWEEPS: usize = 2_000;

/// One node's view: its estimate and its local feasible set. `None`
/// stands for the whole space, the state before the first measurement;
/// projection onto it is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeState<T> {
    estimate: Vector<T>,
    feasible_set: Option<FeasibleSet<T>>,
}

impl<T: Real> NodeState<T> {
    #[inline]
    pub fn estimate(&self) -> &Vector<T> {
        &self.estimate
    }

    #[inline]
    pub fn feasible_set(&self) -> Option<&FeasibleSet<T>> {
        self.feasible_set.as_ref()
    }
}

/// Which update rule a state advances under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    IncrementalNStep,
    Incremental1Step { batched: bool },
    Distributed,
}

impl Mode {
    /// Stable label used in reports and output files.
    pub fn label(&self) -> &'static str {
        match self {
            Mode::IncrementalNStep => "incremental_nstep",
            Mode::Incremental1Step { batched: false } => "incremental_1step",
            Mode::Incremental1Step { batched: true } => "incremental_1step_batched",
            Mode::Distributed => "distributed",
        }
    }
}

/// A measurement set destined for one specific node, the input shape of
/// the 1-step rule.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeMeasurement<T> {
    pub node: usize,
    pub set: FeasibleSet<T>,
}

/// The full estimator: per-node states plus the mode's bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorState<T> {
    nodes: Vec<NodeState<T>>,
    clock: u64,
    mode: Mode,
    active: usize,
    weights: Option<WeightMatrix<T>>,
}

impl<T: Real> EstimatorState<T> {
    fn with_mode(
        initial_estimates: Vec<Vector<T>>,
        mode: Mode,
        weights: Option<WeightMatrix<T>>,
    ) -> Result<Self> {
        if initial_estimates.is_empty() {
            return Err(Error::InvalidSize("estimator needs at least one node".into()));
        }
        let dim = initial_estimates[0].dim();
        for e in &initial_estimates {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.dim() });
            }
        }
        if let Some(w) = &weights {
            if w.n() != initial_estimates.len() {
                return Err(Error::BatchSizeMismatch {
                    expected: initial_estimates.len(),
                    got: w.n(),
                });
            }
        }
        let nodes = initial_estimates
            .into_iter()
            .map(|estimate| NodeState { estimate, feasible_set: None })
            .collect();
        Ok(Self { nodes, clock: 0, mode, active: 0, weights })
    }

    /// Incremental estimator doing one full projection cycle per instant.
    pub fn incremental_nstep(initial_estimates: Vec<Vector<T>>) -> Result<Self> {
        Self::with_mode(initial_estimates, Mode::IncrementalNStep, None)
    }

    /// Incremental estimator activating one node per instant. With
    /// `batched`, every node still measures at every instant; otherwise
    /// only the active node does.
    pub fn incremental_onestep(initial_estimates: Vec<Vector<T>>, batched: bool) -> Result<Self> {
        Self::with_mode(initial_estimates, Mode::Incremental1Step { batched }, None)
    }

    /// Consensus-projection estimator with validated weights.
    pub fn distributed(
        initial_estimates: Vec<Vector<T>>,
        weights: WeightMatrix<T>,
    ) -> Result<Self> {
        Self::with_mode(initial_estimates, Mode::Distributed, Some(weights))
    }

    #[inline]
    pub fn nodes(&self) -> &[NodeState<T>] {
        &self.nodes
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.nodes[0].estimate.dim()
    }

    #[inline]
    pub fn clock(&self) -> u64 {
        self.clock
    }

    #[inline]
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The node the next 1-step call must serve; `None` in other modes.
    pub fn active_index(&self) -> Option<usize> {
        match self.mode {
            Mode::Incremental1Step { .. } => Some(self.active),
            _ => None,
        }
    }

    #[inline]
    pub fn weights(&self) -> Option<&WeightMatrix<T>> {
        self.weights.as_ref()
    }

    /// The members of the current global feasible set: every node's local
    /// set, in node order, skipping nodes still at the whole space.
    pub fn feasible_members(&self) -> Vec<&FeasibleSet<T>> {
        self.nodes.iter().filter_map(|n| n.feasible_set.as_ref()).collect()
    }

    /// Largest pairwise estimate distance.
    pub fn disagreement(&self) -> T {
        let mut worst = T::zero();
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                worst = worst.max(a.estimate.distance(&b.estimate));
            }
        }
        worst
    }

    fn expect_mode(&self, wanted: Mode) -> Result<()> {
        if self.mode != wanted {
            return Err(Error::InvalidConfig(format!(
                "step rule {} does not match estimator mode {}",
                wanted.label(),
                self.mode.label()
            )));
        }
        Ok(())
    }

    fn check_batch(&self, measurements: &[FeasibleSet<T>]) -> Result<()> {
        if measurements.len() != self.nodes.len() {
            return Err(Error::BatchSizeMismatch {
                expected: self.nodes.len(),
                got: measurements.len(),
            });
        }
        let dim = self.dim();
        for m in measurements {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
            }
        }
        Ok(())
    }

    /// Shrinks node `i`'s set by `set`. The emptied set stays stored on
    /// failure so the caller can inspect what contradicted what.
    fn intersect_node(&mut self, i: usize, set: FeasibleSet<T>, instant: u64) -> Result<()> {
        let node = &mut self.nodes[i];
        if set.dim() != node.estimate.dim() {
            return Err(Error::DimensionMismatch { expected: node.estimate.dim(), got: set.dim() });
        }
        let merged = match node.feasible_set.take() {
            None => set,
            Some(current) => current.intersect(set)?,
        };
        let emptied = merged.is_empty();
        node.feasible_set = Some(merged);
        if emptied {
            return Err(Error::InfeasibleAt { node: i, instant });
        }
        Ok(())
    }

    /// One full incremental cycle: every node folds in its measurement
    /// set for this instant, then the estimate carried over from the last
    /// node of the previous instant is projected through all nodes in
    /// order.
    pub fn incremental_cycle_step(&mut self, measurements: Vec<FeasibleSet<T>>) -> Result<()> {
        self.expect_mode(Mode::IncrementalNStep)?;
        self.check_batch(&measurements)?;
        let instant = self.clock + 1;
        for (i, set) in measurements.into_iter().enumerate() {
            self.intersect_node(i, set, instant)?;
        }
        let mut carry = self.nodes.last().expect("at least one node").estimate.clone();
        for node in &mut self.nodes {
            carry = project_onto(node.feasible_set.as_ref(), &carry)?;
            node.estimate = carry.clone();
        }
        self.clock = instant;
        Ok(())
    }

    /// One 1-step instant: the active node folds in its measurement set
    /// and projects the estimate of the previously active node, then the
    /// activation advances cyclically.
    pub fn incremental_onestep_step(&mut self, measurement: NodeMeasurement<T>) -> Result<()> {
        self.expect_mode(Mode::Incremental1Step { batched: false })?;
        if measurement.node != self.active {
            return Err(Error::WrongNode { expected: self.active, got: measurement.node });
        }
        let instant = self.clock + 1;
        self.intersect_node(self.active, measurement.set, instant)?;
        self.project_active_and_advance(instant)
    }

    /// One batched 1-step instant: every node folds in a measurement set,
    /// but only the active node projects and hands its estimate on.
    pub fn incremental_onestep_batched_step(
        &mut self,
        measurements: Vec<FeasibleSet<T>>,
    ) -> Result<()> {
        self.expect_mode(Mode::Incremental1Step { batched: true })?;
        self.check_batch(&measurements)?;
        let instant = self.clock + 1;
        for (i, set) in measurements.into_iter().enumerate() {
            self.intersect_node(i, set, instant)?;
        }
        self.project_active_and_advance(instant)
    }

    fn project_active_and_advance(&mut self, instant: u64) -> Result<()> {
        let n = self.nodes.len();
        let source = (self.active + n - 1) % n;
        let incoming = self.nodes[source].estimate.clone();
        let node = &mut self.nodes[self.active];
        node.estimate = project_onto(node.feasible_set.as_ref(), &incoming)?;
        self.active = (self.active + 1) % n;
        self.clock = instant;
        Ok(())
    }

    /// One distributed instant: every node folds in its measurement set,
    /// every node averages the previous instant's estimates through its
    /// weight row, and every node projects its average. All averages read
    /// the old estimates; no node sees a neighbor's new one.
    pub fn distributed_step(&mut self, measurements: Vec<FeasibleSet<T>>) -> Result<()> {
        self.expect_mode(Mode::Distributed)?;
        self.check_batch(&measurements)?;
        let instant = self.clock + 1;
        for (i, set) in measurements.into_iter().enumerate() {
            self.intersect_node(i, set, instant)?;
        }
        let weights = self.weights.as_ref().expect("distributed mode carries weights");
        let current: Vec<Vector<T>> = self.nodes.iter().map(|n| n.estimate.clone()).collect();
        let mixed = weights.weighted_averages(&current)?;
        for (node, z) in self.nodes.iter_mut().zip(mixed) {
            node.estimate = project_onto(node.feasible_set.as_ref(), &z)?;
        }
        self.clock = instant;
        Ok(())
    }
}

/// Projection onto a node's set. Intersections run Dykstra tight enough
/// to honor the 1e-9 feasibility contract on estimates; primitive shapes
/// project exactly.
fn project_onto<T: Real>(set: Option<&FeasibleSet<T>>, p: &Vector<T>) -> Result<Vector<T>> {
    match set {
        None => Ok(p.clone()),
        Some(FeasibleSet::Intersection(i)) => {
            dykstra_project(i.members(), p, T::of(MEMBERSHIP_TOLERANCE), DEFAULT_MAX_SWEEPS)
        }
        Some(s) => s.project(p),
    }
}

/// When a run is allowed to declare itself finished.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingRule<T> {
    /// Every node's estimate within the given distance of the current
    /// global feasible set (the intersection of every node's strips so
    /// far). The only reference computable without ground truth.
    DistanceToReference(T),
    /// Every node's estimate within the given distance of the
    /// scenario's true parameter. With per-node fixed regressors the
    /// strips tighten onto hyperplanes through the truth, so this is
    /// the distance to the asymptotic feasible set; it is the rule the
    /// reference iteration counts were produced with, and it is strictly
    /// harder to satisfy than [`StoppingRule::DistanceToReference`]
    /// because the truth lies in every honest feasible set.
    DistanceToTruth(T),
    /// Run the full step budget.
    MaxSteps,
    /// Largest pairwise estimate distance at most the given value.
    Disagreement(T),
}

/// How much of a run to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recording {
    /// Every step: estimates, per-node reference distances, disagreement.
    Full,
    /// Only the final summary; what campaigns use.
    Light,
}

/// Everything recorded about one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<T> {
    pub clock: u64,
    pub estimates: Vec<Vector<T>>,
    /// Distance of each estimate to the global feasible set at this
    /// instant.
    pub distances: Vec<T>,
    pub disagreement: T,
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    /// The stopping rule fired after this many steps of the run.
    Stopped { at_step: u64 },
    /// The step budget ran out first.
    NoStop,
}

/// The product of a run: per-step records under [`Recording::Full`]
/// (exactly one per step taken), plus the final summary either way.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub records: Vec<StepRecord<T>>,
    pub steps: u64,
    pub outcome: RunOutcome,
    pub final_estimates: Vec<Vector<T>>,
    pub final_disagreement: T,
}

impl<T: Real> Trajectory<T> {
    /// Writes the per-step records as CSV, one row per (step, node), with
    /// the step's disagreement repeated on each of its rows.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        let dim = self.final_estimates.first().map_or(0, Vector::dim);
        write!(out, "k,node")?;
        for d in 0..dim {
            write!(out, ",x{d}")?;
        }
        writeln!(out, ",dist_to_reference,disagreement")?;
        for rec in &self.records {
            for (node, est) in rec.estimates.iter().enumerate() {
                write!(out, "{},{}", rec.clock, node)?;
                for v in est.iter() {
                    write!(out, ",{v}")?;
                }
                writeln!(out, ",{},{}", rec.distances[node], rec.disagreement)?;
            }
        }
        Ok(())
    }
}

/// Checks "every estimate within delta of the global feasible set"
/// cheaply across repeated calls. Distance to an intersection is at
/// least the distance to any single member, so one failing member
/// settles the question without the full projection; the evaluator
/// remembers what failed last time and retries that first, because the
/// same laggard tends to fail for many consecutive instants.
#[derive(Default)]
struct DistanceEvaluator {
    member_miss: Option<(usize, usize)>,
    estimate_miss: Option<usize>,
}

impl DistanceEvaluator {
    /// The caches only ever short-circuit a *failing* verdict that a full
    /// scan would also reach, so results do not depend on call history.
    fn all_within<T: Real>(&mut self, state: &EstimatorState<T>, delta: T) -> Result<bool> {
        let members = state.feasible_members();
        if members.is_empty() {
            return Ok(true);
        }
        let tol = (delta / T::of(1000.0)).max(T::of(1e-12));

        if let Some((i, j)) = self.member_miss {
            if members[j].distance(&state.nodes[i].estimate)? > delta {
                return Ok(false);
            }
            self.member_miss = None;
        }
        if let Some(i) = self.estimate_miss {
            match distance_to_intersection(
                &members,
                &state.nodes[i].estimate,
                tol,
                STOP_RULE_MAX_SWEEPS,
            ) {
                Ok(d) if d > delta => return Ok(false),
                Err(Error::NoConvergence { .. }) => return Ok(false),
                Err(e) => return Err(e),
                Ok(_) => self.estimate_miss = None,
            }
        }

        for (i, node) in state.nodes.iter().enumerate() {
            for (j, m) in members.iter().enumerate() {
                if m.distance(&node.estimate)? > delta {
                    self.member_miss = Some((i, j));
                    return Ok(false);
                }
            }
        }
        for (i, node) in state.nodes.iter().enumerate() {
            match distance_to_intersection(&members, &node.estimate, tol, STOP_RULE_MAX_SWEEPS) {
                Ok(d) if d > delta => {
                    self.estimate_miss = Some(i);
                    return Ok(false);
                }
                Err(Error::NoConvergence { .. }) => {
                    self.estimate_miss = Some(i);
                    return Ok(false);
                }
                Err(e) => return Err(e),
                Ok(_) => {}
            }
        }
        Ok(true)
    }
}

/// Drives a state through scenario measurements until the stopping rule
/// fires or `max_steps` instants pass.
///
/// Measurement scheduling follows the mode: batch modes hand every node
/// its reading for the new instant; the default 1-step mode feeds only
/// the active node, whose per-node measurement index is its activation
/// count. In the default 1-step mode, distance and disagreement rules are
/// evaluated only at cycle boundaries — between boundaries the node
/// estimates are a mid-cycle mixture that the N-step rule never exposes,
/// and gating the test there is what makes the two counters differ by
/// exactly the factor N on a common scenario.
///
/// A projection-budget failure inside the stopping test counts as "not
/// converged yet" and the run simply continues; an emptied feasible set
/// aborts with the offending node and instant.
pub fn run_until<T: Real>(
    state: &mut EstimatorState<T>,
    scenario: &Scenario<T>,
    stop: &StoppingRule<T>,
    max_steps: u64,
    recording: Recording,
) -> Result<Trajectory<T>> {
    if scenario.node_count() != state.node_count() {
        return Err(Error::BatchSizeMismatch {
            expected: state.node_count(),
            got: scenario.node_count(),
        });
    }
    if scenario.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), got: scenario.dim() });
    }

    let n = state.node_count() as u64;
    let start_clock = state.clock;
    let mut evaluator = DistanceEvaluator::default();
    let mut records = Vec::new();
    let mut outcome = RunOutcome::NoStop;

    for _ in 0..max_steps {
        match state.mode {
            Mode::IncrementalNStep => {
                state.incremental_cycle_step(scenario_batch(scenario, state.clock + 1)?)?;
            }
            Mode::Distributed => {
                state.distributed_step(scenario_batch(scenario, state.clock + 1)?)?;
            }
            Mode::Incremental1Step { batched: true } => {
                state
                    .incremental_onestep_batched_step(scenario_batch(scenario, state.clock + 1)?)?;
            }
            Mode::Incremental1Step { batched: false } => {
                let node = state.active;
                // Cyclic activation from node 0 means the active node has
                // measured exactly clock / n times so far.
                let per_node_instant = state.clock / n + 1;
                let slab = scenario.measurement_slab(node, per_node_instant)?;
                state.incremental_onestep_step(NodeMeasurement {
                    node,
                    set: FeasibleSet::Slab(slab),
                })?;
            }
        }

        if recording == Recording::Full {
            records.push(full_record(state)?);
        }

        let at_boundary = !matches!(state.mode, Mode::Incremental1Step { batched: false })
            || state.clock.is_multiple_of(n);
        let fired = match stop {
            StoppingRule::MaxSteps => false,
            StoppingRule::DistanceToReference(delta) => {
                at_boundary
                    && match evaluator.all_within(state, *delta) {
                        Ok(within) => within,
                        Err(Error::NoConvergence { .. }) => false,
                        Err(e) => return Err(e),
                    }
            }
            StoppingRule::DistanceToTruth(delta) => {
                at_boundary
                    && state
                        .nodes
                        .iter()
                        .all(|node| node.estimate.distance(scenario.theta_star()) <= *delta)
            }
            StoppingRule::Disagreement(eta) => at_boundary && state.disagreement() <= *eta,
        };
        if fired {
            outcome = RunOutcome::Stopped { at_step: state.clock - start_clock };
            break;
        }
    }

    let steps = state.clock - start_clock;
    if matches!(stop, StoppingRule::MaxSteps) {
        outcome = RunOutcome::Stopped { at_step: steps };
    }
    Ok(Trajectory {
        records,
        steps,
        outcome,
        final_estimates: state.nodes.iter().map(|n| n.estimate.clone()).collect(),
        final_disagreement: state.disagreement(),
    })
}

fn scenario_batch<T: Real>(scenario: &Scenario<T>, instant: u64) -> Result<Vec<FeasibleSet<T>>> {
    (0..scenario.node_count())
        .map(|i| scenario.measurement_slab(i, instant).map(FeasibleSet::Slab))
        .collect()
}

fn full_record<T: Real>(state: &EstimatorState<T>) -> Result<StepRecord<T>> {
    let members = state.feasible_members();
    let mut distances = Vec::with_capacity(state.node_count());
    for node in state.nodes() {
        let d = if members.is_empty() {
            T::zero()
        } else {
            // The distance column is diagnostic; when near-parallel
            // strips starve the solver, record NaN rather than lose the
            // trajectory.
            match distance_to_intersection(
                &members,
                node.estimate(),
                T::of(DEFAULT_TOLERANCE),
                DEFAULT_MAX_SWEEPS,
            ) {
                Ok(d) => d,
                Err(Error::NoConvergence { .. }) => T::nan(),
                Err(e) => return Err(e),
            }
        };
        distances.push(d);
    }
    Ok(StepRecord {
        clock: state.clock(),
        estimates: state.nodes().iter().map(|n| n.estimate().clone()).collect(),
        distances,
        disagreement: state.disagreement(),
    })
}
