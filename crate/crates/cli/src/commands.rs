//! The three subcommands: single runs, Monte Carlo campaigns, and
//! network validation.

use std::path::Path;

use serde::Serialize;

use setmember::estimation::{run_until, Recording, RunOutcome, StoppingRule};
use setmember::geometry::distance_to_intersection;
use setmember::harness::{run_campaign, summarize, write_runs_jsonl, StopReference, SummaryTable};
use setmember::network::WeightMatrix;
use setmember::regression::generate_scenario;
use setmember::{Error, EstimatorState64};

use crate::config::FileConfig;
use crate::fsio::{remove_stale, write_atomic};
use crate::{report, Failure};

const SCHEMA_VERSION: u32 = 1;

/// Post-run distance evaluation budget; a one-time cost, so far more
/// generous than the in-loop stopping test.
const FINAL_DISTANCE_SWEEPS: usize = 100_000;

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

#[derive(Serialize)]
struct RunManifest {
    schema_version: u32,
    command: &'static str,
    mode: String,
    nodes: usize,
    dimension: usize,
    seed: u64,
    delta: f64,
    max_steps: u64,
    config_sha256: String,
    outcome: &'static str,
    /// Instants until the stopping rule fired; null when it did not.
    iterations: Option<u64>,
    final_disagreement: Option<f64>,
    /// Per-node distance to the feasible intersection at the final
    /// state; an entry is null if the evaluation did not converge.
    final_distances: Option<Vec<Option<f64>>>,
    infeasible_node: Option<usize>,
    infeasible_instant: Option<u64>,
}

impl RunManifest {
    fn new(cfg: &FileConfig, mode: String) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: "run",
            mode,
            nodes: cfg.scenario.nodes,
            dimension: cfg.scenario.dimension,
            seed: cfg.scenario.seed,
            delta: cfg.estimator.delta,
            max_steps: cfg.estimator.max_steps,
            config_sha256: cfg.sha256(),
            outcome: "error",
            iterations: None,
            final_disagreement: None,
            final_distances: None,
            infeasible_node: None,
            infeasible_instant: None,
        }
    }
}

/// One scenario, one estimator, full trajectory out.
pub fn run(cfg: &FileConfig, out: &Path, quiet: bool) -> Result<(), Failure> {
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", out.display())))?;
    let spec = cfg.run_mode_spec()?;
    let scenario = generate_scenario(
        cfg.scenario.dimension,
        cfg.scenario.nodes,
        cfg.scenario.seed,
        &cfg.scenario_config()?,
    )
    .map_err(usage)?;
    let weights = spec.build_weights(cfg.scenario.nodes).map_err(usage)?;
    let mut state =
        spec.make_state(scenario.initial_estimates().to_vec(), weights).map_err(usage)?;

    let rule = match cfg.estimator.stop_reference()? {
        StopReference::TrueParameter => StoppingRule::DistanceToTruth(cfg.estimator.delta),
        StopReference::FeasibleIntersection => {
            StoppingRule::DistanceToReference(cfg.estimator.delta)
        }
    };
    let mut manifest = RunManifest::new(cfg, spec.label());
    let trajectory_path = out.join("trajectory.csv");
    let outcome = run_until(&mut state, &scenario, &rule, cfg.estimator.max_steps, Recording::Full);

    match outcome {
        Ok(traj) => {
            let mut csv = Vec::new();
            traj.write_csv(&mut csv)
                .map_err(|e| Failure::Io(format!("cannot render trajectory: {e}")))?;
            write_atomic(&trajectory_path, &csv)?;
            manifest.final_disagreement = Some(traj.final_disagreement);
            manifest.final_distances = Some(final_distances(&state, cfg.estimator.delta));
            match traj.outcome {
                RunOutcome::Stopped { at_step } => {
                    manifest.outcome = "stopped";
                    manifest.iterations = Some(at_step);
                }
                RunOutcome::NoStop => manifest.outcome = "no_stop",
            }
            write_manifest(out, "run_manifest.json", &manifest)?;
            if !quiet {
                match traj.outcome {
                    RunOutcome::Stopped { at_step } => report!(
                        "stopped after {at_step} instants; every estimate within {} of the feasible set",
                        cfg.estimator.delta
                    ),
                    RunOutcome::NoStop => report!(
                        "no stop within {} instants (final disagreement {:.3e})",
                        cfg.estimator.max_steps, traj.final_disagreement
                    ),
                }
            }
            match traj.outcome {
                RunOutcome::Stopped { .. } => Ok(()),
                RunOutcome::NoStop => Err(Failure::NoStop),
            }
        }
        Err(Error::InfeasibleAt { node, instant }) => {
            // No trajectory for an aborted run; drop any stale one so the
            // directory stays a consistent pair of outputs.
            remove_stale(&trajectory_path)?;
            manifest.outcome = "infeasible";
            manifest.infeasible_node = Some(node);
            manifest.infeasible_instant = Some(instant);
            write_manifest(out, "run_manifest.json", &manifest)?;
            Err(Failure::Infeasible { node, instant })
        }
        Err(e) => Err(usage(e)),
    }
}

/// Distance of each node's final estimate to the intersection of all
/// nodes' feasible sets, evaluated to delta/1000.
fn final_distances(state: &EstimatorState64, delta: f64) -> Vec<Option<f64>> {
    let members = state.feasible_members();
    let tol = (delta / 1000.0).max(1e-12);
    state
        .nodes()
        .iter()
        .map(|node| {
            if members.is_empty() {
                return Some(0.0);
            }
            distance_to_intersection(&members, node.estimate(), tol, FINAL_DISTANCE_SWEEPS)
                .ok()
                .filter(|d| d.is_finite())
        })
        .collect()
}

#[derive(Serialize)]
struct CampaignManifest {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    config_sha256: String,
    dimension: usize,
    node_counts: Vec<usize>,
    runs_per_n: usize,
    modes: Vec<String>,
    delta: f64,
    max_steps: u64,
    threads: usize,
    total_runs: usize,
    total_failures: usize,
}

/// The full mode-by-size comparison.
pub fn campaign(cfg: &FileConfig, out: &Path, quiet: bool) -> Result<(), Failure> {
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", out.display())))?;
    let campaign_cfg = cfg.campaign_config()?;
    let result = run_campaign(&campaign_cfg).map_err(usage)?;
    let table = summarize(&result);

    let mut csv = Vec::new();
    table.write_csv(&mut csv).map_err(|e| Failure::Io(format!("cannot render summary: {e}")))?;
    write_atomic(&out.join("summary.csv"), &csv)?;

    let mut jsonl = Vec::new();
    write_runs_jsonl(&result, &mut jsonl)
        .map_err(|e| Failure::Io(format!("cannot render run records: {e}")))?;
    write_atomic(&out.join("runs.jsonl"), &jsonl)?;

    let manifest = CampaignManifest {
        schema_version: SCHEMA_VERSION,
        command: "campaign",
        seed: campaign_cfg.seed,
        config_sha256: cfg.sha256(),
        dimension: campaign_cfg.dimension,
        node_counts: campaign_cfg.node_counts.clone(),
        runs_per_n: campaign_cfg.runs_per_n,
        modes: campaign_cfg.modes.iter().map(|m| m.label()).collect(),
        delta: campaign_cfg.delta,
        max_steps: campaign_cfg.max_steps,
        threads: rayon::current_num_threads(),
        total_runs: result.cells.iter().map(|c| c.runs.len()).sum(),
        total_failures: result.cells.iter().map(|c| c.failures).sum(),
    };
    write_manifest(out, "campaign_manifest.json", &manifest)?;

    if !quiet {
        print_table(&table);
    }
    Ok(())
}

fn print_table(table: &SummaryTable) {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".into(), |x| format!("{x:.3}"));
    report!("{:<42} {:>6} {:>12} {:>12} {:>9}", "mode", "nodes", "mean", "std", "failures");
    for row in &table.rows {
        report!(
            "{:<42} {:>6} {:>12} {:>12} {:>9}",
            row.mode,
            row.nodes,
            fmt(row.mean_iterations),
            fmt(row.std_iterations),
            row.failures
        );
    }
}

fn write_manifest<M: Serialize>(out: &Path, name: &str, manifest: &M) -> Result<(), Failure> {
    let mut json = serde_json::to_vec_pretty(manifest)
        .map_err(|e| Failure::Io(format!("cannot render {name}: {e}")))?;
    json.push(b'\n');
    write_atomic(&out.join(name), &json)
}

/// Checks the configured network against what the distributed estimator
/// assumes, printing one verdict per check.
pub fn validate(cfg: &FileConfig, quiet: bool) -> Result<(), Failure> {
    let n = cfg.scenario.nodes;
    let topology = cfg.network.topology_spec()?;
    let rule = cfg.network.weight_rule()?;
    let graph = topology.build(n).map_err(usage)?;

    let mut failed = 0;
    let mut report = |name: &str, verdict: Result<String, String>| {
        match verdict {
            Ok(detail) if detail.is_empty() => {
                if !quiet {
                    report!("{name}: pass");
                }
            }
            Ok(detail) => {
                if !quiet {
                    report!("{name}: pass ({detail})");
                }
            }
            Err(reason) => {
                failed += 1;
                if !quiet {
                    report!("{name}: fail ({reason})");
                }
            }
        };
    };

    report(
        "strongly connected graph",
        if graph.is_strongly_connected() {
            Ok(String::new())
        } else {
            Err("some node cannot reach some other node".into())
        },
    );

    match rule.build::<f64>(&graph) {
        Ok(w) => {
            report("row-stochastic weights with positive diagonal", stochasticity(&w));
            report(
                "weights supported exactly on graph edges",
                w.validate_for(&graph).map(|()| String::new()).map_err(|e| e.to_string()),
            );
            report("positive stationary vector", stationarity(&w));
        }
        Err(e) => {
            report(&format!("weight construction ({})", rule.label()), Err(e.to_string()));
        }
    }

    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{failed} validation check(s) failed")))
    }
}

fn stochasticity(w: &WeightMatrix<f64>) -> Result<String, String> {
    let n = w.n();
    for i in 0..n {
        let sum: f64 = w.row(i).iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(format!("row {i} sums to {sum}"));
        }
        if w.get(i, i) <= 0.0 {
            return Err(format!("diagonal entry {i} is not positive"));
        }
        if w.row(i).iter().any(|&x| x < 0.0) {
            return Err(format!("row {i} has a negative entry"));
        }
    }
    Ok(String::new())
}

fn stationarity(w: &WeightMatrix<f64>) -> Result<String, String> {
    let v = w.stationary_vector().map_err(|e| e.to_string())?;
    let n = w.n();
    if (0..n).any(|i| v[i] <= 0.0) {
        return Err("stationary vector has a nonpositive entry".into());
    }
    let mut residual = 0.0f64;
    for j in 0..n {
        let col: f64 = (0..n).map(|i| v[i] * w.get(i, j)).sum();
        residual = residual.max((col - v[j]).abs());
    }
    if residual > 1e-8 {
        return Err(format!("residual {residual:.3e} exceeds 1e-8"));
    }
    Ok(format!("residual {residual:.1e}"))
}
