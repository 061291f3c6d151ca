//! Seeded experiment grids: every combination of size, node-class case,
//! timescale case and mode is run on the same seeds, so modes compare on
//! identical instances.

use super::metrics::{aggregate, run_metrics, MetricsReport, RunKey, RunRecord};
use super::traffic::{estimate_control_traffic, TrafficParams};
use super::{orchestrate, EngineError, SolveMode};
use crate::reduction::PruneMode;
use crate::scenario::{generate_instance, NodeClassCase, ScenarioConfig, TimescaleCase};
use crate::solver::SolveOptions;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Exact,
    ExactNoSharing,
    Branched,
    BranchedNoSharing,
}

impl RunMode {
    pub const ALL: [RunMode; 4] = [
        RunMode::Exact,
        RunMode::ExactNoSharing,
        RunMode::Branched,
        RunMode::BranchedNoSharing,
    ];

    pub fn sharing(self) -> bool {
        matches!(self, RunMode::Exact | RunMode::Branched)
    }

    pub fn branched(self) -> bool {
        matches!(self, RunMode::Branched | RunMode::BranchedNoSharing)
    }

    pub fn solve_mode(self) -> SolveMode {
        if self.branched() {
            SolveMode::Branched
        } else {
            SolveMode::Exact
        }
    }

    /// The same solver with sharing disabled, for sharing modes.
    pub fn without_sharing(self) -> Option<RunMode> {
        match self {
            RunMode::Exact => Some(RunMode::ExactNoSharing),
            RunMode::Branched => Some(RunMode::BranchedNoSharing),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Exact => "exact",
            RunMode::ExactNoSharing => "exact-no-sharing",
            RunMode::Branched => "branched",
            RunMode::BranchedNoSharing => "branched-no-sharing",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RunMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown run mode `{s}` (exact|exact-no-sharing|branched|branched-no-sharing)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentGrid {
    /// Scenario every cell starts from; case, timescale, size and seed are
    /// overridden per run.
    pub base: ScenarioConfig,
    /// Total node counts; empty runs the base per-kind counts only.
    pub sizes: Vec<usize>,
    pub cases: Vec<NodeClassCase>,
    pub timescales: Vec<TimescaleCase>,
    pub modes: Vec<RunMode>,
    pub runs: usize,
    /// Run `j` uses scenario seed `seed + j`.
    pub seed: u64,
    pub prune: PruneMode,
    pub time_limit_s: Option<f64>,
    pub traffic: TrafficParams,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        Self {
            base: ScenarioConfig::default(),
            sizes: Vec::new(),
            cases: vec![NodeClassCase::All],
            timescales: vec![TimescaleCase::Dt],
            modes: vec![RunMode::Exact, RunMode::ExactNoSharing],
            runs: 10,
            seed: 0,
            prune: PruneMode::FpAp,
            time_limit_s: Some(60.0),
            traffic: TrafficParams::default(),
        }
    }
}

impl ExperimentGrid {
    fn validate(&self) -> Result<(), EngineError> {
        let empty = [
            (self.cases.is_empty(), "no node-class cases"),
            (self.timescales.is_empty(), "no timescale cases"),
            (self.modes.is_empty(), "no modes"),
            (self.runs == 0, "zero runs"),
        ];
        match empty.iter().find(|(e, _)| *e) {
            Some((_, why)) => Err(EngineError::EmptyGrid(why)),
            None => Ok(()),
        }
    }

    /// Scenario of one run.
    pub fn scenario(&self, nodes: Option<usize>, case: NodeClassCase, ts: TimescaleCase, seed: u64) -> ScenarioConfig {
        let mut cfg = self.base.clone();
        if let Some(n) = nodes {
            cfg = cfg.with_total_nodes(n);
        }
        cfg.case = case;
        cfg.timescale = ts;
        cfg.seed = seed;
        cfg
    }

    fn keys(&self) -> Vec<(Option<usize>, RunKey)> {
        let sizes: Vec<Option<usize>> = if self.sizes.is_empty() {
            vec![None]
        } else {
            self.sizes.iter().copied().map(Some).collect()
        };
        let mut out = Vec::new();
        for &size in &sizes {
            let nodes = size.unwrap_or_else(|| self.base.counts.total());
            for &case in &self.cases {
                for &timescale in &self.timescales {
                    for &mode in &self.modes {
                        for j in 0..self.runs as u64 {
                            out.push((
                                size,
                                RunKey {
                                    nodes,
                                    case,
                                    timescale,
                                    mode,
                                    seed: self.seed + j,
                                },
                            ));
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub grid: ExperimentGrid,
    pub records: Vec<RunRecord>,
    pub reports: Vec<MetricsReport>,
}

fn run_one(grid: &ExperimentGrid, size: Option<usize>, key: RunKey) -> RunRecord {
    let cfg = grid.scenario(size, key.case, key.timescale, key.seed);
    let inst = match generate_instance(&cfg, key.mode.sharing()) {
        Ok(i) => i,
        Err(e) => return RunRecord::failed(key, 0, e.to_string()),
    };
    let opts = SolveOptions {
        sharing: key.mode.sharing(),
        prune: grid.prune,
        time_limit_s: grid.time_limit_s,
        node_limit: None,
        seed: 0,
    };
    let o = match orchestrate(&inst, key.mode.solve_mode(), &opts) {
        Ok(o) => o,
        Err(e) => return RunRecord::failed(key, inst.num_requests(), e.to_string()),
    };
    match estimate_control_traffic(&o.plan, inst.topology(), &grid.traffic) {
        Ok(traffic) => run_metrics(key, &inst, &o, traffic),
        Err(e) => RunRecord::failed(key, inst.num_requests(), e.to_string()),
    }
}

/// Runs every cell of the grid in parallel. Failed runs are recorded with
/// their error and skipped by the aggregation.
pub fn run_experiment(grid: &ExperimentGrid) -> Result<ExperimentOutput, EngineError> {
    grid.validate()?;
    let records: Vec<RunRecord> = grid
        .keys()
        .into_par_iter()
        .map(|(size, key)| run_one(grid, size, key))
        .collect();
    let reports = aggregate(&records);
    Ok(ExperimentOutput {
        grid: grid.clone(),
        records,
        reports,
    })
}

pub fn export_json(out: &ExperimentOutput, path: &Path) -> Result<(), EngineError> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, out)?;
    f.write_all(b"\n")?;
    Ok(())
}

const KINDS: [crate::netmodel::NodeKind; 5] = crate::netmodel::NodeKind::ALL;

/// CSV header matching the field order of [`MetricsReport`], with the
/// per-kind maps spread over one column per node kind.
pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "nodes",
        "case",
        "timescale",
        "mode",
        "runs",
        "failures",
        "limit_hits",
        "objective",
        "acceptance_ratio",
        "acceptance_std",
        "partial_acceptance_ratio",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(KINDS.iter().map(|k| format!("utilization_{}", k.as_str())));
    h.extend(["sharing_saving_ratio", "shared_model_fraction"].map(String::from));
    h.extend(KINDS.iter().map(|k| format!("location_{}", k.as_str())));
    h.extend(
        [
            "variables_none",
            "variables_fp",
            "variables_ap",
            "variables_fp_ap",
            "cluster_variables",
            "wall_time_mean_s",
            "wall_time_max_s",
            "e2_traffic_bytes",
        ]
        .map(String::from),
    );
    h
}

fn csv_row(r: &MetricsReport) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut row = vec![
        r.nodes.to_string(),
        r.case.to_string(),
        r.timescale.to_string(),
        r.mode.to_string(),
        r.runs.to_string(),
        r.failures.to_string(),
        r.limit_hits.to_string(),
        r.objective.to_string(),
        r.acceptance_ratio.to_string(),
        r.acceptance_std.to_string(),
        r.partial_acceptance_ratio.to_string(),
    ];
    row.extend(KINDS.iter().map(|k| r.resource_utilization.get(k).copied().unwrap_or(0.0).to_string()));
    row.push(opt(r.sharing_saving_ratio));
    row.push(r.shared_model_fraction.to_string());
    row.extend(KINDS.iter().map(|k| r.location_distribution.get(k).copied().unwrap_or(0.0).to_string()));
    row.extend([
        r.variables.none.to_string(),
        r.variables.fp.to_string(),
        r.variables.ap.to_string(),
        r.variables.fp_ap.to_string(),
        opt(r.cluster_variables),
        r.wall_time_mean_s.to_string(),
        r.wall_time_max_s.to_string(),
        r.e2_traffic_bytes.to_string(),
    ]);
    row
}

/// One row per grid cell; an empty report set gives a header-only file.
pub fn export_csv(reports: &[MetricsReport], path: &Path) -> Result<(), EngineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(csv_header())?;
    for r in reports {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentGrid {
        ExperimentGrid {
            sizes: vec![31],
            runs: 2,
            base: ScenarioConfig {
                requests: 4,
                ..ScenarioConfig::default()
            },
            time_limit_s: None,
            ..ExperimentGrid::default()
        }
    }

    #[test]
    fn paired_modes_share_instances() {
        let out = run_experiment(&tiny()).unwrap();
        assert_eq!(out.records.len(), 4);
        assert_eq!(out.reports.len(), 2);
        for r in &out.records {
            assert!(r.error.is_none() && r.certified, "{r:?}");
        }
        let (with, without) = (&out.records[0], &out.records[2]);
        assert_eq!(with.seed, without.seed);
        assert_eq!(with.variables, without.variables);
        assert!(with.objective >= without.objective);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let g = ExperimentGrid {
            modes: vec![],
            ..tiny()
        };
        assert!(matches!(run_experiment(&g), Err(EngineError::EmptyGrid(_))));
    }

    #[test]
    fn csv_header_only_when_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        export_csv(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("nodes,case,timescale,mode,runs"));
    }

    #[test]
    fn csv_rows_match_header() {
        let out = run_experiment(&tiny()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        export_csv(&out.reports, &path).unwrap();
        let mut rd = csv::Reader::from_path(&path).unwrap();
        let header = rd.headers().unwrap().clone();
        assert_eq!(header.len(), csv_header().len());
        for row in rd.records() {
            assert_eq!(row.unwrap().len(), header.len());
        }
    }

    #[test]
    fn json_round_trip() {
        let out = run_experiment(&tiny()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        export_json(&out, &path).unwrap();
        let back: ExperimentOutput = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, out);
    }

    #[test]
    fn run_mode_names() {
        for m in RunMode::ALL {
            assert_eq!(m.as_str().parse::<RunMode>(), Ok(m));
            assert_eq!(serde_json::to_value(m).unwrap(), m.as_str());
        }
    }
}
