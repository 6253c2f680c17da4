//! End-to-end sweeps: topology, traffic, schedulability test, simulation
//! and metrics for every (seed, channel count) cell.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_json, save_topology, save_traffic, write_json, write_text};
use crate::par::{self, Execution};
use crate::schedulability::{test_network, CachedTester, SchedulabilityVerdict};
use crate::scheduler::{run_simulation, Mode, SchedulerKind, SimulationConfig, SimulationReport};
use crate::stats::{self, BinRatio, DeadlineBin, RatioSummary};
use crate::topology::{generate_topology, DeploymentParams};
use crate::traffic::{generate_traffic, Slot, TrafficParams, TrafficSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub deployment: DeploymentParams,
    pub traffic: TrafficParams,
    pub channels: Vec<u32>,
    pub horizon: Slot,
    pub mode: Mode,
    pub schedulers: Vec<SchedulerKind>,
    pub seeds: Vec<u64>,
    pub deadline_bin_width: Slot,
    pub histogram_bins: usize,
    /// Where artifacts go; nothing is written when absent.
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            deployment: DeploymentParams::network1(),
            traffic: TrafficParams::default(),
            channels: vec![4],
            horizon: 20_000,
            mode: Mode::Deterministic,
            schedulers: vec![SchedulerKind::Ldp, SchedulerKind::EdfBaseline],
            seeds: vec![0],
            deadline_bin_width: 10,
            histogram_bins: 10,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() || self.channels.contains(&0) {
            return Err(Error::input("channel sweep must be non-empty with values >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::input("horizon must be at least 1"));
        }
        if self.seeds.is_empty() || self.schedulers.is_empty() {
            return Err(Error::input("seeds and schedulers must be non-empty"));
        }
        if self.deadline_bin_width == 0 || self.histogram_bins == 0 {
            return Err(Error::input("bin widths and counts must be positive"));
        }
        self.deployment.validate()?;
        self.traffic.validate()
    }

    pub fn deadline_bins(&self) -> Vec<DeadlineBin> {
        let (lo, hi) = self.traffic.deadline_range;
        stats::deadline_bins(lo, hi, self.deadline_bin_width)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub channels: u32,
    pub scheduler: SchedulerKind,
    pub links: usize,
    /// Links passing the schedulability test.
    pub passing_links: usize,
    /// Share of links with no deadline miss in simulation.
    pub schedulable_link_ratio: Option<f64>,
    pub mean_delta: Option<f64>,
    pub delta_ci: Option<(f64, f64)>,
    pub mean_delta_prime: Option<f64>,
    pub packets: u64,
    pub misses: u64,
    pub max_rounds: u32,
    pub mean_rounds: f64,
    /// Share of links failing the test, per deadline bin.
    pub infeasible_by_deadline: Vec<Option<f64>>,
    /// Share of links with misses, per deadline bin.
    pub missing_by_deadline: Vec<Option<f64>>,
    /// Links with misses have shorter deadlines on average; absent without misses.
    pub misses_favor_short_deadlines: Option<bool>,
    pub error: Option<String>,
}

impl MetricsRow {
    fn failed(seed: u64, channels: u32, scheduler: SchedulerKind, err: &Error) -> Self {
        MetricsRow {
            seed,
            channels,
            scheduler,
            links: 0,
            passing_links: 0,
            schedulable_link_ratio: None,
            mean_delta: None,
            delta_ci: None,
            mean_delta_prime: None,
            packets: 0,
            misses: 0,
            max_rounds: 0,
            mean_rounds: 0.0,
            infeasible_by_deadline: Vec::new(),
            missing_by_deadline: Vec::new(),
            misses_favor_short_deadlines: None,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub config: ExperimentConfig,
    pub deadline_bins: Vec<DeadlineBin>,
    /// Ordered by seed, then channels, then scheduler as configured.
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "seed,channels,scheduler,links,passing_links,schedulable_link_ratio,mean_delta,delta_ci_low,\
             delta_ci_high,mean_delta_prime,packets,misses,max_rounds,mean_rounds,misses_favor_short_deadlines",
        );
        for b in &self.deadline_bins {
            let _ = write!(out, ",infeasible_d{}_{}", b.lo, b.hi);
        }
        for b in &self.deadline_bins {
            let _ = write!(out, ",missing_d{}_{}", b.lo, b.hi);
        }
        out.push_str(",error\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.seed,
                r.channels,
                scheduler_name(r.scheduler),
                r.links,
                r.passing_links,
                opt(r.schedulable_link_ratio),
                opt(r.mean_delta),
                opt(r.delta_ci.map(|c| c.0)),
                opt(r.delta_ci.map(|c| c.1)),
                opt(r.mean_delta_prime),
                r.packets,
                r.misses,
                r.max_rounds,
                r.mean_rounds,
                r.misses_favor_short_deadlines.map(|b| b.to_string()).unwrap_or_default(),
            );
            for k in 0..self.deadline_bins.len() {
                let _ = write!(out, ",{}", opt(r.infeasible_by_deadline.get(k).copied().flatten()));
            }
            for k in 0..self.deadline_bins.len() {
                let _ = write!(out, ",{}", opt(r.missing_by_deadline.get(k).copied().flatten()));
            }
            let _ = writeln!(out, ",{}", r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"));
        }
        out
    }
}

pub fn scheduler_name(s: SchedulerKind) -> &'static str {
    match s {
        SchedulerKind::Ldp => "ldp",
        SchedulerKind::EdfBaseline => "edf-baseline",
    }
}

/// Per-link approximation ratios as CSV rows `seed,channels,link,delta,delta_prime`.
pub fn ratios_csv(rows: &[(u64, u32, Vec<SchedulabilityVerdict>)]) -> String {
    let mut out = String::from("seed,channels,link,delta,delta_prime\n");
    for (seed, n, verdicts) in rows {
        for v in verdicts {
            let _ = writeln!(out, "{seed},{n},{},{},{}", v.link, v.delta_f64(), v.delta_prime_f64());
        }
    }
    out
}

/// Histogram CSV `lo,hi,delta_count,delta_prime_count`.
pub fn histogram_csv(delta: &RatioSummary, delta_prime: &RatioSummary) -> String {
    let mut out = String::from("lo,hi,delta_count,delta_prime_count\n");
    for (a, b) in delta.histogram.iter().zip(&delta_prime.histogram) {
        let _ = writeln!(out, "{},{},{},{}", a.lo, a.hi, a.count, b.count);
    }
    out
}

/// Everything one (seed, channels) cell produced.
#[derive(Clone, Debug)]
pub struct CellOutput {
    pub seed: u64,
    pub channels: u32,
    pub traffic: TrafficSet,
    pub verdicts: Vec<SchedulabilityVerdict>,
    pub reports: Vec<SimulationReport>,
}

fn cell_dir(root: &Path, seed: u64, channels: u32) -> PathBuf {
    root.join(format!("seed-{seed}")).join(format!("n{channels}"))
}

fn report_file(s: SchedulerKind) -> String {
    format!("report-{}.json", scheduler_name(s))
}

/// Generator stream for the traffic of one (seed, channels) cell.
pub fn traffic_rng(seed: u64, channels: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channels as u64);
    rng
}

/// Generator for the topology of `seed`.
pub fn topology_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs one cell. `Ok(None)` for an empty deployment.
pub fn run_cell(config: &ExperimentConfig, seed: u64, channels: u32) -> Result<Option<CellOutput>> {
    let topology = generate_topology(&config.deployment, &mut topology_rng(seed))?;
    if topology.graph.is_empty() {
        return Ok(None);
    }
    let g = &topology.graph;
    let tester = CachedTester::new(g);
    let generated = generate_traffic(g, channels, &config.traffic, &mut traffic_rng(seed, channels), |g, t, id, n| {
        tester.passes(g, t, id, n)
    })?;
    let verdicts = test_network(g, &generated.traffic, channels, Execution::Sequential)?;
    let mut reports = Vec::with_capacity(config.schedulers.len());
    for &scheduler in &config.schedulers {
        let sim = SimulationConfig {
            mode: config.mode,
            scheduler,
            seed,
            ..SimulationConfig::new(channels, config.horizon)
        };
        reports.push(run_simulation(g, &generated.traffic, sim)?);
    }
    if let Some(root) = &config.output_dir {
        save_topology(&root.join(format!("seed-{seed}")).join("topology.json"), &topology)?;
        let dir = cell_dir(root, seed, channels);
        save_traffic(&dir.join("traffic.json"), &generated.traffic)?;
        write_json(&dir.join("verdicts.json"), &verdicts)?;
        for r in &reports {
            write_json(&dir.join(report_file(r.config.scheduler)), r)?;
        }
    }
    Ok(Some(CellOutput {
        seed,
        channels,
        traffic: generated.traffic,
        verdicts,
        reports,
    }))
}

/// Table rows for one finished cell.
pub fn cell_rows(cell: &CellOutput, config: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    let bins = config.deadline_bins();
    let edges = stats::unit_edges(config.histogram_bins);
    let (delta, delta_prime) = stats::ratio_histogram(&cell.verdicts, &edges)?;
    let infeasible: Vec<Option<f64>> = stats::deadline_bin_report(&cell.verdicts, &cell.traffic, &bins)?
        .iter()
        .map(|b: &BinRatio| b.ratio)
        .collect();
    let passing = cell.verdicts.iter().filter(|v| v.schedulable).count();
    cell.reports
        .iter()
        .map(|r| {
            Ok(MetricsRow {
                seed: cell.seed,
                channels: cell.channels,
                scheduler: r.config.scheduler,
                links: cell.verdicts.len(),
                passing_links: passing,
                schedulable_link_ratio: Some(r.schedulable_link_ratio),
                mean_delta: Some(delta.mean),
                delta_ci: Some((delta.ci_low, delta.ci_high)),
                mean_delta_prime: Some(delta_prime.mean),
                packets: r.total_packets,
                misses: r.total_misses,
                max_rounds: r.max_rounds,
                mean_rounds: r.mean_rounds,
                infeasible_by_deadline: infeasible.clone(),
                missing_by_deadline: stats::miss_bin_report(r, &cell.traffic, &bins)?
                    .iter()
                    .map(|b| b.ratio)
                    .collect(),
                misses_favor_short_deadlines: stats::misses_favor_short_deadlines(r, &cell.traffic)?,
                error: None,
            })
        })
        .collect()
}

/// Runs every (seed, channels) cell, `exec` deciding whether cells run in
/// parallel, and writes `metrics.json`, `metrics.csv` and `ratios.csv` when
/// an output directory is set. A failing cell yields rows carrying its
/// error; the sweep goes on.
pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<MetricsTable> {
    config.validate()?;
    let cells: Vec<(u64, u32)> = config
        .seeds
        .iter()
        .flat_map(|&s| config.channels.iter().map(move |&n| (s, n)))
        .collect();
    let outputs = par::map(exec, &cells, |&(seed, n)| {
        run_cell(config, seed, n).and_then(|c| match c {
            Some(c) => cell_rows(&c, config).map(|rows| (rows, Some(c))),
            None => Ok((Vec::new(), None)),
        })
    });
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for (&(seed, n), out) in cells.iter().zip(outputs) {
        match out {
            Ok((r, cell)) => {
                rows.extend(r);
                if let Some(c) = cell {
                    ratios.push((seed, n, c.verdicts));
                }
            }
            Err(e) => rows.extend(config.schedulers.iter().map(|&s| MetricsRow::failed(seed, n, s, &e))),
        }
    }
    let table = MetricsTable {
        config: config.clone(),
        deadline_bins: config.deadline_bins(),
        rows,
    };
    if let Some(root) = &config.output_dir {
        write_json(&root.join("metrics.json"), &table)?;
        write_text(&root.join("metrics.csv"), &table.to_csv())?;
        write_text(&root.join("ratios.csv"), &ratios_csv(&ratios))?;
    }
    Ok(table)
}

/// Rebuilds the table under `root` from the persisted per-cell artifacts.
/// Rows that recorded an error are carried over unchanged.
pub fn recompute_table(root: &Path) -> Result<MetricsTable> {
    let stored: MetricsTable = read_json(&root.join("metrics.json"))?;
    let config = stored.config.clone();
    let mut rows = Vec::new();
    let mut done = std::collections::BTreeSet::new();
    for row in &stored.rows {
        if row.error.is_some() {
            rows.push(row.clone());
            continue;
        }
        if !done.insert((row.seed, row.channels)) {
            continue;
        }
        let dir = cell_dir(root, row.seed, row.channels);
        let traffic = crate::io::load_traffic(&dir.join("traffic.json"))?;
        let verdicts: Vec<SchedulabilityVerdict> = read_json(&dir.join("verdicts.json"))?;
        let reports = config
            .schedulers
            .iter()
            .map(|&s| read_json(&dir.join(report_file(s))))
            .collect::<Result<Vec<SimulationReport>>>()?;
        let cell = CellOutput {
            seed: row.seed,
            channels: row.channels,
            traffic,
            verdicts,
            reports,
        };
        rows.extend(cell_rows(&cell, &config)?);
    }
    Ok(MetricsTable {
        deadline_bins: config.deadline_bins(),
        config,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        let mut d = DeploymentParams::network1();
        d.width = 500.0;
        d.height = 500.0;
        d.rows = 1;
        d.cols = 1;
        d.nodes = 30;
        d.links = 14;
        ExperimentConfig {
            deployment: d,
            channels: vec![2, 3],
            horizon: 600,
            seeds: vec![1, 2],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn sweep_is_reproducible_and_recomputable() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut cfg = small();
        cfg.output_dir = Some(a.path().to_path_buf());
        let table = run_experiment(&cfg, Execution::Parallel).unwrap();
        assert_eq!(table.rows.len(), 2 * 2 * 2);
        for r in &table.rows {
            assert!(r.error.is_none(), "{:?}", r.error);
            assert_eq!(r.passing_links, r.links);
            if r.scheduler == SchedulerKind::Ldp {
                assert_eq!(r.schedulable_link_ratio, Some(1.0));
            }
            let (lo, hi) = r.delta_ci.unwrap();
            assert!(lo <= r.mean_delta.unwrap() && r.mean_delta.unwrap() <= hi);
        }
        cfg.output_dir = Some(b.path().to_path_buf());
        run_experiment(&cfg, Execution::Sequential).unwrap();
        for f in ["metrics.json", "metrics.csv", "ratios.csv", "seed-1/n2/verdicts.json"] {
            assert_eq!(
                std::fs::read(a.path().join(f)).unwrap(),
                std::fs::read(b.path().join(f)).unwrap(),
                "{f}"
            );
        }
        let again = recompute_table(a.path()).unwrap();
        assert_eq!(again.rows, table.rows);
    }

    #[test]
    fn failing_cells_are_recorded() {
        let mut cfg = small();
        cfg.seeds = vec![1];
        cfg.channels = vec![2];
        // Shorter than the longest possible period.
        cfg.horizon = 5;
        let table = run_experiment(&cfg, Execution::Sequential).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows.iter().all(|r| r.error.is_some()));
        assert!(table.to_csv().lines().count() == 3);
    }

    #[test]
    fn empty_deployment_gives_empty_table() {
        let mut cfg = small();
        cfg.deployment.links = 0;
        let table = run_experiment(&cfg, Execution::Sequential).unwrap();
        assert!(table.rows.is_empty());
    }

    #[test]
    fn invalid_config_is_an_input_error() {
        let mut cfg = small();
        cfg.channels = vec![0];
        assert!(matches!(run_experiment(&cfg, Execution::Sequential), Err(Error::Input(_))));
    }
}
