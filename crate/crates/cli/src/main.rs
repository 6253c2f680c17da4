//! `ldp`: generate deployments and traffic, run the schedulability test,
//! simulate, and sweep experiments.
//!
//! Exit codes: 0 success, 1 input error, 2 capacity error, 3 invariant
//! violation.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ldp_core::experiment::{self, histogram_csv, ratios_csv, recompute_table, run_experiment, ExperimentConfig};
use ldp_core::io::{load_graph, load_traffic, read_json, save_topology, save_traffic, write_json, write_text};
use ldp_core::par::{self, Execution};
use ldp_core::schedulability::{test_network, CachedTester};
use ldp_core::scheduler::{run_simulation, Mode, SchedulerKind, SimulationConfig};
use ldp_core::stats::{ratio_histogram, unit_edges};
use ldp_core::topology::{generate_topology, DeploymentParams};
use ldp_core::traffic::generate_traffic;
use ldp_core::{Error, Result};

#[derive(Parser)]
#[command(name = "ldp", version, about = "Local-deadline-partition scheduling toolkit")]
struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "LDP_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random multi-cell deployment and its conflict graph.
    GenTopology(GenTopology),
    /// Draw traffic for a topology and reduce it until every link passes the test.
    GenTraffic(GenTraffic),
    /// Run the per-link schedulability test.
    Test(TestArgs),
    /// Simulate a scheduler slot by slot.
    Simulate(Simulate),
    /// Sweep seeds and channel counts end to end.
    Experiment(Experiment),
    /// Recompute an experiment's table from its persisted artifacts.
    Report(Report),
    /// Per-link approximation ratios with histogram and 95% interval.
    Ratios(Ratios),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Network1,
    Network2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(alias = "deterministic")]
    Det,
    #[value(alias = "bernoulli")]
    Bern,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Det => Mode::Deterministic,
            ModeArg::Bern => Mode::Bernoulli,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    Ldp,
    EdfBaseline,
}

impl From<SchedulerArg> for SchedulerKind {
    fn from(s: SchedulerArg) -> Self {
        match s {
            SchedulerArg::Ldp => SchedulerKind::Ldp,
            SchedulerArg::EdfBaseline => SchedulerKind::EdfBaseline,
        }
    }
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment config JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Deployment preset, replacing the config's deployment.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

impl ConfigArg {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => read_json(p)?,
            None => ExperimentConfig::default(),
        };
        match self.preset {
            Some(Preset::Network1) => cfg.deployment = DeploymentParams::network1(),
            Some(Preset::Network2) => cfg.deployment = DeploymentParams::network2(),
            None => {}
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenTopology {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenTraffic {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    channels: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    traffic: PathBuf,
    #[arg(long)]
    channels: u32,
    /// Write every verdict as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Simulate {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    traffic: PathBuf,
    #[arg(long)]
    channels: u32,
    #[arg(long, default_value_t = 20_000)]
    horizon: u64,
    #[arg(long, value_enum, default_value = "det")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "ldp")]
    scheduler: SchedulerArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write per-slot active counts per channel as CSV.
    #[arg(long)]
    slots_csv: Option<PathBuf>,
    /// Skip the per-slot independence and maximality check.
    #[arg(long)]
    no_check: bool,
}

#[derive(Args)]
struct Experiment {
    #[command(flatten)]
    config: ConfigArg,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated channel counts.
    #[arg(long, value_delimiter = ',')]
    channels: Option<Vec<u32>>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum, value_delimiter = ',')]
    schedulers: Option<Vec<SchedulerArg>>,
    /// Run cells one after another.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Report {
    /// Output directory of a previous `experiment` run.
    #[arg(long)]
    dir: PathBuf,
    /// Where to write the recomputed CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Ratios {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    traffic: PathBuf,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Per-link ratios as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Histogram as CSV.
    #[arg(long)]
    histogram: Option<PathBuf>,
}

fn gen_topology(a: GenTopology) -> Result<()> {
    let cfg = a.config.load()?;
    let t = generate_topology(&cfg.deployment, &mut experiment::topology_rng(a.seed))?;
    save_topology(&a.out, &t)?;
    eprintln!(
        "{} nodes, {} links, {} conflicts, mean degree {:.2}",
        t.nodes.len(),
        t.links.len(),
        t.graph.edge_count(),
        t.mean_degree()
    );
    Ok(())
}

fn gen_traffic(a: GenTraffic) -> Result<()> {
    let cfg = a.config.load()?;
    let g = load_graph(&a.topology)?;
    let tester = CachedTester::new(&g);
    let out = generate_traffic(
        &g,
        a.channels,
        &cfg.traffic,
        &mut experiment::traffic_rng(a.seed, a.channels),
        |g, t, id, n| tester.passes(g, t, id, n),
    )?;
    save_traffic(&a.out, &out.traffic)?;
    eprintln!(
        "{} links, {} reductions, {} still failing",
        out.traffic.len(),
        out.reductions,
        out.unschedulable.len()
    );
    Ok(())
}

fn test(a: TestArgs) -> Result<()> {
    let g = load_graph(&a.topology)?;
    let traffic = load_traffic(&a.traffic)?;
    let verdicts = test_network(&g, &traffic, a.channels, Execution::Parallel)?;
    let passing = verdicts.iter().filter(|v| v.schedulable).count();
    println!("{passing}/{} links pass with {} channels", verdicts.len(), a.channels);
    for v in verdicts.iter().filter(|v| !v.schedulable) {
        println!("fails: link {} (max min-density {})", v.link, v.max_min_density());
    }
    if let Some(out) = &a.out {
        write_json(out, &verdicts)?;
    }
    Ok(())
}

fn simulate(a: Simulate) -> Result<()> {
    let g = load_graph(&a.topology)?;
    let traffic = load_traffic(&a.traffic)?;
    let config = SimulationConfig {
        mode: a.mode.into(),
        scheduler: a.scheduler.into(),
        seed: a.seed,
        check_invariants: !a.no_check,
        record_slots: a.slots_csv.is_some(),
        ..SimulationConfig::new(a.channels, a.horizon)
    };
    let mut report = run_simulation(&g, &traffic, config)?;
    if let Some(path) = &a.slots_csv {
        let mut csv = String::from("slot,rounds");
        for c in 0..a.channels {
            let _ = write!(csv, ",channel{c}");
        }
        csv.push('\n');
        for s in &report.slots {
            let _ = write!(csv, "{},{}", s.slot, s.rounds);
            for n in &s.active_per_channel {
                let _ = write!(csv, ",{n}");
            }
            csv.push('\n');
        }
        write_text(path, &csv)?;
        report.slots.clear();
    }
    write_json(&a.out, &report)?;
    println!(
        "{} packets, {} misses, schedulable-link ratio {}",
        report.total_packets, report.total_misses, report.schedulable_link_ratio
    );
    Ok(())
}

fn experiment(a: Experiment) -> Result<()> {
    let mut cfg = a.config.load()?;
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    if let Some(c) = a.channels {
        cfg.channels = c;
    }
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if let Some(m) = a.mode {
        cfg.mode = m.into();
    }
    if let Some(s) = a.schedulers {
        cfg.schedulers = s.into_iter().map(Into::into).collect();
    }
    cfg.output_dir = Some(a.out);
    let exec = if a.sequential { Execution::Sequential } else { Execution::Parallel };
    let table = run_experiment(&cfg, exec)?;
    print!("{}", table.to_csv());
    let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} rows recorded errors");
    }
    Ok(())
}

fn report(a: Report) -> Result<()> {
    let stored: experiment::MetricsTable = read_json(&a.dir.join("metrics.json"))?;
    let table = recompute_table(&a.dir)?;
    let csv = table.to_csv();
    match &a.out {
        Some(p) => write_text(p, &csv)?,
        None => print!("{csv}"),
    }
    if table.rows != stored.rows {
        return Err(Error::invariant("stored metrics differ from recomputation"));
    }
    Ok(())
}

fn ratios(a: Ratios) -> Result<()> {
    let g = load_graph(&a.topology)?;
    let traffic = load_traffic(&a.traffic)?;
    // Ratios do not depend on the channel count.
    let verdicts = test_network(&g, &traffic, 1, Execution::Parallel)?;
    if verdicts.is_empty() {
        println!("no links");
        return Ok(());
    }
    let (d, dp) = ratio_histogram(&verdicts, &unit_edges(a.bins))?;
    println!("delta: mean {:.4}, 95% CI [{:.4}, {:.4}]", d.mean, d.ci_low, d.ci_high);
    println!("delta': mean {:.4}, 95% CI [{:.4}, {:.4}]", dp.mean, dp.ci_low, dp.ci_high);
    if let Some(p) = &a.out {
        write_text(p, &ratios_csv(&[(0, 0, verdicts)]))?;
    }
    if let Some(p) = &a.histogram {
        write_text(p, &histogram_csv(&d, &dp))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::input("LDP_WORKERS must be at least 1"));
        }
        par::configure_workers(w);
    }
    match cli.command {
        Command::GenTopology(a) => gen_topology(a),
        Command::GenTraffic(a) => gen_traffic(a),
        Command::Test(a) => test(a),
        Command::Simulate(a) => simulate(a),
        Command::Experiment(a) => experiment(a),
        Command::Report(a) => report(a),
        Command::Ratios(a) => ratios(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; help and version are not errors.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
