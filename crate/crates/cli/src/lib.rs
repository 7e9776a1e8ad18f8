//! `pa-sim` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or config errors, 2 when a
//! computation or file write fails.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pa_core::engine;
use pa_core::growth::{assumption_report, AssumptionTolerances};
use pa_core::harness::{write_ensemble, write_json, write_meta, Analysis, ExperimentPlan, HarnessError, RunMeta};
use pa_core::rado::{back_and_forth_extend, check_basic_axioms, er_generate, witness_coverage, ErConfig, PSequence};
use pa_core::seeding::{rng_from_seed, stream_seed};
use pa_core::{GrowthSpec, GrowthTable, Multigraph, PartialIso, Rational, StorageMode};

#[derive(Debug, Parser)]
#[command(name = "pa-sim", version, about = "Preferential-attachment multigraph experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the run count from the config.
    #[arg(long)]
    runs: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Profile {
    Linear,
    Constant,
    Spike,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One run; writes trajectory.csv, meta.json and, in full storage, graph.mg.
    Simulate(PlanArgs),
    /// Seeded ensemble; writes result.json, curves.csv, martingale.csv and meta.json.
    Ensemble(PlanArgs),
    /// Ensemble restricted to the martingale analyses.
    Martingale(PlanArgs),
    /// Structural axiom checks and sampled witness coverage for a graph file.
    Axioms {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        m_max: u32,
        #[arg(long, default_value_t = 50)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random multigraph with level probabilities p_0, p_1, ...
    Ergen {
        #[arg(long)]
        nodes: usize,
        /// One probability, or a comma-separated list whose last entry repeats.
        #[arg(long)]
        p: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = pa_core::rado::DEFAULT_MULTIPLICITY_CAP)]
        cap: u32,
    },
    /// Back-and-forth extension between two graph files.
    Backforth {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        steps: i64,
        /// Starting partial isomorphism (JSON `{"pairs": [[a, b], ...]}`); empty by default.
        #[arg(long)]
        start: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// S1/S2 partial sums and doubling increments for a built-in profile.
    Assumptions {
        #[arg(long, value_enum)]
        profile: Profile,
        #[arg(long)]
        horizon: u64,
        /// Slope for `linear`, edge count for `constant`.
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn config<E: fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime<E: fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn harness(e: HarnessError) -> CliError {
    if e.is_config_error() {
        config(e)
    } else {
        runtime(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Loading never counts as a runtime failure: a missing or malformed input is a config error.
fn load_plan(a: &PlanArgs) -> Result<ExperimentPlan> {
    let mut plan = ExperimentPlan::load(&a.config).map_err(config)?;
    if let Some(s) = a.seed {
        plan = plan.with_seed(s);
    }
    if let Some(n) = a.runs {
        if n == 0 {
            return Err(CliError::Config("--runs must be at least 1".into()));
        }
        plan = plan.with_runs(n);
    }
    Ok(plan)
}

fn meta(command: &str, plan: &ExperimentPlan) -> Result<RunMeta> {
    let cfg = serde_json::to_value(&plan.config).map_err(runtime)?;
    Ok(RunMeta::new(command, cfg, plan.master_seed))
}

fn read_graph(path: &Path) -> Result<Multigraph> {
    let text = fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    Multigraph::deserialize(&text).map_err(|e| config(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn simulate(a: &PlanArgs) -> Result<()> {
    let plan = load_plan(a)?;
    let mut cfg = plan.process.clone();
    cfg.rng_seed = stream_seed(plan.master_seed, 0);
    let traj = engine::run(&cfg).map_err(runtime)?;
    write_meta(&a.out, &meta("simulate", &plan)?).map_err(harness)?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv).map_err(runtime)?;
    write_text(&a.out.join("trajectory.csv"), &String::from_utf8(csv).map_err(runtime)?)?;
    if traj.final_graph.storage_mode() == StorageMode::Full {
        write_text(&a.out.join("graph.mg"), &traj.final_graph.serialize().map_err(runtime)?)?;
    }
    println!("t = {}, edges = {}", traj.final_t, traj.final_graph.total_edges());
    Ok(())
}

fn ensemble(a: &PlanArgs, martingale_only: bool) -> Result<()> {
    let mut plan = load_plan(a)?;
    if martingale_only {
        plan.analyses
            .retain(|x| matches!(x, Analysis::Martingale | Analysis::L2 | Analysis::Sh));
        plan.witnesses.clear();
        if plan.analyses.is_empty() {
            plan.analyses.insert(Analysis::Martingale);
        }
        if plan.process.tracked_nodes.is_empty() {
            return Err(CliError::Config("martingale needs tracked_nodes".into()));
        }
    }
    let result = pa_core::run_ensemble(&plan).map_err(harness)?;
    let command = if martingale_only { "martingale" } else { "ensemble" };
    write_meta(&a.out, &meta(command, &plan)?).map_err(harness)?;
    write_ensemble(&a.out, &result).map_err(harness)?;
    for x in &result.x_limits {
        println!(
            "node {}: mean X(T) = {:.6}, std = {:.6}, min = {:.6}",
            x.node, x.mean, x.std, x.min
        );
    }
    for (w, row) in result.requests.iter().zip(result.fractions()) {
        println!(
            "request {:?}: fraction at T = {}",
            w.pairs(),
            row.last().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}

fn parse_p(p: &str) -> Result<PSequence> {
    let values = p
        .split(',')
        .map(|s| s.trim().parse::<Rational>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(config)?;
    Ok(match values.as_slice() {
        [one] => PSequence::Constant(*one),
        _ => PSequence::List(values),
    })
}

fn growth_for(profile: Profile, c: &str) -> Result<GrowthSpec> {
    let spec = match profile {
        Profile::Linear => GrowthSpec::linear_floor(c.parse().map_err(config)?, 1, 2),
        Profile::Constant => GrowthSpec::constant(c.parse().map_err(config)?, 1, 2),
        Profile::Spike => GrowthSpec::power_of_two_spike(1, 2),
    };
    spec.map_err(config)
}

fn assumptions(profile: Profile, horizon: u64, c: &str, out: Option<&Path>) -> Result<()> {
    let spec = growth_for(profile, c)?;
    let table = GrowthTable::build(&spec, horizon).map_err(config)?;
    let checkpoints: Vec<u64> = (1..64)
        .map(|k| 1u64 << k)
        .take_while(|&t| t <= horizon)
        .filter(|&t| t >= spec.v_prime)
        .collect();
    if checkpoints.is_empty() {
        return Err(CliError::Config(format!("horizon {horizon} is below v'")));
    }
    let report = assumption_report(&table, horizon, &checkpoints, &AssumptionTolerances::default()).map_err(config)?;
    println!(
        "{:>10} {:>14} {:>14} {:>14} {:>14}",
        "T", "S1", "S2", "S1(2T)-S1(T)", "S2(2T)-S2(T)"
    );
    for (i, t) in report.checkpoints.iter().enumerate() {
        let j = report.doubling_points.iter().position(|d| d == t);
        let inc = |v: &[f64]| j.map_or_else(|| "-".to_string(), |j| format!("{:.6e}", v[j]));
        println!(
            "{:>10} {:>14.6e} {:>14.6e} {:>14} {:>14}",
            t,
            report.s1_partial[i],
            report.s2_partial[i],
            inc(&report.s1_doubling_increments),
            inc(&report.s2_doubling_increments)
        );
    }
    println!("hint: {:?}", report.verdict_hint);
    if let Some(path) = out {
        write_json(path, &report).map_err(harness)?;
    }
    Ok(())
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(&a),
        Command::Ensemble(a) => ensemble(&a, false),
        Command::Martingale(a) => ensemble(&a, true),
        Command::Axioms {
            graph,
            out,
            n_max,
            m_max,
            samples,
            seed,
        } => {
            let g = read_graph(&graph)?.with_storage(StorageMode::Full);
            let mut report = check_basic_axioms(&g).map_err(runtime)?;
            report.a4_coverage =
                Some(witness_coverage(&g, n_max, m_max, samples, &mut rng_from_seed(seed)).map_err(config)?);
            write_json(&out, &report).map_err(harness)?;
            let cov = report.a4_coverage.as_ref().unwrap();
            println!(
                "basic axioms: {}; coverage {}/{}",
                report.basic_ok(),
                cov.satisfied,
                cov.sampled
            );
            Ok(())
        }
        Command::Ergen {
            nodes,
            p,
            seed,
            out,
            cap,
        } => {
            let cfg = ErConfig {
                node_count: nodes,
                p: parse_p(&p)?,
                multiplicity_cap: cap,
            };
            cfg.validate().map_err(config)?;
            let g = er_generate(&cfg, &mut rng_from_seed(seed)).map_err(runtime)?;
            write_text(&out, &g.serialize().map_err(runtime)?)
        }
        Command::Backforth {
            g1,
            g2,
            steps,
            start,
            out,
        } => {
            let steps = usize::try_from(steps)
                .map_err(|_| CliError::Config(format!("--steps must be non-negative, got {steps}")))?;
            let (g1, g2) = (read_graph(&g1)?, read_graph(&g2)?);
            let iso = match start {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| config(format!("{}: {e}", path.display())))?;
                    serde_json::from_str::<PartialIso>(&text).map_err(|e| config(format!("{}: {e}", path.display())))?
                }
                None => PartialIso::default(),
            };
            let outcome = back_and_forth_extend(&g1, &g2, &iso, steps).map_err(config)?;
            let text = serde_json::to_string_pretty(&outcome).map_err(runtime)? + "\n";
            match out {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Assumptions {
            profile,
            horizon,
            c,
            out,
        } => assumptions(profile, horizon, &c, out.as_deref()),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
