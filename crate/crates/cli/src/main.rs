//! `qsearch`: run single trials, generate instances and produce sweep tables.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qsearch_core::experiments::{
    alpha_grid, extreme_cost_curve, scaling_sweep, transition_sweep, unstructured_ratio, Density, RunMetadata,
    SweepConfig, SweepResult, DEFAULT_INSTANCES,
};
use qsearch_core::problems::{
    encode_3sat, encode_graph_coloring, gen_random_csp, parse_clause_list, parse_edge_list, EnsembleSpec, ExtremeKind,
};
use qsearch_core::reduced::{MaxSimulator, MinSimulator};
use qsearch_core::{engine::Simulator, PhasePolicy, ProblemInstance, SimulationLimits};

use crate::output::{Format, RunReport};

#[derive(Parser, Debug)]
#[command(name = "qsearch", version, about = "Structure-based quantum search over the subset lattice, simulated classically")]
struct Cli {
    /// Output format for tables and run records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Largest n simulated on the full lattice.
    #[arg(long, global = true, default_value_t = qsearch_core::transform::DEFAULT_MAX_N)]
    max_n: usize,

    /// Worker threads for ensemble runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// More logging on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One trial on an instance file or a generated random instance.
    Run(RunArgs),
    /// One trial on an extreme problem, or the extreme cost curve over n.
    Extreme(ExtremeArgs),
    /// Write instance files: a random ensemble, a graph coloring or a 3-SAT formula.
    Gen(GenArgs),
    /// Mean cost against constraint density at fixed n.
    Transition(TransitionArgs),
    /// Mean cost against n at fixed density.
    Scaling(ScalingArgs),
    /// Mean of C / sqrt(N_L / S) against n.
    Ratio(RatioArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PolicyArg {
    Staged,
    NogoodOnly,
}

impl From<PolicyArg> for PhasePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Staged => PhasePolicy::Staged,
            PolicyArg::NogoodOnly => PhasePolicy::NogoodOnly,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum KindArg {
    Min,
    Max,
}

impl From<KindArg> for ExtremeKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Min => ExtremeKind::Min,
            KindArg::Max => ExtremeKind::Max,
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Instance file (JSON). Without it, a random instance is generated.
    #[arg(long, conflicts_with_all = ["n", "m"])]
    instance: Option<PathBuf>,
    #[arg(long, required_unless_present = "instance")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "instance")]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instance number within the seeded ensemble.
    #[arg(long, default_value_t = 0)]
    index: u64,
    /// Steps to run (default L).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Staged)]
    policy: PolicyArg,
    /// Also report the per-size probability in goods after each step.
    #[arg(long)]
    profile: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExtremeArgs {
    #[arg(long, value_enum, required_unless_present = "curve")]
    kind: Option<KindArg>,
    #[arg(long, required_unless_present = "curve")]
    n: Option<usize>,
    /// Solution size (default n/2).
    #[arg(long = "L")]
    l: Option<usize>,
    /// Steps to run (default L).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Staged)]
    policy: PolicyArg,
    #[arg(long)]
    profile: bool,
    /// Cost curve for both kinds over --n-list instead of a single trial.
    #[arg(long, conflicts_with_all = ["kind", "n", "l", "steps", "profile"])]
    curve: bool,
    /// n values for --curve: comma separated, `a-b` for every even n in a..=b.
    #[arg(long, default_value = "10-40")]
    n_list: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Random ensemble size n.
    #[arg(long, conflicts_with_all = ["edges", "clauses"], required_unless_present_any = ["edges", "clauses"])]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    instances: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Edge list (`u v` per line) to encode as graph coloring.
    #[arg(long, requires = "colors", conflicts_with = "clauses")]
    edges: Option<PathBuf>,
    #[arg(long)]
    colors: Option<usize>,
    /// Clause list (three signed literals per line) to encode as 3-SAT.
    #[arg(long)]
    clauses: Option<PathBuf>,
    /// Output directory for an ensemble, or output file for an encoding.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EnsembleOpts {
    #[arg(long, default_value_t = DEFAULT_INSTANCES)]
    instances: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Staged)]
    policy: PolicyArg,
    /// Write the table here (plus a `.meta.json` sidecar); stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TransitionArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 0.25)]
    alpha_min: f64,
    #[arg(long, default_value_t = 2.5)]
    alpha_max: f64,
    #[arg(long, default_value_t = 0.25)]
    alpha_step: f64,
    #[command(flatten)]
    opts: EnsembleOpts,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Comma separated, `a-b` for every even n in a..=b.
    #[arg(long, default_value = "6-20")]
    n_list: String,
    /// Also emit the m = 0 and m = m_max ensembles.
    #[arg(long)]
    extremes: bool,
    #[command(flatten)]
    opts: EnsembleOpts,
}

#[derive(Args, Debug)]
struct RatioArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value = "6-20")]
    n_list: String,
    #[command(flatten)]
    opts: EnsembleOpts,
}

fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (
                    a.trim().parse().with_context(|| format!("bad n range {part:?}"))?,
                    b.trim().parse().with_context(|| format!("bad n range {part:?}"))?,
                );
                if a > b {
                    bail!("empty n range {part:?}");
                }
                out.extend((a..=b).filter(|n| n % 2 == 0));
            }
            None => out.push(part.parse().with_context(|| format!("bad n value {part:?}"))?),
        }
    }
    if out.is_empty() {
        bail!("n list {text:?} is empty");
    }
    Ok(out)
}

struct Session {
    format: Format,
    limits: SimulationLimits,
    argv: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let ctx = Session {
        format: cli.format,
        limits: SimulationLimits::with_max_n(cli.max_n)?,
        argv: std::env::args().collect::<Vec<_>>().join(" "),
    };
    match cli.command {
        Command::Run(a) => cmd_run(&ctx, a),
        Command::Extreme(a) => cmd_extreme(&ctx, a),
        Command::Gen(a) => cmd_gen(a),
        Command::Transition(a) => cmd_transition(&ctx, a),
        Command::Scaling(a) => cmd_scaling(&ctx, a),
        Command::Ratio(a) => cmd_ratio(&ctx, a),
    }
}

fn cmd_run(ctx: &Session, a: RunArgs) -> Result<()> {
    let (problem, source) = match &a.instance {
        Some(path) => (
            ProblemInstance::load(path).with_context(|| format!("reading {}", path.display()))?,
            path.display().to_string(),
        ),
        None => {
            let (n, m) = (a.n.expect("required by clap"), a.m.expect("required by clap"));
            let spec = EnsembleSpec::new(n, m, 1, a.seed)?;
            (gen_random_csp(&spec, a.index)?, format!("random n={n} m={m} seed={} index={}", a.seed, a.index))
        }
    };
    let steps = a.steps.unwrap_or(problem.solution_size()).max(1);
    let sim = Simulator::new(&problem, &ctx.limits)?;
    let record = sim.run(steps, a.policy.into(), a.profile)?;
    let report = RunReport::new(source, problem.n(), problem.solution_size(), a.policy.into(), record);
    report.log_summary();
    output::emit(a.out.as_deref(), &report.render(ctx.format)?)
}

fn cmd_extreme(ctx: &Session, a: ExtremeArgs) -> Result<()> {
    let policy: PhasePolicy = a.policy.into();
    if a.curve {
        let start = Instant::now();
        let ns = parse_n_list(&a.n_list)?;
        let curve = extreme_cost_curve(&ns, policy)?;
        let text = match ctx.format {
            Format::Csv => curve.to_csv(),
            Format::StructuredText => output::to_json(&curve)?,
        };
        let meta = metadata(ctx, None, policy, start);
        return output::emit_table(a.out.as_deref(), &text, &meta);
    }
    let kind: ExtremeKind = a.kind.expect("required by clap").into();
    let n = a.n.expect("required by clap");
    let l = a.l.unwrap_or(n / 2);
    if l > n {
        bail!("L = {l} exceeds n = {n}");
    }
    let steps = a.steps.unwrap_or(l).max(1);
    let mut record = match kind {
        ExtremeKind::Min => MinSimulator::new(n)?.run(l, steps, policy)?,
        ExtremeKind::Max => MaxSimulator::new(n, l)?.run(steps, policy)?,
    };
    if !a.profile {
        record.level_profile = None;
    }
    let report = RunReport::new(format!("{kind} extreme"), n, l, policy, record);
    report.log_summary();
    output::emit(a.out.as_deref(), &report.render(ctx.format)?)
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    if let Some(n) = a.n {
        let m = a.m.unwrap_or(0);
        let spec = EnsembleSpec::new(n, m, a.instances, a.seed)?;
        std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
        let width = a.instances.saturating_sub(1).to_string().len();
        for index in 0..a.instances as u64 {
            let problem = gen_random_csp(&spec, index)?;
            let path = a.out.join(format!("n{n}-m{m}-seed{}-{index:0width$}.json", a.seed));
            problem.save(&path).with_context(|| format!("writing {}", path.display()))?;
        }
        log::info!("wrote {} instances to {}", a.instances, a.out.display());
        return Ok(());
    }
    let problem = if let Some(path) = &a.edges {
        let text = read(path)?;
        let (edges, nodes) = parse_edge_list(&text)?;
        encode_graph_coloring(&edges, nodes, a.colors.expect("required by clap"))?
    } else if let Some(path) = &a.clauses {
        let (clauses, variables) = parse_clause_list(&read(path)?)?;
        encode_3sat(&clauses, variables)?
    } else {
        unreachable!("clap requires one of --n, --edges, --clauses")
    };
    problem.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn sweep_config(ctx: &Session, opts: &EnsembleOpts) -> Result<SweepConfig> {
    if opts.instances == 0 {
        bail!("--instances must be at least 1");
    }
    Ok(SweepConfig {
        instances: opts.instances,
        policy: opts.policy.into(),
        seed: opts.seed,
        limits: ctx.limits,
    })
}

fn metadata(ctx: &Session, cfg: Option<&SweepConfig>, policy: PhasePolicy, start: Instant) -> RunMetadata {
    RunMetadata {
        command: ctx.argv.clone(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.map(|c| c.seed),
        policy,
        instances: cfg.map(|c| c.instances),
        threads: rayon::current_num_threads(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    }
}

fn emit_sweep(ctx: &Session, result: &SweepResult, cfg: &SweepConfig, out: Option<&Path>, start: Instant) -> Result<()> {
    let text = match ctx.format {
        Format::Csv => result.to_csv(),
        Format::StructuredText => output::to_json(result)?,
    };
    let meta = metadata(ctx, Some(cfg), cfg.policy, start);
    output::emit_table(out, &text, &meta)
}

fn cmd_transition(ctx: &Session, a: TransitionArgs) -> Result<()> {
    let start = Instant::now();
    let cfg = sweep_config(ctx, &a.opts)?;
    let grid = alpha_grid(a.alpha_min, a.alpha_max, a.alpha_step)?;
    let result = transition_sweep(a.n, &grid, &cfg)?;
    emit_sweep(ctx, &result, &cfg, a.opts.out.as_deref(), start)
}

fn cmd_scaling(ctx: &Session, a: ScalingArgs) -> Result<()> {
    let start = Instant::now();
    let cfg = sweep_config(ctx, &a.opts)?;
    let ns = parse_n_list(&a.n_list)?;
    let mut result = scaling_sweep(Density::Alpha(a.alpha), &ns, &cfg)?;
    if a.extremes {
        for density in [Density::Unconstrained, Density::FullyConstrained] {
            result.rows.extend(scaling_sweep(density, &ns, &cfg)?.rows);
        }
    }
    emit_sweep(ctx, &result, &cfg, a.opts.out.as_deref(), start)
}

fn cmd_ratio(ctx: &Session, a: RatioArgs) -> Result<()> {
    let start = Instant::now();
    let cfg = sweep_config(ctx, &a.opts)?;
    let ns = parse_n_list(&a.n_list)?;
    let result = unstructured_ratio(Density::Alpha(a.alpha), &ns, &cfg)?;
    emit_sweep(ctx, &result, &cfg, a.opts.out.as_deref(), start)
}
