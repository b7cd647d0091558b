use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use coopnav::agent::CoopLevel;
use coopnav::cli_io::{
    emit_heatmap, emit_histogram_csv, emit_run_csv, emit_summary_csv, emit_trace_csv, parse_config,
    BarrierModeKey, ConfigFile,
};
use coopnav::environment::random_world;
use coopnav::experiment::{
    run_batch, sweep_barriers, sweep_full, sweep_matched, ExperimentSummary,
};
use coopnav::metrics::{histogram, summarize};
use coopnav::seed;
use coopnav::simulation::run;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(
    name = "coopnav",
    about = "Two-agent cooperative vehicle navigation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and print its result row.
    Run(Common),
    /// Run a batch for one cooperation pair.
    Batch(BatchArgs),
    /// Sixteen matched levels.
    SweepMatched(Common),
    /// All 256 ordered pairs, written as a heatmap table.
    SweepFull(Common),
    /// Two pairs at zero to three barriers.
    SweepBarriers(BarrierArgs),
    /// Report whether the configured world is solvable.
    Oracle(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fixed,
    Random,
}

#[derive(Args)]
struct Common {
    /// TOML config; without it a random world is drawn from the seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nruns: Option<usize>,
    #[arg(long)]
    coop_x: Option<CoopLevel>,
    #[arg(long)]
    coop_y: Option<CoopLevel>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    barriers: Option<usize>,
    #[arg(long, value_enum)]
    barrier_mode: Option<ModeArg>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run only: write the per-tick trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Disable parallel execution.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    common: Common,
    /// Also write a solution-time histogram CSV here.
    #[arg(long)]
    histogram: Option<PathBuf>,
    /// Histogram bin width in ms.
    #[arg(long, default_value_t = 500)]
    bin_ms: u64,
}

#[derive(Args)]
struct BarrierArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "0110+0110", value_parser = parse_pair)]
    pair_a: (CoopLevel, CoopLevel),
    #[arg(long, default_value = "1111+0010", value_parser = parse_pair)]
    pair_b: (CoopLevel, CoopLevel),
}

fn parse_pair(s: &str) -> Result<(CoopLevel, CoopLevel), String> {
    let (x, y) = s
        .split_once('+')
        .ok_or_else(|| format!("expected X+Y, got {s:?}"))?;
    Ok((
        x.parse().map_err(|e| format!("{e}"))?,
        y.parse().map_err(|e| format!("{e}"))?,
    ))
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn load(common: &Common) -> Result<ConfigFile, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| Failure::Config(format!("{}:\n{e}", path.display())))?
        }
        None => {
            let s = common.seed.unwrap_or(1);
            let nb = common.barriers.unwrap_or(3).min(3);
            let world = random_world(&mut seed::rng(seed::derive(s, seed::STREAM_WORLD)), nb)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            let mut cfg =
                parse_config("[world]\ntarget = [0.5, 0.5]\nvehicle_start = [0.1, 0.1]\n")
                    .expect("built-in config parses");
            cfg.set_world(&world);
            cfg
        }
    };
    if let Some(n) = common.nruns {
        cfg.experiment.nruns = n;
    }
    if let Some(c) = common.coop_x {
        cfg.agents.x.coop = c;
    }
    if let Some(c) = common.coop_y {
        cfg.agents.y.coop = c;
    }
    if let Some(s) = common.seed {
        cfg.experiment.master_seed = s;
    }
    if let Some(b) = common.barriers {
        cfg.experiment.nbarriers = b;
    }
    if let Some(m) = common.barrier_mode {
        cfg.experiment.barrier_mode = match m {
            ModeArg::Fixed => BarrierModeKey::Fixed,
            ModeArg::Random => BarrierModeKey::Random,
        };
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn write(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rt<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(common) => {
            let cfg = load(&common)?;
            let mut rc = cfg.run_config();
            rc.record_trace = common.trace.is_some();
            let result = run(&rc).map_err(rt)?;
            if let (Some(path), Some(rows)) = (&common.trace, &result.trace) {
                write(&Some(path.clone()), &emit_trace_csv(rows))?;
            }
            write(&common.out, &emit_run_csv(std::slice::from_ref(&result)))
        }
        Command::Batch(args) => {
            let cfg = load(&args.common)?;
            let mut ec = cfg.experiment_config();
            ec.parallel = !args.common.serial;
            let (cx, cy) = (cfg.agents.x.coop, cfg.agents.y.coop);
            let results = run_batch(&ec, cx, cy).map_err(rt)?;
            if let Some(path) = &args.histogram {
                let times: Vec<u64> = results.iter().filter_map(|r| r.st_ms).collect();
                write(
                    &Some(path.clone()),
                    &emit_histogram_csv(&histogram(&times, args.bin_ms.max(1))),
                )?;
            }
            let summary = ExperimentSummary {
                coop_x: cx,
                coop_y: cy,
                nbarriers: ec.nbarriers,
                summary: summarize(&results),
            };
            eprint!("{}", emit_summary_csv(&[summary]));
            write(&args.common.out, &emit_run_csv(&results))
        }
        Command::SweepMatched(common) => {
            let cfg = load(&common)?;
            let mut ec = cfg.experiment_config();
            ec.parallel = !common.serial;
            write(
                &common.out,
                &emit_summary_csv(&sweep_matched(&ec).map_err(rt)?),
            )
        }
        Command::SweepFull(common) => {
            let cfg = load(&common)?;
            let mut ec = cfg.experiment_config();
            ec.parallel = !common.serial;
            let rows = sweep_full(&ec).map_err(rt)?;
            write(&common.out, &emit_heatmap(&rows).map_err(rt)?)
        }
        Command::SweepBarriers(args) => {
            let cfg = load(&args.common)?;
            let mut ec = cfg.experiment_config();
            ec.parallel = !args.common.serial;
            let rows = sweep_barriers(&ec, args.pair_a, args.pair_b).map_err(rt)?;
            write(&args.common.out, &emit_summary_csv(&rows))
        }
        Command::Oracle(common) => {
            let cfg = load(&common)?;
            let env = cfg.world_config().validate().map_err(rt)?;
            write(&common.out, &format!("solvable,{}\n", env.solvable()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
