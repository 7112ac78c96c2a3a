use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hapslink::engine::{replay_trace, DecisionRecord, Engine, Request, RequestKind};
use hapslink::offload::ComputeTask;
use hapslink::sweep::{capacity_sweep, ee_sweep, gnuplot_script, latency_sweep, Execution};
use hapslink::trace::{read_trace, write_decisions};
use hapslink::{Action, Objective, Scenario, SweepVariable, Table};

#[derive(Parser)]
#[command(
    name = "hapslink",
    version,
    about = "Multi-mode HAPS backhaul and offloading simulator"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML); built-in case study when absent.
    #[arg(long, env = "HAPSLINK_CONFIG", global = true)]
    config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Sweep step, overriding the configured one.
    #[arg(long, global = true)]
    grid: Option<f64>,

    /// Also write a gnuplot script next to the CSV (requires --out).
    #[arg(long, global = true)]
    emit_gnuplot: bool,

    /// Evaluate sweep rows on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Relay and surface spectral efficiency against HAPS offset.
    SweepCapacity,
    /// Relay and surface energy efficiency against HAPS offset.
    SweepEe,
    /// Offload latency against task size, each mode at its best placement.
    SweepLatency,
    /// Decide a single request with an empty cache.
    Select(SelectArgs),
    /// Replay a request trace and write one decision per request.
    Replay {
        /// Trace file: t,kind,content_id,size_bits,objective,qos_bps
        trace: PathBuf,
    },
}

#[derive(Args)]
struct SelectArgs {
    /// communication, content_delivery, caching or task_offloading.
    #[arg(long, default_value = "communication")]
    kind: String,
    /// max_capacity, max_energy_efficiency or min_energy.
    #[arg(long)]
    objective: Option<String>,
    /// Rate floor in bps.
    #[arg(long)]
    qos: Option<f64>,
    /// Payload or task size in bits.
    #[arg(long)]
    size: Option<f64>,
    #[arg(long)]
    content_id: Option<String>,
}

enum Failure {
    Invalid(String),
    Infeasible(String),
}

impl Failure {
    fn invalid(err: impl std::fmt::Display) -> Self {
        Failure::Invalid(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    let scenario = match &common.config {
        Some(path) => Scenario::load(path).map_err(Failure::invalid)?,
        None => Scenario::default(),
    };
    let out = common.out.clone().or_else(|| scenario.output.clone());
    if common.emit_gnuplot && out.is_none() {
        return Err(Failure::Invalid(
            "--emit-gnuplot needs --out or output.path".into(),
        ));
    }
    let execution = if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };

    match cli.command {
        Command::SweepCapacity => {
            let range = sweep_range(&scenario, SweepVariable::Offset, common.grid)?;
            let table = capacity_sweep(&scenario, &range, execution).map_err(Failure::invalid)?;
            emit_table(
                &table,
                out.as_deref(),
                common.emit_gnuplot,
                "spectral efficiency (bps/Hz)",
            )
        }
        Command::SweepEe => {
            let range = sweep_range(&scenario, SweepVariable::Offset, common.grid)?;
            let table = ee_sweep(&scenario, &range, execution).map_err(Failure::invalid)?;
            emit_table(
                &table,
                out.as_deref(),
                common.emit_gnuplot,
                "energy efficiency (bit/J)",
            )
        }
        Command::SweepLatency => {
            let range = sweep_range(&scenario, SweepVariable::TaskSize, common.grid)?;
            let table = latency_sweep(&scenario, &range, execution).map_err(Failure::invalid)?;
            emit_table(&table, out.as_deref(), common.emit_gnuplot, "latency (s)")
        }
        Command::Select(args) => select(&scenario, &args, out.as_deref()),
        Command::Replay { trace } => replay(&scenario, &trace, out.as_deref()),
    }
}

fn sweep_range(
    scenario: &Scenario,
    variable: SweepVariable,
    grid: Option<f64>,
) -> Result<hapslink::SweepRange, Failure> {
    let mut range = scenario.sweep_for(variable).map_err(Failure::invalid)?;
    if let Some(step) = grid {
        range = range.with_step(step);
    }
    range.validate().map_err(Failure::invalid)?;
    Ok(range)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::Invalid(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Invalid(format!("write failed: {e}"))
}

fn emit_table(
    table: &Table,
    out: Option<&Path>,
    gnuplot: bool,
    ylabel: &str,
) -> Result<(), Failure> {
    let mut writer = open_out(out)?;
    table.write_csv(&mut writer).map_err(io_failure)?;
    writer.flush().map_err(io_failure)?;
    if let (true, Some(csv)) = (gnuplot, out) {
        let script_path = csv.with_extension("gp");
        let csv_name = csv
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        std::fs::write(&script_path, gnuplot_script(table, &csv_name, ylabel))
            .map_err(io_failure)?;
    }
    Ok(())
}

fn select(scenario: &Scenario, args: &SelectArgs, out: Option<&Path>) -> Result<(), Failure> {
    let kind: RequestKind = args.kind.parse().map_err(Failure::Invalid)?;
    let objective = args
        .objective
        .as_deref()
        .map(|token| Objective::parse(token, args.qos))
        .transpose()
        .map_err(Failure::Invalid)?;
    let request = match kind {
        RequestKind::TaskOffloading => {
            let size = args
                .size
                .ok_or_else(|| Failure::Invalid("task_offloading needs --size".into()))?;
            Request {
                qos_min_bps: args.qos,
                objective,
                ..Request::offload(
                    0.0,
                    ComputeTask::new(size, scenario.cycles_per_bit).map_err(Failure::invalid)?,
                )
            }
        }
        _ => Request {
            t: 0.0,
            kind,
            content_id: args.content_id.clone(),
            payload_bits: args.size,
            task: None,
            objective,
            qos_min_bps: None,
        },
    };
    let context = scenario.engine_context().map_err(Failure::invalid)?;
    let mut engine = Engine::new(context, scenario.initial_cache());
    let record = engine.handle(&request).map_err(Failure::invalid)?;
    write_records(out, std::slice::from_ref(&record))?;
    if record.decision.action == Action::Infeasible {
        return Err(Failure::Infeasible(
            "no enabled mode satisfies the request".into(),
        ));
    }
    Ok(())
}

fn write_records(out: Option<&Path>, records: &[DecisionRecord]) -> Result<(), Failure> {
    let mut writer = open_out(out)?;
    write_decisions(&mut writer, records).map_err(io_failure)?;
    writer.flush().map_err(io_failure)
}

fn replay(scenario: &Scenario, trace: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let file = File::open(trace)
        .map_err(|e| Failure::Invalid(format!("cannot open {}: {e}", trace.display())))?;
    let requests = read_trace(file, scenario.cycles_per_bit).map_err(Failure::invalid)?;
    let context = scenario.engine_context().map_err(Failure::invalid)?;
    let replay =
        replay_trace(&requests, scenario.initial_cache(), &context).map_err(Failure::invalid)?;
    write_records(out, &replay.records)?;

    let s = &replay.summary;
    eprintln!("requests: {}", s.requests);
    for (mode, n) in &s.activations {
        eprintln!("activations {mode}: {n}");
    }
    eprintln!("infeasible: {}", s.infeasible);
    eprintln!("cache hit rate: {:.4}", s.cache_hit_rate());
    eprintln!("payload energy J: {:.6e}", s.total_energy_j);
    for (mode, e) in &s.single_mode_energy_j {
        eprintln!("energy if {mode} only, J: {e:.6e}");
    }
    Ok(())
}
