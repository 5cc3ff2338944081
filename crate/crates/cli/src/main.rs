use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlink_cli::commands::demo::{cmd_demo, DemoCase};
use qlink_cli::commands::latency::{cmd_latency, LatencyEndpoint, LatencyOptions};
use qlink_cli::commands::plan::cmd_plan;
use qlink_cli::commands::selftest::cmd_selftest;
use qlink_cli::commands::simulate::{cmd_simulate, parse_json_arg, Mode};
use qlink_cli::commands::UsageError;
use qlink_qec_rtsim::{CapacityInputs, RtParams, WindowParams};

#[derive(Parser)]
#[command(name = "qlink", version, about = "Runtime tools: latency benchmarking, decode-stream simulation, capacity planning, and the teleportation demo")]
struct Cli {
    /// Print the run report as JSON to stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for result files (CSV traces, JSON summaries).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for seeded commands (demo); seeded runs write byte-identical
    /// result files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure round-trip latency against an echo endpoint.
    Latency(LatencyArgs),
    /// Run the decode-stream discrete-event simulator.
    Simulate(SimulateArgs),
    /// Plan decoder compute capacity.
    Plan(PlanArgs),
    /// Run the teleportation-shaped end-to-end demo.
    Demo(DemoArgs),
    /// Run the fast subset of the acceptance checks.
    Selftest,
}

#[derive(Args)]
struct LatencyArgs {
    /// Use the in-process channel echo (default).
    #[arg(long)]
    inproc: bool,
    /// Connect to an existing UDP echo at this address.
    #[arg(long, conflicts_with = "inproc")]
    endpoint: Option<String>,
    /// Spawn a local UDP echo and measure against it.
    #[arg(long, conflicts_with_all = ["inproc", "endpoint"])]
    spawn_udp: bool,
    /// Packets to send (at most 65536).
    #[arg(long, default_value_t = 1000)]
    n: u64,
    /// Inter-packet spacing in nanoseconds (0 = as fast as possible).
    #[arg(long, default_value_t = 0)]
    interval_ns: u64,
    /// Histogram bin width in nanoseconds.
    #[arg(long, default_value_t = 10)]
    bin_ns: u64,
    /// Frame payload size; the loopback layout fills the first 32 bytes.
    #[arg(long, default_value_t = 32)]
    payload_bytes: usize,
    /// Fixed warm-up sample count instead of automatic detection.
    #[arg(long)]
    fixed_warmup: Option<usize>,
    /// Print per-sample CSV to stdout instead of the summary line.
    #[arg(long, conflicts_with = "json")]
    csv: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Decode schedule: "sliding" or "parallel".
    #[arg(long)]
    mode: String,
    /// Timing parameters as inline JSON or @path (fields c, r, T_s, T_l, j_max).
    #[arg(long)]
    params: Option<String>,
    /// Window geometry as inline JSON or @path (fields n_com, n_buf, n_W,
    /// N_par, T_DEC); parallel mode only.
    #[arg(long)]
    window: Option<String>,
    /// Rounds in the simulated stream.
    #[arg(long, default_value_t = 1_000_000)]
    horizon_rounds: u64,
}

#[derive(Args)]
struct PlanArgs {
    /// Planning mode: "ai" or "matching".
    #[arg(long)]
    mode: String,
    #[arg(long, default_value_t = 25e6)]
    params_per_model: f64,
    #[arg(long, default_value_t = 2.0)]
    flop_per_param: f64,
    #[arg(long, default_value_t = 1e6)]
    cycle_hz: f64,
    #[arg(long, default_value_t = 100)]
    qubits: u64,
    #[arg(long, default_value_t = 10.0)]
    headroom: f64,
    /// Program depth (matching mode anchor lookup).
    #[arg(long, default_value_t = 1e6)]
    depth: f64,
}

#[derive(Args)]
struct DemoArgs {
    /// Stabilizer rounds per run.
    #[arg(long, default_value_t = 5)]
    rounds: u32,
    /// Error injection "round,qubit"; repeatable.
    #[arg(long, value_name = "ROUND,QUBIT")]
    inject: Vec<String>,
    /// Per-qubit per-round flip probability.
    #[arg(long, default_value_t = 0.0)]
    p_flip: f64,
    /// Repeat-until-success attempt budget.
    #[arg(long, default_value_t = 16)]
    attempts: u32,
    /// Failed preparation attempts before the flag reads success.
    #[arg(long, default_value_t = 2)]
    distill_failures: u32,
    /// Route syndromes through the simulation-style bit-vector callback.
    #[arg(long)]
    sim_mode: bool,
    /// Interpreter backing the pulse unit: "standard" or "reference".
    #[arg(long, default_value = "standard")]
    interpreter: String,
    /// Run every single-error injection and compare both callback paths.
    #[arg(long)]
    exhaustive: bool,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Latency(args) => {
            let endpoint = if args.spawn_udp {
                LatencyEndpoint::SpawnUdp
            } else if let Some(addr) = args.endpoint {
                LatencyEndpoint::Endpoint(addr)
            } else {
                LatencyEndpoint::Inproc
            };
            cmd_latency(
                &LatencyOptions {
                    endpoint,
                    n: args.n,
                    interval_ns: args.interval_ns,
                    bin_ns: args.bin_ns,
                    payload_bytes: args.payload_bytes,
                    fixed_warmup: args.fixed_warmup,
                    csv_stdout: args.csv,
                },
                out,
                cli.json,
            )
        }
        Command::Simulate(args) => {
            let mode = match args.mode.as_str() {
                "sliding" => Mode::Sliding,
                "parallel" => Mode::Parallel,
                other => return Err(UsageError(format!("unknown mode {other:?}")).into()),
            };
            let params: RtParams = match &args.params {
                Some(text) => parse_json_arg("--params", text)?,
                None => RtParams::default(),
            };
            let window: Option<WindowParams> = match &args.window {
                Some(text) => Some(parse_json_arg("--window", text)?),
                None => None,
            };
            cmd_simulate(
                mode,
                &params,
                window.as_ref(),
                args.horizon_rounds,
                out,
                cli.json,
            )
        }
        Command::Plan(args) => {
            let inputs = match args.mode.as_str() {
                "ai" => CapacityInputs::Ai {
                    params_per_model: args.params_per_model,
                    flop_per_param_per_qubit: args.flop_per_param,
                    cycle_rate_hz: args.cycle_hz,
                    n_logical_qubits: args.qubits as f64,
                    headroom_factor: args.headroom,
                },
                "matching" => CapacityInputs::Matching {
                    qubits: args.qubits,
                    depth: args.depth,
                },
                other => return Err(UsageError(format!("unknown mode {other:?}")).into()),
            };
            cmd_plan(inputs, out, cli.json)
        }
        Command::Demo(args) => {
            let mut injections = Vec::new();
            for spec in &args.inject {
                let (round, qubit) = spec
                    .split_once(',')
                    .ok_or_else(|| UsageError(format!("--inject wants ROUND,QUBIT, got {spec:?}")))?;
                let round: u64 = round
                    .trim()
                    .parse()
                    .map_err(|e| UsageError(format!("bad round in {spec:?}: {e}")))?;
                let qubit: usize = qubit
                    .trim()
                    .parse()
                    .map_err(|e| UsageError(format!("bad qubit in {spec:?}: {e}")))?;
                if qubit >= 3 {
                    return Err(UsageError(format!("qubit {qubit} out of range (3 data qubits)")).into());
                }
                injections.push((round, qubit));
            }
            if args.rounds == 0 {
                return Err(UsageError("--rounds must be at least 1".into()).into());
            }
            let case = DemoCase {
                rounds: args.rounds,
                injections,
                seed,
                p_flip: args.p_flip,
                attempts: args.attempts,
                distill_failures: args.distill_failures,
                sim_path: args.sim_mode,
                interpreter: args.interpreter,
            };
            cmd_demo(case, args.exhaustive, out, cli.json)
        }
        Command::Selftest => cmd_selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            if error.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
