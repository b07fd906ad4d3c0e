//! Command-line front end: generation, simulation, verification and IPC
//! analysis of the block-skewed 32-bit ALU.

use clap::{Args, Parser, Subcommand, ValueEnum};
use qbsa_core::alu::AluOpcode;
use qbsa_core::cli::{
    cmd_ipc, cmd_netlist, cmd_timing, cmd_verify, cmd_wave, CliError, IpcConfig, NetlistConfig,
    OutputFormat, TimingConfig, VerifyConfig, WaveConfig, WaveMode,
};
use qbsa_core::ipc::ProfileKind;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qbsa-sim",
    about = "Cycle-accurate model and IPC analysis of a 32-bit block-skewed pulse-logic ALU",
    version
)]
struct Cli {
    /// Seed for all randomized work.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the generated hardware against the functional reference.
    Verify(VerifyArgs),
    /// Measure latency and initiation intervals; assert {15, 8, 1}.
    Timing(TimingArgs),
    /// Estimate IPC over instruction traces under the three profiles.
    Ipc(IpcArgs),
    /// Capture a per-cycle waveform CSV for a short scenario.
    Wave(WaveArgs),
    /// Emit or balance-check netlist JSON.
    Netlist(NetlistArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Randomized 32-bit vectors per operation.
    #[arg(long, default_value_t = 100_000)]
    vectors: usize,
    /// Verify this netlist JSON instead of the generated unit.
    #[arg(long)]
    netlist: Option<PathBuf>,
}

#[derive(Args)]
struct TimingArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IpcArgs {
    /// Trace files (canonical format, or Spike commit logs with --spike).
    #[arg(long = "trace", required = true)]
    traces: Vec<PathBuf>,
    /// Treat inputs as Spike commit logs.
    #[arg(long)]
    spike: bool,
    /// Comma-separated profiles: qbsp, 32lfp, 4bsp.
    #[arg(long, default_value = "qbsp,32lfp,4bsp", value_parser = parse_profiles)]
    profiles: std::vec::Vec<ProfileKind>,
    /// Non-ALU latency sweep: `1..10`, a single value, or a comma list.
    #[arg(long, default_value = "1..10", value_parser = parse_lambdas)]
    lambda: std::vec::Vec<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit a ratio CSV for a profile pair, e.g. `qbsp,32lfp`.
    #[arg(long, value_parser = parse_profile_pair)]
    compare: Option<(ProfileKind, ProfileKind)>,
    #[arg(long)]
    compare_out: Option<PathBuf>,
}

#[derive(Args)]
struct WaveArgs {
    /// Operation: add, sub, slt, eq, and, or, xor, nor.
    #[arg(long)]
    op: AluOpcode,
    /// Operand A values (hex 0x... or decimal).
    #[arg(long = "a", required = true, value_parser = parse_u32)]
    a: Vec<u32>,
    /// Operand B values.
    #[arg(long = "b", required = true, value_parser = parse_u32)]
    b: Vec<u32>,
    /// Chain the operations through the feedback muxes (one issue every 8
    /// cycles) instead of streaming them independently every cycle.
    #[arg(long)]
    dependent: bool,
    /// Number of cycles to capture.
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NetlistArgs {
    /// Write the generated 32-bit unit to this JSON file.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Balance-check an existing netlist JSON file instead.
    #[arg(long)]
    check: Option<PathBuf>,
}

fn parse_u32(s: &str) -> Result<u32, String> {
    let t = s.trim();
    let parsed = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u32::from_str_radix(hex, 16)
    } else {
        t.parse()
    };
    parsed.map_err(|e| format!("bad 32-bit value `{s}`: {e}"))
}

fn parse_profiles(s: &str) -> Result<Vec<ProfileKind>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let kind: ProfileKind = part.trim().parse()?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err("no profiles selected".into());
    }
    Ok(out)
}

fn parse_profile_pair(s: &str) -> Result<(ProfileKind, ProfileKind), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated profiles, got `{s}`"));
    }
    Ok((parts[0].parse()?, parts[1].parse()?))
}

fn parse_lambdas(s: &str) -> Result<Vec<u32>, String> {
    let bad = |why: &str| format!("bad lambda range `{s}`: {why}");
    let parse_one = |t: &str| t.trim().parse::<u32>().map_err(|e| bad(&e.to_string()));
    let values: Vec<u32> = if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (parse_one(lo)?, parse_one(hi)?);
        if lo > hi {
            return Err(bad("start exceeds end"));
        }
        (lo..=hi).collect()
    } else if s.contains(',') {
        s.split(',').map(parse_one).collect::<Result<_, _>>()?
    } else {
        vec![parse_one(s)?]
    };
    if values.contains(&0) {
        return Err(bad("latencies start at 1"));
    }
    Ok(values)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Verify(args) => cmd_verify(&VerifyConfig {
            seed: cli.seed,
            vectors: args.vectors,
            netlist: args.netlist,
        }),
        Command::Timing(args) => cmd_timing(&TimingConfig {
            format: args.format.into(),
            out: args.out,
        }),
        Command::Ipc(args) => cmd_ipc(&IpcConfig {
            traces: args.traces,
            spike: args.spike,
            profiles: args.profiles,
            lambdas: args.lambda,
            format: args.format.into(),
            out: args.out,
            compare: args.compare,
            compare_out: args.compare_out,
        }),
        Command::Wave(args) => cmd_wave(&WaveConfig {
            op: args.op,
            a: args.a,
            b: args.b,
            mode: if args.dependent {
                WaveMode::Dependent
            } else {
                WaveMode::Independent
            },
            cycles: args.cycles,
            out: args.out,
        }),
        Command::Netlist(args) => cmd_netlist(&NetlistConfig {
            emit: args.emit,
            check: args.check,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qbsa-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
