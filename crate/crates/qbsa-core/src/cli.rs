//! Implementations of the `qbsa-sim` subcommands.
//!
//! Exit codes: 0 on success, 1 when a verification or timing assertion
//! fails, 2 for usage and I/O errors. All output is deterministic for a
//! fixed seed.

use crate::alu::AluOpcode;
use crate::ipc::{self, CompareRow, ProfileKind, SweepRow};
use crate::netlist::Netlist;
use crate::qbsa::{
    self, build_block4, build_qbsa32, check_block_exhaustive, check_qbsa32_random,
    qbsa32_from_netlist, timing_report, OpIssue, QbsaError,
};
use crate::sim::simulate_words;
use crate::trace::{self, Benchmark};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    /// Usage or I/O problem (exit 2).
    Usage(String),
    /// Verification or assertion failure (exit 1).
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<QbsaError> for CliError {
    fn from(e: QbsaError) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<ipc::IpcError> for CliError {
    fn from(e: ipc::IpcError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Write to the file when a path is given, otherwise to stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

// --- verify -----------------------------------------------------------------

pub struct VerifyConfig {
    pub seed: u64,
    pub vectors: usize,
    /// Verify this netlist JSON instead of the generated unit.
    pub netlist: Option<PathBuf>,
}

/// Exhaustive block equivalence, randomized 32-bit equivalence and balance
/// checks. Any mismatch prints a minimal counterexample and fails.
pub fn cmd_verify(cfg: &VerifyConfig) -> Result<(), CliError> {
    let mut failed = false;

    if cfg.netlist.is_none() {
        let block = build_block4(true)?;
        let (total, mismatches) = check_block_exhaustive(&block);
        println!(
            "block exhaustive: {total} vectors, {} mismatches",
            mismatches.len()
        );
        if let Some(m) = mismatches.first() {
            println!("FAIL {m}");
            failed = true;
        }
    }

    let q = match &cfg.netlist {
        Some(path) => {
            let netlist = Netlist::from_json(&read_file(path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            qbsa32_from_netlist(netlist)?
        }
        None => build_qbsa32()?,
    };

    let report = q.netlist.check_path_balanced();
    let loop_lengths: Vec<u32> = report.feedback_loops.iter().map(|l| l.length).collect();
    println!(
        "balance: {} violations, {} feedback loops of length {}",
        report.violations.len(),
        report.feedback_loops.len(),
        loop_lengths.first().copied().unwrap_or(0),
    );
    if !report.is_balanced() || loop_lengths.iter().any(|&l| l != qbsa::DEP_II) {
        failed = true;
    }

    let (total, mismatches) = check_qbsa32_random(&q, cfg.vectors, cfg.seed);
    println!(
        "32-bit randomized: {total} vectors (seed {}), {} mismatches",
        cfg.seed,
        mismatches.len()
    );
    if let Some(m) = mismatches.first() {
        println!("FAIL {m}");
        failed = true;
    }

    if failed {
        Err(CliError::Failure("verification failed".into()))
    } else {
        println!("verify: OK");
        Ok(())
    }
}

// --- timing ------------------------------------------------------------------

pub struct TimingConfig {
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

/// Measure latency and initiation intervals by simulation and assert the
/// architectural contract {15, 8, 1}.
pub fn cmd_timing(cfg: &TimingConfig) -> Result<(), CliError> {
    let q = build_qbsa32()?;
    let report = timing_report(&q)?;

    let text = match cfg.format {
        OutputFormat::Table => format!("{report}\n"),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("metric,value\n");
            let _ = writeln!(s, "latency,{}", report.latency);
            let _ = writeln!(s, "ii_dep,{}", report.ii_dep);
            let _ = writeln!(s, "ii_indep,{}", report.ii_indep);
            let _ = writeln!(s, "ratio_32lfa,{}", report.ratio_32lfa);
            let _ = writeln!(s, "ratio_4bsa,{}", report.ratio_4bsa);
            for (k, c) in report.per_block_cycles.iter().enumerate() {
                let _ = writeln!(s, "block{k}_sum_cycle,{c}");
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)?;

    let expected = (
        qbsa::PIPELINE_LATENCY,
        qbsa::DEP_II,
        qbsa::INDEP_II,
        1.5f64,
        2.0f64,
    );
    let got = (
        report.latency,
        report.ii_dep,
        report.ii_indep,
        report.ratio_32lfa,
        report.ratio_4bsa,
    );
    if got != expected {
        return Err(CliError::Failure(format!(
            "timing contract violated: got {got:?}, expected {expected:?}"
        )));
    }
    Ok(())
}

// --- ipc ---------------------------------------------------------------------

pub struct IpcConfig {
    pub traces: Vec<PathBuf>,
    pub spike: bool,
    pub profiles: Vec<ProfileKind>,
    pub lambdas: Vec<u32>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Optional ratio table between two profiles.
    pub compare: Option<(ProfileKind, ProfileKind)>,
    pub compare_out: Option<PathBuf>,
}

fn load_benchmark(path: &Path, spike: bool) -> Result<Benchmark, CliError> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let text = read_file(path)?;
    if spike {
        let parsed = trace::parse_spike_log(&name, &text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if parsed.skipped_lines > 0 {
            eprintln!(
                "{}: skipped {} non-instruction lines",
                path.display(),
                parsed.skipped_lines
            );
        }
        Ok(parsed.benchmark)
    } else {
        trace::parse_canonical(&name, &text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

fn sweep_json(rows: &[SweepRow]) -> String {
    let items: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "benchmark": r.benchmark,
                "profile": r.profile.name(),
                "lambda": r.lambda,
                "total_instructions": r.total_instructions,
                "total_nops": r.total_nops,
                "ipc": r.ipc,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&items).expect("rows serialize");
    s.push('\n');
    s
}

/// Ratio block for the table view: title, per-row ratios, per-λ means.
type RatioTable = (String, Vec<CompareRow>, Vec<(u32, f64)>);

fn sweep_table(rows: &[SweepRow], ratios: &[RatioTable]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:<7} {:>3} {:>13} {:>11} {:>9}",
        "benchmark", "profile", "λ", "instructions", "nops", "ipc"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<16} {:<7} {:>3} {:>13} {:>11} {:>9.6}",
            r.benchmark,
            r.profile.name(),
            r.lambda,
            r.total_instructions,
            r.total_nops,
            r.ipc
        );
    }
    for (title, _, means) in ratios {
        let _ = writeln!(s, "\n{title} (mean across benchmarks)");
        let _ = writeln!(s, "{:>3} {:>8}", "λ", "ratio");
        for (lambda, mean) in means {
            let _ = writeln!(s, "{lambda:>3} {mean:>8.4}");
        }
    }
    s
}

/// Sweep the selected profiles and non-ALU latencies over each trace.
pub fn cmd_ipc(cfg: &IpcConfig) -> Result<(), CliError> {
    if cfg.traces.is_empty() {
        return Err(CliError::Usage("ipc needs at least one --trace".into()));
    }
    let mut rows = Vec::new();
    for path in &cfg.traces {
        let bench = load_benchmark(path, cfg.spike)?;
        rows.extend(ipc::sweep(&bench, &cfg.profiles, &cfg.lambdas)?);
    }

    // Cross-profile ratio tables for the table view: qBSP against each
    // other selected profile.
    let per_profile = |kind: ProfileKind| -> Vec<SweepRow> {
        rows.iter().filter(|r| r.profile == kind).cloned().collect()
    };
    let mut ratios: Vec<RatioTable> = Vec::new();
    if cfg.profiles.contains(&ProfileKind::Qbsp) {
        for other in [ProfileKind::Lfp32, ProfileKind::Bsp4] {
            if cfg.profiles.contains(&other) {
                let (rows, means) =
                    ipc::compare(&per_profile(ProfileKind::Qbsp), &per_profile(other))?;
                ratios.push((format!("qBSP / {}", other.name()), rows, means));
            }
        }
    }

    let text = match cfg.format {
        OutputFormat::Csv => ipc::sweep_csv(&rows),
        OutputFormat::Json => sweep_json(&rows),
        OutputFormat::Table => sweep_table(&rows, &ratios),
    };
    emit(cfg.out.as_deref(), &text)?;

    if let Some((a, b)) = cfg.compare {
        let (cmp, _) = ipc::compare(&per_profile(a), &per_profile(b))?;
        let csv = ipc::compare_csv(&cmp);
        emit(cfg.compare_out.as_deref(), &csv)?;
    }
    Ok(())
}

// --- wave --------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveMode {
    /// One operation per (a, b) pair, issued together on cycle 0 upward
    /// every cycle.
    Independent,
    /// First pair starts the chain; every further b is added to the
    /// previous result through the feedback muxes, one issue every 8.
    Dependent,
}

pub struct WaveConfig {
    pub op: AluOpcode,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub mode: WaveMode,
    pub cycles: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Per-cycle CSV capture of all primary outputs for a short scenario.
pub fn cmd_wave(cfg: &WaveConfig) -> Result<(), CliError> {
    if cfg.a.is_empty() || cfg.b.is_empty() {
        return Err(CliError::Usage(
            "wave needs at least one --a and --b".into(),
        ));
    }
    if cfg.mode == WaveMode::Independent && cfg.a.len() != cfg.b.len() {
        return Err(CliError::Usage(format!(
            "independent wave needs matching operand counts, got {} a and {} b",
            cfg.a.len(),
            cfg.b.len()
        )));
    }
    let q = build_qbsa32()?;
    let issues: Vec<OpIssue> = match cfg.mode {
        WaveMode::Independent => cfg
            .a
            .iter()
            .zip(&cfg.b)
            .enumerate()
            .map(|(i, (&a, &b))| OpIssue {
                cycle: i,
                op: cfg.op,
                a,
                b,
                use_feedback: false,
            })
            .collect(),
        WaveMode::Dependent => cfg
            .b
            .iter()
            .enumerate()
            .map(|(i, &b)| OpIssue {
                cycle: i * qbsa::DEP_II as usize,
                op: cfg.op,
                a: cfg.a[0],
                b,
                use_feedback: i > 0,
            })
            .collect(),
    };
    let last = issues.last().map(|i| i.cycle).unwrap_or(0);
    let horizon = cfg
        .cycles
        .unwrap_or(last + qbsa::PIPELINE_LATENCY as usize + 5);
    if horizon <= last {
        return Err(CliError::Usage(format!(
            "--cycles {horizon} ends before the last issue at {last}"
        )));
    }
    let stim = q.stimulus_for(&issues, horizon);
    let wave = simulate_words(&q.netlist, &stim, horizon).map_err(QbsaError::from)?;
    emit(cfg.out.as_deref(), &wave.to_csv())
}

// --- netlist -----------------------------------------------------------------

pub struct NetlistConfig {
    pub emit: Option<PathBuf>,
    pub check: Option<PathBuf>,
}

/// Emit the generated unit as JSON and/or balance-check a netlist file.
pub fn cmd_netlist(cfg: &NetlistConfig) -> Result<(), CliError> {
    if let Some(path) = &cfg.check {
        let netlist = Netlist::from_json(&read_file(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let report = netlist.check_path_balanced();
        println!(
            "{}: {} cells, {} balance violations, {} feedback loops",
            path.display(),
            netlist.cell_count(),
            report.violations.len(),
            report.feedback_loops.len()
        );
        for v in report.violations.iter().take(8) {
            println!("  unbalanced {}: fanin depths {:?}", v.cell, v.fanin_depths);
        }
        for l in report.feedback_loops.iter().take(8) {
            println!("  loop {} -> {} length {}", l.from, l.to, l.length);
        }
        if !report.is_balanced() {
            return Err(CliError::Failure("netlist is unbalanced".into()));
        }
        return Ok(());
    }

    let q = build_qbsa32()?;
    match &cfg.emit {
        Some(path) => write_file(path, &q.netlist.to_json())?,
        None => {
            println!(
                "qbsa32: {} cells, latency {}, dependent ii {}, {} feedback loops",
                q.netlist.cell_count(),
                q.latency,
                q.loop_length,
                32
            );
        }
    }
    Ok(())
}
