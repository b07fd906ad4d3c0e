//! Trace-driven IPC estimation.
//!
//! The model runs an in-order scalar stream and inserts the minimum number
//! of NOPs before each instruction so that every source operand's producer
//! has had its latency honored:
//!
//! ```text
//! NOP[i] = max(0, max over sources m of ( L(producer) - (pos[i-1] + 1 - pos[producer]) ))
//! pos[i] = pos[i-1] + NOP[i] + 1
//! IPC    = T_i / (T_i + T_NOP)
//! ```
//!
//! A producer is the nearest preceding writer of the register; `x0` never
//! produces or constrains. ALU-class producers cost the architecture's
//! dependent initiation interval (the consumer can start as soon as the
//! producing block's slice is done, in a fully block-skewed machine);
//! everything else costs the swept non-ALU latency λ.

use crate::qbsa;
use crate::trace::{Benchmark, InstrClass, TraceInstr};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// The three modeled processor datapaths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    /// Block-skewed unit: dependent latency 8.
    Qbsp,
    /// 32-bit Ladner-Fischer unit: dependent latency 12.
    Lfp32,
    /// 4-bit bit-slice unit: dependent latency 16.
    Bsp4,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 3] = [ProfileKind::Qbsp, ProfileKind::Lfp32, ProfileKind::Bsp4];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Qbsp => "qBSP",
            ProfileKind::Lfp32 => "32LFP",
            ProfileKind::Bsp4 => "4BSP",
        }
    }

    /// Latency charged to a dependent consumer of an ALU-class result.
    pub fn alu_dep_latency(self) -> u32 {
        match self {
            ProfileKind::Qbsp => qbsa::DEP_II,
            ProfileKind::Lfp32 => qbsa::LFA32_DEP_II,
            ProfileKind::Bsp4 => qbsa::BSA4_DEP_II,
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qbsp" => Ok(ProfileKind::Qbsp),
            "32lfp" | "lfp32" => Ok(ProfileKind::Lfp32),
            "4bsp" | "bsp4" => Ok(ProfileKind::Bsp4),
            other => Err(format!(
                "unknown profile `{other}` (expected qbsp, 32lfp or 4bsp)"
            )),
        }
    }
}

/// Latencies used when scheduling one trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingProfile {
    pub kind: ProfileKind,
    pub alu_dep_latency: u32,
    /// Uniform latency of every non-ALU producer (the swept λ).
    pub non_alu_latency: u32,
}

impl TimingProfile {
    pub fn new(kind: ProfileKind, non_alu_latency: u32) -> Result<Self, IpcError> {
        if non_alu_latency == 0 {
            return Err(IpcError::BadLambda(non_alu_latency));
        }
        Ok(TimingProfile {
            kind,
            alu_dep_latency: kind.alu_dep_latency(),
            non_alu_latency,
        })
    }
}

#[derive(Debug, Error)]
pub enum IpcError {
    #[error("non-ALU latency must be at least 1, got {0}")]
    BadLambda(u32),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("comparison keys do not match at row {row}: ({a_bench}, λ={a_lambda}) vs ({b_bench}, λ={b_lambda})")]
    KeyMismatch {
        row: usize,
        a_bench: String,
        a_lambda: u32,
        b_bench: String,
        b_lambda: u32,
    },
    #[error("comparison tables have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Outcome of scheduling one trace under one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleResult {
    /// NOPs inserted before each instruction.
    pub nop: Vec<u64>,
    /// Final position of each instruction in the padded stream (1-based;
    /// the sentinel `pos[0] = 0` is not stored).
    pub pos: Vec<u64>,
    pub total_instructions: u64,
    pub total_nops: u64,
    pub ipc: f64,
}

/// Instructions per cycle of a padded stream.
pub fn ipc(total_instructions: u64, total_nops: u64) -> f64 {
    total_instructions as f64 / (total_instructions + total_nops) as f64
}

/// Schedule a trace: resolve each source to its nearest preceding writer
/// and insert the minimum NOPs that satisfy the producer's latency.
/// Sources with no in-trace producer, and any use of x0, are unconstrained.
pub fn schedule(trace: &[TraceInstr], profile: &TimingProfile) -> Result<ScheduleResult, IpcError> {
    if trace.is_empty() {
        return Err(IpcError::EmptyTrace);
    }
    let mut last_writer: [Option<usize>; 32] = [None; 32];
    let mut nop = Vec::with_capacity(trace.len());
    let mut pos = Vec::with_capacity(trace.len());
    let mut prev_pos = 0u64;
    let mut total_nops = 0u64;

    for (i, instr) in trace.iter().enumerate() {
        let mut needed = 0i64;
        for &src in &instr.sources {
            if src == 0 {
                continue;
            }
            if let Some(producer) = last_writer[src as usize] {
                let latency = match trace[producer].klass {
                    InstrClass::Alu => profile.alu_dep_latency,
                    InstrClass::NonAlu => profile.non_alu_latency,
                } as i64;
                let distance = (prev_pos + 1) as i64 - pos[producer] as i64;
                needed = needed.max(latency - distance);
            }
        }
        let n = needed.max(0) as u64;
        total_nops += n;
        prev_pos = prev_pos + n + 1;
        nop.push(n);
        pos.push(prev_pos);
        if let Some(rd) = instr.rd {
            if rd != 0 {
                last_writer[rd as usize] = Some(i);
            }
        }
    }

    let total_instructions = trace.len() as u64;
    Ok(ScheduleResult {
        nop,
        pos,
        total_instructions,
        total_nops,
        ipc: ipc(total_instructions, total_nops),
    })
}

/// One sweep cell: a benchmark scheduled under one profile and λ.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub benchmark: String,
    pub profile: ProfileKind,
    pub lambda: u32,
    pub total_instructions: u64,
    pub total_nops: u64,
    pub ipc: f64,
}

/// Schedule a benchmark under every (profile, λ) combination.
pub fn sweep(
    benchmark: &Benchmark,
    profiles: &[ProfileKind],
    lambdas: &[u32],
) -> Result<Vec<SweepRow>, IpcError> {
    let mut rows = Vec::with_capacity(profiles.len() * lambdas.len());
    for &kind in profiles {
        for &lambda in lambdas {
            let profile = TimingProfile::new(kind, lambda)?;
            let result = schedule(&benchmark.instructions, &profile)?;
            rows.push(SweepRow {
                benchmark: benchmark.name.clone(),
                profile: kind,
                lambda,
                total_instructions: result.total_instructions,
                total_nops: result.total_nops,
                ipc: result.ipc,
            });
        }
    }
    Ok(rows)
}

/// Sweep CSV: `benchmark,profile,lambda,total_instructions,total_nops,ipc`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("benchmark,profile,lambda,total_instructions,total_nops,ipc\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6}\n",
            r.benchmark, r.profile, r.lambda, r.total_instructions, r.total_nops, r.ipc
        ));
    }
    out
}

/// IPC ratio of two matching sweep rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub benchmark: String,
    pub lambda: u32,
    pub ipc_a: f64,
    pub ipc_b: f64,
    pub ratio: f64,
}

/// Elementwise IPC ratios of two tables with matching (benchmark, λ) keys,
/// plus the arithmetic mean ratio across benchmarks for each λ.
pub fn compare(
    a: &[SweepRow],
    b: &[SweepRow],
) -> Result<(Vec<CompareRow>, Vec<(u32, f64)>), IpcError> {
    if a.len() != b.len() {
        return Err(IpcError::LengthMismatch(a.len(), b.len()));
    }
    let mut rows = Vec::with_capacity(a.len());
    for (row, (ra, rb)) in a.iter().zip(b).enumerate() {
        if ra.benchmark != rb.benchmark || ra.lambda != rb.lambda {
            return Err(IpcError::KeyMismatch {
                row,
                a_bench: ra.benchmark.clone(),
                a_lambda: ra.lambda,
                b_bench: rb.benchmark.clone(),
                b_lambda: rb.lambda,
            });
        }
        rows.push(CompareRow {
            benchmark: ra.benchmark.clone(),
            lambda: ra.lambda,
            ipc_a: ra.ipc,
            ipc_b: rb.ipc,
            ratio: ra.ipc / rb.ipc,
        });
    }
    let mut lambdas: Vec<u32> = rows.iter().map(|r| r.lambda).collect();
    lambdas.sort_unstable();
    lambdas.dedup();
    let means = lambdas
        .into_iter()
        .map(|l| {
            let group: Vec<f64> = rows
                .iter()
                .filter(|r| r.lambda == l)
                .map(|r| r.ratio)
                .collect();
            (l, group.iter().sum::<f64>() / group.len() as f64)
        })
        .collect();
    Ok((rows, means))
}

/// Comparison CSV: `benchmark,lambda,ipc_a,ipc_b,ratio`.
pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("benchmark,lambda,ipc_a,ipc_b,ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6}\n",
            r.benchmark, r.lambda, r.ipc_a, r.ipc_b, r.ratio
        ));
    }
    out
}
