//! Generator for the block-skewed 32-bit ALU.
//!
//! The unit is eight 4-bit Sklansky blocks. Block `k` receives its operand
//! and control bits `k` cycles after block 0, and each block folds its
//! result back into its own operand-A multiplexer, so a data-dependent
//! follow-up can start as soon as that block's own nibble is done rather
//! than waiting for the full 32-bit result.
//!
//! Per-block stage plan, relative to the cycle the block's operands reach
//! its input multiplexer (depth `d`):
//!
//! | depth | signals |
//! |-------|---------|
//! | d+1   | operand mux / B alignment register |
//! | d+2   | conditioned operands `a⊕cmpl_a`, `b⊕cmpl_b` (plus arith-gated copies) |
//! | d+3   | propagate `p`, AND term, suppressed generate `g = a'·b'·op_arith` |
//! | d+4   | prefix level 1 (spans `[1:0]`, `[3:2]`); gated AND/XOR result terms |
//! | d+5   | prefix level 2 (spans `[2:0]`, `[3:0]`); logic half of the result |
//! | d+6   | carry injection (carry-in consumed at d+5) → `c_out_early` |
//! | d+7   | carry gating by `op_arith`; registered `c_out` |
//! | d+8   | result bits, fed back to the operand mux |
//!
//! Generate and propagate of one span are mutually exclusive, so each
//! prefix combine and each carry injection is a single clocked MUX2
//! (`span_propagate ? lower_generate_or_carry : span_generate`). That keeps
//! the feedback loop at 8 stages: 7 skew steps + 8 stages = 15 cycles to the
//! first full result, a dependent result every 8 cycles, and an independent
//! issue every cycle. The carry of a non-first block arrives exactly 5
//! cycles after its A/B inputs, which is what lets `c_out_early` of block k
//! feed block k+1 with no alignment registers at all.

use crate::alu::{control_word, AluOpcode};
use crate::netlist::{CellId, CellKind, Netlist, NetlistError};
use crate::oracle;
use crate::sim::{simulate_words, Stimulus, WaveCapture};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Cycles from issuing an operation to the full 32-bit result.
pub const PIPELINE_LATENCY: u32 = 15;
/// Cycles between the starts of two data-dependent operations.
pub const DEP_II: u32 = 8;
/// Cycles between the starts of two independent operations.
pub const INDEP_II: u32 = 1;
/// Cycles after a block's A/B inputs at which its carry-in arrives.
pub const CARRY_ARRIVAL_OFFSET: u32 = 5;
/// Dependent initiation interval of the 32-bit Ladner-Fischer reference
/// (its stage count plus one mux stage).
pub const LFA32_DEP_II: u32 = 12;
/// Dependent initiation interval of the 4-bit bit-slice reference.
pub const BSA4_DEP_II: u32 = 16;

#[derive(Debug, Error)]
pub enum QbsaError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("stage plan violates the timing contract: {0}")]
    StagePlan(String),
    #[error("netlist is missing port `{0}`")]
    MissingPort(String),
}

/// Shared DFF chain delivering one signal at arbitrary depths.
struct DelayChain {
    source: CellId,
    base_depth: u32,
    taps: Vec<CellId>,
}

impl DelayChain {
    fn new(source: CellId, base_depth: u32) -> Self {
        DelayChain {
            source,
            base_depth,
            taps: Vec::new(),
        }
    }

    fn tap(&mut self, n: &mut Netlist, depth: u32) -> Result<CellId, NetlistError> {
        assert!(
            depth >= self.base_depth,
            "cannot tap earlier than the source"
        );
        let need = (depth - self.base_depth) as usize;
        while self.taps.len() < need {
            let prev = self.taps.last().copied().unwrap_or(self.source);
            self.taps.push(n.add_cell(CellKind::Dff, &[prev])?);
        }
        Ok(if need == 0 {
            self.source
        } else {
            self.taps[need - 1]
        })
    }
}

/// Everything one block consumes, already delivered at the right depth.
struct BlockInputs {
    /// Operand bits and feedback select at the block's arrival depth `d`.
    a: [CellId; 4],
    b: [CellId; 4],
    fb_sel: CellId,
    /// Carry-in at depth `d + 5`.
    cin: CellId,
    /// Control taps: complement bits and their arith-gated forms at `d+1`,
    /// result gates at `d+3`, carry gate at `d+6`.
    cmpl_a: CellId,
    cmpl_b: CellId,
    ca_arith: CellId,
    nca_arith: CellId,
    cb_arith: CellId,
    ncb_arith: CellId,
    op_and: CellId,
    op_xor: CellId,
    op_arith: CellId,
}

struct BlockCells {
    s: [CellId; 4],
    c_out_early: CellId,
    c_out: CellId,
}

/// Emit one 4-bit Sklansky block. The caller provides fanins at the depths
/// listed on [`BlockInputs`]; the result bits come out 8 stages after the
/// operand mux and are wired back into it.
fn add_block(n: &mut Netlist, io: &BlockInputs) -> Result<BlockCells, NetlistError> {
    use CellKind::*;

    // Stage d+1: operand A mux (feedback leg closed at the end) and B
    // alignment register.
    let mut a_mux = [CellId(0); 4];
    let mut b_reg = [CellId(0); 4];
    for i in 0..4 {
        a_mux[i] = n.add_cell(Mux2, &[io.a[i], io.a[i], io.fb_sel])?;
        b_reg[i] = n.add_cell(Dff, &[io.b[i]])?;
    }

    // Stage d+2: conditioning. The gated copies fold the generate
    // suppression into the conditioning itself: for operand bit x,
    // `mux(x, cmpl·arith, !cmpl·arith) = (x ⊕ cmpl) · arith`.
    let mut a_cond = [CellId(0); 4];
    let mut b_cond = [CellId(0); 4];
    let mut a_gate = [CellId(0); 4];
    let mut b_gate = [CellId(0); 4];
    for i in 0..4 {
        a_cond[i] = n.add_cell(Xor2, &[a_mux[i], io.cmpl_a])?;
        b_cond[i] = n.add_cell(Xor2, &[b_reg[i], io.cmpl_b])?;
        a_gate[i] = n.add_cell(Mux2, &[io.ca_arith, io.nca_arith, a_mux[i]])?;
        b_gate[i] = n.add_cell(Mux2, &[io.cb_arith, io.ncb_arith, b_reg[i]])?;
    }

    // Stage d+3: propagate, AND term, suppressed generate.
    let mut p = [CellId(0); 4];
    let mut and = [CellId(0); 4];
    let mut g = [CellId(0); 4];
    for i in 0..4 {
        p[i] = n.add_cell(Xor2, &[a_cond[i], b_cond[i]])?;
        and[i] = n.add_cell(And2, &[a_cond[i], b_cond[i]])?;
        g[i] = n.add_cell(And2, &[a_gate[i], b_gate[i]])?;
    }

    // Stage d+4: prefix level 1. p and g of one bit are mutually exclusive,
    // so the generate combine g_hi | p_hi·g_lo collapses to a mux.
    let g10 = n.add_cell(Mux2, &[g[1], g[0], p[1]])?;
    let g32 = n.add_cell(Mux2, &[g[3], g[2], p[3]])?;
    let p10 = n.add_cell(And2, &[p[1], p[0]])?;
    let p32 = n.add_cell(And2, &[p[3], p[2]])?;
    let p2_d4 = n.add_cell(Dff, &[p[2]])?;
    let g2_d4 = n.add_cell(Dff, &[g[2]])?;
    let p0_d4 = n.add_cell(Dff, &[p[0]])?;
    let g0_d4 = n.add_cell(Dff, &[g[0]])?;
    let mut t_and = [CellId(0); 4];
    let mut t_xor = [CellId(0); 4];
    for i in 0..4 {
        t_and[i] = n.add_cell(And2, &[and[i], io.op_and])?;
        t_xor[i] = n.add_cell(And2, &[p[i], io.op_xor])?;
    }

    // Stage d+5: prefix level 2 and the logic half of the result.
    let g20 = n.add_cell(Mux2, &[g2_d4, g10, p2_d4])?;
    let g30 = n.add_cell(Mux2, &[g32, g10, p32])?;
    let p20 = n.add_cell(And2, &[p2_d4, p10])?;
    let p30 = n.add_cell(And2, &[p32, p10])?;
    let p0_d5 = n.add_cell(Dff, &[p0_d4])?;
    let g0_d5 = n.add_cell(Dff, &[g0_d4])?;
    let p10_d5 = n.add_cell(Dff, &[p10])?;
    let g10_d5 = n.add_cell(Dff, &[g10])?;
    let mut q = [CellId(0); 4];
    for i in 0..4 {
        q[i] = n.add_cell(Xor2, &[t_and[i], t_xor[i]])?;
    }

    // Stage d+6: carry injection, consuming the carry-in at depth d+5.
    // Span generate and span propagate are mutually exclusive, so
    // G | P·cin is again a single mux. c4 is the early carry-out.
    let c1 = n.add_cell(Mux2, &[g0_d5, io.cin, p0_d5])?;
    let c2 = n.add_cell(Mux2, &[g10_d5, io.cin, p10_d5])?;
    let c3 = n.add_cell(Mux2, &[g20, io.cin, p20])?;
    let c4 = n.add_cell(Mux2, &[g30, io.cin, p30])?;
    let cin_d6 = n.add_cell(Dff, &[io.cin])?;
    let mut q_d6 = [CellId(0); 4];
    for i in 0..4 {
        q_d6[i] = n.add_cell(Dff, &[q[i]])?;
    }

    // Stage d+7: gate carries into the arithmetic result; register the
    // final carry-out one stage after the early one.
    let carries = [cin_d6, c1, c2, c3];
    let mut t_carry = [CellId(0); 4];
    for i in 0..4 {
        t_carry[i] = n.add_cell(And2, &[io.op_arith, carries[i]])?;
    }
    let mut q_d7 = [CellId(0); 4];
    for i in 0..4 {
        q_d7[i] = n.add_cell(Dff, &[q_d6[i]])?;
    }
    let c_out = n.add_cell(Dff, &[c4])?;

    // Stage d+8: result bits; close the per-bit feedback loops.
    let mut s = [CellId(0); 4];
    for i in 0..4 {
        s[i] = n.add_cell(Xor2, &[q_d7[i], t_carry[i]])?;
        n.connect_feedback(a_mux[i], 1, s[i])?;
    }

    Ok(BlockCells {
        s,
        c_out_early: c4,
        c_out,
    })
}

/// Control signal names in port order.
pub const CONTROL_PORTS: [&str; 6] = ["op_arith", "op_and", "op_xor", "cmpl_a", "cmpl_b", "c_in"];

/// Shared control preparation: raw chains for each control signal plus the
/// four arith-gated complement forms used by the conditioning muxes.
struct ControlPrep {
    op_arith: DelayChain,
    op_and: DelayChain,
    op_xor: DelayChain,
    cmpl_a: DelayChain,
    cmpl_b: DelayChain,
    c_in: DelayChain,
    ca_arith: DelayChain,
    nca_arith: DelayChain,
    cb_arith: DelayChain,
    ncb_arith: DelayChain,
}

impl ControlPrep {
    fn new(n: &mut Netlist) -> Result<Self, NetlistError> {
        let op_arith = n.add_input("op_arith")?;
        let op_and = n.add_input("op_and")?;
        let op_xor = n.add_input("op_xor")?;
        let cmpl_a = n.add_input("cmpl_a")?;
        let cmpl_b = n.add_input("cmpl_b")?;
        let c_in = n.add_input("c_in")?;
        let zero = n.add_cell(CellKind::Const0, &[])?;
        // cmpl·arith and !cmpl·arith, one gate deep each.
        let ca_arith = n.add_cell(CellKind::And2, &[cmpl_a, op_arith])?;
        let nca_arith = n.add_cell(CellKind::Mux2, &[op_arith, zero, cmpl_a])?;
        let cb_arith = n.add_cell(CellKind::And2, &[cmpl_b, op_arith])?;
        let ncb_arith = n.add_cell(CellKind::Mux2, &[op_arith, zero, cmpl_b])?;
        Ok(ControlPrep {
            op_arith: DelayChain::new(op_arith, 0),
            op_and: DelayChain::new(op_and, 0),
            op_xor: DelayChain::new(op_xor, 0),
            cmpl_a: DelayChain::new(cmpl_a, 0),
            cmpl_b: DelayChain::new(cmpl_b, 0),
            c_in: DelayChain::new(c_in, 0),
            ca_arith: DelayChain::new(ca_arith, 1),
            nca_arith: DelayChain::new(nca_arith, 1),
            cb_arith: DelayChain::new(cb_arith, 1),
            ncb_arith: DelayChain::new(ncb_arith, 1),
        })
    }

    /// Control taps for a block whose operands arrive at depth `d`.
    fn block_taps(&mut self, n: &mut Netlist, d: u32) -> Result<[CellId; 9], NetlistError> {
        Ok([
            self.cmpl_a.tap(n, d + 1)?,
            self.cmpl_b.tap(n, d + 1)?,
            self.ca_arith.tap(n, d + 1)?,
            self.nca_arith.tap(n, d + 1)?,
            self.cb_arith.tap(n, d + 1)?,
            self.ncb_arith.tap(n, d + 1)?,
            self.op_and.tap(n, d + 3)?,
            self.op_xor.tap(n, d + 3)?,
            self.op_arith.tap(n, d + 6)?,
        ])
    }
}

/// A standalone 4-bit block with its observable timing offsets.
///
/// Ports: inputs `a0..a3`, `b0..b3`, `c_in`, `fb_sel` and the five logic
/// control bits; outputs `s0..s3`, `c_out_early`, `c_out`.
///
/// Standalone blocks carry transport registers on the carry input so that
/// the port is presented together with A and B; inside the composed 32-bit
/// unit, non-first blocks instead receive the previous block's early carry
/// directly, five stages deep. `carry_arrival_offset` records which role
/// the block was built for.
pub struct Block4 {
    pub netlist: Netlist,
    pub first_block: bool,
    /// Cycles after a/b at which the carry value reaches this block from
    /// outside: 0 when the port feeds transport registers (first block),
    /// 5 when deployed against an upstream early-carry wire.
    pub carry_arrival_offset: u32,
    /// Relative cycle at which the sum bits appear.
    pub s_ready: u32,
    pub c_out_early_ready: u32,
    pub c_out_ready: u32,
}

/// Build one 4-bit Sklansky ALU block as its own netlist.
pub fn build_block4(first_block: bool) -> Result<Block4, QbsaError> {
    let mut n = Netlist::new();
    let mut a = [CellId(0); 4];
    let mut b = [CellId(0); 4];
    for i in 0..4 {
        a[i] = n.add_input(&format!("a{i}"))?;
    }
    for i in 0..4 {
        b[i] = n.add_input(&format!("b{i}"))?;
    }
    let mut ctrl = ControlPrep::new(&mut n)?;
    let fb_sel = n.add_input("fb_sel")?;

    let cin = ctrl.c_in.tap(&mut n, CARRY_ARRIVAL_OFFSET)?;
    let [cmpl_a, cmpl_b, ca_arith, nca_arith, cb_arith, ncb_arith, op_and, op_xor, op_arith] =
        ctrl.block_taps(&mut n, 0)?;
    let io = BlockInputs {
        a,
        b,
        fb_sel,
        cin,
        cmpl_a,
        cmpl_b,
        ca_arith,
        nca_arith,
        cb_arith,
        ncb_arith,
        op_and,
        op_xor,
        op_arith,
    };
    let cells = add_block(&mut n, &io)?;
    for i in 0..4 {
        n.set_output(&format!("s{i}"), cells.s[i])?;
    }
    n.set_output("c_out_early", cells.c_out_early)?;
    n.set_output("c_out", cells.c_out)?;

    let report = n.check_path_balanced();
    if !report.is_balanced() {
        return Err(QbsaError::StagePlan(format!(
            "block is unbalanced at {} cells",
            report.violations.len()
        )));
    }
    let s_ready = n.registered_depth(cells.s[0])?;
    if s_ready != DEP_II {
        return Err(QbsaError::StagePlan(format!(
            "block sum appears at stage {s_ready}, expected {DEP_II}"
        )));
    }
    Ok(Block4 {
        netlist: n,
        first_block,
        carry_arrival_offset: if first_block { 0 } else { CARRY_ARRIVAL_OFFSET },
        s_ready,
        c_out_early_ready: CARRY_ARRIVAL_OFFSET + 1,
        c_out_ready: CARRY_ARRIVAL_OFFSET + 2,
    })
}

/// The composed 32-bit block-skewed unit.
///
/// Inputs: `a0..a31`, `b0..b31`, the six control bits, `fb_sel0..fb_sel7`
/// (one feedback select per block, driven by the harness). Outputs:
/// `s0..s31`, `c_out_early`/`c_out` (the MSB block's carry pair) and
/// per-block probes `c_out_early_b0..b7`.
pub struct Qbsa32 {
    pub netlist: Netlist,
    /// Cycle offset, relative to issue, at which each block's sum nibble is
    /// valid: 8 for block 0 up to 15 for block 7.
    pub per_block_ready: [u32; 8],
    /// Arrival of each block's carry-in relative to its own a/b inputs.
    pub carry_offsets: [u32; 8],
    /// Offset at which the full 32-bit result is available.
    pub latency: u32,
    /// Length of every feedback loop in clocked cells.
    pub loop_length: u32,
    pub c_out_early_ready: u32,
    pub c_out_ready: u32,
}

/// Build the 32-bit unit: eight blocks, one cycle of input skew per block,
/// early-carry chaining, control distribution, per-block feedback muxes.
pub fn build_qbsa32() -> Result<Qbsa32, QbsaError> {
    let mut n = Netlist::new();
    let mut a_in = [CellId(0); 32];
    let mut b_in = [CellId(0); 32];
    for i in 0..32 {
        a_in[i] = n.add_input(&format!("a{i}"))?;
    }
    for i in 0..32 {
        b_in[i] = n.add_input(&format!("b{i}"))?;
    }
    let mut ctrl = ControlPrep::new(&mut n)?;
    let mut fb_sel_in = [CellId(0); 8];
    for k in 0..8 {
        fb_sel_in[k] = n.add_input(&format!("fb_sel{k}"))?;
    }

    let mut s_cells = [CellId(0); 32];
    let mut early_cells = [CellId(0); 8];
    let mut cout_cells = [CellId(0); 8];
    let mut cin_net = ctrl.c_in.tap(&mut n, CARRY_ARRIVAL_OFFSET)?;

    for k in 0..8u32 {
        // One cycle of skew per block on operands and feedback select.
        let mut a = [CellId(0); 4];
        let mut b = [CellId(0); 4];
        for i in 0..4 {
            a[i] = n.delay(a_in[(4 * k as usize) + i], k)?;
            b[i] = n.delay(b_in[(4 * k as usize) + i], k)?;
        }
        let fb_sel = n.delay(fb_sel_in[k as usize], k)?;
        let [cmpl_a, cmpl_b, ca_arith, nca_arith, cb_arith, ncb_arith, op_and, op_xor, op_arith] =
            ctrl.block_taps(&mut n, k)?;
        let io = BlockInputs {
            a,
            b,
            fb_sel,
            cin: cin_net,
            cmpl_a,
            cmpl_b,
            ca_arith,
            nca_arith,
            cb_arith,
            ncb_arith,
            op_and,
            op_xor,
            op_arith,
        };
        let cells = add_block(&mut n, &io)?;
        for i in 0..4 {
            s_cells[(4 * k as usize) + i] = cells.s[i];
        }
        early_cells[k as usize] = cells.c_out_early;
        cout_cells[k as usize] = cells.c_out;
        // The early carry of block k lands at depth k+6 = (k+1)+5, which is
        // exactly where block k+1's injection wants it: no alignment DFFs.
        cin_net = cells.c_out_early;
    }

    for i in 0..32 {
        n.set_output(&format!("s{i}"), s_cells[i])?;
    }
    n.set_output("c_out", cout_cells[7])?;
    n.set_output("c_out_early", early_cells[7])?;
    for k in 0..8 {
        n.set_output(&format!("c_out_early_b{k}"), early_cells[k])?;
    }

    validate_qbsa32(n)
}

/// Adopt an existing netlist (typically reloaded from JSON) as a Qbsa32,
/// recomputing the timing metadata from its port depths. The timing
/// contract is enforced the same way as after generation.
pub fn qbsa32_from_netlist(netlist: Netlist) -> Result<Qbsa32, QbsaError> {
    validate_qbsa32(netlist)
}

fn validate_qbsa32(n: Netlist) -> Result<Qbsa32, QbsaError> {
    let port = |name: &str| -> Result<CellId, QbsaError> {
        n.output_id(name)
            .ok_or_else(|| QbsaError::MissingPort(name.to_string()))
    };
    for name in CONTROL_PORTS {
        if n.input_id(name).is_none() {
            return Err(QbsaError::MissingPort(name.to_string()));
        }
    }
    for i in 0..32 {
        for name in [format!("a{i}"), format!("b{i}")] {
            if n.input_id(&name).is_none() {
                return Err(QbsaError::MissingPort(name));
            }
        }
    }

    let report = n.check_path_balanced();
    if !report.is_balanced() {
        return Err(QbsaError::StagePlan(format!(
            "composed netlist unbalanced at {} cells, first: {:?}",
            report.violations.len(),
            report.violations.first()
        )));
    }
    if report.feedback_loops.len() != 32 {
        return Err(QbsaError::StagePlan(format!(
            "expected 32 feedback loops, found {}",
            report.feedback_loops.len()
        )));
    }
    let loop_length = report.feedback_loops[0].length;
    if report.feedback_loops.iter().any(|l| l.length != DEP_II) {
        return Err(QbsaError::StagePlan(format!(
            "feedback loop lengths {:?} != {DEP_II}",
            report
                .feedback_loops
                .iter()
                .map(|l| l.length)
                .collect::<Vec<_>>()
        )));
    }

    let mut per_block_ready = [0u32; 8];
    for k in 0..8 {
        let depths: Vec<u32> = (0..4)
            .map(|i| {
                let id = port(&format!("s{}", 4 * k + i))?;
                Ok(n.registered_depth(id)?)
            })
            .collect::<Result<_, QbsaError>>()?;
        if depths.iter().any(|&d| d != depths[0]) {
            return Err(QbsaError::StagePlan(format!(
                "block {k} sum bits land at different stages: {depths:?}"
            )));
        }
        per_block_ready[k] = depths[0];
        if depths[0] != DEP_II + k as u32 {
            return Err(QbsaError::StagePlan(format!(
                "block {k} sum ready at {} != {}",
                depths[0],
                DEP_II + k as u32
            )));
        }
    }
    let latency = per_block_ready[7];
    if latency != PIPELINE_LATENCY {
        return Err(QbsaError::StagePlan(format!(
            "latency {latency} != {PIPELINE_LATENCY}"
        )));
    }

    // Carry arrival per block: early carry of block k-1 relative to block
    // k's data arrival (its skew, i.e. ready minus the 8 block stages).
    let mut carry_offsets = [0u32; 8];
    for k in 1..8 {
        let early = n.registered_depth(port(&format!("c_out_early_b{}", k - 1))?)?;
        let arrival = per_block_ready[k] - DEP_II;
        carry_offsets[k] = early - arrival;
        if carry_offsets[k] != CARRY_ARRIVAL_OFFSET {
            return Err(QbsaError::StagePlan(format!(
                "block {k} carry arrives {} cycles after a/b, expected {CARRY_ARRIVAL_OFFSET}",
                carry_offsets[k]
            )));
        }
    }
    let c_out_early_ready = n.registered_depth(port("c_out_early")?)?;
    let c_out_ready = n.registered_depth(port("c_out")?)?;
    if c_out_ready != c_out_early_ready + 1 {
        return Err(QbsaError::StagePlan(format!(
            "c_out at {c_out_ready} does not lag c_out_early at {c_out_early_ready} by one stage"
        )));
    }

    Ok(Qbsa32 {
        netlist: n,
        per_block_ready,
        carry_offsets,
        latency,
        loop_length,
        c_out_early_ready,
        c_out_ready,
    })
}

/// One operation presented to the unit at a given cycle.
#[derive(Debug, Clone, Copy)]
pub struct OpIssue {
    pub cycle: usize,
    pub op: AluOpcode,
    pub a: u32,
    pub b: u32,
    /// Route each block's previous result into its operand-A leg instead of
    /// the external A bits.
    pub use_feedback: bool,
}

impl Qbsa32 {
    /// Build a stimulus presenting the given operations. All signals of one
    /// operation are driven on its issue cycle; the skew registers take
    /// care of per-block alignment.
    pub fn stimulus_for(&self, issues: &[OpIssue], cycles: usize) -> Stimulus {
        let mut stim = Stimulus::new(cycles);
        for issue in issues {
            let cw = control_word(issue.op);
            for i in 0..32 {
                if !issue.use_feedback {
                    stim.set(issue.cycle, &format!("a{i}"), issue.a >> i & 1 != 0);
                }
                stim.set(issue.cycle, &format!("b{i}"), issue.b >> i & 1 != 0);
            }
            stim.set(issue.cycle, "op_arith", cw.op_arith);
            stim.set(issue.cycle, "op_and", cw.op_and);
            stim.set(issue.cycle, "op_xor", cw.op_xor);
            stim.set(issue.cycle, "cmpl_a", cw.cmpl_a);
            stim.set(issue.cycle, "cmpl_b", cw.cmpl_b);
            stim.set(issue.cycle, "c_in", cw.c_in);
            for k in 0..8 {
                stim.set(issue.cycle, &format!("fb_sel{k}"), issue.use_feedback);
            }
        }
        stim
    }

    /// Read back the raw 32 sum bits of the operation issued at `issue`,
    /// sampling each block's nibble at its own ready offset.
    pub fn sample_s(&self, wave: &WaveCapture, issue: usize) -> u32 {
        let mut s = 0u32;
        for (k, &ready) in self.per_block_ready.iter().enumerate() {
            for i in 0..4 {
                let bit = wave.bit(issue + ready as usize, &format!("s{}", 4 * k + i));
                s |= (bit as u32) << (4 * k + i);
            }
        }
        s
    }

    /// Final carry-out of the operation issued at `issue`.
    pub fn sample_c_out(&self, wave: &WaveCapture, issue: usize) -> bool {
        wave.bit(issue + self.c_out_ready as usize, "c_out")
    }
}

/// A functional mismatch between the netlist and the reference semantics.
#[derive(Debug, Clone, Copy)]
pub struct Mismatch {
    pub op: AluOpcode,
    pub a: u32,
    pub b: u32,
    /// Explicit carry-in for block-level checks.
    pub c_in: Option<bool>,
    pub expected: (u32, bool),
    pub got: (u32, bool),
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} a={:#010x} b={:#010x}{}: expected s={:#010x} c_out={}, got s={:#010x} c_out={}",
            self.op,
            self.a,
            self.b,
            match self.c_in {
                Some(c) => format!(" c_in={}", c as u8),
                None => String::new(),
            },
            self.expected.0,
            self.expected.1 as u8,
            self.got.0,
            self.got.1 as u8
        )
    }
}

/// Exhaustive block-level equivalence: all 8 ops x 256 operand pairs x both
/// carry-in values against the functional reference, plus the one-stage lag
/// between `c_out_early` and `c_out`. Vectors stream one per cycle in
/// 64-wide lanes.
pub fn check_block_exhaustive(block: &Block4) -> (usize, Vec<Mismatch>) {
    let mut mismatches = Vec::new();
    let mut total = 0;
    for op in AluOpcode::ALL {
        let cw = control_word(op);
        for cin in [false, true] {
            // 256 vectors = 4 issue cycles of 64 lanes.
            let issues = 4;
            let horizon = issues + block.s_ready as usize + 2;
            let mut stim = Stimulus::new(horizon);
            let all = |b: bool| if b { !0u64 } else { 0 };
            for t in 0..issues {
                for i in 0..4 {
                    let mut wa = 0u64;
                    let mut wb = 0u64;
                    for lane in 0..64 {
                        let v = t * 64 + lane;
                        let (a4, b4) = ((v >> 4 & 0xf) as u64, (v & 0xf) as u64);
                        wa |= (a4 >> i & 1) << lane;
                        wb |= (b4 >> i & 1) << lane;
                    }
                    stim.set_word(t, &format!("a{i}"), wa);
                    stim.set_word(t, &format!("b{i}"), wb);
                }
                stim.set_word(t, "op_arith", all(cw.op_arith));
                stim.set_word(t, "op_and", all(cw.op_and));
                stim.set_word(t, "op_xor", all(cw.op_xor));
                stim.set_word(t, "cmpl_a", all(cw.cmpl_a));
                stim.set_word(t, "cmpl_b", all(cw.cmpl_b));
                stim.set_word(t, "c_in", all(cin));
            }
            let wave = simulate_words(&block.netlist, &stim, horizon)
                .expect("generated block must simulate");
            for t in 0..issues {
                let s_at = t + block.s_ready as usize;
                let early_at = t + block.c_out_early_ready as usize;
                let s_words: Vec<u64> = (0..4).map(|i| wave.word(s_at, &format!("s{i}"))).collect();
                let early = wave.word(early_at, "c_out_early");
                let final_c = wave.word(early_at + 1, "c_out");
                for lane in 0..64 {
                    let v = t * 64 + lane;
                    let (a4, b4) = ((v >> 4 & 0xf) as u8, (v & 0xf) as u8);
                    let mut s = 0u8;
                    for (i, w) in s_words.iter().enumerate() {
                        s |= (((w >> lane) & 1) as u8) << i;
                    }
                    let got_c = early >> lane & 1 != 0;
                    let lag_c = final_c >> lane & 1 != 0;
                    let (exp_s, exp_c) = oracle::block_exec(op, a4, b4, cin);
                    total += 1;
                    if s != exp_s || got_c != exp_c || lag_c != got_c {
                        mismatches.push(Mismatch {
                            op,
                            a: a4 as u32,
                            b: b4 as u32,
                            c_in: Some(cin),
                            expected: (exp_s as u32, exp_c),
                            got: (s as u32, got_c),
                        });
                    }
                }
            }
        }
    }
    (total, mismatches)
}

/// Randomized 32-bit equivalence: `vectors_per_op` seeded vectors per
/// operation, streamed one per cycle, post-processed by the opcode's result
/// select and compared against the 32-bit reference.
pub fn check_qbsa32_random(q: &Qbsa32, vectors_per_op: usize, seed: u64) -> (usize, Vec<Mismatch>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    let mut total = 0;

    for op in AluOpcode::ALL {
        let cw = control_word(op);
        let issues = vectors_per_op.div_ceil(64);
        let mut vectors: Vec<(u32, u32)> = Vec::with_capacity(issues * 64);
        for v in 0..issues * 64 {
            // Keep a few boundary vectors in every batch.
            let pair = match v {
                0 => (0, 0),
                1 => (u32::MAX, u32::MAX),
                2 => (u32::MAX, 1),
                3 => (0x8000_0000, 0x7FFF_FFFF),
                _ => (rng.gen(), rng.gen()),
            };
            vectors.push(pair);
        }

        let horizon = issues + PIPELINE_LATENCY as usize + 2;
        let mut stim = Stimulus::new(horizon);
        let all = |b: bool| if b { !0u64 } else { 0 };
        for t in 0..issues {
            for i in 0..32 {
                let mut wa = 0u64;
                let mut wb = 0u64;
                for lane in 0..64 {
                    let (a, b) = vectors[t * 64 + lane];
                    wa |= ((a >> i & 1) as u64) << lane;
                    wb |= ((b >> i & 1) as u64) << lane;
                }
                stim.set_word(t, &format!("a{i}"), wa);
                stim.set_word(t, &format!("b{i}"), wb);
            }
            stim.set_word(t, "op_arith", all(cw.op_arith));
            stim.set_word(t, "op_and", all(cw.op_and));
            stim.set_word(t, "op_xor", all(cw.op_xor));
            stim.set_word(t, "cmpl_a", all(cw.cmpl_a));
            stim.set_word(t, "cmpl_b", all(cw.cmpl_b));
            stim.set_word(t, "c_in", all(cw.c_in));
        }
        let wave =
            simulate_words(&q.netlist, &stim, horizon).expect("generated unit must simulate");

        for t in 0..issues {
            let mut s_words = [0u64; 32];
            for k in 0..8 {
                let at = t + q.per_block_ready[k] as usize;
                for i in 0..4 {
                    s_words[4 * k + i] = wave.word(at, &format!("s{}", 4 * k + i));
                }
            }
            let c_word = wave.word(t + q.c_out_ready as usize, "c_out");
            for lane in 0..64 {
                if t * 64 + lane >= vectors_per_op {
                    break;
                }
                let (a, b) = vectors[t * 64 + lane];
                let mut raw_s = 0u32;
                for (i, w) in s_words.iter().enumerate() {
                    raw_s |= (((w >> lane) & 1) as u32) << i;
                }
                let c_out = c_word >> lane & 1 != 0;
                let got = oracle::finalize(op, a, b, raw_s, c_out);
                let expected = oracle::exec(op, a, b);
                total += 1;
                if got != expected {
                    mismatches.push(Mismatch {
                        op,
                        a,
                        b,
                        c_in: None,
                        expected: (expected.s, expected.c_out),
                        got: (got.s, got.c_out),
                    });
                    if mismatches.len() > 64 {
                        return (total, mismatches);
                    }
                }
            }
        }
    }
    (total, mismatches)
}

/// Timing summary measured by simulation probes, with initiation-interval
/// ratios against the 32-bit Ladner-Fischer and 4-bit bit-slice profiles.
#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub latency: u32,
    pub ii_dep: u32,
    pub ii_indep: u32,
    pub ratio_32lfa: f64,
    pub ratio_4bsa: f64,
    pub per_block_cycles: [u32; 8],
}

impl fmt::Display for TimingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "parameter            value")?;
        writeln!(f, "latency              {}", self.latency)?;
        writeln!(f, "ii (dependent)       {}", self.ii_dep)?;
        writeln!(f, "ii (independent)     {}", self.ii_indep)?;
        writeln!(f, "vs 32LFA (II 12)     {:.2}x", self.ratio_32lfa)?;
        writeln!(f, "vs 4BSA  (II 16)     {:.2}x", self.ratio_4bsa)?;
        write!(f, "block sum cycles     ")?;
        for (k, c) in self.per_block_cycles.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

fn msb_nibble(wave: &WaveCapture, t: usize) -> u8 {
    let mut v = 0u8;
    for i in 0..4 {
        v |= (wave.bit(t, &format!("s{}", 28 + i)) as u8) << i;
    }
    v
}

/// Measure latency, per-block output cycles and both initiation intervals
/// by driving probe operations through the simulator.
pub fn timing_report(q: &Qbsa32) -> Result<TimingReport, QbsaError> {
    // Latency probe: 0xFFFFFFFF + 0 flips every sum bit to 1 exactly when
    // its block's nibble is ready.
    let horizon = PIPELINE_LATENCY as usize + 4;
    let stim = q.stimulus_for(
        &[OpIssue {
            cycle: 0,
            op: AluOpcode::Add,
            a: u32::MAX,
            b: 0,
            use_feedback: false,
        }],
        horizon,
    );
    let wave = simulate_words(&q.netlist, &stim, horizon)?;
    let mut per_block_cycles = [0u32; 8];
    for (k, slot) in per_block_cycles.iter_mut().enumerate() {
        let first = (0..horizon)
            .find(|&t| (0..4).all(|i| wave.bit(t, &format!("s{}", 4 * k + i))))
            .ok_or_else(|| QbsaError::StagePlan(format!("block {k} sum never settled")))?;
        *slot = first as u32;
    }
    let latency = per_block_cycles[7];

    // Dependent probe: accumulate 0x11111111 through the feedback muxes so
    // every block's nibble counts 1, 2, 3 at each completion.
    let step = 0x1111_1111u32;
    let issues: Vec<OpIssue> = (0..3)
        .map(|i| OpIssue {
            cycle: i * DEP_II as usize,
            op: AluOpcode::Add,
            a: 0,
            b: step,
            use_feedback: i > 0,
        })
        .collect();
    let horizon = 3 * DEP_II as usize + PIPELINE_LATENCY as usize + 4;
    let stim = q.stimulus_for(&issues, horizon);
    let wave = simulate_words(&q.netlist, &stim, horizon)?;
    let mut completions = Vec::new();
    for nth in 1..=3u8 {
        let t = (0..horizon)
            .find(|&t| msb_nibble(&wave, t) == nth)
            .ok_or_else(|| {
                QbsaError::StagePlan(format!("dependent result {nth} never appeared"))
            })?;
        completions.push(t);
    }
    let ii_dep = (completions[1] - completions[0]) as u32;
    if completions[2] - completions[1] != ii_dep as usize {
        return Err(QbsaError::StagePlan(format!(
            "dependent completions not evenly spaced: {completions:?}"
        )));
    }

    // Independent probe: three back-to-back issues on consecutive cycles.
    let issues: Vec<OpIssue> = (0..3u32)
        .map(|i| OpIssue {
            cycle: i as usize,
            op: AluOpcode::Add,
            a: step.wrapping_mul(i + 1),
            b: 0,
            use_feedback: false,
        })
        .collect();
    let horizon = PIPELINE_LATENCY as usize + 8;
    let stim = q.stimulus_for(&issues, horizon);
    let wave = simulate_words(&q.netlist, &stim, horizon)?;
    let mut firsts = Vec::new();
    for nth in 1..=3u8 {
        let t = (0..horizon)
            .find(|&t| msb_nibble(&wave, t) == nth)
            .ok_or_else(|| {
                QbsaError::StagePlan(format!("independent result {nth} never appeared"))
            })?;
        firsts.push(t);
    }
    let ii_indep = (firsts[1] - firsts[0]) as u32;
    if firsts[2] - firsts[1] != ii_indep as usize {
        return Err(QbsaError::StagePlan(format!(
            "independent completions not evenly spaced: {firsts:?}"
        )));
    }

    Ok(TimingReport {
        latency,
        ii_dep,
        ii_indep,
        ratio_32lfa: LFA32_DEP_II as f64 / ii_dep as f64,
        ratio_4bsa: BSA4_DEP_II as f64 / ii_dep as f64,
        per_block_cycles,
    })
}
