//! Cycle-accurate simulation.
//!
//! Synchronous semantics: at every clock tick each clocked cell latches the
//! function of its fanins' previous-cycle values (DFF is identity, MUX2
//! selects `fanin[sel]`). All state starts at 0, matching the
//! absence-of-pulse default. Output taps mirror their fanin within the same
//! cycle.
//!
//! The engine evaluates 64 independent stimulus lanes per `u64` word; the
//! scalar [`simulate`] entry point drives lane 0 only. Batched equivalence
//! checks use [`simulate_words`] directly.

use crate::netlist::{CellKind, Netlist, NetlistError};
use std::collections::HashMap;

/// Per-cycle values for named primary inputs. Inputs not mentioned default
/// to 0 every cycle.
#[derive(Debug, Clone)]
pub struct Stimulus {
    cycles: usize,
    values: Vec<(String, Vec<u64>)>,
    index: HashMap<String, usize>,
}

impl Stimulus {
    pub fn new(cycles: usize) -> Self {
        Stimulus {
            cycles,
            values: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.cycles
    }

    pub fn is_empty(&self) -> bool {
        self.cycles == 0
    }

    /// Set one input bit (lane 0) at one cycle.
    pub fn set(&mut self, cycle: usize, input: &str, value: bool) -> &mut Self {
        self.set_word(cycle, input, value as u64)
    }

    /// Set all 64 lanes of one input at one cycle.
    pub fn set_word(&mut self, cycle: usize, input: &str, word: u64) -> &mut Self {
        assert!(cycle < self.cycles, "cycle {cycle} out of range");
        let slot = match self.index.get(input) {
            Some(&slot) => slot,
            None => {
                let slot = self.values.len();
                self.values.push((input.to_string(), vec![0; self.cycles]));
                self.index.insert(input.to_string(), slot);
                slot
            }
        };
        self.values[slot].1[cycle] = word;
        self
    }

    fn row(&self, input: &str) -> Option<&[u64]> {
        self.index
            .get(input)
            .map(|&slot| self.values[slot].1.as_slice())
    }
}

/// Recorded per-cycle values of the declared primary outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveCapture {
    ports: Vec<String>,
    /// `rows[cycle][port]`, one word of 64 lanes each.
    rows: Vec<Vec<u64>>,
}

impl WaveCapture {
    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    pub fn cycles(&self) -> usize {
        self.rows.len()
    }

    /// Lane-0 value of `port` at `cycle`.
    pub fn bit(&self, cycle: usize, port: &str) -> bool {
        self.word(cycle, port) & 1 != 0
    }

    /// Full 64-lane word of `port` at `cycle`.
    pub fn word(&self, cycle: usize, port: &str) -> u64 {
        let idx = self
            .ports
            .iter()
            .position(|p| p == port)
            .unwrap_or_else(|| panic!("no output port `{port}`"));
        self.rows[cycle][idx]
    }

    /// CSV export: header row of port names, then one row per cycle of
    /// lane-0 bit values.
    pub fn to_csv(&self) -> String {
        let mut out = self.ports.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for word in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push(if word & 1 != 0 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Simulate lane 0 of the stimulus for `cycles` clock ticks.
///
/// The netlist must be path-balanced: pulse logic gives wrong answers when
/// fanin pulses arrive in different clock windows, so an unbalanced netlist
/// is refused rather than simulated.
pub fn simulate(
    netlist: &Netlist,
    stimulus: &Stimulus,
    cycles: usize,
) -> Result<WaveCapture, NetlistError> {
    simulate_words(netlist, stimulus, cycles)
}

/// Simulate all 64 lanes. Identical to [`simulate`] except that callers are
/// expected to read whole words back out of the capture.
pub fn simulate_words(
    netlist: &Netlist,
    stimulus: &Stimulus,
    cycles: usize,
) -> Result<WaveCapture, NetlistError> {
    if stimulus.is_empty() {
        return Err(NetlistError::EmptyStimulus);
    }
    if cycles < stimulus.len() {
        return Err(NetlistError::CyclesTooShort {
            cycles,
            stimulus: stimulus.len(),
        });
    }
    for (name, _) in &stimulus.values {
        if netlist.input_id(name).is_none() {
            return Err(NetlistError::UnknownInput(name.clone()));
        }
    }

    let analysis = netlist.analyze();
    let report = netlist.balance_report(&analysis);
    if !report.is_balanced() {
        return Err(NetlistError::Unbalanced {
            violations: report.violations.len(),
        });
    }
    for loop_ in &report.feedback_loops {
        if loop_.length == 0 {
            return Err(NetlistError::ZeroLatencyLoop(loop_.to));
        }
    }

    let n = netlist.cell_count();
    // Input rows in cell order, empty slice = all zero.
    let empty: Vec<u64> = Vec::new();
    let mut input_rows: Vec<(usize, &[u64])> = Vec::new();
    for (name, id) in netlist.inputs() {
        input_rows.push((id.index(), stimulus.row(name).unwrap_or(&empty)));
    }
    // Unclocked taps resolve after the clocked update, in id (topological)
    // order.
    let taps: Vec<u32> = netlist
        .cells()
        .filter(|(_, c)| c.kind == CellKind::Output)
        .map(|(id, _)| id.0)
        .collect();

    let out_ids: Vec<usize> = netlist
        .outputs()
        .iter()
        .map(|&(_, id)| id.index())
        .collect();
    let mut prev = vec![0u64; n];
    let mut cur = vec![0u64; n];
    let mut rows = Vec::with_capacity(cycles);

    for t in 0..cycles {
        for (id, cell) in netlist.cells() {
            let v = match cell.kind {
                CellKind::And2 => prev[cell.fanins[0].index()] & prev[cell.fanins[1].index()],
                CellKind::Or2 => prev[cell.fanins[0].index()] | prev[cell.fanins[1].index()],
                CellKind::Xor2 => prev[cell.fanins[0].index()] ^ prev[cell.fanins[1].index()],
                CellKind::Not => !prev[cell.fanins[0].index()],
                CellKind::Dff => prev[cell.fanins[0].index()],
                CellKind::Mux2 => {
                    let sel = prev[cell.fanins[2].index()];
                    (prev[cell.fanins[0].index()] & !sel) | (prev[cell.fanins[1].index()] & sel)
                }
                CellKind::Const0 => 0,
                CellKind::Const1 => !0,
                CellKind::Input | CellKind::Output => 0,
            };
            cur[id.index()] = v;
        }
        for &(idx, row) in &input_rows {
            cur[idx] = row.get(t).copied().unwrap_or(0);
        }
        for &tap in &taps {
            let fanin = netlist.cell(crate::netlist::CellId(tap)).unwrap().fanins[0];
            cur[tap as usize] = cur[fanin.index()];
        }
        rows.push(out_ids.iter().map(|&i| cur[i]).collect());
        std::mem::swap(&mut prev, &mut cur);
    }

    Ok(WaveCapture {
        ports: netlist.outputs().iter().map(|(n, _)| n.clone()).collect(),
        rows,
    })
}

/// Zero-delay combinational evaluation of a feedback-free netlist: every
/// clocked cell is treated as transparent. The reference answer for "hold
/// the inputs steady and wait out the pipeline".
pub fn eval_zero_delay(
    netlist: &Netlist,
    inputs: &[(&str, bool)],
) -> Result<Vec<bool>, NetlistError> {
    let analysis = netlist.analyze();
    if !analysis.feedback.is_empty() {
        return Err(NetlistError::ZeroLatencyLoop(analysis.feedback[0].1));
    }
    let mut values = vec![false; netlist.cell_count()];
    for &(name, v) in inputs {
        let id = netlist
            .input_id(name)
            .ok_or_else(|| NetlistError::UnknownInput(name.to_string()))?;
        values[id.index()] = v;
    }
    for (id, _) in netlist.cells() {
        let cell = netlist.cell(id)?;
        let f = |i: usize| values[cell.fanins[i].index()];
        values[id.index()] = match cell.kind {
            CellKind::And2 => f(0) && f(1),
            CellKind::Or2 => f(0) || f(1),
            CellKind::Xor2 => f(0) ^ f(1),
            CellKind::Not => !f(0),
            CellKind::Dff | CellKind::Output => f(0),
            CellKind::Mux2 => {
                if f(2) {
                    f(1)
                } else {
                    f(0)
                }
            }
            CellKind::Const0 => false,
            CellKind::Const1 => true,
            CellKind::Input => values[id.index()],
        };
    }
    Ok(netlist
        .outputs()
        .iter()
        .map(|&(_, id)| values[id.index()])
        .collect())
}
