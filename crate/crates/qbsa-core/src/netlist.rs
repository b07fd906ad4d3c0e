//! Netlists of clocked cells.
//!
//! Every logic gate here is a one-cycle pipeline stage: its output at cycle
//! `t+1` is a function of its fanin values at cycle `t`. That models the
//! pulse-logic regime where each gate latches on the clock, so pipeline depth
//! equals logic depth and correct operation requires every gate's fanin
//! pulses to arrive in the same clock window ("path balancing").
//!
//! `INPUT` and `CONST*` cells are sources (depth 0). `OUTPUT` cells are
//! unclocked taps: they mirror their fanin in the same cycle and add no
//! depth; ports may also reference gate cells directly. Cycles through
//! clocked cells are legal (feedback loops); depth and balance are computed
//! on the feedback-free skeleton and loops are reported with their length
//! in clocked cells.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Identifier of a cell inside one netlist (dense, starting at 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId(pub u32);

impl CellId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    #[serde(rename = "AND2")]
    And2,
    #[serde(rename = "OR2")]
    Or2,
    #[serde(rename = "XOR2")]
    Xor2,
    #[serde(rename = "NOT")]
    Not,
    #[serde(rename = "DFF")]
    Dff,
    #[serde(rename = "MUX2")]
    Mux2,
    #[serde(rename = "CONST0")]
    Const0,
    #[serde(rename = "CONST1")]
    Const1,
    #[serde(rename = "INPUT")]
    Input,
    #[serde(rename = "OUTPUT")]
    Output,
}

impl CellKind {
    /// Fixed fanin count. MUX2 takes its select as the third fanin.
    pub fn arity(self) -> usize {
        match self {
            CellKind::And2 | CellKind::Or2 | CellKind::Xor2 => 2,
            CellKind::Mux2 => 3,
            CellKind::Not | CellKind::Dff | CellKind::Output => 1,
            CellKind::Const0 | CellKind::Const1 | CellKind::Input => 0,
        }
    }

    /// Whether the cell adds a pipeline stage (one clock of latency).
    pub fn is_clocked(self) -> bool {
        !matches!(
            self,
            CellKind::Input | CellKind::Const0 | CellKind::Const1 | CellKind::Output
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::And2 => "AND2",
            CellKind::Or2 => "OR2",
            CellKind::Xor2 => "XOR2",
            CellKind::Not => "NOT",
            CellKind::Dff => "DFF",
            CellKind::Mux2 => "MUX2",
            CellKind::Const0 => "CONST0",
            CellKind::Const1 => "CONST1",
            CellKind::Input => "INPUT",
            CellKind::Output => "OUTPUT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub kind: CellKind,
    pub fanins: Vec<CellId>,
}

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("{kind} takes {expected} fanins, got {got}")]
    ArityMismatch {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("fanin {fanin} does not exist (netlist has {cells} cells)")]
    DanglingFanin { fanin: CellId, cells: usize },
    #[error("unknown cell {0}")]
    UnknownCell(CellId),
    #[error("port name `{0}` is already declared")]
    DuplicatePort(String),
    #[error("stimulus names unknown input `{0}`")]
    UnknownInput(String),
    #[error("stimulus must cover at least one cycle")]
    EmptyStimulus,
    #[error("simulation of {cycles} cycles cannot consume a {stimulus}-cycle stimulus")]
    CyclesTooShort { cycles: usize, stimulus: usize },
    #[error("netlist is not path-balanced ({violations} violating cells); refusing to simulate")]
    Unbalanced { violations: usize },
    #[error("zero-latency loop through unclocked cells at {0}")]
    ZeroLatencyLoop(CellId),
    #[error("netlist JSON: {0}")]
    Json(String),
}

/// One gate whose fanin pulses would arrive in different clock windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceViolation {
    pub cell: CellId,
    /// Non-feedback fanins with their registered depths.
    pub fanin_depths: Vec<(CellId, u32)>,
}

/// A feedback edge and the length of its loop in clocked cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackLoop {
    pub from: CellId,
    pub to: CellId,
    pub length: u32,
}

/// Result of `check_path_balanced`: empty `violations` means balanced.
#[derive(Debug, Clone, Default)]
pub struct BalanceReport {
    pub violations: Vec<BalanceViolation>,
    pub feedback_loops: Vec<FeedbackLoop>,
}

impl BalanceReport {
    pub fn is_balanced(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Structural analysis shared by depth queries, balancing and simulation.
///
/// Cell ids double as a topological order of the feedforward skeleton:
/// `add_cell` only accepts existing fanins, so a fanin referencing an equal
/// or higher id can only be produced by explicitly closing a loop
/// (`connect_feedback`). Such forward references are the feedback edges.
#[derive(Debug, Clone)]
pub(crate) struct Analysis {
    /// Registered depth of every cell on the feedback-free skeleton.
    pub depths: Vec<u32>,
    /// Edges (from, to) that close a cycle.
    pub feedback: Vec<(CellId, CellId)>,
}

impl Analysis {
    pub fn is_feedback(from: CellId, to: CellId) -> bool {
        from.index() >= to.index()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Netlist {
    cells: Vec<Cell>,
    inputs: Vec<(String, CellId)>,
    outputs: Vec<(String, CellId)>,
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, id: CellId) -> Result<&Cell, NetlistError> {
        self.cells
            .get(id.index())
            .ok_or(NetlistError::UnknownCell(id))
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellId, &Cell)> {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, c)| (CellId(i as u32), c))
    }

    pub fn inputs(&self) -> &[(String, CellId)] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[(String, CellId)] {
        &self.outputs
    }

    pub fn input_id(&self, name: &str) -> Option<CellId> {
        self.inputs
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, id)| id)
    }

    pub fn output_id(&self, name: &str) -> Option<CellId> {
        self.outputs
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, id)| id)
    }

    /// Add a cell. Fanin count must match the kind's arity and every fanin
    /// must already exist.
    pub fn add_cell(&mut self, kind: CellKind, fanins: &[CellId]) -> Result<CellId, NetlistError> {
        if fanins.len() != kind.arity() {
            return Err(NetlistError::ArityMismatch {
                kind: kind.name(),
                expected: kind.arity(),
                got: fanins.len(),
            });
        }
        for &f in fanins {
            if f.index() >= self.cells.len() {
                return Err(NetlistError::DanglingFanin {
                    fanin: f,
                    cells: self.cells.len(),
                });
            }
        }
        let id = CellId(self.cells.len() as u32);
        self.cells.push(Cell {
            kind,
            fanins: fanins.to_vec(),
        });
        Ok(id)
    }

    /// Add a named primary input.
    pub fn add_input(&mut self, name: &str) -> Result<CellId, NetlistError> {
        if self.inputs.iter().any(|(n, _)| n == name) {
            return Err(NetlistError::DuplicatePort(name.to_string()));
        }
        let id = self.add_cell(CellKind::Input, &[])?;
        self.inputs.push((name.to_string(), id));
        Ok(id)
    }

    /// Declare a named primary output referencing an existing cell.
    pub fn set_output(&mut self, name: &str, id: CellId) -> Result<(), NetlistError> {
        if self.outputs.iter().any(|(n, _)| n == name) {
            return Err(NetlistError::DuplicatePort(name.to_string()));
        }
        self.cell(id)?;
        self.outputs.push((name.to_string(), id));
        Ok(())
    }

    /// Append `n` DFFs after `id`, returning the end of the chain.
    pub fn delay(&mut self, id: CellId, n: u32) -> Result<CellId, NetlistError> {
        let mut cur = id;
        for _ in 0..n {
            cur = self.add_cell(CellKind::Dff, &[cur])?;
        }
        Ok(cur)
    }

    /// Close a feedback loop: point `cell`'s fanin `slot` at a cell with an
    /// equal or higher id. The edge is excluded from depth and balance
    /// computations and shows up in the balance report with its loop length.
    pub fn connect_feedback(
        &mut self,
        cell: CellId,
        slot: usize,
        fanin: CellId,
    ) -> Result<(), NetlistError> {
        self.cell(fanin)?;
        let c = self.cell(cell)?;
        if slot >= c.fanins.len() {
            return Err(NetlistError::ArityMismatch {
                kind: c.kind.name(),
                expected: c.fanins.len(),
                got: slot + 1,
            });
        }
        self.cells[cell.index()].fanins[slot] = fanin;
        Ok(())
    }

    /// Compute registered depths on the feedforward skeleton and collect
    /// feedback (forward-reference) edges. Cell id order is the topological
    /// order of the skeleton.
    pub(crate) fn analyze(&self) -> Analysis {
        let n = self.cells.len();
        let mut depths = vec![0u32; n];
        let mut feedback = Vec::new();
        for (id, cell) in self.cells.iter().enumerate() {
            let mut base = 0;
            for &f in &cell.fanins {
                if f.index() >= id {
                    feedback.push((f, CellId(id as u32)));
                } else {
                    base = base.max(depths[f.index()]);
                }
            }
            depths[id] = base + cell.kind.is_clocked() as u32;
        }
        Analysis { depths, feedback }
    }

    /// Max clocked cells on any feedback-free path from a primary input to
    /// `id`, inclusive of `id` itself when it is clocked.
    pub fn registered_depth(&self, id: CellId) -> Result<u32, NetlistError> {
        self.cell(id)?;
        Ok(self.analyze().depths[id.index()])
    }

    /// Check that every cell's non-feedback fanins sit at equal registered
    /// depth. Feedback edges are excluded and reported with the loop length
    /// in clocked cells.
    pub fn check_path_balanced(&self) -> BalanceReport {
        let analysis = self.analyze();
        self.balance_report(&analysis)
    }

    pub(crate) fn balance_report(&self, analysis: &Analysis) -> BalanceReport {
        let mut report = BalanceReport::default();
        for (id, cell) in self.cells.iter().enumerate() {
            let id = CellId(id as u32);
            let fanin_depths: Vec<(CellId, u32)> = cell
                .fanins
                .iter()
                .filter(|&&f| !Analysis::is_feedback(f, id))
                .map(|&f| (f, analysis.depths[f.index()]))
                .collect();
            if fanin_depths.len() > 1 {
                let first = fanin_depths[0].1;
                if fanin_depths.iter().any(|&(_, d)| d != first) {
                    report.violations.push(BalanceViolation {
                        cell: id,
                        fanin_depths,
                    });
                }
            }
        }
        for &(from, to) in &analysis.feedback {
            let length = (analysis.depths[from.index()]
                + self.cells[to.index()].kind.is_clocked() as u32)
                .saturating_sub(analysis.depths[to.index()]);
            report
                .feedback_loops
                .push(FeedbackLoop { from, to, length });
        }
        report
    }

    /// Insert the minimum DFFs on shallow fanins so that
    /// `check_path_balanced` passes. Chains are shared per source cell, and
    /// the netlist is rebuilt so inserted cells keep id order topological.
    /// Returns the number of DFFs inserted. Behavior at aligned cycles is
    /// unchanged.
    pub fn insert_balancing_dffs(&mut self) -> usize {
        let analysis = self.analyze();
        let n = self.cells.len();

        // Fanins of rebuilt cells refer either to an original cell (remapped
        // at the end) or to a freshly inserted DFF (already a new id).
        #[derive(Clone, Copy)]
        enum Ref {
            Old(u32),
            New(u32),
        }
        let mut rebuilt: Vec<(CellKind, Vec<Ref>)> = Vec::with_capacity(n);
        let mut new_id = vec![u32::MAX; n];
        let mut chains: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut inserted = 0usize;

        for (id, cell) in self.cells.iter().enumerate() {
            let target = cell
                .fanins
                .iter()
                .filter(|&&f| !Analysis::is_feedback(f, CellId(id as u32)))
                .map(|&f| analysis.depths[f.index()])
                .max()
                .unwrap_or(0);
            let mut fanins = Vec::with_capacity(cell.fanins.len());
            for &f in &cell.fanins {
                if Analysis::is_feedback(f, CellId(id as u32)) {
                    fanins.push(Ref::Old(f.0));
                    continue;
                }
                let need = target - analysis.depths[f.index()];
                if need == 0 {
                    fanins.push(Ref::Old(f.0));
                    continue;
                }
                let chain = chains.entry(f.0).or_default();
                while (chain.len() as u32) < need {
                    let prev = match chain.last() {
                        Some(&tap) => Ref::New(tap),
                        None => Ref::Old(f.0),
                    };
                    let dff = rebuilt.len() as u32;
                    rebuilt.push((CellKind::Dff, vec![prev]));
                    chain.push(dff);
                    inserted += 1;
                }
                fanins.push(Ref::New(chain[(need - 1) as usize]));
            }
            new_id[id] = rebuilt.len() as u32;
            rebuilt.push((cell.kind, fanins));
        }

        self.cells = rebuilt
            .into_iter()
            .map(|(kind, fanins)| Cell {
                kind,
                fanins: fanins
                    .into_iter()
                    .map(|r| match r {
                        Ref::Old(f) => CellId(new_id[f as usize]),
                        Ref::New(i) => CellId(i),
                    })
                    .collect(),
            })
            .collect();
        for (_, id) in self.inputs.iter_mut().chain(self.outputs.iter_mut()) {
            *id = CellId(new_id[id.index()]);
        }
        inserted
    }

    // --- JSON serialization -------------------------------------------------

    pub fn to_json(&self) -> String {
        let doc = json::NetlistDoc::from(self);
        serde_json::to_string_pretty(&doc).expect("netlist serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, NetlistError> {
        let doc: json::NetlistDoc =
            serde_json::from_str(text).map_err(|e| NetlistError::Json(e.to_string()))?;
        doc.try_into()
    }
}

mod json {
    use super::*;

    #[derive(Serialize, Deserialize)]
    pub(super) struct CellDoc {
        pub id: u32,
        pub kind: CellKind,
        pub fanins: Vec<u32>,
    }

    #[derive(Serialize, Deserialize)]
    pub(super) struct NetlistDoc {
        pub cells: Vec<CellDoc>,
        pub inputs: serde_json::Map<String, serde_json::Value>,
        pub outputs: serde_json::Map<String, serde_json::Value>,
    }

    impl From<&Netlist> for NetlistDoc {
        fn from(n: &Netlist) -> Self {
            let ports = |v: &[(String, CellId)]| {
                v.iter()
                    .map(|(name, id)| (name.clone(), serde_json::Value::from(id.0)))
                    .collect()
            };
            NetlistDoc {
                cells: n
                    .cells()
                    .map(|(id, c)| CellDoc {
                        id: id.0,
                        kind: c.kind,
                        fanins: c.fanins.iter().map(|f| f.0).collect(),
                    })
                    .collect(),
                inputs: ports(&n.inputs),
                outputs: ports(&n.outputs),
            }
        }
    }

    impl TryFrom<NetlistDoc> for Netlist {
        type Error = NetlistError;

        fn try_from(doc: NetlistDoc) -> Result<Self, NetlistError> {
            let mut netlist = Netlist::new();
            // Cell ids must be dense and in order; fanins may only point
            // backwards except when closing feedback loops, so cells are
            // materialized first and validated afterwards.
            for (i, c) in doc.cells.iter().enumerate() {
                if c.id as usize != i {
                    return Err(NetlistError::Json(format!(
                        "cell ids must be dense and ascending; found {} at position {}",
                        c.id, i
                    )));
                }
                if c.fanins.len() != c.kind.arity() {
                    return Err(NetlistError::ArityMismatch {
                        kind: c.kind.name(),
                        expected: c.kind.arity(),
                        got: c.fanins.len(),
                    });
                }
                netlist.cells.push(Cell {
                    kind: c.kind,
                    fanins: c.fanins.iter().map(|&f| CellId(f)).collect(),
                });
            }
            let count = netlist.cells.len();
            for cell in &netlist.cells {
                for &f in &cell.fanins {
                    if f.index() >= count {
                        return Err(NetlistError::DanglingFanin {
                            fanin: f,
                            cells: count,
                        });
                    }
                }
            }
            let port = |v: &serde_json::Value| -> Result<CellId, NetlistError> {
                v.as_u64()
                    .filter(|&id| (id as usize) < count)
                    .map(|id| CellId(id as u32))
                    .ok_or_else(|| NetlistError::Json(format!("bad port cell id {v}")))
            };
            for (name, v) in &doc.inputs {
                let id = port(v)?;
                if netlist.cells[id.index()].kind != CellKind::Input {
                    return Err(NetlistError::Json(format!(
                        "input port `{name}` must reference an INPUT cell"
                    )));
                }
                netlist.inputs.push((name.clone(), id));
            }
            for (name, v) in &doc.outputs {
                netlist.outputs.push((name.clone(), port(v)?));
            }
            Ok(netlist)
        }
    }
}
