//! Gate-level model and performance analysis of a 32-bit block-skewed
//! pulse-logic (RSFQ-style) ALU.
//!
//! The crate has three layers:
//!
//! * [`netlist`] / [`sim`] — a generic cycle-accurate engine for netlists of
//!   clocked cells, with path-balance checking, DFF insertion, JSON
//!   serialization and CSV waveform export.
//! * [`alu`] / [`oracle`] / [`qbsa`] — the eight-operation ALU: control
//!   encodings, a zero-delay functional reference, and the generator that
//!   builds the 4-bit Sklansky block and composes eight of them into the
//!   32-bit block-skewed unit (latency 15, dependent initiation interval 8,
//!   independent initiation interval 1).
//! * [`trace`] / [`ipc`] — instruction-trace ingestion (canonical format and
//!   a Spike commit-log subset) and the NOP-insertion dependency model that
//!   estimates IPC under per-architecture latency profiles.
//!
//! The `qbsa-sim` binary ties these together; see [`cli`].

pub mod alu;
pub mod cli;
pub mod ipc;
pub mod netlist;
pub mod oracle;
pub mod qbsa;
pub mod sim;
pub mod trace;

pub use alu::{control_word, AluOpcode, ControlWord};
pub use netlist::{CellId, CellKind, Netlist, NetlistError};
pub use oracle::{block_exec, exec, AluResult};

pub use sim::{simulate, Stimulus, WaveCapture};
