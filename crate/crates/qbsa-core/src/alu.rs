//! ALU opcodes and the control signals that drive the datapath.
//!
//! Each operation is encoded as six control bits. Arithmetic operations run
//! the carry network; the logic operations mask it off and read the result
//! from the gated AND/XOR terms. OR is produced as `AND ⊕ XOR`, which is why
//! its row sets both `op_and` and `op_xor`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The eight supported operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AluOpcode {
    Add,
    Sub,
    Slt,
    Eq,
    And,
    Or,
    Xor,
    Nor,
}

impl AluOpcode {
    pub const ALL: [AluOpcode; 8] = [
        AluOpcode::Add,
        AluOpcode::Sub,
        AluOpcode::Slt,
        AluOpcode::Eq,
        AluOpcode::And,
        AluOpcode::Or,
        AluOpcode::Xor,
        AluOpcode::Nor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AluOpcode::Add => "add",
            AluOpcode::Sub => "sub",
            AluOpcode::Slt => "slt",
            AluOpcode::Eq => "eq",
            AluOpcode::And => "and",
            AluOpcode::Or => "or",
            AluOpcode::Xor => "xor",
            AluOpcode::Nor => "nor",
        }
    }

    /// How the raw datapath outputs are turned into the architectural result.
    ///
    /// SLT and EQ share their control bits with SUB and XOR-style rows, so the
    /// distinction is carried out of band rather than through the six wires.
    pub fn result_select(self) -> ResultSelect {
        match self {
            AluOpcode::Slt => ResultSelect::SignedLessThan,
            AluOpcode::Eq => ResultSelect::CarryBool,
            _ => ResultSelect::SumBits,
        }
    }

    pub fn is_arith(self) -> bool {
        control_word(self).op_arith
    }
}

impl fmt::Display for AluOpcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AluOpcode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "add" => Ok(AluOpcode::Add),
            "sub" => Ok(AluOpcode::Sub),
            "slt" => Ok(AluOpcode::Slt),
            "eq" => Ok(AluOpcode::Eq),
            "and" => Ok(AluOpcode::And),
            "or" => Ok(AluOpcode::Or),
            "xor" => Ok(AluOpcode::Xor),
            "nor" => Ok(AluOpcode::Nor),
            other => Err(format!("unknown ALU opcode `{other}`")),
        }
    }
}

/// Where an operation's answer is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultSelect {
    /// The 32 sum/logic bits are the result.
    SumBits,
    /// The answer is the final carry-out; the sum bits are discarded (EQ).
    CarryBool,
    /// Post-process the subtraction into 0/1 in bit 0 (SLT, signed).
    SignedLessThan,
}

/// The six control signals driving one operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlWord {
    pub op_arith: bool,
    pub op_and: bool,
    pub op_xor: bool,
    pub cmpl_a: bool,
    pub cmpl_b: bool,
    pub c_in: bool,
}

/// Control encoding for each operation.
pub fn control_word(op: AluOpcode) -> ControlWord {
    let (op_arith, op_and, op_xor, cmpl_a, cmpl_b, c_in) = match op {
        AluOpcode::Add => (1, 0, 1, 0, 0, 0),
        AluOpcode::Sub => (1, 0, 1, 0, 1, 1),
        AluOpcode::Slt => (1, 0, 1, 0, 1, 1),
        AluOpcode::Eq => (0, 0, 1, 0, 1, 1),
        AluOpcode::And => (0, 1, 0, 0, 0, 0),
        AluOpcode::Or => (0, 1, 1, 0, 0, 0),
        AluOpcode::Xor => (0, 0, 1, 0, 0, 0),
        AluOpcode::Nor => (0, 1, 0, 1, 1, 0),
    };
    ControlWord {
        op_arith: op_arith != 0,
        op_and: op_and != 0,
        op_xor: op_xor != 0,
        cmpl_a: cmpl_a != 0,
        cmpl_b: cmpl_b != 0,
        c_in: c_in != 0,
    }
}
