//! Instruction-trace ingestion.
//!
//! Two input formats produce the same in-memory trace: a canonical
//! one-instruction-per-line text format (`mnemonic rd rs1 rs2`, `-` for an
//! absent field, `#` comments) and the commit-log shape written by the
//! Spike ISA simulator (`core N: PC (RAW) DISASM`). Each instruction is
//! classified as ALU-class or non-ALU-class; the RV32I/M subset below is
//! recognized.
//!
//! ALU-class covers exactly the operations the datapath implements (add,
//! sub, set-less-than, and, or, xor and their immediate forms); shifts,
//! multiplies, loads, stores, branches and everything else take the swept
//! non-ALU latency in the IPC model. Pseudo-instructions are normalized to
//! their base forms before classification.

use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrClass {
    Alu,
    NonAlu,
}

/// One committed instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceInstr {
    pub index: usize,
    pub mnemonic: String,
    pub klass: InstrClass,
    pub rd: Option<u8>,
    pub sources: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Benchmark {
    pub name: String,
    pub instructions: Vec<TraceInstr>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown mnemonic `{mnemonic}`")]
    UnknownMnemonic { line: usize, mnemonic: String },
    #[error("line {line}: bad register `{token}`")]
    BadRegister { line: usize, token: String },
    #[error("no parseable instructions in `{0}`")]
    EmptyTrace(String),
}

/// Operand layout of a disassembled instruction, used to pull register
/// operands out of Spike text. Immediates and branch targets are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    /// `add rd, rs1, rs2`
    RdRsRs,
    /// `addi rd, rs1, imm`
    RdRsImm,
    /// `lw rd, off(rs1)`
    RdMem,
    /// `sw rs2, off(rs1)`
    StoreMem,
    /// `beq rs1, rs2, target`
    RsRsTarget,
    /// `lui rd, imm` / `jal rd, target`
    RdImm,
    /// `mv rd, rs`
    RdRs,
    /// `beqz rs, target`
    RsTarget,
    /// `j target` / `call target`
    Target,
    /// `jr rs`
    RsOnly,
    /// `jalr rd, rs, imm` or `jalr rd, off(rs)` or `jalr rs`
    Jalr,
    /// `csrrw rd, csr, rs`
    RdCsrRs,
    /// `csrrwi rd, csr, imm`
    RdCsrImm,
    /// `csrw csr, rs`
    CsrRs,
    /// `ecall`, `ret`, `nop`, ...
    None,
}

struct MnemonicInfo {
    klass: InstrClass,
    shape: Shape,
    /// Fixed destination implied by a pseudo (`call` writes ra).
    implied_rd: Option<u8>,
}

fn info(klass: InstrClass, shape: Shape) -> MnemonicInfo {
    MnemonicInfo {
        klass,
        shape,
        implied_rd: None,
    }
}

/// The recognized RV32I/M mnemonic table, pseudo-instructions included.
fn lookup(mnemonic: &str) -> Option<MnemonicInfo> {
    use InstrClass::*;
    use Shape::*;
    let m = match mnemonic {
        // ALU-class: the datapath operations mapped to RV32I.
        "add" | "sub" | "slt" | "sltu" | "and" | "or" | "xor" => info(Alu, RdRsRs),
        "addi" | "slti" | "sltiu" | "andi" | "ori" | "xori" => info(Alu, RdRsImm),
        // ALU pseudo-forms, normalized to addi/xori/sub/slt variants.
        "mv" | "not" | "neg" | "seqz" | "snez" | "sltz" | "sgtz" => info(Alu, RdRs),
        "li" => info(Alu, RdImm),
        "nop" => info(Alu, None),

        // Shifts are not among the supported datapath operations.
        "sll" | "srl" | "sra" => info(NonAlu, RdRsRs),
        "slli" | "srli" | "srai" => info(NonAlu, RdRsImm),
        // Multiply/divide.
        "mul" | "mulh" | "mulhsu" | "mulhu" | "div" | "divu" | "rem" | "remu" => {
            info(NonAlu, RdRsRs)
        }
        // Memory.
        "lb" | "lh" | "lw" | "lbu" | "lhu" => info(NonAlu, RdMem),
        "sb" | "sh" | "sw" => info(NonAlu, StoreMem),
        // Control flow.
        "beq" | "bne" | "blt" | "bge" | "bltu" | "bgeu" | "bgt" | "ble" | "bgtu" | "bleu" => {
            info(NonAlu, RsRsTarget)
        }
        "beqz" | "bnez" | "blez" | "bgez" | "bltz" | "bgtz" => info(NonAlu, RsTarget),
        "jal" => info(NonAlu, RdImm),
        "jalr" => info(NonAlu, Jalr),
        "j" | "tail" => info(NonAlu, Target),
        "jr" => info(NonAlu, RsOnly),
        "ret" => info(NonAlu, None),
        "call" => MnemonicInfo {
            klass: NonAlu,
            shape: Target,
            implied_rd: Some(1),
        },
        // Upper-immediate.
        "lui" | "auipc" => info(NonAlu, RdImm),
        // System.
        "ecall" | "ebreak" | "fence" | "fence.i" | "mret" | "sret" | "wfi" => info(NonAlu, None),
        "csrrw" | "csrrs" | "csrrc" => info(NonAlu, RdCsrRs),
        "csrrwi" | "csrrsi" | "csrrci" => info(NonAlu, RdCsrImm),
        "csrr" => info(NonAlu, RdImm),
        "csrw" | "csrs" | "csrc" => info(NonAlu, CsrRs),
        "csrwi" | "csrsi" | "csrci" => info(NonAlu, None),
        _ => return Option::None,
    };
    Some(m)
}

/// ALU-class or non-ALU-class for a known mnemonic.
pub fn classify(mnemonic: &str) -> Result<InstrClass, TraceError> {
    lookup(mnemonic)
        .map(|i| i.klass)
        .ok_or_else(|| TraceError::UnknownMnemonic {
            line: 0,
            mnemonic: mnemonic.to_string(),
        })
}

/// Map a register token (`x7`, ABI name) to its index.
pub fn register_index(token: &str) -> Option<u8> {
    const ABI: [&str; 32] = [
        "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1", "a0", "a1", "a2", "a3", "a4",
        "a5", "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "t3", "t4",
        "t5", "t6",
    ];
    if let Some(rest) = token.strip_prefix('x') {
        if let Ok(i) = rest.parse::<u8>() {
            if i < 32 {
                return Some(i);
            }
        }
        return Option::None;
    }
    if token == "fp" {
        return Some(8);
    }
    ABI.iter().position(|&n| n == token).map(|i| i as u8)
}

/// Parse the canonical trace format: `mnemonic rd rs1 rs2`, `-` for absent
/// fields, `#` comments, blank lines skipped.
pub fn parse_canonical(name: &str, text: &str) -> Result<Benchmark, TraceError> {
    let mut instructions = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(TraceError::MalformedLine {
                line,
                reason: format!(
                    "expected `mnemonic rd rs1 [rs2]`, got {} fields",
                    fields.len()
                ),
            });
        }
        let mnemonic = fields[0].to_ascii_lowercase();
        let klass =
            lookup(&mnemonic)
                .map(|i| i.klass)
                .ok_or_else(|| TraceError::UnknownMnemonic {
                    line,
                    mnemonic: mnemonic.clone(),
                })?;
        let reg = |token: &str| -> Result<Option<u8>, TraceError> {
            if token == "-" {
                return Ok(None);
            }
            register_index(token)
                .map(Some)
                .ok_or_else(|| TraceError::BadRegister {
                    line,
                    token: token.to_string(),
                })
        };
        let rd = reg(fields[1])?;
        let mut sources = Vec::new();
        for field in &fields[2..] {
            if let Some(r) = reg(field)? {
                sources.push(r);
            }
        }
        instructions.push(TraceInstr {
            index: instructions.len(),
            mnemonic,
            klass,
            rd,
            sources,
        });
    }
    if instructions.is_empty() {
        return Err(TraceError::EmptyTrace(name.to_string()));
    }
    Ok(Benchmark {
        name: name.to_string(),
        instructions,
    })
}

/// Write a benchmark back out in the canonical format.
pub fn emit_canonical(benchmark: &Benchmark) -> String {
    let mut out = String::new();
    for instr in &benchmark.instructions {
        let field = |r: Option<u8>| match r {
            Some(i) => format!("x{i}"),
            None => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "{} {} {} {}",
            instr.mnemonic,
            field(instr.rd),
            field(instr.sources.first().copied()),
            field(instr.sources.get(1).copied()),
        );
    }
    out
}

/// Result of scanning a Spike commit log.
#[derive(Debug)]
pub struct SpikeParse {
    pub benchmark: Benchmark,
    /// Lines that did not match the commit shape (headers, register dumps,
    /// unknown mnemonics) and were skipped.
    pub skipped_lines: usize,
}

/// Parse the Spike commit-log shape `core N: [priv] PC (RAW) DISASM`.
/// Non-matching lines are skipped and counted; a log with no parseable
/// instruction at all is an error.
pub fn parse_spike_log(name: &str, text: &str) -> Result<SpikeParse, TraceError> {
    let mut instructions = Vec::new();
    let mut skipped = 0usize;
    for raw in text.lines() {
        match parse_spike_line(raw, instructions.len()) {
            Some(instr) => instructions.push(instr),
            None => {
                if !raw.trim().is_empty() {
                    skipped += 1;
                }
            }
        }
    }
    if instructions.is_empty() {
        return Err(TraceError::EmptyTrace(name.to_string()));
    }
    Ok(SpikeParse {
        benchmark: Benchmark {
            name: name.to_string(),
            instructions,
        },
        skipped_lines: skipped,
    })
}

fn parse_spike_line(raw: &str, index: usize) -> Option<TraceInstr> {
    let mut tokens = raw.split_whitespace();
    if tokens.next()? != "core" {
        return None;
    }
    let core = tokens.next()?;
    if !core.ends_with(':') || !core[..core.len() - 1].chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    // Optional privilege level between the core id and the PC.
    let mut pc = tokens.next()?;
    if pc.chars().all(|c| c.is_ascii_digit()) {
        pc = tokens.next()?;
    }
    if !pc.starts_with("0x") {
        return None;
    }
    let rawword = tokens.next()?;
    if !(rawword.starts_with("(0x") && rawword.ends_with(')')) {
        return None;
    }
    let mnemonic = tokens.next()?.to_ascii_lowercase();
    let operands: Vec<String> = tokens
        .map(|t| t.trim_end_matches(',').to_string())
        .collect();
    build_instr(&mnemonic, &operands, index)
}

/// Turn a disassembled mnemonic + operand tokens into a TraceInstr,
/// following the mnemonic's operand shape. Returns None for unknown
/// mnemonics or operand text that does not fit the shape.
fn build_instr(mnemonic: &str, operands: &[String], index: usize) -> Option<TraceInstr> {
    let info = lookup(mnemonic)?;
    let reg = |i: usize| -> Option<u8> { register_index(operands.get(i)?.as_str()) };
    // `off(base)` memory operand.
    let mem_base = |i: usize| -> Option<u8> {
        let t = operands.get(i)?;
        let open = t.find('(')?;
        let close = t.rfind(')')?;
        register_index(&t[open + 1..close])
    };

    let (rd, sources) = match info.shape {
        Shape::RdRsRs => (Some(reg(0)?), vec![reg(1)?, reg(2)?]),
        Shape::RdRsImm => (Some(reg(0)?), vec![reg(1)?]),
        Shape::RdMem => (Some(reg(0)?), vec![mem_base(1)?]),
        Shape::StoreMem => (None, vec![reg(0)?, mem_base(1)?]),
        Shape::RsRsTarget => (None, vec![reg(0)?, reg(1)?]),
        Shape::RdImm => (Some(reg(0)?), vec![]),
        Shape::RdRs => (Some(reg(0)?), vec![reg(1)?]),
        Shape::RsTarget | Shape::RsOnly => (None, vec![reg(0)?]),
        Shape::Target => (info.implied_rd, vec![]),
        Shape::Jalr => match operands.len() {
            1 => (Some(1), vec![mem_base(0).or_else(|| reg(0))?]),
            2 => (Some(reg(0)?), vec![mem_base(1).or_else(|| reg(1))?]),
            _ => (Some(reg(0)?), vec![reg(1)?]),
        },
        Shape::RdCsrRs => (Some(reg(0)?), vec![reg(2)?]),
        Shape::RdCsrImm => (Some(reg(0)?), vec![]),
        Shape::CsrRs => (None, vec![reg(1)?]),
        Shape::None => (info.implied_rd, vec![]),
    };
    Some(TraceInstr {
        index,
        mnemonic: mnemonic.to_string(),
        klass: info.klass,
        rd,
        sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_direct_mapping() {
        let b = parse_canonical("t", "add x5 x6 x7\n").unwrap();
        let i = &b.instructions[0];
        assert_eq!(i.klass, InstrClass::Alu);
        assert_eq!(i.rd, Some(5));
        assert_eq!(i.sources, vec![6, 7]);
    }

    #[test]
    fn canonical_load_classification() {
        let b = parse_canonical("t", "lw x5 x6 -\n").unwrap();
        let i = &b.instructions[0];
        assert_eq!(i.klass, InstrClass::NonAlu);
        assert_eq!(i.rd, Some(5));
        assert_eq!(i.sources, vec![6]);
    }

    #[test]
    fn canonical_rejects_unknown_mnemonic() {
        assert!(matches!(
            parse_canonical("t", "frobnicate x1 x2 -\n"),
            Err(TraceError::UnknownMnemonic { .. })
        ));
    }

    #[test]
    fn canonical_reports_line_numbers() {
        let err = parse_canonical("t", "add x1 x2 x3\nbogus\n").unwrap_err();
        match err {
            TraceError::MalformedLine { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonical_comments_and_blanks() {
        let text = "# header\n\nadd x1 x2 x3 # trailing\n  \nsub x4 x1 x1\n";
        let b = parse_canonical("t", text).unwrap();
        assert_eq!(b.instructions.len(), 2);
        assert_eq!(b.instructions[1].index, 1);
    }

    #[test]
    fn round_trip_canonical() {
        let text = "add x5 x6 x7\nlw x5 x6 -\nsw - x7 x2\nbeq - x5 x7\njal x1 - -\n";
        let b = parse_canonical("bench", text).unwrap();
        let emitted = emit_canonical(&b);
        let again = parse_canonical("bench", &emitted).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify("xori").unwrap(), InstrClass::Alu);
        assert_eq!(classify("beq").unwrap(), InstrClass::NonAlu);
        // no shifter in the datapath
        assert_eq!(classify("sll").unwrap(), InstrClass::NonAlu);
        assert!(classify("frobnicate").is_err());
    }

    #[test]
    fn spike_add_line() {
        let line = "core   0: 0x80000004 (0x00a50533) add a0, a0, a1";
        let i = parse_spike_line(line, 0).unwrap();
        assert_eq!(i.klass, InstrClass::Alu);
        assert_eq!(i.rd, Some(10));
        assert_eq!(i.sources, vec![10, 11]);
    }

    #[test]
    fn spike_load_with_abi_base() {
        let line = "core   0: 0x80000008 (0x0000a503) lw a0, 0(ra)";
        let i = parse_spike_line(line, 0).unwrap();
        assert_eq!(i.klass, InstrClass::NonAlu);
        assert_eq!(i.rd, Some(10));
        assert_eq!(i.sources, vec![1]);
    }

    #[test]
    fn spike_priv_level_tolerated() {
        let line = "core   0: 3 0x80000004 (0x00a50533) add a0, a0, a1";
        let i = parse_spike_line(line, 0).unwrap();
        assert_eq!(i.rd, Some(10));
    }

    #[test]
    fn spike_garbage_lines_are_counted() {
        let log = "spike v1.1.0\ncore   0: 0x80000004 (0x00a50533) add a0, a0, a1\nwarning: x\n";
        let parse = parse_spike_log("t", log).unwrap();
        assert_eq!(parse.benchmark.instructions.len(), 1);
        assert_eq!(parse.skipped_lines, 2);
    }

    #[test]
    fn spike_empty_log_is_an_error() {
        assert!(matches!(
            parse_spike_log("t", "nothing here\n"),
            Err(TraceError::EmptyTrace(_))
        ));
    }

    #[test]
    fn spike_store_and_branch_operands() {
        let sw = parse_spike_line("core 0: 0x1 (0x1) sw a0, 8(sp)", 0).unwrap();
        assert_eq!(sw.rd, None);
        assert_eq!(sw.sources, vec![10, 2]);
        let bne = parse_spike_line("core 0: 0x1 (0x1) bne a4, a5, pc + 8", 1).unwrap();
        assert_eq!(bne.rd, None);
        assert_eq!(bne.sources, vec![14, 15]);
    }

    #[test]
    fn spike_pseudo_forms() {
        let mv = parse_spike_line("core 0: 0x1 (0x1) mv a0, a1", 0).unwrap();
        assert_eq!(mv.klass, InstrClass::Alu);
        assert_eq!(mv.rd, Some(10));
        assert_eq!(mv.sources, vec![11]);

        let li = parse_spike_line("core 0: 0x1 (0x1) li t0, 4096", 0).unwrap();
        assert_eq!(li.klass, InstrClass::Alu);
        assert_eq!(li.rd, Some(5));
        assert!(li.sources.is_empty());

        let ret = parse_spike_line("core 0: 0x1 (0x1) ret", 0).unwrap();
        assert_eq!(ret.klass, InstrClass::NonAlu);
        assert_eq!(ret.rd, None);

        let jalr = parse_spike_line("core 0: 0x1 (0x1) jalr ra, 0(t0)", 0).unwrap();
        assert_eq!(jalr.rd, Some(1));
        assert_eq!(jalr.sources, vec![5]);

        let call = parse_spike_line("core 0: 0x1 (0x1) call 0x80001000", 0).unwrap();
        assert_eq!(call.rd, Some(1));
    }

    #[test]
    fn register_names() {
        assert_eq!(register_index("x0"), Some(0));
        assert_eq!(register_index("zero"), Some(0));
        assert_eq!(register_index("fp"), Some(8));
        assert_eq!(register_index("s0"), Some(8));
        assert_eq!(register_index("t6"), Some(31));
        assert_eq!(register_index("x32"), None);
        assert_eq!(register_index("q3"), None);
    }
}
