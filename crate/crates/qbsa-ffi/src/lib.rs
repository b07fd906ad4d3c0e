//! C ABI over qbsa-core: opaque handles, status codes, and a generated
//! header (`include/qbsa.h`) so other languages can bind the unit
//! generator, the functional checks and the IPC model.
//!
//! Conventions: every function returns a [`QbsaStatus`]; results come back
//! through out-pointers. Handles are created by `*_new`/`*_parse` functions
//! and released by the matching `*_free`; strings returned by the library
//! are released with [`qbsa_string_free`].

use qbsa_core::alu::AluOpcode;
use qbsa_core::ipc::{self, ProfileKind, TimingProfile};
use qbsa_core::netlist::Netlist;
use qbsa_core::oracle;
use qbsa_core::qbsa::{
    build_qbsa32, check_qbsa32_random, qbsa32_from_netlist, timing_report, Qbsa32,
};
use qbsa_core::trace::{self, Benchmark};
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbsaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    /// A verification run found mismatches.
    CheckFailed = 4,
    Internal = 5,
}

/// ALU operation selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbsaOpcode {
    Add = 0,
    Sub = 1,
    Slt = 2,
    Eq = 3,
    And = 4,
    Or = 5,
    Xor = 6,
    Nor = 7,
}

impl From<QbsaOpcode> for AluOpcode {
    fn from(op: QbsaOpcode) -> Self {
        match op {
            QbsaOpcode::Add => AluOpcode::Add,
            QbsaOpcode::Sub => AluOpcode::Sub,
            QbsaOpcode::Slt => AluOpcode::Slt,
            QbsaOpcode::Eq => AluOpcode::Eq,
            QbsaOpcode::And => AluOpcode::And,
            QbsaOpcode::Or => AluOpcode::Or,
            QbsaOpcode::Xor => AluOpcode::Xor,
            QbsaOpcode::Nor => AluOpcode::Nor,
        }
    }
}

/// Processor timing profile selector for the IPC model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbsaProfile {
    Qbsp = 0,
    Lfp32 = 1,
    Bsp4 = 2,
}

impl From<QbsaProfile> for ProfileKind {
    fn from(p: QbsaProfile) -> Self {
        match p {
            QbsaProfile::Qbsp => ProfileKind::Qbsp,
            QbsaProfile::Lfp32 => ProfileKind::Lfp32,
            QbsaProfile::Bsp4 => ProfileKind::Bsp4,
        }
    }
}

/// Timing summary of the generated unit.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QbsaTiming {
    pub latency: u32,
    pub ii_dep: u32,
    pub ii_indep: u32,
    pub ratio_32lfa: f64,
    pub ratio_4bsa: f64,
    pub per_block_cycles: [u32; 8],
}

/// IPC estimate for one trace under one profile.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QbsaIpcResult {
    pub total_instructions: u64,
    pub total_nops: u64,
    pub ipc: f64,
}

/// Opaque handle to the generated 32-bit unit.
pub struct QbsaUnit {
    inner: Qbsa32,
}

/// Opaque handle to a parsed instruction trace.
pub struct QbsaTrace {
    inner: Benchmark,
}

unsafe fn write_out<T>(out: *mut T, value: T) -> QbsaStatus {
    if out.is_null() {
        return QbsaStatus::NullPointer;
    }
    out.write(value);
    QbsaStatus::Ok
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, QbsaStatus> {
    if ptr.is_null() {
        return Err(QbsaStatus::NullPointer);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| QbsaStatus::InvalidArgument)
}

/// Generate the 32-bit block-skewed unit.
///
/// # Safety
/// `out` must be a valid pointer; the returned handle must be released with
/// [`qbsa_unit_free`].
#[no_mangle]
pub unsafe extern "C" fn qbsa_unit_new(out: *mut *mut QbsaUnit) -> QbsaStatus {
    match catch_unwind(build_qbsa32) {
        Ok(Ok(inner)) => write_out(out, Box::into_raw(Box::new(QbsaUnit { inner }))),
        Ok(Err(_)) | Err(_) => QbsaStatus::Internal,
    }
}

/// Reconstruct a unit from netlist JSON (see [`qbsa_unit_to_json`]).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` as for [`qbsa_unit_new`].
#[no_mangle]
pub unsafe extern "C" fn qbsa_unit_from_json(
    json: *const c_char,
    out: *mut *mut QbsaUnit,
) -> QbsaStatus {
    let text = match cstr(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let netlist = match Netlist::from_json(text) {
        Ok(n) => n,
        Err(_) => return QbsaStatus::ParseError,
    };
    match qbsa32_from_netlist(netlist) {
        Ok(inner) => write_out(out, Box::into_raw(Box::new(QbsaUnit { inner }))),
        Err(_) => QbsaStatus::ParseError,
    }
}

/// Release a unit handle. A null pointer is ignored.
///
/// # Safety
/// `unit` must be null or a pointer from `qbsa_unit_new`/`qbsa_unit_from_json`
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn qbsa_unit_free(unit: *mut QbsaUnit) {
    if !unit.is_null() {
        drop(Box::from_raw(unit));
    }
}

/// Number of cells in the unit's netlist.
///
/// # Safety
/// `unit` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qbsa_unit_cell_count(unit: *const QbsaUnit, out: *mut u64) -> QbsaStatus {
    if unit.is_null() {
        return QbsaStatus::NullPointer;
    }
    write_out(out, (*unit).inner.netlist.cell_count() as u64)
}

/// Serialize the unit's netlist to JSON. Free the string with
/// [`qbsa_string_free`].
///
/// # Safety
/// `unit` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qbsa_unit_to_json(
    unit: *const QbsaUnit,
    out: *mut *mut c_char,
) -> QbsaStatus {
    if unit.is_null() {
        return QbsaStatus::NullPointer;
    }
    let json = (*unit).inner.netlist.to_json();
    match CString::new(json) {
        Ok(s) => write_out(out, s.into_raw()),
        Err(_) => QbsaStatus::Internal,
    }
}

/// Release a string returned by this library. A null pointer is ignored.
///
/// # Safety
/// `s` must be null or a pointer previously returned by this library.
#[no_mangle]
pub unsafe extern "C" fn qbsa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Measure the unit's timing by simulation probes.
///
/// # Safety
/// `unit` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qbsa_unit_timing(
    unit: *const QbsaUnit,
    out: *mut QbsaTiming,
) -> QbsaStatus {
    if unit.is_null() {
        return QbsaStatus::NullPointer;
    }
    let report = match catch_unwind(AssertUnwindSafe(|| timing_report(&(*unit).inner))) {
        Ok(Ok(r)) => r,
        _ => return QbsaStatus::Internal,
    };
    write_out(
        out,
        QbsaTiming {
            latency: report.latency,
            ii_dep: report.ii_dep,
            ii_indep: report.ii_indep,
            ratio_32lfa: report.ratio_32lfa,
            ratio_4bsa: report.ratio_4bsa,
            per_block_cycles: report.per_block_cycles,
        },
    )
}

/// Run the randomized functional check: `vectors_per_op` seeded vectors per
/// operation against the reference semantics. Writes the mismatch count and
/// returns `CheckFailed` when it is nonzero.
///
/// # Safety
/// `unit` must be a live handle; `out_mismatches` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qbsa_unit_check(
    unit: *const QbsaUnit,
    vectors_per_op: u64,
    seed: u64,
    out_mismatches: *mut u64,
) -> QbsaStatus {
    if unit.is_null() {
        return QbsaStatus::NullPointer;
    }
    if vectors_per_op == 0 {
        return QbsaStatus::InvalidArgument;
    }
    let result = catch_unwind(AssertUnwindSafe(|| {
        check_qbsa32_random(&(*unit).inner, vectors_per_op as usize, seed)
    }));
    let (_, mismatches) = match result {
        Ok(r) => r,
        Err(_) => return QbsaStatus::Internal,
    };
    let count = mismatches.len() as u64;
    let status = write_out(out_mismatches, count);
    if status != QbsaStatus::Ok {
        return status;
    }
    if count == 0 {
        QbsaStatus::Ok
    } else {
        QbsaStatus::CheckFailed
    }
}

/// Reference 32-bit semantics of one operation.
///
/// # Safety
/// `out_s` and `out_carry` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qbsa_alu_exec(
    op: QbsaOpcode,
    a: u32,
    b: u32,
    out_s: *mut u32,
    out_carry: *mut u8,
) -> QbsaStatus {
    let r = oracle::exec(op.into(), a, b);
    let status = write_out(out_s, r.s);
    if status != QbsaStatus::Ok {
        return status;
    }
    write_out(out_carry, r.c_out as u8)
}

/// Parse a canonical-format trace. Free with [`qbsa_trace_free`].
///
/// # Safety
/// `name` and `text` must be NUL-terminated strings; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qbsa_trace_parse_canonical(
    name: *const c_char,
    text: *const c_char,
    out: *mut *mut QbsaTrace,
) -> QbsaStatus {
    let (name, text) = match (cstr(name), cstr(text)) {
        (Ok(n), Ok(t)) => (n, t),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match trace::parse_canonical(name, text) {
        Ok(inner) => write_out(out, Box::into_raw(Box::new(QbsaTrace { inner }))),
        Err(_) => QbsaStatus::ParseError,
    }
}

/// Parse a Spike commit log. Unparseable lines are skipped; a log with no
/// instructions is a parse error.
///
/// # Safety
/// As for [`qbsa_trace_parse_canonical`].
#[no_mangle]
pub unsafe extern "C" fn qbsa_trace_parse_spike(
    name: *const c_char,
    text: *const c_char,
    out: *mut *mut QbsaTrace,
) -> QbsaStatus {
    let (name, text) = match (cstr(name), cstr(text)) {
        (Ok(n), Ok(t)) => (n, t),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match trace::parse_spike_log(name, text) {
        Ok(parsed) => write_out(
            out,
            Box::into_raw(Box::new(QbsaTrace {
                inner: parsed.benchmark,
            })),
        ),
        Err(_) => QbsaStatus::ParseError,
    }
}

/// Release a trace handle. A null pointer is ignored.
///
/// # Safety
/// `trace` must be null or an unfreed pointer from a parse function.
#[no_mangle]
pub unsafe extern "C" fn qbsa_trace_free(trace: *mut QbsaTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of instructions in a trace.
///
/// # Safety
/// `trace` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qbsa_trace_len(trace: *const QbsaTrace, out: *mut u64) -> QbsaStatus {
    if trace.is_null() {
        return QbsaStatus::NullPointer;
    }
    write_out(out, (*trace).inner.instructions.len() as u64)
}

/// Estimate IPC of a trace under a profile and non-ALU latency.
///
/// # Safety
/// `trace` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qbsa_ipc_estimate(
    trace: *const QbsaTrace,
    profile: QbsaProfile,
    non_alu_latency: u32,
    out: *mut QbsaIpcResult,
) -> QbsaStatus {
    if trace.is_null() {
        return QbsaStatus::NullPointer;
    }
    let profile = match TimingProfile::new(profile.into(), non_alu_latency) {
        Ok(p) => p,
        Err(_) => return QbsaStatus::InvalidArgument,
    };
    match ipc::schedule(&(*trace).inner.instructions, &profile) {
        Ok(r) => write_out(
            out,
            QbsaIpcResult {
                total_instructions: r.total_instructions,
                total_nops: r.total_nops,
                ipc: r.ipc,
            },
        ),
        Err(_) => QbsaStatus::InvalidArgument,
    }
}
