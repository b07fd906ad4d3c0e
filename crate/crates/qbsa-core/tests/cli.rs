//! End-to-end checks of the qbsa-sim binary: exit codes, golden CSV/JSON
//! output, determinism under a fixed seed, and fault injection through the
//! netlist JSON path.

use std::path::Path;
use std::process::{Command, Output};

fn qbsa_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbsa-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn timing_reports_and_exits_zero() {
    let out = qbsa_sim(&["timing", "--format", "json"]);
    assert!(out.status.success(), "{out:?}");
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["latency"], 15);
    assert_eq!(v["ii_dep"], 8);
    assert_eq!(v["ii_indep"], 1);
    assert_eq!(v["ratio_32lfa"], 1.5);
    assert_eq!(v["ratio_4bsa"], 2.0);
    assert_eq!(
        v["per_block_cycles"],
        serde_json::json!([8, 9, 10, 11, 12, 13, 14, 15])
    );
}

#[test]
fn verify_ok_and_deterministic_under_seed() {
    let run = || qbsa_sim(&["--seed", "7", "verify", "--vectors", "4096"]);
    let first = run();
    assert!(first.status.success(), "{first:?}");
    assert!(stdout(&first).contains("0 mismatches"));
    let second = run();
    assert_eq!(
        first.stdout, second.stdout,
        "reports must be byte-identical"
    );
}

#[test]
fn verify_detects_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("qbsa32.json");
    let bad = dir.path().join("mutated.json");

    let out = qbsa_sim(&["netlist", "--emit", good.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");

    // Flip one gate kind; depths and loops stay intact, the function breaks.
    let text = std::fs::read_to_string(&good).unwrap();
    let mutated = text.replacen("\"XOR2\"", "\"OR2\"", 1);
    assert_ne!(text, mutated, "netlist must contain an XOR2 to flip");
    std::fs::write(&bad, mutated).unwrap();

    let out = qbsa_sim(&[
        "verify",
        "--vectors",
        "4096",
        "--netlist",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(stdout(&out).contains("FAIL"), "{}", stdout(&out));

    // The unmutated emission still verifies.
    let out = qbsa_sim(&[
        "verify",
        "--vectors",
        "4096",
        "--netlist",
        good.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
}

#[test]
fn netlist_check_passes_on_emitted_unit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unit.json");
    assert!(qbsa_sim(&["netlist", "--emit", path.to_str().unwrap()])
        .status
        .success());
    let out = qbsa_sim(&["netlist", "--check", path.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("0 balance violations"));
}

#[test]
fn ipc_csv_golden() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("tiny.trace");
    std::fs::write(&trace, "add x1 x2 x3\nadd x4 x1 x1\n").unwrap();

    let out = qbsa_sim(&[
        "ipc",
        "--trace",
        trace.to_str().unwrap(),
        "--profiles",
        "qbsp,32lfp",
        "--lambda",
        "1..2",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{out:?}");
    let expected = "\
benchmark,profile,lambda,total_instructions,total_nops,ipc
tiny,qBSP,1,2,7,0.222222
tiny,qBSP,2,2,7,0.222222
tiny,32LFP,1,2,11,0.153846
tiny,32LFP,2,2,11,0.153846
";
    assert_eq!(stdout(&out), expected);
}

#[test]
fn ipc_compare_csv_golden() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("tiny.trace");
    std::fs::write(&trace, "add x1 x2 x3\nadd x4 x1 x1\n").unwrap();
    let cmp = dir.path().join("ratios.csv");

    let out = qbsa_sim(&[
        "ipc",
        "--trace",
        trace.to_str().unwrap(),
        "--lambda",
        "1",
        "--format",
        "csv",
        "--compare",
        "qbsp,4bsp",
        "--compare-out",
        cmp.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let expected = "\
benchmark,lambda,ipc_a,ipc_b,ratio
tiny,1,0.222222,0.117647,1.888889
";
    assert_eq!(std::fs::read_to_string(&cmp).unwrap(), expected);
}

#[test]
fn ipc_chain_ratio_approaches_three_halves() {
    // 100-instruction dependent chain: qBSP/32LFP = 1189/793 ≈ 1.4994.
    let trace = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../traces/dependent_chain.trace");
    let dir = tempfile::tempdir().unwrap();
    let cmp = dir.path().join("ratio.csv");
    let out = qbsa_sim(&[
        "ipc",
        "--trace",
        trace.to_str().unwrap(),
        "--lambda",
        "1",
        "--format",
        "csv",
        "--compare",
        "qbsp,32lfp",
        "--compare-out",
        cmp.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(&cmp).unwrap();
    let ratio: f64 = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .last()
        .unwrap()
        .parse()
        .unwrap();
    assert!((ratio - 1.5).abs() < 0.01, "ratio {ratio}");
}

#[test]
fn ipc_reads_bundled_spike_log() {
    let log = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../traces/sample_spike.log");
    let out = qbsa_sim(&[
        "ipc",
        "--trace",
        log.to_str().unwrap(),
        "--spike",
        "--lambda",
        "1,10",
        "--format",
        "table",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("qBSP"));
    assert!(text.contains("4BSP"));
    assert!(text.contains("qBSP / 32LFP"));
}

#[test]
fn ipc_missing_trace_is_usage_error() {
    let out = qbsa_sim(&["ipc", "--trace", "/nonexistent/x.trace"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = qbsa_sim(&["timing", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn wave_single_add_settles_at_15() {
    let out = qbsa_sim(&["wave", "--op", "add", "--a", "0xffffffff", "--b", "0x0"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let s31 = header.iter().position(|&h| h == "s31").expect("s31 port");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let first_one = rows.iter().position(|r| r[s31] == "1");
    assert_eq!(first_one, Some(15), "S[31] must settle at cycle 15");
}

#[test]
fn wave_dependent_results_every_8() {
    // 1 + 1, then two dependent +1: s0 toggles at 8, 16, 24.
    let out = qbsa_sim(&[
        "wave",
        "--op",
        "add",
        "--a",
        "1",
        "--b",
        "1",
        "--b",
        "1",
        "--b",
        "1",
        "--dependent",
        "--cycles",
        "40",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|&h| h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // results 2, 3, 4: block-0 nibble = 2 at cycle 8, 3 at 16, 4 at 24
    let nibble = |row: &Vec<&str>| -> u8 {
        (0..4).fold(0, |acc, i| {
            acc | (((row[col(&format!("s{i}"))] == "1") as u8) << i)
        })
    };
    assert_eq!(nibble(&rows[8]), 2);
    assert_eq!(nibble(&rows[16]), 3);
    assert_eq!(nibble(&rows[24]), 4);
}

#[test]
fn wave_independent_results_on_consecutive_cycles() {
    let out = qbsa_sim(&[
        "wave", "--op", "add", "--a", "1", "--a", "2", "--b", "0", "--b", "0",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let s0 = header.iter().position(|&h| h == "s0").unwrap();
    let s1 = header.iter().position(|&h| h == "s1").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // result 1 (s0 set) lands at cycle 8 for block 0; result 2 (s1 set) at 9
    assert_eq!(rows[8][s0], "1");
    assert_eq!(rows[9][s1], "1");
    assert_eq!(rows[9][s0], "0");
}
