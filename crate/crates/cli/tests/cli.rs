use std::path::Path;
use std::process::Command;

use chips_cli::{EXIT_DEADLOCK, EXIT_DIAG, EXIT_OK, EXIT_USAGE, EXIT_XFORM};

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn chips(args: &[&str]) -> Out {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("chips").chain(args.iter().copied());
    let code = chips_cli::run(argv, &mut out, &mut err);
    Out {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

const HOST: &str =
    r#"{"name":"host","processor_count":1,"memory_bytes":1024,"clock_hz":1000,"peripherals":[]}"#;

const RING: &str = "
import \"host.json\" as host;
physical host(int x) -> (x)
logical inc(int x) init {
  int y = 0;
} then {
  y = x + 1;
} -> (y)

SYSTEM {
  host h;
  inc a;
  inc b;
  link a to h;
  link b to h;
  b.in(a.out);
  h.in(b.out);
  a.in(h.out);
}
";

/// Writes `text` next to the host descriptor it imports.
fn model(dir: &Path, name: &str, text: &str) -> String {
    write(dir, "host.json", HOST);
    write(dir, name, text)
}

#[test]
fn check_builtins_and_corpus_file() {
    assert_eq!(chips(&["check", "teastore"]).code, EXIT_OK);
    assert_eq!(chips(&["check", "teastore-multi"]).code, EXIT_OK);
    let corpus = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/corpus/v1/teastore.chips");
    let r = chips(&["check", corpus]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
}

#[test]
fn check_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.chips", "pure f(int x) -> (x + undefined_name)\n");
    let r = chips(&["check", &bad]);
    assert_eq!(r.code, EXIT_DIAG);
    assert!(r.stderr.contains("E-UNDEF"), "{}", r.stderr);
    assert!(r.stderr.contains("bad.chips:1:"), "{}", r.stderr);
    let syntax = write(dir.path(), "syn.chips", "logical (\n");
    assert_eq!(chips(&["check", &syntax]).code, EXIT_DIAG);
}

#[test]
fn usage_errors() {
    assert_eq!(chips(&[]).code, EXIT_USAGE);
    assert_eq!(chips(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(chips(&["check", "/no/such/file.chips"]).code, EXIT_USAGE);
    assert_eq!(chips(&["simulate", "--rounds", "0"]).code, EXIT_USAGE);
    assert_eq!(chips(&["simulate", "--rounds", "5", "--param", "pid_q=1"]).code, EXIT_USAGE);
    assert_eq!(chips(&["simulate", "--rounds", "5", "--param", "db_size=0"]).code, EXIT_USAGE);
    assert_eq!(chips(&["report", "/no/such/trace.csv"]).code, EXIT_USAGE);
    assert_eq!(chips(&["--help"]).code, EXIT_OK);
}

#[test]
fn compile_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(chips(&["compile", "teastore", "--out", &s(&a)]).code, EXIT_OK);
    assert_eq!(chips(&["compile", "teastore", "--out", &s(&b)]).code, EXIT_OK);
    let ja = std::fs::read(&a).unwrap();
    assert_eq!(ja, std::fs::read(&b).unwrap());
    let stdout = chips(&["compile", "teastore"]).stdout;
    assert_eq!(stdout.as_bytes(), &ja[..]);
    let net = chips::automata::Network::from_json(&stdout).unwrap();
    assert_eq!(net.automata.len(), 9);
    assert_eq!(net.kickstarter.as_deref(), Some("user_instance"));
}

#[test]
fn compile_lowering_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let src = model(
        dir.path(),
        "sink.chips",
        "import \"host.json\" as host;\nphysical host(int x) -> (x)\n\
         logical gen() init {\n} then {\n} -> (1)\n\
         logical sink(int x) init {\n} then {\n  int y = x;\n} -> ()\n\n\
         SYSTEM {\n  host h;\n  gen g;\n  sink s;\n  link g to h;\n  link s to h;\n  h.in(g.out);\n  s.in(h.out);\n}\n",
    );
    let r = chips(&["check", &src]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let r = chips(&["compile", &src]);
    assert_eq!(r.code, EXIT_XFORM, "{}", r.stderr);
    assert!(r.stderr.contains("E-XFORM"));
    let ring = model(dir.path(), "ring.chips", RING);
    assert_eq!(chips(&["compile", &ring, "--kickstarter", "nobody"]).code, EXIT_XFORM);
}

#[test]
fn custom_model_runs_without_layout() {
    let dir = tempfile::tempdir().unwrap();
    let ring = model(dir.path(), "ring.chips", RING);
    let r = chips(&["simulate", &ring, "--rounds", "7"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.starts_with("rounds=7 "), "{}", r.stdout);
}

#[test]
fn starved_network_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let src = model(
        dir.path(),
        "pair.chips",
        "import \"host.json\" as host;\nphysical host(int x) -> (x)\n\
         logical a() init {} then {} -> (1)\n\
         SYSTEM { host h; a a1; a a2; link a1 to h; link a2 to h; h.in(a1.out); }\n",
    );
    let r = chips(&["simulate", &src, "--kickstarter", "a1", "--rounds", "3"]);
    assert_eq!(r.code, EXIT_DEADLOCK, "{} {}", r.stdout, r.stderr);
    assert!(r.stderr.contains("E-DEADLOCK"));
}

#[test]
fn simulate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let r = chips(&["simulate", "--rounds", "400", "--seed", "3", "--trace", &s(&trace)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.starts_with("rounds=400 "));
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config {"));
    assert_eq!(lines.next().unwrap(), chips::runtime::trace::CSV_HEADER);
    assert_eq!(text.lines().count(), 402);

    let plot = dir.path().join("plot");
    let r = chips(&["report", &s(&trace), "--phase-stats", "--plot-data", &s(&plot)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("phase 1: rounds 1..300 images 2 n=300"), "{}", r.stdout);
    assert!(r.stdout.contains("phase 2: rounds 301..400 images 6 n=100"), "{}", r.stdout);
    assert!(r.stdout.contains("cache_size mean="));
    assert!(r.stdout.contains("cache band (last 200 rounds)"));
    for f in ["response_time.dat", "cache_size.dat"] {
        let data = std::fs::read_to_string(plot.join(f)).unwrap();
        assert_eq!(data.lines().count(), 400);
        assert_eq!(data.lines().next().unwrap().split(' ').count(), 2);
    }
}

#[test]
fn jsonl_trace_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let cfg = write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{"seed": 9, "rounds": 20, "trace": "{}", "trace_format": "jsonl", "params": {{"db_size": 30}}}}"#,
            s(&trace)
        ),
    );
    let r = chips(&["simulate", "--config", &cfg, "--rounds", "25"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let text = std::fs::read_to_string(&trace).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.contains(r#""seed":9"#) && header.contains(r#""db_size":30"#), "{header}");
    assert!(header.contains(r#""max_rounds":25"#), "{header}");
    let recs = chips::runtime::trace::decode(&text).unwrap();
    assert_eq!(recs.len(), 25);
    let bad = write(dir.path(), "bad.json", r#"{"sead": 1}"#);
    assert_eq!(chips(&["simulate", "--config", &bad]).code, EXIT_USAGE);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert_eq!(chips(&["simulate", "--rounds", "350", "--trace", &s(p)]).code, EXIT_OK);
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    assert_eq!(ta.lines().skip(1).collect::<Vec<_>>(), tb.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn report_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.csv", &format!("{}\n", chips::runtime::trace::CSV_HEADER));
    let r = chips(&["report", &empty]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.starts_with("rounds 0"));
    let junk = write(dir.path(), "j.csv", "round,oops\n1,2\n");
    assert_eq!(chips(&["report", &junk]).code, EXIT_USAGE);
}

#[test]
fn two_providers_shard_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let dump = dir.path().join("caches.jsonl");
    let r = chips(&[
        "simulate",
        "--providers",
        "2",
        "--rounds",
        "320",
        "--trace",
        &s(&trace),
        "--cache-dump",
        &s(&dump),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let r = chips(&["report", &s(&trace), "--verify-shard", &s(&dump)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("caches disjoint"));

    let overlap = write(dir.path(), "o.jsonl", "{\"round\":1,\"caches\":[[1,2],[2]]}\n");
    let r = chips(&["report", &s(&trace), "--verify-shard", &overlap]);
    assert_eq!(r.code, EXIT_DIAG);
    assert!(r.stderr.contains("image 2"));
    assert_eq!(chips(&["simulate", "teastore", "--providers", "0"]).code, EXIT_USAGE);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_chips");
    let ok = Command::new(exe).args(["check", "teastore"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(exe).args(["simulate", "--rounds", "0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let out = Command::new(exe).args(["simulate", "--rounds", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("rounds=2 "));
}
