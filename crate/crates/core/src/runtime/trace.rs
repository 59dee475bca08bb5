//! Per-round observations and their CSV / JSON-lines encodings.

use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "round,sim_time_s,images_requested,cache_misses,response_time_s,error_s,integral_term,cache_size,user_connected";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub round: u64,
    pub sim_time_s: f64,
    pub images_requested: i64,
    pub cache_misses: i64,
    pub response_time_s: f64,
    pub error_s: f64,
    pub integral_term: f64,
    pub cache_size: i64,
    pub user_connected: bool,
}

/// Contents of the probed caches at the end of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheSnapshot {
    pub round: u64,
    pub caches: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub caches: Vec<CacheSnapshot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Csv,
    Jsonl,
}

/// A variable of a named automaton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub automaton: String,
    pub var: String,
}

impl Probe {
    pub fn new(automaton: impl Into<String>, var: impl Into<String>) -> Probe {
        Probe {
            automaton: automaton.into(),
            var: var.into(),
        }
    }
}

/// Where the columns of a trace record are read from. A round ends each
/// time the internal transition of `marker` fires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLayout {
    pub marker: String,
    pub images_requested: Probe,
    pub cache_misses: Probe,
    pub response_time: Probe,
    pub error: Probe,
    pub integral: Probe,
    pub cache_size: Probe,
    pub user_connected: Probe,
    pub caches: Vec<Probe>,
}

pub fn to_csv(records: &[TraceRecord]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if records.is_empty() {
        let mut s = CSV_HEADER.to_string();
        s.push('\n');
        return s;
    }
    for r in records {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn to_jsonl(records: &[TraceRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("record serializes"));
        s.push('\n');
    }
    s
}

pub fn encode(records: &[TraceRecord], format: TraceFormat) -> String {
    match format {
        TraceFormat::Csv => to_csv(records),
        TraceFormat::Jsonl => to_jsonl(records),
    }
}

/// Parses a CSV trace; lines starting with `#` are comments.
pub fn from_csv(text: &str) -> Result<Vec<TraceRecord>, String> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| [l, "\n"])
        .collect();
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut rd = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    let got: Vec<&str> = header.iter().collect();
    let want: Vec<&str> = CSV_HEADER.split(',').collect();
    if got != want {
        return Err(format!("unexpected header `{}`", got.join(",")));
    }
    rd.deserialize()
        .map(|r| r.map_err(|e| e.to_string()))
        .collect()
}

pub fn from_jsonl(text: &str) -> Result<Vec<TraceRecord>, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

/// Detects the format from the first non-comment line.
pub fn decode(text: &str) -> Result<Vec<TraceRecord>, String> {
    let first = text.lines().find(|l| !l.starts_with('#') && !l.trim().is_empty());
    match first {
        Some(l) if l.trim_start().starts_with('{') => from_jsonl(text),
        _ => from_csv(text),
    }
}
