use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use chips::corpus::Scenario;
use chips::runtime::trace::{decode, CacheSnapshot, TraceRecord};

use crate::{ReportArgs, EXIT_DIAG, EXIT_OK, EXIT_USAGE};

pub(crate) fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn stddev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs.iter().copied());
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Consecutive record ranges belonging to one phase. With a scenario the
/// phase of each round is looked up; otherwise a phase ends wherever
/// `images_requested` changes.
pub(crate) fn phase_ranges(recs: &[TraceRecord], scenario: Option<&Scenario>) -> Vec<Range<usize>> {
    let key = |r: &TraceRecord| match scenario {
        Some(s) => s.phase_index(r.round) as i64,
        None => r.images_requested,
    };
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=recs.len() {
        if i == recs.len() || key(&recs[i]) != key(&recs[start]) {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Scenario echoed in a `# config {...}` header line, if any.
fn header_scenario(text: &str) -> Option<Scenario> {
    let line = text.lines().take_while(|l| l.starts_with('#')).find_map(|l| l.strip_prefix("# config "))?;
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    serde_json::from_value(v.get("scenario")?.clone()).ok()
}

fn render(recs: &[TraceRecord], scenario: Option<&Scenario>, phase_stats: bool, window: usize) -> String {
    let mut s = String::new();
    let end = recs.last().map_or(0.0, |r| r.sim_time_s);
    let _ = writeln!(s, "rounds {}  sim_time_s {:.1}", recs.len(), end);
    for (i, range) in phase_ranges(recs, scenario).into_iter().enumerate() {
        let rows = &recs[range];
        let rt: Vec<f64> = rows.iter().map(|r| r.response_time_s).collect();
        let min = rt.iter().copied().fold(f64::INFINITY, f64::min);
        let max = rt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(
            s,
            "phase {}: rounds {}..{} images {} n={} mean_response_s={:.3} min={:.3} max={:.3}",
            i + 1,
            rows[0].round,
            rows[rows.len() - 1].round,
            rows[0].images_requested,
            rows.len(),
            mean(rt.iter().copied()),
            min,
            max
        );
        if phase_stats {
            let cs: Vec<f64> = rows.iter().map(|r| r.cache_size as f64).collect();
            let misses: i64 = rows.iter().map(|r| r.cache_misses).sum();
            let _ = writeln!(
                s,
                "  cache_size mean={:.2} min={} max={} stddev={:.3}  misses total={} mean={:.3}",
                mean(cs.iter().copied()),
                rows.iter().map(|r| r.cache_size).min().unwrap_or(0),
                rows.iter().map(|r| r.cache_size).max().unwrap_or(0),
                stddev(&cs),
                misses,
                misses as f64 / rows.len() as f64
            );
        }
    }
    let tail = &recs[recs.len().saturating_sub(window)..];
    let cs: Vec<f64> = tail.iter().map(|r| r.cache_size as f64).collect();
    let _ = writeln!(
        s,
        "cache band (last {} rounds): min={} max={} stddev={:.3}",
        tail.len(),
        tail.iter().map(|r| r.cache_size).min().unwrap_or(0),
        tail.iter().map(|r| r.cache_size).max().unwrap_or(0),
        stddev(&cs)
    );
    s
}

fn write_plot(dir: &Path, recs: &[TraceRecord]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut rt = String::new();
    let mut cs = String::new();
    for r in recs {
        let _ = writeln!(rt, "{} {}", r.sim_time_s, r.response_time_s);
        let _ = writeln!(cs, "{} {}", r.sim_time_s, r.cache_size);
    }
    std::fs::write(dir.join("response_time.dat"), rt)?;
    std::fs::write(dir.join("cache_size.dat"), cs)
}

/// First (round, image, provider a, provider b) where an image sits in two
/// provider caches at once.
pub fn shard_violation(snaps: &[CacheSnapshot]) -> Option<(u64, i64, usize, usize)> {
    for snap in snaps {
        let mut owner: HashMap<i64, usize> = HashMap::new();
        for (p, cache) in snap.caches.iter().enumerate() {
            for &id in cache {
                if let Some(&q) = owner.get(&id) {
                    if q != p {
                        return Some((snap.round, id, q, p));
                    }
                }
                owner.insert(id, p);
            }
        }
    }
    None
}

fn read_dump(path: &Path) -> Result<Vec<CacheSnapshot>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1)))
        .collect()
}

pub fn cmd_report(a: &ReportArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match std::fs::read_to_string(&a.trace) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", a.trace.display());
            return EXIT_USAGE;
        }
    };
    let recs = match decode(&text) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", a.trace.display());
            return EXIT_USAGE;
        }
    };
    let scenario = header_scenario(&text);
    let _ = out.write_all(render(&recs, scenario.as_ref(), a.phase_stats, a.window as usize).as_bytes());
    if let Some(dir) = &a.plot_data {
        if let Err(e) = write_plot(dir, &recs) {
            let _ = writeln!(err, "error: cannot write plot data to {}: {e}", dir.display());
            return EXIT_USAGE;
        }
    }
    if let Some(path) = &a.verify_shard {
        let snaps = match read_dump(path) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
        };
        match shard_violation(&snaps) {
            None => {
                let _ = writeln!(out, "shard check: {} rounds, caches disjoint", snaps.len());
            }
            Some((round, id, p, q)) => {
                let _ = writeln!(
                    err,
                    "shard check failed: round {round}: image {id} cached by providers {} and {}",
                    p + 1,
                    q + 1
                );
                return EXIT_DIAG;
            }
        }
    }
    EXIT_OK
}
