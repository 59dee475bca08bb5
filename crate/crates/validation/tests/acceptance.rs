//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if
//! any criterion fails.

use std::cell::RefCell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chips::automata::{transform_block, Network, TransitionKind};
use chips::corpus::{self, Scenario, TeaStoreParams};
use chips::runtime::builtins::{self, Env};
use chips::runtime::trace::{to_csv, TraceRecord};
use chips::runtime::{init_run, BlockHarness, Prng, SimConfig, Step};
use chips::{frontend, sema, SourceMap, Value};
use chips_validation::blocks::{block, schedule, BlockSpec, Event, Observation};
use chips_validation::expanded::ExpandedAutomaton;
use chips_validation::lru;
use proptest::strategy::{Just, Strategy};
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn cli(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = chips_cli::run(std::iter::once("chips").chain(args.iter().copied()), &mut out, &mut err);
    (code, out, String::from_utf8_lossy(&err).into_owned())
}

fn config(seed: u64, rounds: u64) -> SimConfig {
    SimConfig {
        seed,
        max_rounds: rounds,
        ..SimConfig::default()
    }
}

fn run(providers: usize, c: &SimConfig) -> Result<Vec<TraceRecord>, String> {
    corpus::simulate(providers, c).map(|t| t.records).map_err(|d| d.to_string())
}

fn corpus_pipeline() -> Outcome {
    let t0 = Instant::now();
    let (code, _, err) = cli(&["check", "teastore"]);
    check(code == 0, format!("check exited {code}: {err}"))?;
    let (code, json, err) = cli(&["compile", "teastore"]);
    check(code == 0, format!("compile exited {code}: {err}"))?;
    let net = Network::from_json(&String::from_utf8_lossy(&json)).map_err(|e| e.to_string())?;
    let model = corpus::analyze_corpus(&corpus::teastore_model()).map_err(|_| "corpus analysis failed")?;
    let instances: Vec<&str> = model.instances.iter().map(|i| i.name.as_str()).collect();
    let names: Vec<&str> = net.automata.iter().map(|a| a.name.as_str()).collect();
    check(names == instances, format!("automata {names:?} vs instances {instances:?}"))?;
    for a in &net.automata {
        let (k, m) = (a.inputs.len(), a.outputs.len());
        check(a.states.len() == m + 1, format!("{}: {} states for {m} outputs", a.name, a.states.len()))?;
        check(a.count(TransitionKind::Internal) == 1, format!("{}: internal transitions", a.name))?;
        check(a.count(TransitionKind::Input) == k, format!("{}: input transitions", a.name))?;
        check(a.count(TransitionKind::Output) == m, format!("{}: output transitions", a.name))?;
    }
    let dt = t0.elapsed();
    check(dt < Duration::from_secs(5), format!("took {dt:?}"))?;
    Ok(format!("{} automata, invariants hold, {:.2?}", net.automata.len(), dt))
}

fn lower(spec: &BlockSpec) -> Result<(chips::automata::Automaton, chips::sema::SystemModel), String> {
    let mut map = SourceMap::new();
    let src = spec.source();
    let program = frontend::parse_source(&mut map, "blk.chips", &src).map_err(|ds| map.render_all(&ds))?;
    let model = sema::analyze(&program, &Default::default()).map_err(|ds| map.render_all(&ds))?;
    let a = transform_block(&model.block_defs["blk"], "b").map_err(|d| d.to_string())?;
    Ok((a, model))
}

fn transformation_equivalence() -> Outcome {
    let cfg = Config {
        cases: 3,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let blocks = RefCell::new(Vec::new());
    let result = runner.run(&block_with_schedules(), |(spec, schedules)| {
        let (automaton, model) = lower(&spec).map_err(TestCaseError::fail)?;
        let states = ExpandedAutomaton::new(&spec).states.len();
        blocks.borrow_mut().push((spec.inputs, spec.outputs.len(), states, automaton.states.len()));
        for (n, sched) in schedules.iter().enumerate() {
            let mut oracle = ExpandedAutomaton::new(&spec);
            let mut h = BlockHarness::new(automaton.clone(), model.functions.clone(), TeaStoreParams::default(), 0)
                .map_err(|d| TestCaseError::fail(d.to_string()))?;
            for (t, &ev) in sched.iter().enumerate() {
                let Some(want) = oracle.apply(ev) else { break };
                let got = match ev {
                    Event::Offer(i, v) => h.offer(i, Value::Int(v)).map(Observation::Accepted),
                    Event::Update => h.update().map(Observation::Updated),
                    Event::Emit => h
                        .emit()
                        .map(|o| Observation::Emitted(o.map(|(p, v)| (p, v.as_int().unwrap_or(i64::MIN))))),
                }
                .map_err(|d| TestCaseError::fail(d.to_string()))?;
                if got != want {
                    return Err(TestCaseError::fail(format!(
                        "schedule {n} step {t} {ev:?}: automaton {got:?}, oracle {want:?}\n{}",
                        spec.source()
                    )));
                }
            }
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    let shown: Vec<String> = blocks
        .borrow()
        .iter()
        .map(|(k, m, s, f)| format!("k={k} m={m}: {s} expanded / {f} flagged states"))
        .collect();
    Ok(format!("3 blocks x 1000 schedules identical ({})", shown.join("; ")))
}

/// A block with 1000 schedules over its inputs.
fn block_with_schedules() -> impl Strategy<Value = (BlockSpec, Vec<Vec<Event>>)> {
    block(3).prop_flat_map(|spec| {
        let k = spec.inputs;
        (Just(spec), proptest::collection::vec(schedule(k, 40), 1000))
    })
}

fn deadlock_freedom() -> Outcome {
    let net = corpus::teastore_network(0).map_err(|_| "network")?;
    let mut st = init_run(net, config(42, u64::MAX), Some(&corpus::trace_layout(0))).map_err(|d| d.to_string())?;
    for i in 0..10_000 {
        match st.step().map_err(|d| d.to_string())? {
            Step::Fired(_) => {}
            Step::Quiescent => return Err(format!("quiescent after {i} steps")),
        }
    }
    Ok(format!("10000 steps, {} rounds completed", st.round_index))
}

fn response_time_law() -> Outcome {
    let p = TeaStoreParams::default();
    let mut rows = 0;
    for seed in [1, 42, 7777] {
        for r in run(0, &config(seed, 1000))? {
            let want = p.cache_search_time_s + r.cache_misses as f64 * p.db_req_time_s;
            check(
                r.response_time_s == want,
                format!("seed {seed} round {}: {} != {want}", r.round, r.response_time_s),
            )?;
            check(
                (20..=100).contains(&r.cache_size),
                format!("seed {seed} round {}: cache_size {}", r.round, r.cache_size),
            )?;
            rows += 1;
        }
    }
    Ok(format!("{rows} rows exact, cache_size within [20, 100]"))
}

fn wandering_phase() -> Outcome {
    let t0 = Instant::now();
    let results: Vec<Result<Vec<TraceRecord>, String>> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..20).map(|seed| s.spawn(move || run(0, &config(seed, 300)))).collect();
        hs.into_iter().map(|h| h.join().expect("run thread")).collect()
    });
    let dt = t0.elapsed();
    let mut means = Vec::new();
    let mut max: f64 = 0.0;
    for r in results {
        let recs = r?;
        check(recs.len() == 300, "short run")?;
        means.push(recs.iter().map(|r| r.response_time_s).sum::<f64>() / 300.0);
        max = recs.iter().map(|r| r.response_time_s).fold(max, f64::max);
    }
    let model = means.iter().sum::<f64>() / means.len() as f64;
    let p = TeaStoreParams::default();
    let m = lru::RequestModel {
        capacity: p.cache_min_size as usize,
        db: p.db_size,
        draws: 2,
        search: p.cache_search_time_s,
        db_time: p.db_req_time_s,
    };
    let oracle = lru::mean_response(m, 300, 4000, 11);
    let detail = format!(
        "mean {model:.3} s vs oracle {oracle:.3} s, max row {max:.1} s, {dt:.2?} (reference value 2.8 s)"
    );
    check((model - oracle).abs() <= 0.15, detail.clone())?;
    check(max <= 4.3 + 1e-12, detail.clone())?;
    check(dt < Duration::from_secs(10), detail.clone())?;
    Ok(detail)
}

fn band(recs: &[TraceRecord]) -> (i64, i64, f64) {
    let lo = recs.iter().map(|r| r.cache_size).min().unwrap_or(0);
    let hi = recs.iter().map(|r| r.cache_size).max().unwrap_or(0);
    let mean = recs.iter().map(|r| r.response_time_s).sum::<f64>() / recs.len().max(1) as f64;
    (lo, hi, mean)
}

fn intensive_phase() -> Outcome {
    // switch, up to 200 rounds to settle, 300 rounds in the band
    let start = Scenario::default().phase_starts()[1] as usize;
    let recs = run(0, &config(42, (start + 499) as u64))?;
    let long = run(0, &config(42, 6000))?;
    let (llo, lhi, lmean) = band(&long[long.len() - 300..]);
    let size = |i: usize| recs[i - 1].cache_size;
    let entry = (start..start + 200).find(|&t| {
        let w: Vec<i64> = (t..t + 300).map(size).collect();
        w.iter().max().unwrap() - w.iter().min().unwrap() <= 6
    });
    let (lo, hi, mean_rt) = band(&recs[recs.len() - 300..]);
    let detail = format!(
        "rounds {}..{}: cache {lo}..{hi}, mean response {mean_rt:.2} s; rounds 5701..6000: cache {llo}..{lhi}, \
         mean response {lmean:.2} s (reference band centre 37)",
        recs.len() - 299,
        recs.len()
    );
    let Some(t) = entry else {
        return Err(format!("no band of width <= 6 entered within 200 rounds of {start}; {detail}"));
    };
    let mut distinct: Vec<i64> = (t..t + 300).map(size).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let found = format!("band {:?} from round {t}", (distinct[0], distinct[distinct.len() - 1]));
    check((mean_rt - 4.0).abs() <= 0.7, format!("{found}, mean response off target; {detail}"))?;
    check(distinct.len() >= 2, format!("{found} has no jitter; {detail}"))?;
    Ok(format!("{found}; {detail}"))
}

fn pid_closed_form() -> Outcome {
    let net = corpus::teastore_network(0).map_err(|_| "network")?;
    let pid = net.automaton("pid_instance").ok_or("no pid_instance")?.clone();
    let drive = |p: TeaStoreParams| -> Result<(f64, f64), String> {
        let mut h = BlockHarness::new(pid.clone(), net.functions.clone(), p, 0).map_err(|d| d.to_string())?;
        for n in 1..=100 {
            h.offer(0, Value::Float(5.0)).map_err(|d| d.to_string())?;
            h.offer(1, Value::Float(4.0)).map_err(|d| d.to_string())?;
            h.round().map_err(|d| d.to_string())?.ok_or(format!("round {n}: update not enabled"))?;
        }
        let raw = h.var("raw_output").and_then(Value::as_float).ok_or("raw_output")?;
        let integral = h.var("integral").and_then(Value::as_float).ok_or("integral")?;
        Ok((raw, integral))
    };
    let wide = TeaStoreParams {
        cache_min_size: -1000,
        cache_max_size: 1000,
        ..TeaStoreParams::default()
    };
    let (raw, _) = drive(wide.clone())?;
    let (mut integral, mut prev, mut want) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let e = 1.0;
        integral += e;
        want = wide.pid_p * e + wide.pid_i * integral + wide.pid_d * (e - prev);
        prev = e;
    }
    check(raw == want, format!("raw {raw} vs recurrence {want}"))?;
    check((raw - -2.0).abs() < 1e-12, format!("raw {raw} vs -2.0"))?;
    let (sat_raw, sat_int) = drive(TeaStoreParams::default())?;
    check(sat_int == 0.0, format!("integral {sat_int} grew while saturated"))?;
    Ok(format!(
        "raw output {raw} at round 100 with limits [-1000, 1000]; with [20, 100] the integral stays frozen (raw {sat_raw})"
    ))
}

fn lru_hit_rate() -> Outcome {
    let params = TeaStoreParams::default();
    let scenario = Scenario::default();
    let mut prng = Prng::new(0);
    let mut env = Env {
        prng: &mut prng,
        params: &params,
        scenario: &scenario,
    };
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let mut cache = Value::Array(vec![]);
    let mut hits = 0;
    let n = 100_000;
    for _ in 0..n {
        let id = Value::Int(rng.gen_range(1..=40));
        let found = builtins::call("find", vec![id.clone(), cache.clone()], &mut env).map_err(|d| d.to_string())?;
        if found == Value::Bool(true) {
            hits += 1;
        }
        cache = builtins::call("lru_update", vec![cache, id, Value::Int(20)], &mut env).map_err(|d| d.to_string())?;
    }
    let rate = hits as f64 / n as f64;
    check((rate - 0.5).abs() <= 0.03, format!("hit rate {rate:.4}"))?;
    Ok(format!("hit rate {rate:.4} over {n} lookups"))
}

fn determinism() -> Outcome {
    let c = config(123, 700);
    let a = to_csv(&run(0, &c)?);
    let b = to_csv(&run(0, &c)?);
    check(a == b, "core traces differ")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("t.csv");
    let p = path.to_string_lossy().into_owned();
    let mut files = Vec::new();
    for _ in 0..2 {
        let (code, _, err) = cli(&["simulate", "--seed", "123", "--rounds", "700", "--trace", &p]);
        check(code == 0, err)?;
        files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    check(files[0] == files[1], "CLI trace files differ")?;
    let (_, ir1, _) = cli(&["compile", "teastore"]);
    let (_, ir2, _) = cli(&["compile", "teastore"]);
    check(!ir1.is_empty() && ir1 == ir2, "compile output differs")?;
    Ok(format!("CSV {} bytes and IR {} bytes identical", a.len(), ir1.len()))
}

fn multi_provider() -> Outcome {
    for seed in [0, 42] {
        let c = config(seed, 800);
        let single = to_csv(&run(0, &c)?);
        let one = to_csv(&run(1, &c)?);
        check(single == one, format!("seed {seed}: n = 1 trace differs from the single-provider trace"))?;
    }
    let t = corpus::simulate(2, &config(42, 800)).map_err(|d| d.to_string())?;
    check(t.caches.len() == 800, format!("{} cache snapshots", t.caches.len()))?;
    for snap in &t.caches {
        let [a, b] = &snap.caches[..] else {
            return Err(format!("round {}: {} caches", snap.round, snap.caches.len()));
        };
        if let Some(id) = a.iter().find(|id| b.contains(id)) {
            return Err(format!("round {}: image {id} in both caches", snap.round));
        }
    }
    Ok("n = 1 byte-identical (2 seeds); n = 2 caches disjoint in all 800 rounds".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("corpus pipeline", corpus_pipeline),
        ("transformation equivalence", transformation_equivalence),
        ("deadlock freedom", deadlock_freedom),
        ("response-time law", response_time_law),
        ("wandering phase", wandering_phase),
        ("intensive phase adaptation", intensive_phase),
        ("PID closed form", pid_closed_form),
        ("LRU hit rate", lru_hit_rate),
        ("determinism", determinism),
        ("multi-provider variant", multi_provider),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
