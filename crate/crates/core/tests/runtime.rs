mod common;

use chips::corpus::{self, Scenario, TeaStoreParams};
use chips::runtime::builtins::{self, Env};
use chips::runtime::trace::{to_csv, to_jsonl};
use chips::runtime::{init_run, Prng, SimConfig, Step, StepEvent};
use chips::Value;
use common::*;
use proptest::prelude::*;

fn config(rounds: u64, seed: u64) -> SimConfig {
    SimConfig {
        seed,
        max_rounds: rounds,
        ..SimConfig::default()
    }
}

fn single_state(c: SimConfig) -> chips::runtime::RunState {
    init_run(corpus::teastore_network(0).unwrap(), c, Some(&corpus::trace_layout(0))).unwrap()
}

#[test]
fn init_state_of_teastore() {
    let st = single_state(config(10, 42));
    assert_eq!(st.var("ip_instance", "cache"), Some(&Value::Array(vec![])));
    assert_eq!(st.var("pid_instance", "integral"), Some(&Value::Float(0.0)));
    assert_eq!(st.var("pid_instance", "knob"), Some(&Value::Int(20)));
    assert_eq!(st.var("user_instance", "session_cache_size"), Some(&Value::Int(20)));
    assert_eq!(st.sim_time, 0.0);
    assert!(st.trace.records.is_empty());
}

#[test]
fn first_event_is_kickstarter_update() {
    let mut st = single_state(config(10, 42));
    let user = st.network.index_of(corpus::KICKSTARTER).unwrap();
    assert_eq!(st.step().unwrap(), Step::Fired(StepEvent::Internal { automaton: user }));
}

#[test]
fn zero_rounds_rejected() {
    let net = corpus::teastore_network(0).unwrap();
    assert_eq!(init_run(net, config(0, 1), None).unwrap_err().code, "E-CONFIG");
}

#[test]
fn one_source_block_is_enabled() {
    let src = "
import \"host.json\" as host;
physical host(int x) -> (x)
logical src() init {} then {} -> (7)
SYSTEM { host h; src s; link s to h; h.in(s.out); }
";
    let mut st = init_run(network(src, "s"), config(5, 0), None).unwrap();
    let s = st.network.index_of("s").unwrap();
    assert_eq!(st.step().unwrap(), Step::Fired(StepEvent::Internal { automaton: s }));
    // the value reaches the host and its update fires
    st.step().unwrap();
    assert_eq!(st.var("h", "x"), Some(&Value::Int(7)));
}

#[test]
fn unwired_pair_goes_quiescent() {
    let src = "
import \"host.json\" as host;
physical host(int x) -> (x)
logical a() init {} then {} -> (1)
SYSTEM { host h; a a1; a a2; link a1 to h; link a2 to h; h.in(a1.out); }
";
    let mut st = init_run(network(src, "a1"), config(5, 0), None).unwrap();
    let mut fired = 0;
    while let Step::Fired(_) = st.step().unwrap() {
        fired += 1;
        assert!(fired < 100);
    }
    // a1 updates and sends, h and a2 update, a1 updates again; then neither
    // a1 (h is busy) nor a2 and h (no consumers) can send
    assert_eq!(fired, 5);
    assert_eq!(st.step().unwrap(), Step::Quiescent);
    assert!(analyze_ok(src).warnings.iter().any(|w| w.code == "W-UNUSED"));
}

#[test]
fn max_rounds_one_gives_one_record() {
    let t = corpus::simulate(0, &config(1, 9)).unwrap();
    assert_eq!(t.records.len(), 1);
}

#[test]
fn same_seed_same_bytes() {
    let a = corpus::simulate(0, &config(400, 5)).unwrap();
    let b = corpus::simulate(0, &config(400, 5)).unwrap();
    assert_eq!(to_csv(&a.records), to_csv(&b.records));
    assert_eq!(to_jsonl(&a.records), to_jsonl(&b.records));
    let c = corpus::simulate(0, &config(400, 6)).unwrap();
    assert_ne!(to_csv(&a.records), to_csv(&c.records));
}

#[test]
fn ten_thousand_steps_without_quiescence() {
    let mut st = single_state(config(u64::MAX, 42));
    for _ in 0..10_000 {
        assert_ne!(st.step().unwrap(), Step::Quiescent);
    }
}

#[test]
fn every_update_fires_once_per_round() {
    for providers in [0, 2] {
        let layout = corpus::trace_layout(providers);
        let net = corpus::teastore_network(providers).unwrap();
        let marker = net.index_of(&layout.marker).unwrap();
        let n = net.automata.len();
        let mut st = init_run(net, config(1000, 3), Some(&layout)).unwrap();
        let mut counts = vec![0u32; n];
        let mut outputs_seen = vec![0u32; n];
        let mut rounds = 0;
        while rounds < 50 {
            match st.step().unwrap() {
                Step::Fired(StepEvent::Internal { automaton }) => {
                    counts[automaton] += 1;
                    if automaton == marker {
                        rounds += 1;
                        assert!(counts.iter().all(|&c| c == 1), "{counts:?}");
                        counts.iter_mut().for_each(|c| *c = 0);
                    }
                }
                Step::Fired(StepEvent::Interaction { index }) => {
                    outputs_seen[st.network.interactions[index].producer.automaton] += 1;
                }
                Step::Quiescent => panic!("deadlock"),
            }
        }
        for (a, aut) in st.network.automata.iter().enumerate() {
            let per_round = outputs_seen[a] as f64 / 50.0;
            assert!((per_round - aut.outputs.len() as f64).abs() <= 0.1, "{}", aut.name);
        }
    }
}

#[test]
fn user_alternates_with_responses() {
    let mut st = single_state(config(1000, 11));
    let user = st.network.index_of("user_instance").unwrap();
    let wps = st.network.index_of("wps_instance").unwrap();
    let mut last = None;
    for _ in 0..5_000 {
        if let Step::Fired(StepEvent::Internal { automaton }) = st.step().unwrap() {
            if automaton == user || automaton == wps {
                assert_ne!(last, Some(automaton), "two requests or two pages in a row");
                last = Some(automaton);
            }
        }
    }
}

#[test]
fn trace_invariants() {
    let c = config(900, 17);
    let t = corpus::simulate(0, &c).unwrap();
    let p = &c.params;
    let mut prev_time = 0.0;
    let mut connected = false;
    for (r, snap) in t.records.iter().zip(&t.caches) {
        assert_eq!(r.response_time_s, p.cache_search_time_s + r.cache_misses as f64 * p.db_req_time_s);
        assert!((20..=100).contains(&r.cache_size));
        assert_eq!(r.sim_time_s, prev_time + r.response_time_s);
        prev_time = r.sim_time_s;
        let cache = &snap.caches[0];
        assert!(cache.len() as i64 <= r.cache_size);
        let mut sorted = cache.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), cache.len(), "duplicate cache entries");
        assert!(!connected || r.user_connected, "authentication is monotone");
        connected = r.user_connected;
    }
    // the scenario switches exactly once, at request 301
    let changes: Vec<u64> = t
        .records
        .windows(2)
        .filter(|w| w[0].images_requested != w[1].images_requested)
        .map(|w| w[1].round)
        .collect();
    assert_eq!(changes, [301]);
}

#[test]
fn simulation_matches_direct_reference() {
    for seed in [1u64, 42, 1234] {
        for integrate_seconds in [false, true] {
            let c = SimConfig {
                seed,
                max_rounds: 800,
                params: TeaStoreParams {
                    pid_integrate_seconds: integrate_seconds,
                    ..TeaStoreParams::default()
                },
                ..SimConfig::default()
            };
            let sim = corpus::simulate(0, &c).unwrap().records;
            let reference = corpus::reference::reference_trace(&c);
            assert_eq!(sim, reference, "seed {seed}");
        }
    }
}

#[test]
fn param_and_scenario_overrides_reach_the_model() {
    let c = SimConfig {
        max_rounds: 50,
        scenario: Scenario::constant(3),
        params: TeaStoreParams {
            db_size: 5,
            cache_min_size: 5,
            ..TeaStoreParams::default()
        },
        ..SimConfig::default()
    };
    let t = corpus::simulate(0, &c).unwrap();
    assert!(t.records.iter().all(|r| r.images_requested == 3));
    // once every id is cached there are no more misses
    assert!(t.records[20..].iter().all(|r| r.cache_misses == 0));
}

#[test]
fn lru_hit_rate_matches_capacity_ratio() {
    let params = TeaStoreParams::default();
    let scenario = Scenario::default();
    let mut prng = Prng::new(2024);
    let mut env = Env {
        prng: &mut prng,
        params: &params,
        scenario: &scenario,
    };
    let mut cache = Value::Array(vec![]);
    let mut hits = 0;
    let n = 100_000;
    for _ in 0..n {
        let id = builtins::call("rnd_img_id", vec![], &mut env).unwrap();
        if builtins::call("find", vec![id.clone(), cache.clone()], &mut env).unwrap() == Value::Bool(true) {
            hits += 1;
        }
        cache = builtins::call("lru_update", vec![cache, id, Value::Int(20)], &mut env).unwrap();
    }
    let rate = hits as f64 / n as f64;
    assert!((rate - 0.5).abs() <= 0.03, "hit rate {rate}");
}

#[test]
fn builtins_reject_bad_domains() {
    let params = TeaStoreParams {
        db_size: 0,
        ..TeaStoreParams::default()
    };
    let scenario = Scenario::default();
    let mut prng = Prng::new(1);
    let mut env = Env {
        prng: &mut prng,
        params: &params,
        scenario: &scenario,
    };
    assert_eq!(builtins::call("rnd_img_id", vec![], &mut env).unwrap_err().code, "E-BUILTIN");
    let bad = builtins::call("lru_update", vec![Value::Array(vec![]), Value::Int(1), Value::Int(0)], &mut env);
    assert_eq!(bad.unwrap_err().code, "E-BUILTIN");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lru_update_keeps_a_bounded_distinct_sequence(
        ops in prop::collection::vec(1i64..12, 0..200),
        cap in 1usize..8,
    ) {
        let mut cache = Vec::new();
        for x in ops {
            builtins::lru_update(&mut cache, x, cap);
            prop_assert!(cache.len() <= cap);
            prop_assert_eq!(*cache.last().unwrap(), x);
            let mut d = cache.clone();
            d.sort();
            d.dedup();
            prop_assert_eq!(d.len(), cache.len());
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let c = config(40, seed);
        let a = corpus::simulate(0, &c).unwrap();
        let b = corpus::simulate(0, &c).unwrap();
        prop_assert_eq!(a.records, b.records);
    }
}

#[test]
fn harness_is_most_recent_wins() {
    let m = corpus::analyze_corpus(&corpus::teastore_model()).unwrap();
    let net = chips::automata::build_network(&m).unwrap();
    let pid = net.automaton("pid_instance").unwrap().clone();
    let mut h = chips::runtime::BlockHarness::new(pid, net.functions.clone(), TeaStoreParams::default(), 0).unwrap();
    assert!(h.offer(1, Value::Float(9.0)).unwrap());
    assert!(!h.update().unwrap(), "update needs both inputs");
    assert!(h.offer(1, Value::Float(4.3)).unwrap());
    assert!(h.offer(0, Value::Float(4.0)).unwrap());
    let outs = h.round().unwrap().unwrap();
    assert_eq!(outs, vec![Value::Int(20)]);
    let e = h.var("error").unwrap().as_float().unwrap();
    assert!((e - -0.3).abs() < 1e-12);
    assert!(!h.flag("command") && !h.flag("measured"));
}
