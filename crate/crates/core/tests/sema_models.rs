mod common;

use chips::automata::build_network;
use chips::corpus;
use chips::sema::{self, PlugKind, PortRef};
use common::*;

const LISTING1: &str = include_str!("fixtures/listing1.chips");
const LISTING2: &str = include_str!("fixtures/listing2.chips");
const BITPACKED: &str = include_str!("fixtures/bitpacked.chips");

const PRELUDE: &str = "
import \"host.json\" as host;
physical host(int x) -> (x)
logical pass(int x) init {} then {} -> (x)
logical join(int a, int b) init {} then {} -> (a + b)
pure add(int acc, int v) -> (acc + v)
pure sub(int acc, int v) -> (acc - v)
pure keep(int v, int i, int n) -> (v)
";

fn with_system(system: &str) -> String {
    format!("{PRELUDE}\nSYSTEM {{\n{system}\n}}\n")
}

#[test]
fn listing1_shape() {
    let p = parse(LISTING1);
    assert_eq!(p.pure_fns.len(), 2);
    assert_eq!(p.logical_fns.len(), 2);
    assert_eq!(p.physical_fns.len(), 1);
    assert_eq!(p.imports.len(), 1);
    assert_eq!(p.imports[0].path, "server.json");
    assert!(p.system.is_none());
}

#[test]
fn listing1_is_rejected_by_analysis() {
    // Calls an undeclared `user_action_nb_images` and the two-argument lru_update.
    let found = codes(LISTING1);
    assert!(found.contains(&"E-UNDEF"), "{found:?}");
    assert!(found.contains(&"E-ARITY"), "{found:?}");
}

#[test]
fn listing2_shape() {
    let sys = parse(LISTING2).system.unwrap();
    assert_eq!(sys.instances.len(), 5);
    assert_eq!(sys.links.len(), 3);
    assert_eq!(sys.splitplugs.len(), 1);
    assert_eq!(sys.mergeplugs.len(), 2);
    let names: Vec<&str> = sys.instances.iter().map(|i| i.name.name.as_str()).collect();
    assert_eq!(
        names,
        ["user_instance", "server_instance", "im_instance", "ip_instance1", "ip_instance2"]
    );
}

#[test]
fn bit_packed_actions_analyze() {
    let m = analyze_ok(BITPACKED);
    assert_eq!(m.instances.len(), 3);
}

#[test]
fn teastore_model_resolves() {
    let m = corpus::analyze_corpus(&corpus::teastore_model()).unwrap();
    assert_eq!(m.links.len(), m.logical_instances().count());
    sema::validate_links(&m).unwrap();
    for inst in m.logical_instances() {
        let mut at = inst.name.as_str();
        while let Some(parent) = m.links.get(at) {
            at = parent;
        }
        assert!(["server_instance", "computer_instance"].contains(&at), "{}", inst.name);
    }
}

#[test]
fn missing_link_names_instance() {
    let src = with_system("host h; pass a1; h.in(a1.out); a1.in(h.out);");
    let ds = analyze(&src).unwrap_err();
    let d = ds.iter().find(|d| d.code == "E-NOLINK").expect("E-NOLINK");
    assert!(d.message.contains("a1"), "{}", d.message);
}

#[test]
fn two_producers_without_mergeplug() {
    let src = with_system(
        "host h; pass a1; pass a2; pass b;
         link a1 to h; link a2 to h; link b to h;
         h.in(b.out); a1.in(h.out); a2.in(h.out);
         b.in(a1.out); b.in(a2.out);",
    );
    assert!(codes(&src).contains(&"E-MULTIPROD"));
}

#[test]
fn link_cycle_detected() {
    let src = with_system(
        "host h; pass a; pass b; link a to b; link b to a;
         h.in(a.out); a.in(h.out); b.in(a.out);",
    );
    assert!(codes(&src).contains(&"E-LINKCYCLE"));
}

#[test]
fn depth_two_forest_accepted() {
    let src = with_system(
        "host h; pass a; pass b; link a to b; link b to h;
         h.in(b.out); a.in(h.out); b.in(a.out);",
    );
    let m = analyze_ok(&src);
    assert_eq!(m.links.len(), 2);
    let direct = with_system("host h; pass a; link a to h; h.in(a.out); a.in(h.out);");
    analyze_ok(&direct);
}

#[test]
fn physical_to_physical_link_warns() {
    let src = with_system(
        "host h; host g; pass a; link a to h; link h to g;
         h.in(a.out); g.in(h.out); a.in(g.out);",
    );
    let m = analyze_ok(&src);
    assert!(m.warnings.iter().any(|w| w.code == "W-PHYSLINK"));
}

#[test]
fn unknown_names_and_types() {
    assert!(codes(&with_system("nosuch x;")).contains(&"E-UNDEF"));
    let bad = format!("{PRELUDE}\nlogical t(int x) init {{}} then {{ bool y = x + 1; }} -> (y)\n");
    assert!(codes(&bad).contains(&"E-TYPE"));
    let src = with_system("host h; join j; link j to h; h.in(j.out); j.in(h.out);");
    assert!(codes(&src).contains(&"E-ARITY"));
}

#[test]
fn missing_descriptor_is_hw_error() {
    let src = with_system("host h; pass a; link a to h; h.in(a.out); a.in(h.out);");
    let p = parse(&src);
    let ds = sema::analyze(&p, &Default::default()).unwrap_err();
    assert!(ds.iter().any(|d| d.code == "E-HW"));
    let mut hw = hw_for(&p);
    hw.insert("host".into(), r#"{"name":"h","processor_count":0,"memory_bytes":1,"clock_hz":1,"peripherals":[]}"#.into());
    assert!(sema::analyze(&p, &hw).unwrap_err().iter().any(|d| d.code == "E-HW"));
}

fn split_src(consumers: usize) -> String {
    let mut s = String::from("host h; pass src; link src to h; h.in(src.out);\n");
    for i in 0..consumers {
        s.push_str(&format!("pass c{i}; link c{i} to h; c{i}.in(h.out);\n"));
    }
    // the consumers feed back into src through an additive merge
    s.push_str("src.in(c0.out);\n");
    s.push_str("splitplug(h.out, keep);\n");
    with_system(&s)
}

#[test]
fn split_fan_out_counts_consumers() {
    for n in [1, 2] {
        let m = analyze_ok(&split_src(n));
        assert_eq!(m.splits.len(), 1);
        assert_eq!(m.splits[0].consumers.len(), n);
        let plug = m.plugs.iter().find(|p| p.kind == PlugKind::Split).unwrap();
        assert_eq!(plug.fan, n);
    }
}

#[test]
fn merge_fold_follows_declaration_order() {
    let src = with_system(
        "host h; pass p1; pass p2; pass p3; pass sink;
         link p1 to h; link p2 to h; link p3 to h; link sink to h;
         h.in(sink.out); p1.in(h.out); p2.in(h.out); p3.in(h.out);
         sink.in(p1.out); sink.in(p2.out); sink.in(p3.out);
         mergeplug(p3.out, sub); mergeplug(p1.out, sub); mergeplug(p2.out, sub);",
    );
    let m = analyze_ok(&src);
    assert_eq!(m.merges.len(), 1);
    let order: Vec<&str> = m.merges[0].producers.iter().map(|p| p.instance.as_str()).collect();
    assert_eq!(order, ["p3", "p1", "p2"]);
    assert!(m.plugs.iter().all(|p| p.fan == 3));

    let net = build_network(&m).unwrap();
    let merge = net.automaton("@merge0").expect("merge connector");
    let ir = serde_json::to_string(&merge.transitions).unwrap();
    // sub(sub(in0, in1), in2)
    let nested = ir.find(r#""name":"sub""#).unwrap();
    assert!(ir[nested..].contains(r#""name":"in0""#));
    let feeds: Vec<(String, usize)> = net
        .interactions
        .iter()
        .flat_map(|i| {
            i.consumers
                .iter()
                .filter(|c| net.automata[c.automaton].name == "@merge0")
                .map(|c| (net.automata[i.producer.automaton].name.clone(), c.port))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut feeds = feeds;
    feeds.sort_by_key(|f| f.1);
    assert_eq!(
        feeds,
        [("p3".to_string(), 0), ("p1".to_string(), 1), ("p2".to_string(), 2)]
    );
}

#[test]
fn plug_contract_violations() {
    let mixed = with_system(
        "host h; pass a; pass b; link a to h; link b to h;
         h.in(b.out); a.in(h.out); b.in(a.out);
         splitplug(a.out, keep); mergeplug(a.out, add);",
    );
    assert!(codes(&mixed).contains(&"E-PLUGMIX"));
    let wrong = with_system(
        "host h; pass a; pass b; link a to h; link b to h;
         h.in(b.out); a.in(h.out); b.in(a.out);
         splitplug(a.out, add);",
    );
    assert!(codes(&wrong).contains(&"E-PLUGFN"));
    let missing = with_system(
        "host h; pass a; pass b; link a to h; link b to h;
         h.in(b.out); a.in(h.out); b.in(a.out);
         mergeplug(a.out, nosuch);",
    );
    assert!(codes(&missing).contains(&"E-PLUGFN"));
}

#[test]
fn analysis_is_idempotent() {
    let p = corpus::teastore_model();
    let a = corpus::analyze_corpus(&p).unwrap();
    let b = corpus::analyze_corpus(&p).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn every_input_has_one_effective_producer() {
    for p in [corpus::teastore_model(), corpus::multi_provider_model(3).unwrap()] {
        let m = corpus::analyze_corpus(&p).unwrap();
        for inst in &m.instances {
            for j in 0..m.block_of(&inst.name).unwrap().inputs.len() {
                let c = PortRef::new(inst.name.clone(), j);
                assert!(m.effective_source(&c).is_some(), "{c}");
            }
        }
    }
}
