mod common;

use common::{all_accepted, histories, item, live, program, results};
use proptest::prelude::*;
use relaxedsync::checker::{check_lemma_properties, check_linearizable, check_set_linearizable, Condition, SearchConfig};
use relaxedsync::harness::{random_run, script, SimOptions};
use relaxedsync::impls::Impl;
use relaxedsync::op::Payload;
use relaxedsync::registers::CellValue;
use relaxedsync::specs::{SeqSpec, SetSpec};

const STACKS: &[&str] = &["seqstack", "setseqstack", "renstack", "renstack-published"];

#[test]
fn sequential_runs_are_lifo() {
    for name in STACKS {
        for procs in [1, 3] {
            let s = live(name, procs);
            assert_eq!(s.remove(0).unwrap(), Payload::Empty, "{name}");
            for v in 1..=5 {
                s.insert(0, item(v)).unwrap();
            }
            for v in (3..=5).rev() {
                assert_eq!(s.remove(0).unwrap(), Payload::Int(v), "{name}");
            }
            s.insert(0, item(9)).unwrap();
            for v in [9, 2, 1] {
                assert_eq!(s.remove(0).unwrap(), Payload::Int(v), "{name}");
            }
            assert_eq!(s.remove(0).unwrap(), Payload::Empty, "{name}");
        }
    }
}

#[test]
fn reference_stack_hands_a_single_item_to_one_popper() {
    for h in histories("seqstack", "p0: push(1) ; p0: pop || p1: pop") {
        let pops = results(&h, "pop");
        if pops.len() == 2 {
            assert_eq!(pops.iter().filter(|r| **r == Payload::Int(1)).count(), 1, "{}", h.render());
        }
    }
}

#[test]
fn set_stack_can_return_an_item_twice() {
    let hs = histories("setseqstack", "p0: push(1) ; p0: pop || p1: pop");
    let twice = hs.iter().any(|h| results(h, "pop") == [Payload::Int(1), Payload::Int(1)]);
    assert!(twice);
    let cfg = SearchConfig::default();
    for h in &hs {
        assert!(check_set_linearizable(h, SetSpec::Stack, &cfg).unwrap().accepted);
    }
}

#[test]
fn solo_push_writes_the_item_once() {
    let imp = Impl::by_name("setseqstack", 1).unwrap();
    let run = random_run(imp, &program("p0: push(9)"), 0, 64, SimOptions { log: true, ..SimOptions::default() }).unwrap();
    assert!(run.finished);
    let nine = CellValue::Item(item(9)).encode();
    assert_eq!(run.log.iter().filter(|a| a.is_effectful_write() && a.after == nine).count(), 1);
    assert!(run.log.iter().all(|a| !a.kind.is_rmw()));
}

#[test]
fn concurrent_pushes_lose_nothing() {
    let text = "p0: push(1) || p1: push(2) || p2: push(3) ; p0: pop, pop, pop, pop";
    for name in ["setseqstack", "renstack"] {
        for h in histories(name, text) {
            let ops = h.operations().unwrap();
            if ops.len() < 7 || ops.iter().any(|o| o.result.is_none()) {
                continue;
            }
            let mut pops: Vec<Payload> = results(&h, "pop");
            assert_eq!(pops.pop(), Some(Payload::Empty), "{name}\n{}", h.render());
            pops.sort();
            assert_eq!(pops, [Payload::Int(1), Payload::Int(2), Payload::Int(3)], "{name}\n{}", h.render());
        }
    }
}

#[test]
fn renaming_stack_is_set_linearizable() {
    let cond = Condition::SetLin(SetSpec::Stack);
    for text in [
        "p0: push(1) ; p0: pop || p1: pop",
        "p0: push(1), pop || p1: push(2), pop",
        "p0: push(1) || p1: push(2) || p2: pop",
    ] {
        assert!(all_accepted("renstack", text, cond) > 0);
    }
}

#[test]
fn published_push_order_counterexample_is_rejected() {
    let s = script("renstack-published").unwrap();
    let run = s.run(SimOptions::default()).unwrap();
    let cfg = SearchConfig::default();
    assert!(!check_set_linearizable(&run.history, SetSpec::Stack, &cfg).unwrap().accepted);
    assert!(!check_linearizable(&run.history, SeqSpec::Stack, &cfg).unwrap().accepted);
}

fn script_strategy() -> impl Strategy<Value = Vec<Vec<bool>>> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), 1..4), 2..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_schedules_only_duplicate_overlapping_pops(scripts in script_strategy(), seed in any::<u64>(), which in 0usize..2) {
        let name = ["setseqstack", "renstack"][which];
        let mut next = 0;
        let text = scripts
            .iter()
            .enumerate()
            .map(|(p, ops)| {
                let ops: Vec<String> = ops
                    .iter()
                    .map(|&push| if push { next += 1; format!("push({next})") } else { "pop".into() })
                    .collect();
                format!("p{p}: {}", ops.join(", "))
            })
            .collect::<Vec<_>>()
            .join(" || ");
        let imp = Impl::by_name(name, scripts.len()).unwrap();
        let run = random_run(imp, &program(&text), seed, 4096, SimOptions::default()).unwrap();
        let cfg = SearchConfig::default();
        prop_assert!(check_set_linearizable(&run.history, SetSpec::Stack, &cfg).unwrap().accepted, "{}", run.history.render());
        let report = check_lemma_properties(&run.history, SeqSpec::Stack, &cfg).unwrap();
        prop_assert_eq!(report.violations().count(), 0, "{}", run.history.render());
    }
}
