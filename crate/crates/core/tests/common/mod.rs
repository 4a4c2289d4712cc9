#![allow(dead_code)]

use relaxedsync::checker::{Condition, History, SearchConfig};
use relaxedsync::harness::{enumerate_schedules, Concurrent, EnumConfig, Program, SimOptions};
use relaxedsync::impls::Impl;
use relaxedsync::op::Payload;
use relaxedsync::registers::Item;

pub fn item(v: u64) -> Item {
    Item::new(v).unwrap()
}

pub fn program(text: &str) -> Program {
    text.parse().unwrap()
}

pub fn histories(name: &str, text: &str) -> Vec<History> {
    let p = program(text);
    let imp = Impl::by_name(name, p.procs).unwrap();
    let cfg = EnumConfig { opts: SimOptions { capacity: imp.capacity_for(p.op_count()), ..SimOptions::default() }, bound: 512 };
    let e = enumerate_schedules(imp, &p, cfg, &mut |_| {}).unwrap();
    let mut all = e.histories.clone();
    all.extend(e.crash_histories());
    all
}

pub fn all_accepted(name: &str, text: &str, cond: Condition) -> usize {
    let hs = histories(name, text);
    let cfg = SearchConfig::default();
    for h in &hs {
        let v = cond.check(h, &cfg).unwrap();
        assert!(v.accepted, "{name} `{text}` produced a rejected history:\n{}", h.render());
    }
    hs.len()
}

pub fn live(name: &str, procs: usize) -> Concurrent {
    let imp = Impl::by_name(name, procs).unwrap();
    Concurrent::new(imp, imp.capacity_for(4096), 7)
}

/// Results of completed operations of the given kind, in history order.
pub fn results(h: &History, kind: &str) -> Vec<Payload> {
    h.operations()
        .unwrap()
        .into_iter()
        .filter(|o| o.call.kind().as_str() == kind)
        .filter_map(|o| o.result)
        .collect()
}
