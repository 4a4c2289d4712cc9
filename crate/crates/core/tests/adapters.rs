mod common;

use std::collections::HashSet;

use common::{item, live, program};
use relaxedsync::adapters::{max_displacement, QueueEvent, WorkStealingPool};
use relaxedsync::checker::{check_set_linearizable, History, SearchConfig};
use relaxedsync::harness::{random_run, SimOptions};
use relaxedsync::impls::Impl;
use relaxedsync::op::Payload;
use relaxedsync::registers::Fault;
use relaxedsync::specs::SetSpec;

fn drain(name: &str, n: u64) -> Vec<QueueEvent> {
    let q = live(name, 1);
    let mut run = Vec::new();
    for v in 1..=n {
        q.insert(0, item(v)).unwrap();
        run.push(QueueEvent::Enq(v));
    }
    for _ in 0..n {
        run.push(QueueEvent::Deq(q.remove(0).unwrap().as_int()));
    }
    assert_eq!(q.remove(0).unwrap(), Payload::Empty);
    run
}

#[test]
fn round_robin_kfifo_is_off_by_at_most_one() {
    let run = drain("kfifo", 6);
    assert!(max_displacement(&run) <= 1, "{run:?}");
    let got: HashSet<_> = run.iter().filter_map(|e| match e {
        QueueEvent::Deq(Some(v)) => Some(*v),
        _ => None,
    }).collect();
    assert_eq!(got, (1..=6).collect());
}

#[test]
fn random_kfifo_returns_every_item() {
    let run = drain("kfifo-random", 20);
    let got: HashSet<_> = run.iter().filter_map(|e| match e {
        QueueEvent::Deq(Some(v)) => Some(*v),
        _ => None,
    }).collect();
    assert_eq!(got.len(), 20);
}

#[test]
fn displacement_of_fifo_and_lifo_orders() {
    use QueueEvent::*;
    assert_eq!(max_displacement(&[Enq(1), Enq(2), Deq(Some(1)), Deq(Some(2))]), 0);
    assert_eq!(max_displacement(&[Enq(1), Enq(2), Enq(3), Deq(Some(3)), Deq(Some(2))]), 2);
    assert_eq!(max_displacement(&[Deq(None)]), 0);
}

/// Events of the operations whose first lane access lands in `lane`.
fn lane_history(h: &History, log: &[relaxedsync::registers::AccessRecord], lane: u64, lanes: u64) -> History {
    let ops = h.operations().unwrap();
    let lane_of = |id: usize| {
        log.iter().find(|a| a.op == id && a.cell.0 >= 2).map(|a| (a.cell.0 - 2) % lanes)
    };
    let mine: HashSet<usize> = ops.iter().filter(|o| lane_of(o.id) == Some(lane)).map(|o| o.id).collect();
    let mut events: Vec<(usize, usize, bool)> = Vec::new();
    for o in ops.iter().filter(|o| mine.contains(&o.id)) {
        events.push((o.inv, o.id, true));
        if let Some(r) = o.res {
            events.push((r, o.id, false));
        }
    }
    events.sort();
    let mut out = History::new(h.procs, h.impl_name.clone());
    for (_, id, inv) in events {
        let o = &ops[id];
        if inv {
            out.invoke(o.proc, &o.call);
        } else {
            out.respond(o.proc, o.call.kind(), o.result.unwrap());
        }
    }
    out
}

#[test]
fn each_kfifo_lane_is_a_set_queue() {
    let p = program("p0: enq(1), enq(2), deq, deq || p1: enq(3), deq, enq(4), deq");
    let cfg = SearchConfig::default();
    for name in ["kfifo", "kfifo-random"] {
        let imp = Impl::by_name(name, 2).unwrap();
        for seed in 0..200 {
            let opts = SimOptions { log: true, capacity: imp.capacity_for(8), seed };
            let run = random_run(imp, &p, seed, 512, opts).unwrap();
            for lane in 0..2 {
                let h = lane_history(&run.history, &run.log, lane, 2);
                let v = check_set_linearizable(&h, SetSpec::Queue, &cfg).unwrap();
                assert!(v.accepted, "{name} seed {seed} lane {lane}\n{}", h.render());
            }
        }
    }
}

#[test]
fn work_stealing_pool_hands_out_tasks() {
    let pool = WorkStealingPool::new(0, live("setseqstack", 3)).unwrap();
    assert_eq!(pool.steal(2).unwrap(), None);
    for t in 1..=3 {
        pool.put(0, item(t)).unwrap();
    }
    assert_eq!(pool.take(0).unwrap(), Some(item(3)));
    assert_eq!(pool.steal(1).unwrap(), Some(item(2)));
    assert_eq!(pool.steal(2).unwrap(), Some(item(1)));
    assert_eq!(pool.take(0).unwrap(), None);
    assert!(matches!(pool.put(1, item(7)), Err(Fault::Contract(_))));
    assert!(WorkStealingPool::new(5, live("setseqqueue", 3)).is_err());
}

#[test]
fn work_stealing_duplicates_overlap() {
    use std::sync::Arc;
    use std::thread;
    for round in 0..20u64 {
        let pool = Arc::new(WorkStealingPool::new(0, live("setseqqueue", 4)).unwrap());
        for t in 1..=200 {
            pool.put(0, item(t)).unwrap();
        }
        let handles: Vec<_> = (1..4)
            .map(|pid| {
                let pool = Arc::clone(&pool);
                thread::spawn(move || {
                    let mut got = Vec::new();
                    while let Some(t) = pool.steal(pid).unwrap() {
                        got.push(t.get());
                    }
                    got
                })
            })
            .collect();
        let mut all: Vec<u64> = handles.into_iter().flat_map(|h| h.join().unwrap()).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 200, "round {round}");
    }
}
