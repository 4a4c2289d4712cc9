use std::collections::HashSet;

use super::{Budget, CheckError, History, IntervalStep, OrderTable, SearchConfig, Verdict, Witness};
use crate::op::{OpCall, Payload};
use crate::specs::{Anchor, IntervalSpec, IntervalState, IntervalTransition};

/// Searches for a sequence of weak-empty queue transitions.
///
/// A dequeue answering `weakempty` may take effect at one point (on the
/// empty queue) or span several transitions: it registers at one and
/// responds at a later one. An operation joins its first transition only
/// after every operation preceding it in real time has fully taken effect.
/// Pending dequeues are never registered; they are either dropped or
/// anchored with the result the object model gives them.
pub fn check_interval_linearizable(h: &History, spec: &IntervalSpec, cfg: &SearchConfig) -> Result<Verdict, CheckError> {
    if spec.procs != h.procs {
        return Err(CheckError::Unsupported(format!(
            "spec is for {} processes, history has {}",
            spec.procs, h.procs
        )));
    }
    let ops = h.operations()?;
    for op in &ops {
        if !matches!(op.call, OpCall::Enq(_) | OpCall::Deq) {
            return Err(CheckError::Unsupported(format!("`{}` is not a queue operation", op.call)));
        }
    }
    let table = OrderTable::new(ops, cfg.max_interval_ops)?;
    let mut search = IntervalSearch { table: &table, spec, budget: Budget::new(cfg.node_budget), failed: HashSet::new() };
    let mut path = Vec::new();
    let found = search.dfs(0, 0, spec.initial(), &mut path)?;
    let stats = search.budget.stats;
    Ok(if found { Verdict::accept(Witness::Interval(path), stats) } else { Verdict::reject(stats) })
}

struct IntervalSearch<'a> {
    table: &'a OrderTable,
    spec: &'a IntervalSpec,
    budget: Budget,
    failed: HashSet<(u64, u64, IntervalState)>,
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0u32..1 << items.len())
        .map(|m| (0..items.len()).filter(|b| m & (1 << b) != 0).map(|b| items[b]).collect())
        .collect()
}

impl IntervalSearch<'_> {
    /// Anchor candidates: (operation ids, anchor) in process order.
    fn anchors(&self, s: &IntervalState, eligible: &[usize]) -> Vec<(Vec<usize>, Anchor)> {
        let ops = &self.table.ops;
        let mut out = Vec::new();
        for &i in eligible {
            let op = ops[i];
            match (op.call, op.result) {
                (OpCall::Enq(x), _) => out.push((vec![i], Anchor::Enq { proc: op.proc, x: x.get() })),
                (OpCall::Deq, result) => {
                    let r = match (result, s.q.head()) {
                        (Some(r @ Payload::Int(x)), Some(head)) if x == head => r,
                        (Some(r @ (Payload::Empty | Payload::WeakEmpty)), None) => r,
                        (None, Some(head)) => Payload::Int(head),
                        (None, None) => Payload::Empty,
                        _ => continue,
                    };
                    out.push((vec![i], Anchor::Deq { procs: vec![op.proc], result: r }));
                }
                _ => {}
            }
        }
        if self.spec.multiplicity {
            if let Some(head) = s.q.head() {
                let takers: Vec<usize> = eligible
                    .iter()
                    .copied()
                    .filter(|&i| ops[i].call == OpCall::Deq && ops[i].result.map_or(true, |r| r == Payload::Int(head)))
                    .collect();
                for g in subsets(&takers).into_iter().filter(|g| g.len() >= 2) {
                    let procs = g.iter().map(|&i| ops[i].proc).collect();
                    out.push((g, Anchor::Deq { procs, result: Payload::Int(head) }));
                }
            }
        }
        out
    }

    fn dfs(&mut self, done: u64, reg: u64, s: IntervalState, path: &mut Vec<IntervalStep>) -> Result<bool, CheckError> {
        if self.table.complete & !done == 0 {
            return Ok(true);
        }
        let key = (done, reg, s.clone());
        if self.failed.contains(&key) {
            self.budget.stats.memo_hits += 1;
            return Ok(false);
        }
        self.budget.tick()?;
        let table = self.table;
        let ops = &table.ops;
        let eligible = table.eligible(done, done | reg);
        let registered_now: Vec<usize> = (0..ops.len()).filter(|&i| reg & (1 << i) != 0).collect();
        for (anchor_ops, anchor) in self.anchors(&s, &eligible) {
            let joinable: Vec<usize> = eligible
                .iter()
                .copied()
                .filter(|&i| !anchor_ops.contains(&i) && ops[i].result == Some(Payload::WeakEmpty))
                .collect();
            for newly in subsets(&joinable) {
                let mut candidates = registered_now.clone();
                candidates.extend(&newly);
                for answering in subsets(&candidates) {
                    let t = IntervalTransition {
                        anchor: anchor.clone(),
                        registered: newly.iter().map(|&i| ops[i].proc).collect(),
                        responded: answering.iter().map(|&i| ops[i].proc).collect(),
                    };
                    let Ok(next) = self.spec.interval_step(&s, &t) else { continue };
                    let mut next_done = done;
                    for &i in anchor_ops.iter().chain(&answering) {
                        next_done |= 1 << i;
                    }
                    let mut next_reg = reg;
                    for &i in &newly {
                        next_reg |= 1 << i;
                    }
                    for &i in &answering {
                        next_reg &= !(1 << i);
                    }
                    path.push(IntervalStep {
                        transition: t,
                        anchors: anchor_ops.clone(),
                        registered: newly.clone(),
                        responded: answering.clone(),
                        state: next.clone(),
                    });
                    if self.dfs(next_done, next_reg, next, path)? {
                        return Ok(true);
                    }
                    path.pop();
                }
            }
        }
        self.failed.insert(key);
        Ok(false)
    }
}
