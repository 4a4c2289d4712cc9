use std::collections::HashSet;

use super::{Budget, CheckError, History, Linearized, OrderTable, SearchConfig, Verdict, Witness};
use crate::op::Payload;
use crate::specs::{ClassMember, SeqSpec, SetSpec, Word};

/// Searches for a sequential order of the operations, respecting real-time
/// order and the sequential spec. Pending operations may be left out or
/// completed with whatever result the object model gives them.
pub fn check_linearizable(h: &History, spec: SeqSpec, cfg: &SearchConfig) -> Result<Verdict, CheckError> {
    let table = OrderTable::new(h.operations()?, cfg.max_ops)?;
    let mut search = LinSearch { table: &table, spec, budget: Budget::new(cfg.node_budget), failed: HashSet::new() };
    let mut path = Vec::new();
    let found = search.dfs(0, spec.initial(), &mut path)?;
    let stats = search.budget.stats;
    Ok(if found { Verdict::accept(Witness::Linearization(path), stats) } else { Verdict::reject(stats) })
}

struct LinSearch<'a> {
    table: &'a OrderTable,
    spec: SeqSpec,
    budget: Budget,
    failed: HashSet<(u64, Word)>,
}

impl LinSearch<'_> {
    fn dfs(&mut self, done: u64, q: Word, path: &mut Vec<Linearized>) -> Result<bool, CheckError> {
        if self.table.complete & !done == 0 {
            return Ok(true);
        }
        if self.failed.contains(&(done, q.clone())) {
            self.budget.stats.memo_hits += 1;
            return Ok(false);
        }
        self.budget.tick()?;
        for i in self.table.eligible(done, done) {
            let op = self.table.ops[i];
            let Ok((next, r)) = self.spec.step(&q, &op.call) else { continue };
            if op.result.is_some_and(|want| want != r) {
                continue;
            }
            path.push(Linearized { op: i, proc: op.proc, call: op.call, result: r });
            if self.dfs(done | 1 << i, next, path)? {
                return Ok(true);
            }
            path.pop();
        }
        self.failed.insert((done, q));
        Ok(false)
    }
}

/// Searches for a sequence of concurrency classes. Every class is drawn
/// from the operations eligible at that point, which are pairwise
/// concurrent and belong to distinct processes.
pub fn check_set_linearizable(h: &History, spec: SetSpec, cfg: &SearchConfig) -> Result<Verdict, CheckError> {
    let table = OrderTable::new(h.operations()?, cfg.max_ops)?;
    let mut search = SetSearch {
        table: &table,
        spec,
        procs: h.procs,
        singletons: cfg.singleton_classes,
        budget: Budget::new(cfg.node_budget),
        failed: HashSet::new(),
    };
    let mut path = Vec::new();
    let found = search.dfs(0, spec.seq().initial(), &mut path)?;
    let stats = search.budget.stats;
    Ok(if found { Verdict::accept(Witness::SetLinearization(path), stats) } else { Verdict::reject(stats) })
}

struct SetSearch<'a> {
    table: &'a OrderTable,
    spec: SetSpec,
    procs: usize,
    singletons: bool,
    budget: Budget,
    failed: HashSet<(u64, Word)>,
}

impl SetSearch<'_> {
    fn member(&self, i: usize, result: Payload) -> Linearized {
        let op = self.table.ops[i];
        Linearized { op: i, proc: op.proc, call: op.call, result }
    }

    /// Candidate classes from the eligible set, singletons first.
    fn classes(&self, q: &Word, eligible: &[usize]) -> Vec<Vec<Linearized>> {
        let seq = self.spec.seq();
        let mut out = Vec::new();
        for &i in eligible {
            let op = self.table.ops[i];
            if let Ok((_, r)) = seq.step(q, &op.call) {
                if op.result.map_or(true, |want| want == r) {
                    out.push(vec![self.member(i, r)]);
                }
            }
        }
        if self.singletons {
            return out;
        }
        let Some(x) = q.head() else { return out };
        let head = Payload::Int(x);
        let removals: Vec<usize> = eligible
            .iter()
            .copied()
            .filter(|&i| {
                let op = self.table.ops[i];
                op.call.kind().is_removal() && op.result.map_or(true, |r| r == head)
            })
            .collect();
        let k = removals.len();
        let mut groups: Vec<Vec<usize>> = (1u32..1 << k)
            .filter(|m| m.count_ones() >= 2)
            .map(|m| (0..k).filter(|b| m & (1 << b) != 0).map(|b| removals[b]).collect())
            .collect();
        groups.sort_by_key(|g| std::cmp::Reverse(g.len()));
        for g in groups {
            out.push(g.into_iter().map(|i| self.member(i, head)).collect());
        }
        out
    }

    fn dfs(&mut self, done: u64, q: Word, path: &mut Vec<Vec<Linearized>>) -> Result<bool, CheckError> {
        if self.table.complete & !done == 0 {
            return Ok(true);
        }
        if self.failed.contains(&(done, q.clone())) {
            self.budget.stats.memo_hits += 1;
            return Ok(false);
        }
        self.budget.tick()?;
        let eligible = self.table.eligible(done, done);
        for class in self.classes(&q, &eligible) {
            let members: Vec<ClassMember> =
                class.iter().map(|l| ClassMember { proc: l.proc, call: l.call, result: l.result }).collect();
            let Ok(next) = self.spec.set_step(&q, &members, self.procs) else { continue };
            let mask = class.iter().fold(done, |m, l| m | 1 << l.op);
            path.push(class);
            if self.dfs(mask, next, path)? {
                return Ok(true);
            }
            path.pop();
        }
        self.failed.insert((done, q));
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::validate_witness;
    use crate::checker::Condition;
    use crate::op::{OpCall, OpKind};
    use crate::registers::Item;

    fn it(v: u64) -> Item {
        Item::new(v).unwrap()
    }

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    #[test]
    fn empty_history_is_linearizable() {
        let h = History::new(2, "x");
        let v = check_linearizable(&h, SeqSpec::Queue, &cfg()).unwrap();
        assert!(v.accepted);
        assert_eq!(v.witness, Some(Witness::Linearization(vec![])));
    }

    #[test]
    fn sequential_enq_deq_accepted() {
        let mut h = History::new(1, "x");
        h.invoke(0, &OpCall::Enq(it(1)));
        h.respond(0, OpKind::Enq, Payload::True);
        h.invoke(0, &OpCall::Deq);
        h.respond(0, OpKind::Deq, Payload::Int(1));
        let v = check_linearizable(&h, SeqSpec::Queue, &cfg()).unwrap();
        assert!(v.accepted);
        validate_witness(&h, &Condition::Lin(SeqSpec::Queue), v.witness.as_ref().unwrap()).unwrap();
    }

    /// push(7) then two pops returning 7, overlapping or not.
    fn double_pop(overlap: bool) -> History {
        let mut h = History::new(3, "x");
        h.invoke(0, &OpCall::Push(it(7)));
        h.respond(0, OpKind::Push, Payload::True);
        h.invoke(1, &OpCall::Pop);
        if overlap {
            h.invoke(2, &OpCall::Pop);
            h.respond(1, OpKind::Pop, Payload::Int(7));
        } else {
            h.respond(1, OpKind::Pop, Payload::Int(7));
            h.invoke(2, &OpCall::Pop);
        }
        h.respond(2, OpKind::Pop, Payload::Int(7));
        h
    }

    #[test]
    fn duplicate_pops_need_overlap() {
        let h = double_pop(true);
        let v = check_set_linearizable(&h, SetSpec::Stack, &cfg()).unwrap();
        assert!(v.accepted);
        let Some(Witness::SetLinearization(classes)) = &v.witness else { panic!() };
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[1].len(), 2);
        validate_witness(&h, &Condition::SetLin(SetSpec::Stack), v.witness.as_ref().unwrap()).unwrap();
        assert!(!check_linearizable(&h, SeqSpec::Stack, &cfg()).unwrap().accepted);

        let h = double_pop(false);
        assert!(!check_set_linearizable(&h, SetSpec::Stack, &cfg()).unwrap().accepted);
    }

    #[test]
    fn pending_operations_may_complete_or_vanish() {
        // pending push(1) overlapping a pop that returned 1
        let mut h = History::new(2, "x");
        h.invoke(0, &OpCall::Push(it(1)));
        h.invoke(1, &OpCall::Pop);
        h.respond(1, OpKind::Pop, Payload::Int(1));
        assert!(check_linearizable(&h, SeqSpec::Stack, &cfg()).unwrap().accepted);
        // pending pop can be dropped
        let mut h = History::new(2, "x");
        h.invoke(0, &OpCall::Push(it(1)));
        h.respond(0, OpKind::Push, Payload::True);
        h.invoke(1, &OpCall::Pop);
        h.invoke(0, &OpCall::Pop);
        h.respond(0, OpKind::Pop, Payload::Int(1));
        assert!(check_linearizable(&h, SeqSpec::Stack, &cfg()).unwrap().accepted);
    }

    #[test]
    fn budget_is_reported() {
        let h = double_pop(false);
        let tight = SearchConfig { node_budget: 1, ..cfg() };
        assert!(matches!(
            check_set_linearizable(&h, SetSpec::Stack, &tight),
            Err(CheckError::SearchBudgetExceeded { .. })
        ));
        let small = SearchConfig { max_ops: 2, ..cfg() };
        assert!(matches!(check_linearizable(&h, SeqSpec::Stack, &small), Err(CheckError::HistoryTooLarge { .. })));
    }
}
