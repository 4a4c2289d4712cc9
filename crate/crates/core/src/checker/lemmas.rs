use std::collections::HashMap;
use std::fmt;

use super::{check_linearizable, CheckError, History, Operation, SearchConfig};
use crate::op::Payload;
use crate::specs::SeqSpec;

/// Two removals that returned the same item.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DuplicatePair {
    pub item: u64,
    pub first: usize,
    pub second: usize,
    pub overlapping: bool,
}

/// Result of the plain linearizability check run by the lemma report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinOutcome {
    /// The history is in none of the classes that must be linearizable.
    NotRequired,
    Linearizable,
    NotLinearizable,
    /// Too large to search; only sequential histories are replayed directly.
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub operations: usize,
    pub duplicates: Vec<DuplicatePair>,
    pub sequential: bool,
    pub no_concurrent_removals: bool,
    pub distinct_returns: bool,
    pub linearizable: LinOutcome,
}

impl LemmaReport {
    /// Pairs of duplicate returns whose intervals are disjoint.
    pub fn violations(&self) -> impl Iterator<Item = &DuplicatePair> {
        self.duplicates.iter().filter(|d| !d.overlapping)
    }

    /// Duplicates overlap, and the histories that must be linearizable are.
    pub fn holds(&self) -> bool {
        self.violations().next().is_none() && self.linearizable != LinOutcome::NotLinearizable
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "operations: {}", self.operations)?;
        writeln!(f, "duplicate pairs: {}", self.duplicates.len())?;
        writeln!(f, "non-overlapping duplicate pairs: {}", self.violations().count())?;
        for d in self.violations() {
            writeln!(f, "  item {} returned by ops {} and {} without overlap", d.item, d.first, d.second)?;
        }
        writeln!(f, "sequential: {}", self.sequential)?;
        writeln!(f, "no concurrent removals: {}", self.no_concurrent_removals)?;
        writeln!(f, "distinct returns: {}", self.distinct_returns)?;
        let lin = match &self.linearizable {
            LinOutcome::NotRequired => "not required".to_string(),
            LinOutcome::Linearizable => "yes".to_string(),
            LinOutcome::NotLinearizable => "NO".to_string(),
            LinOutcome::Skipped(why) => format!("skipped ({why})"),
        };
        writeln!(f, "linearizable: {lin}")
    }
}

/// True when no two of `ops` overlap. Sorts by invocation.
fn pairwise_disjoint(mut ops: Vec<&Operation>) -> bool {
    ops.sort_by_key(|o| o.inv);
    let mut last_res: Option<usize> = Some(0);
    for (k, o) in ops.iter().enumerate() {
        if k > 0 {
            match last_res {
                Some(r) if r < o.inv => {}
                _ => return false,
            }
        }
        last_res = o.res;
    }
    true
}

/// Direct checks of the duplicate-return properties of relaxed stacks and
/// queues: duplicates must come from overlapping removals, and sequential
/// histories, histories without concurrent removals and histories with
/// distinct returns must be plainly linearizable against `spec`.
pub fn check_lemma_properties(h: &History, spec: SeqSpec, cfg: &SearchConfig) -> Result<LemmaReport, CheckError> {
    let ops = h.operations()?;
    let removals: Vec<&Operation> = ops.iter().filter(|o| o.call.kind().is_removal()).collect();

    let mut by_item: HashMap<u64, Vec<&Operation>> = HashMap::new();
    for o in &removals {
        if let Some(Payload::Int(x)) = o.result {
            by_item.entry(x).or_default().push(o);
        }
    }
    let mut duplicates = Vec::new();
    for (&item, group) in &by_item {
        for (k, a) in group.iter().enumerate() {
            for b in &group[k + 1..] {
                let (first, second) = if a.inv < b.inv { (a, b) } else { (b, a) };
                duplicates.push(DuplicatePair { item, first: first.id, second: second.id, overlapping: a.overlaps(b) });
            }
        }
    }
    duplicates.sort_by_key(|d| (d.first, d.second));

    let sequential = pairwise_disjoint(ops.iter().collect());
    let no_concurrent_removals = pairwise_disjoint(removals.clone());
    let distinct_returns = duplicates.is_empty();

    let linearizable = if !(sequential || no_concurrent_removals || distinct_returns) {
        LinOutcome::NotRequired
    } else if sequential {
        let mut q = spec.initial();
        let mut ok = true;
        let mut sorted: Vec<&Operation> = ops.iter().collect();
        sorted.sort_by_key(|o| o.inv);
        for o in sorted {
            let Ok((next, r)) = spec.step(&q, &o.call) else {
                ok = false;
                break;
            };
            if o.result.is_some_and(|want| want != r) {
                ok = false;
                break;
            }
            q = next;
        }
        if ok {
            LinOutcome::Linearizable
        } else {
            LinOutcome::NotLinearizable
        }
    } else if ops.len() <= cfg.max_ops {
        match check_linearizable(h, spec, cfg) {
            Ok(v) if v.accepted => LinOutcome::Linearizable,
            Ok(_) => LinOutcome::NotLinearizable,
            Err(e) => LinOutcome::Skipped(e.to_string()),
        }
    } else {
        LinOutcome::Skipped(format!("{} operations exceed the search cap of {}", ops.len(), cfg.max_ops))
    };

    Ok(LemmaReport { operations: ops.len(), duplicates, sequential, no_concurrent_removals, distinct_returns, linearizable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::{OpCall, OpKind};
    use crate::registers::Item;

    fn pops(overlap: bool) -> History {
        let mut h = History::new(3, "x");
        h.invoke(0, &OpCall::Push(Item::new(7).unwrap()));
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
    fn overlapping_duplicates_hold() {
        let r = check_lemma_properties(&pops(true), SeqSpec::Stack, &SearchConfig::default()).unwrap();
        assert_eq!(r.duplicates.len(), 1);
        assert!(r.duplicates[0].overlapping);
        assert!(r.holds());
        assert!(!r.sequential);
        assert_eq!(r.linearizable, LinOutcome::NotRequired);
    }

    #[test]
    fn disjoint_duplicates_flagged() {
        let r = check_lemma_properties(&pops(false), SeqSpec::Stack, &SearchConfig::default()).unwrap();
        assert_eq!(r.violations().count(), 1);
        assert!(r.sequential);
        assert_eq!(r.linearizable, LinOutcome::NotLinearizable);
        assert!(!r.holds());
    }

    #[test]
    fn distinct_returns_are_checked_for_linearizability() {
        let mut h = History::new(2, "x");
        for x in [1, 2] {
            h.invoke(0, &OpCall::Enq(Item::new(x).unwrap()));
            h.respond(0, OpKind::Enq, Payload::True);
        }
        h.invoke(0, &OpCall::Deq);
        h.invoke(1, &OpCall::Deq);
        h.respond(1, OpKind::Deq, Payload::Int(1));
        h.respond(0, OpKind::Deq, Payload::Int(2));
        let r = check_lemma_properties(&h, SeqSpec::Queue, &SearchConfig::default()).unwrap();
        assert!(r.distinct_returns && !r.no_concurrent_removals);
        assert_eq!(r.linearizable, LinOutcome::Linearizable);
    }
}
