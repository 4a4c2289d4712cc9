use std::fmt;

use super::{Condition, History, Operation};
use crate::op::{OpCall, OpKind, Payload, ProcId};
use crate::specs::{Anchor, ClassMember, IntervalState, IntervalTransition};

/// One operation placed in a witness, with the result it takes there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Linearized {
    pub op: usize,
    pub proc: ProcId,
    pub call: OpCall,
    pub result: Payload,
}

impl fmt::Display for Linearized {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{} {} -> {}", self.proc, self.call, self.result)
    }
}

/// One transition of an interval witness and the operations behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalStep {
    pub transition: IntervalTransition,
    pub anchors: Vec<usize>,
    pub registered: Vec<usize>,
    pub responded: Vec<usize>,
    /// State after the transition.
    pub state: IntervalState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Linearization(Vec<Linearized>),
    SetLinearization(Vec<Vec<Linearized>>),
    Interval(Vec<IntervalStep>),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Linearization(ops) => {
                for l in ops {
                    writeln!(f, "{l}")?;
                }
            }
            Witness::SetLinearization(classes) => {
                for c in classes {
                    let parts: Vec<String> = c.iter().map(|l| l.to_string()).collect();
                    writeln!(f, "{{{}}}", parts.join(", "))?;
                }
            }
            Witness::Interval(steps) => {
                for s in steps {
                    writeln!(f, "{}  => {}", s.transition, s.state)?;
                }
            }
        }
        Ok(())
    }
}

/// Replays a witness through the object model and checks it against the history:
/// every completed operation appears with its recorded result, pending
/// operations appear at most once, and real-time order is respected.
pub fn validate_witness(h: &History, cond: &Condition, w: &Witness) -> Result<(), String> {
    let ops = h.operations().map_err(|e| e.to_string())?;
    // first and last position at which each operation takes part
    let mut span: Vec<Option<(usize, usize)>> = vec![None; ops.len()];
    let touch = |id: usize, pos: usize, span: &mut Vec<Option<(usize, usize)>>| -> Result<(), String> {
        let slot = span.get_mut(id).ok_or_else(|| format!("witness names unknown operation {id}"))?;
        *slot = Some(match *slot {
            None => (pos, pos),
            Some((a, _)) => (a, pos),
        });
        Ok(())
    };
    let check_result = |l: &Linearized| -> Result<(), String> {
        let op = ops.get(l.op).ok_or_else(|| format!("unknown operation {}", l.op))?;
        if op.call != l.call || op.proc != l.proc {
            return Err(format!("witness entry {l} does not match {op}"));
        }
        match op.result {
            Some(r) if r != l.result => Err(format!("{op} placed with result {}", l.result)),
            _ => Ok(()),
        }
    };
    match (cond, w) {
        (Condition::Lin(spec), Witness::Linearization(seq)) => {
            let mut q = spec.initial();
            for (pos, l) in seq.iter().enumerate() {
                check_result(l)?;
                if span[l.op].is_some() {
                    return Err(format!("{l} appears twice"));
                }
                touch(l.op, pos, &mut span)?;
                q = spec.accepts(&q, &l.call, l.result).ok_or_else(|| format!("{l} not allowed in state {q}"))?;
            }
        }
        (Condition::SetLin(spec), Witness::SetLinearization(classes)) => {
            let mut q = spec.seq().initial();
            for (pos, class) in classes.iter().enumerate() {
                for l in class {
                    check_result(l)?;
                    if span[l.op].is_some() {
                        return Err(format!("{l} appears twice"));
                    }
                    touch(l.op, pos, &mut span)?;
                }
                let members: Vec<ClassMember> =
                    class.iter().map(|l| ClassMember { proc: l.proc, call: l.call, result: l.result }).collect();
                q = spec.set_step(&q, &members, h.procs).map_err(|e| format!("class {pos}: {e}"))?;
            }
        }
        (Condition::IntervalLin(spec), Witness::Interval(steps)) => {
            let mut s = spec.initial();
            let mut open: Vec<bool> = vec![false; ops.len()];
            for (pos, st) in steps.iter().enumerate() {
                let t = &st.transition;
                match &t.anchor {
                    Anchor::Enq { proc, x } => {
                        let [i] = st.anchors[..] else { return Err(format!("step {pos}: enq needs one operation")) };
                        let op = ops.get(i).ok_or("unknown operation")?;
                        if op.proc != *proc || op.call.arg() != Payload::Int(*x) || op.call.kind() != OpKind::Enq {
                            return Err(format!("step {pos}: anchor does not match {op}"));
                        }
                    }
                    Anchor::Deq { procs, result } => {
                        if procs.len() != st.anchors.len() {
                            return Err(format!("step {pos}: anchor process count mismatch"));
                        }
                        for (&i, p) in st.anchors.iter().zip(procs) {
                            check_result(&Linearized { op: i, proc: *p, call: OpCall::Deq, result: *result })?;
                        }
                    }
                }
                for &i in &st.anchors {
                    if span[i].is_some() {
                        return Err(format!("step {pos}: {} takes effect twice", ops[i]));
                    }
                    touch(i, pos, &mut span)?;
                }
                if st.registered.len() != t.registered.len() || st.responded.len() != t.responded.len() {
                    return Err(format!("step {pos}: registration lists disagree"));
                }
                for (&i, &p) in st.registered.iter().zip(&t.registered) {
                    let op = ops.get(i).ok_or("unknown operation")?;
                    if op.proc != p || op.call != OpCall::Deq || op.result != Some(Payload::WeakEmpty) {
                        return Err(format!("step {pos}: {op} cannot register"));
                    }
                    if span[i].is_some() {
                        return Err(format!("step {pos}: {op} registers twice"));
                    }
                    touch(i, pos, &mut span)?;
                    open[i] = true;
                }
                for (&i, &p) in st.responded.iter().zip(&t.responded) {
                    let op = ops.get(i).ok_or("unknown operation")?;
                    if op.proc != p || !open[i] {
                        return Err(format!("step {pos}: {op} responds without registering"));
                    }
                    open[i] = false;
                    touch(i, pos, &mut span)?;
                }
                s = spec.interval_step(&s, t).map_err(|e| format!("step {pos}: {e}"))?;
                if s != st.state {
                    return Err(format!("step {pos}: recorded state {} but replay gives {s}", st.state));
                }
            }
            if let Some(i) = (0..ops.len()).find(|&i| open[i]) {
                return Err(format!("{} registered but never answered", ops[i]));
            }
        }
        _ => return Err("witness kind does not match the condition".into()),
    }
    check_coverage_and_order(&ops, &span)
}

fn check_coverage_and_order(ops: &[Operation], span: &[Option<(usize, usize)>]) -> Result<(), String> {
    for op in ops {
        if op.is_complete() && span[op.id].is_none() {
            return Err(format!("completed operation {op} missing from the witness"));
        }
    }
    for a in ops {
        for b in ops {
            if let (true, Some((_, last_a)), Some((first_b, _))) = (a.precedes(b), span[a.id], span[b.id]) {
                if last_a >= first_b {
                    return Err(format!("{a} precedes {b} in real time but not in the witness"));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::Item;
    use crate::specs::{SeqSpec, SetSpec};

    fn two_pushes() -> History {
        let mut h = History::new(2, "x");
        h.invoke(0, &OpCall::Push(Item::new(1).unwrap()));
        h.respond(0, OpKind::Push, Payload::True);
        h.invoke(1, &OpCall::Pop);
        h.respond(1, OpKind::Pop, Payload::Int(1));
        h
    }

    fn entry(op: usize, proc: ProcId, call: OpCall, result: Payload) -> Linearized {
        Linearized { op, proc, call, result }
    }

    #[test]
    fn rejects_bad_witnesses() {
        let h = two_pushes();
        let push = entry(0, 0, OpCall::Push(Item::new(1).unwrap()), Payload::True);
        let pop = entry(1, 1, OpCall::Pop, Payload::Int(1));
        let cond = Condition::Lin(SeqSpec::Stack);
        assert!(validate_witness(&h, &cond, &Witness::Linearization(vec![push, pop])).is_ok());
        assert!(validate_witness(&h, &cond, &Witness::Linearization(vec![pop, push])).is_err());
        assert!(validate_witness(&h, &cond, &Witness::Linearization(vec![push])).is_err());
        assert!(validate_witness(&h, &cond, &Witness::Linearization(vec![push, push, pop])).is_err());
        let set = Condition::SetLin(SetSpec::Stack);
        assert!(validate_witness(&h, &set, &Witness::SetLinearization(vec![vec![push, pop]])).is_err());
        assert!(validate_witness(&h, &set, &Witness::SetLinearization(vec![vec![push], vec![pop]])).is_ok());
        assert!(validate_witness(&h, &set, &Witness::Linearization(vec![push, pop])).is_err());
    }
}
