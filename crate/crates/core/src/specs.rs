//! Executable object specifications.
//!
//! * [`SeqSpec`]: sequential stack, queue, counter, FAI and register.
//! * [`SetSpec`]: stack and queue with multiplicity, where a concurrency
//!   class of removals may all return the head item.
//! * [`IntervalSpec`]: queue with weak-empty, where a dequeue registers at
//!   one transition and answers `weakempty` at a later one once everything
//!   present at registration has been dequeued.
//!
//! Specs are pure validators: the checkers search for the nondeterministic
//! choices and ask the object model whether each step is allowed.

use std::fmt;

use thiserror::Error;

use crate::op::{OpCall, OpKind, Payload, ProcId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct Invalid(pub String);

fn invalid<T>(msg: impl Into<String>) -> Result<T, Invalid> {
    Err(Invalid(msg.into()))
}

/// A string of items. Index 0 is the head of a queue or the top of a stack.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u64>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn head(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn tail(&self) -> Word {
        Word(self.0.iter().skip(1).copied().collect())
    }
}

impl From<&[u64]> for Word {
    fn from(v: &[u64]) -> Word {
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Sequential specifications. Stack and queue states are the item strings;
/// counter and FAI states are one-element words holding the value; a
/// register state is empty (never written) or holds the last write.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeqSpec {
    Stack,
    Queue,
    Counter,
    Fai { initial: u64 },
    Register,
}

impl SeqSpec {
    pub fn initial(&self) -> Word {
        match self {
            SeqSpec::Counter => Word(vec![0]),
            SeqSpec::Fai { initial } => Word(vec![*initial]),
            _ => Word::empty(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SeqSpec::Stack => "stack",
            SeqSpec::Queue => "queue",
            SeqSpec::Counter => "counter",
            SeqSpec::Fai { .. } => "fai",
            SeqSpec::Register => "register",
        }
    }

    /// The deterministic transition function.
    pub fn step(&self, q: &Word, call: &OpCall) -> Result<(Word, Payload), Invalid> {
        let mismatch = || invalid(format!("`{}` is not an operation of the {}", call.kind(), self.name()));
        Ok(match (self, call) {
            (SeqSpec::Stack, OpCall::Push(x)) => {
                let mut v = Vec::with_capacity(q.0.len() + 1);
                v.push(x.get());
                v.extend_from_slice(&q.0);
                (Word(v), Payload::True)
            }
            (SeqSpec::Queue, OpCall::Enq(x)) => {
                let mut v = q.0.clone();
                v.push(x.get());
                (Word(v), Payload::True)
            }
            (SeqSpec::Stack, OpCall::Pop) | (SeqSpec::Queue, OpCall::Deq) => match q.head() {
                Some(x) => (q.tail(), Payload::Int(x)),
                None => (q.clone(), Payload::Empty),
            },
            (SeqSpec::Counter, OpCall::Inc) => (Word(vec![q.head().unwrap_or(0) + 1]), Payload::True),
            (SeqSpec::Counter, OpCall::Read) => (q.clone(), Payload::Int(q.head().unwrap_or(0))),
            (SeqSpec::Fai { .. }, OpCall::Fai) => {
                let v = q.head().unwrap_or(0);
                (Word(vec![v + 1]), Payload::Int(v))
            }
            (SeqSpec::Register, OpCall::Write(x)) => (Word(vec![x.get()]), Payload::True),
            (SeqSpec::Register, OpCall::Read) => match q.head() {
                Some(x) => (q.clone(), Payload::Int(x)),
                None => (q.clone(), Payload::Empty),
            },
            _ => return mismatch(),
        })
    }

    /// Applies `call` and checks that the object model produces `result`.
    pub fn accepts(&self, q: &Word, call: &OpCall, result: Payload) -> Option<Word> {
        match self.step(q, call) {
            Ok((next, r)) if r == result => Some(next),
            _ => None,
        }
    }
}

/// One operation inside a concurrency class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClassMember {
    pub proc: ProcId,
    pub call: OpCall,
    pub result: Payload,
}

impl fmt::Display for ClassMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{} {} -> {}", self.proc, self.call, self.result)
    }
}

/// Stack or queue with multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetSpec {
    Stack,
    Queue,
}

impl SetSpec {
    pub fn seq(&self) -> SeqSpec {
        match self {
            SetSpec::Stack => SeqSpec::Stack,
            SetSpec::Queue => SeqSpec::Queue,
        }
    }

    fn removal(&self) -> OpKind {
        match self {
            SetSpec::Stack => OpKind::Pop,
            SetSpec::Queue => OpKind::Deq,
        }
    }

    /// Applies one concurrency class. Valid classes are a single
    /// insertion, a single removal answering `empty` on the empty string,
    /// or `1 <= t <= procs` removals by distinct processes that all return
    /// the head item.
    pub fn set_step(&self, q: &Word, class: &[ClassMember], procs: usize) -> Result<Word, Invalid> {
        let seq = self.seq();
        match class {
            [] => invalid("empty concurrency class"),
            [one] if one.call.kind() != self.removal() => seq
                .accepts(q, &one.call, one.result)
                .ok_or_else(|| Invalid(format!("{one} does not match state {q}"))),
            [one] if one.result == Payload::Empty => {
                if q.is_empty() {
                    Ok(q.clone())
                } else {
                    invalid(format!("{one} on non-empty state {q}"))
                }
            }
            many => {
                if many.len() > procs {
                    return invalid(format!("class of {} operations exceeds {procs} processes", many.len()));
                }
                for (i, m) in many.iter().enumerate() {
                    if m.call.kind() != self.removal() {
                        return invalid(format!("{m} cannot share a class with other operations"));
                    }
                    if many[..i].iter().any(|o| o.proc == m.proc) {
                        return invalid(format!("process {} appears twice in one class", m.proc));
                    }
                }
                let Some(x) = q.head() else {
                    return invalid(format!("{} removals on the empty state", many.len()));
                };
                match many.iter().find(|m| m.result != Payload::Int(x)) {
                    Some(m) => invalid(format!("{m} but the head is {x}")),
                    None => Ok(q.tail()),
                }
            }
        }
    }
}

/// State of the queue with weak-empty: the queue and, per process, the
/// items a registered dequeue still waits to see removed (`None` = not
/// registered).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntervalState {
    pub q: Word,
    pub pending: Vec<Option<Word>>,
}

impl IntervalState {
    pub fn initial(procs: usize) -> IntervalState {
        IntervalState { q: Word::empty(), pending: vec![None; procs] }
    }
}

impl fmt::Display for IntervalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={} P=[", self.q)?;
        for (i, p) in self.pending.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match p {
                Some(w) => write!(f, "{w}")?,
                None => f.write_str("⊥")?,
            }
        }
        f.write_str("]")
    }
}

/// The operation(s) that take effect at a transition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Anchor {
    Enq { proc: ProcId, x: u64 },
    /// One dequeue, or several sharing a concurrency class when the object model
    /// allows multiplicity. `result` is an item, `Empty` or `WeakEmpty`.
    Deq { procs: Vec<ProcId>, result: Payload },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalTransition {
    pub anchor: Anchor,
    /// Dequeues whose interval opens here (they will answer `weakempty`).
    pub registered: Vec<ProcId>,
    /// Dequeues that answer `weakempty` at this transition.
    pub responded: Vec<ProcId>,
}

impl fmt::Display for IntervalTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.anchor {
            Anchor::Enq { proc, x } => write!(f, "p{proc} enq({x}) -> true")?,
            Anchor::Deq { procs, result } => {
                let ps: Vec<String> = procs.iter().map(|p| format!("p{p}")).collect();
                write!(f, "{} deq -> {result}", ps.join("+"))?
            }
        }
        if !self.registered.is_empty() {
            let ps: Vec<String> = self.registered.iter().map(|p| format!("p{p}")).collect();
            write!(f, "; register {}", ps.join(" "))?;
        }
        if !self.responded.is_empty() {
            let ps: Vec<String> = self.responded.iter().map(|p| format!("p{p}")).collect();
            write!(f, "; weakempty {}", ps.join(" "))?;
        }
        Ok(())
    }
}

/// Queue with weak-empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntervalSpec {
    pub procs: usize,
    /// A lone dequeue on the empty queue may answer `weakempty` at a
    /// single point, not only `empty`.
    pub point_weak_empty: bool,
    /// Several dequeues may return the same head item in one class.
    pub multiplicity: bool,
}

impl IntervalSpec {
    pub fn new(procs: usize) -> IntervalSpec {
        IntervalSpec { procs, point_weak_empty: true, multiplicity: false }
    }

    pub fn with_multiplicity(procs: usize) -> IntervalSpec {
        IntervalSpec { multiplicity: true, ..IntervalSpec::new(procs) }
    }

    pub fn initial(&self) -> IntervalState {
        IntervalState::initial(self.procs)
    }

    fn check_indices(&self, s: &IntervalState, t: &IntervalTransition, invokers: &[ProcId]) -> Result<(), Invalid> {
        let n = self.procs;
        if s.pending.len() != n {
            return invalid(format!("state tracks {} processes, spec has {n}", s.pending.len()));
        }
        let all = invokers.iter().chain(&t.registered).chain(&t.responded);
        if let Some(p) = all.clone().find(|&&p| p >= n) {
            return invalid(format!("process {p} out of range"));
        }
        if t.registered.len() > n.saturating_sub(1) || t.responded.len() > n.saturating_sub(1) {
            return invalid("at most n-1 dequeues may register or respond at one transition");
        }
        for (k, i) in t.registered.iter().enumerate() {
            if t.registered[..k].contains(i) {
                return invalid(format!("p{i} registers twice"));
            }
            if invokers.contains(i) {
                return invalid(format!("p{i} both anchors and registers"));
            }
            if s.pending[*i].is_some() {
                return invalid(format!("p{i} is already registered"));
            }
        }
        for (k, j) in t.responded.iter().enumerate() {
            if t.responded[..k].contains(j) {
                return invalid(format!("p{j} responds twice"));
            }
            if invokers.contains(j) {
                return invalid(format!("p{j} both anchors and responds"));
            }
        }
        Ok(())
    }

    /// Validates a transition and returns the next state.
    pub fn interval_step(&self, s: &IntervalState, t: &IntervalTransition) -> Result<IntervalState, Invalid> {
        match &t.anchor {
            Anchor::Enq { proc, x } => {
                self.check_indices(s, t, &[*proc])?;
                if *x == 0 {
                    return invalid("items are positive");
                }
                for &j in &t.responded {
                    let ok = match &s.pending[j] {
                        Some(w) => w.is_empty(),
                        None => s.q.is_empty() && t.registered.contains(&j),
                    };
                    if !ok {
                        return invalid(format!("p{j} cannot answer weakempty at enq({x}) in {s}"));
                    }
                }
                let mut pending = s.pending.clone();
                for &i in &t.registered {
                    pending[i] = Some(s.q.clone());
                }
                for &j in &t.responded {
                    pending[j] = None;
                }
                let mut q = s.q.0.clone();
                q.push(*x);
                Ok(IntervalState { q: Word(q), pending })
            }
            Anchor::Deq { procs, result } => {
                self.check_indices(s, t, procs)?;
                if procs.is_empty() {
                    return invalid("a dequeue anchor needs a process");
                }
                for (k, p) in procs.iter().enumerate() {
                    if procs[..k].contains(p) {
                        return invalid(format!("p{p} anchors twice"));
                    }
                }
                if procs.len() > 1 && !self.multiplicity {
                    return invalid("several dequeues in one class need multiplicity");
                }
                match *result {
                    Payload::Int(x) => self.dequeue(s, t, x),
                    Payload::Empty | Payload::WeakEmpty => {
                        if !s.q.is_empty() {
                            return invalid(format!("deq -> {result} while the queue is {}", s.q));
                        }
                        if procs.len() != 1 || !t.registered.is_empty() || !t.responded.is_empty() {
                            return invalid("a dequeue on the empty queue takes effect alone");
                        }
                        if *result == Payload::WeakEmpty && !self.point_weak_empty {
                            return invalid("weakempty at a single point is disabled");
                        }
                        Ok(s.clone())
                    }
                    other => invalid(format!("deq cannot return {other}")),
                }
            }
        }
    }

    fn dequeue(&self, s: &IntervalState, t: &IntervalTransition, x: u64) -> Result<IntervalState, Invalid> {
        if s.q.head() != Some(x) {
            return invalid(format!("deq -> {x} but the queue is {}", s.q));
        }
        let rest = s.q.tail();
        for &j in &t.responded {
            let ok = match &s.pending[j] {
                Some(w) => w.0 == [x],
                None => rest.is_empty() && t.registered.contains(&j),
            };
            if !ok {
                return invalid(format!("p{j} cannot answer weakempty at deq -> {x} in {s}"));
            }
        }
        let mut pending = Vec::with_capacity(s.pending.len());
        for (idx, p) in s.pending.iter().enumerate() {
            let next = if t.responded.contains(&idx) {
                None
            } else if t.registered.contains(&idx) {
                Some(rest.clone())
            } else {
                match p {
                    None => None,
                    Some(w) if w.is_empty() => Some(Word::empty()),
                    Some(w) if w.head() == Some(x) => Some(w.tail()),
                    Some(w) => return invalid(format!("p{idx} waits for {w}, which does not start with {x}")),
                }
            };
            pending.push(next);
        }
        Ok(IntervalState { q: rest, pending })
    }
}
