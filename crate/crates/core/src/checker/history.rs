//! Histories of invocation/response events and their text trace format.
//!
//! ```text
//! trace v1 n=2 impl=naivequeue
//! 0 0 inv enq 1
//! 1 0 res enq true
//! 2 1 inv deq -
//! 3 1 res deq empty
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::op::{OpCall, OpKind, Payload, ProcId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Inv,
    Res,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Inv => "inv",
            EventKind::Res => "res",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub seq: u64,
    pub proc: ProcId,
    pub kind: EventKind,
    pub op: OpKind,
    /// Argument for invocations, result for responses.
    pub payload: Payload,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.seq, self.proc, self.kind.as_str(), self.op, self.payload)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("ill-formed history: {0}")]
    IllFormed(String),
}

/// An operation reconstructed from its events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Operation {
    pub id: usize,
    pub proc: ProcId,
    pub call: OpCall,
    /// Position of the invocation in the event list.
    pub inv: usize,
    /// Position of the response, `None` while pending.
    pub res: Option<usize>,
    pub result: Option<Payload>,
}

impl Operation {
    pub fn is_complete(&self) -> bool {
        self.res.is_some()
    }

    /// Real-time order: `self` responded before `other` was invoked.
    pub fn precedes(&self, other: &Operation) -> bool {
        matches!(self.res, Some(r) if r < other.inv)
    }

    pub fn overlaps(&self, other: &Operation) -> bool {
        !self.precedes(other) && !other.precedes(self)
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.result {
            Some(r) => write!(f, "p{} {} -> {r}", self.proc, self.call),
            None => write!(f, "p{} {} (pending)", self.proc, self.call),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct History {
    pub procs: usize,
    pub impl_name: String,
    pub events: Vec<Event>,
}

impl History {
    pub fn new(procs: usize, impl_name: impl Into<String>) -> History {
        History { procs, impl_name: impl_name.into(), events: Vec::new() }
    }

    pub fn invoke(&mut self, proc: ProcId, call: &OpCall) {
        let seq = self.events.len() as u64;
        self.events.push(Event { seq, proc, kind: EventKind::Inv, op: call.kind(), payload: call.arg() });
    }

    pub fn respond(&mut self, proc: ProcId, op: OpKind, result: Payload) {
        let seq = self.events.len() as u64;
        self.events.push(Event { seq, proc, kind: EventKind::Res, op, payload: result });
    }

    /// The first `len` events.
    pub fn prefix(&self, len: usize) -> History {
        History { events: self.events[..len.min(self.events.len())].to_vec(), ..self.clone() }
    }

    /// Rebuilds operations, checking well-formedness: per process,
    /// invocations and responses alternate and a response matches the
    /// pending invocation.
    pub fn operations(&self) -> Result<Vec<Operation>, TraceError> {
        let mut ops: Vec<Operation> = Vec::new();
        let mut open: Vec<Option<usize>> = vec![None; self.procs];
        let mut last_seq = None;
        for (pos, e) in self.events.iter().enumerate() {
            if let Some(prev) = last_seq {
                if e.seq <= prev {
                    return Err(TraceError::IllFormed(format!("seq {} does not increase after {prev}", e.seq)));
                }
            }
            last_seq = Some(e.seq);
            if e.proc >= self.procs {
                return Err(TraceError::IllFormed(format!("process {} but n={}", e.proc, self.procs)));
            }
            match e.kind {
                EventKind::Inv => {
                    if open[e.proc].is_some() {
                        return Err(TraceError::IllFormed(format!(
                            "seq {}: process {} invokes while an operation is pending",
                            e.seq, e.proc
                        )));
                    }
                    let call = OpCall::from_parts(e.op, e.payload)
                        .map_err(|m| TraceError::IllFormed(format!("seq {}: {m}", e.seq)))?;
                    open[e.proc] = Some(ops.len());
                    ops.push(Operation { id: ops.len(), proc: e.proc, call, inv: pos, res: None, result: None });
                }
                EventKind::Res => {
                    let Some(id) = open[e.proc].take() else {
                        return Err(TraceError::IllFormed(format!(
                            "seq {}: response without invocation on process {}",
                            e.seq, e.proc
                        )));
                    };
                    if ops[id].call.kind() != e.op {
                        return Err(TraceError::IllFormed(format!(
                            "seq {}: response `{}` to invocation `{}`",
                            e.seq,
                            e.op,
                            ops[id].call.kind()
                        )));
                    }
                    ops[id].res = Some(pos);
                    ops[id].result = Some(e.payload);
                }
            }
        }
        Ok(ops)
    }

    /// Trace text, byte-exact: header plus one line per event.
    pub fn render(&self) -> String {
        let mut out = format!("trace v1 n={} impl={}\n", self.procs, self.impl_name);
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    /// Copy with every `empty` response replaced by `weakempty`.
    pub fn weaken_empty(&self) -> History {
        let mut h = self.clone();
        for e in &mut h.events {
            if e.kind == EventKind::Res && e.payload == Payload::Empty {
                e.payload = Payload::WeakEmpty;
            }
        }
        h
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Syntax { line, msg: msg.into() }
}

impl FromStr for History {
    type Err = TraceError;

    fn from_str(text: &str) -> Result<History, TraceError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| syntax(1, "missing `trace v1` header"))?;
        let mut words = header.split_whitespace();
        if words.next() != Some("trace") || words.next() != Some("v1") {
            return Err(syntax(1, "header must start with `trace v1`"));
        }
        let mut procs = None;
        let mut impl_name = String::new();
        for w in words {
            match w.split_once('=') {
                Some(("n", v)) => procs = Some(v.parse::<usize>().map_err(|_| syntax(1, format!("bad n `{v}`")))?),
                Some(("impl", v)) => impl_name = v.to_string(),
                _ => return Err(syntax(1, format!("unexpected header field `{w}`"))),
            }
        }
        let procs = procs.ok_or_else(|| syntax(1, "header lacks n=<procs>"))?;
        let mut h = History::new(procs, impl_name);
        for (idx, line) in lines {
            let no = idx + 1;
            let f: Vec<&str> = line.split_whitespace().collect();
            let [seq, proc, kind, op, payload] = f[..] else {
                return Err(syntax(no, "expected `seq proc inv|res op payload`"));
            };
            let kind = match kind {
                "inv" => EventKind::Inv,
                "res" => EventKind::Res,
                other => return Err(syntax(no, format!("bad event kind `{other}`"))),
            };
            h.events.push(Event {
                seq: seq.parse().map_err(|_| syntax(no, format!("bad seq `{seq}`")))?,
                proc: proc.parse().map_err(|_| syntax(no, format!("bad process `{proc}`")))?,
                kind,
                op: op.parse().map_err(|m: String| syntax(no, m))?,
                payload: payload.parse().map_err(|m: String| syntax(no, m))?,
            });
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::Item;

    fn sample() -> History {
        let mut h = History::new(2, "naivequeue");
        h.invoke(0, &OpCall::Enq(Item::new(1).unwrap()));
        h.respond(0, OpKind::Enq, Payload::True);
        h.invoke(1, &OpCall::Deq);
        h.respond(1, OpKind::Deq, Payload::Empty);
        h
    }

    #[test]
    fn render_parse_round_trip() {
        let h = sample();
        let text = h.render();
        assert_eq!(
            text,
            "trace v1 n=2 impl=naivequeue\n0 0 inv enq 1\n1 0 res enq true\n2 1 inv deq -\n3 1 res deq empty\n"
        );
        assert_eq!(text.parse::<History>().unwrap(), h);
    }

    #[test]
    fn operations_and_order() {
        let ops = sample().operations().unwrap();
        assert_eq!(ops.len(), 2);
        assert!(ops[0].precedes(&ops[1]));
        assert!(!ops[1].precedes(&ops[0]));
        let pending = sample().prefix(3).operations().unwrap();
        assert!(!pending[1].is_complete());
        assert!(pending[0].precedes(&pending[1]));
    }

    #[test]
    fn ill_formed_histories() {
        let bad = "trace v1 n=1 impl=x\n0 0 inv pop -\n1 0 inv pop -\n";
        assert!(bad.parse::<History>().unwrap().operations().is_err());
        let bad = "trace v1 n=1 impl=x\n0 0 res pop 1\n";
        assert!(bad.parse::<History>().unwrap().operations().is_err());
        let bad = "trace v1 n=1 impl=x\n0 0 inv push -\n";
        assert!(bad.parse::<History>().unwrap().operations().is_err());
        assert!("0 0 inv pop -".parse::<History>().is_err());
        assert!("trace v1 n=1\n0 0 inv pop".parse::<History>().is_err());
        let empty: History = "trace v1 n=3 impl=x\n".parse().unwrap();
        assert!(empty.operations().unwrap().is_empty());
    }
}
