//! High-level operation vocabulary shared by the algorithms, the specs and
//! the trace format.

use std::fmt;
use std::str::FromStr;

use crate::registers::Item;

/// Process index. Processes are numbered `0..n`.
pub type ProcId = usize;

/// Name of a high-level operation as it appears in traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Push,
    Pop,
    Enq,
    Deq,
    Inc,
    Read,
    Write,
    Fai,
    Rename,
}

impl OpKind {
    pub const ALL: [OpKind; 9] = [
        OpKind::Push,
        OpKind::Pop,
        OpKind::Enq,
        OpKind::Deq,
        OpKind::Inc,
        OpKind::Read,
        OpKind::Write,
        OpKind::Fai,
        OpKind::Rename,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Push => "push",
            OpKind::Pop => "pop",
            OpKind::Enq => "enq",
            OpKind::Deq => "deq",
            OpKind::Inc => "inc",
            OpKind::Read => "read",
            OpKind::Write => "write",
            OpKind::Fai => "fai",
            OpKind::Rename => "rename",
        }
    }

    /// Pop and Deq: the operations that extract items.
    pub fn is_removal(self) -> bool {
        matches!(self, OpKind::Pop | OpKind::Deq)
    }

    /// Push and Enq.
    pub fn is_insertion(self) -> bool {
        matches!(self, OpKind::Push | OpKind::Enq)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OpKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OpKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown operation `{s}`"))
    }
}

/// Argument or result carried by an invocation/response event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    /// No argument (rendered `-`).
    Unit,
    Int(u64),
    Empty,
    WeakEmpty,
    True,
}

impl Payload {
    pub fn item(item: Item) -> Payload {
        Payload::Int(item.get())
    }

    pub fn as_int(self) -> Option<u64> {
        match self {
            Payload::Int(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Unit => f.write_str("-"),
            Payload::Int(v) => write!(f, "{v}"),
            Payload::Empty => f.write_str("empty"),
            Payload::WeakEmpty => f.write_str("weakempty"),
            Payload::True => f.write_str("true"),
        }
    }
}

impl FromStr for Payload {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "-" => Ok(Payload::Unit),
            "empty" => Ok(Payload::Empty),
            "weakempty" => Ok(Payload::WeakEmpty),
            "true" => Ok(Payload::True),
            _ => s
                .parse::<u64>()
                .map(Payload::Int)
                .map_err(|_| format!("bad payload `{s}`")),
        }
    }
}

/// A concrete operation invocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpCall {
    Push(Item),
    Pop,
    Enq(Item),
    Deq,
    Inc,
    Read,
    Write(Item),
    Fai,
    Rename,
}

impl OpCall {
    pub fn kind(&self) -> OpKind {
        match self {
            OpCall::Push(_) => OpKind::Push,
            OpCall::Pop => OpKind::Pop,
            OpCall::Enq(_) => OpKind::Enq,
            OpCall::Deq => OpKind::Deq,
            OpCall::Inc => OpKind::Inc,
            OpCall::Read => OpKind::Read,
            OpCall::Write(_) => OpKind::Write,
            OpCall::Fai => OpKind::Fai,
            OpCall::Rename => OpKind::Rename,
        }
    }

    pub fn arg(&self) -> Payload {
        match self {
            OpCall::Push(x) | OpCall::Enq(x) | OpCall::Write(x) => Payload::item(*x),
            _ => Payload::Unit,
        }
    }

    /// Rebuilds a call from its trace representation.
    pub fn from_parts(kind: OpKind, arg: Payload) -> Result<OpCall, String> {
        let item = || match arg {
            Payload::Int(v) => Item::new(v).ok_or_else(|| format!("item must be positive, got {v}")),
            other => Err(format!("{kind} expects an item argument, got `{other}`")),
        };
        Ok(match kind {
            OpKind::Push => OpCall::Push(item()?),
            OpKind::Enq => OpCall::Enq(item()?),
            OpKind::Write => OpCall::Write(item()?),
            OpKind::Pop => OpCall::Pop,
            OpKind::Deq => OpCall::Deq,
            OpKind::Inc => OpCall::Inc,
            OpKind::Read => OpCall::Read,
            OpKind::Fai => OpCall::Fai,
            OpKind::Rename => OpCall::Rename,
        })
    }
}

impl fmt::Display for OpCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.arg() {
            Payload::Unit => write!(f, "{}", self.kind()),
            arg => write!(f, "{}({arg})", self.kind()),
        }
    }
}

impl FromStr for OpCall {
    type Err = String;

    /// Parses `push(3)`, `pop`, `deq`, ...
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.find('(') {
            Some(open) => {
                let close = s
                    .strip_suffix(')')
                    .ok_or_else(|| format!("unterminated argument in `{s}`"))?;
                let kind: OpKind = s[..open].trim().parse()?;
                let arg: Payload = close[open + 1..].trim().parse()?;
                OpCall::from_parts(kind, arg)
            }
            None => OpCall::from_parts(s.parse()?, Payload::Unit),
        }
    }
}
