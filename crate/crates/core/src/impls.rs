//! Registry of every implementation the harness can drive.

use std::fmt;

use crate::adapters::{Balancer, KFifo, KFifoOp};
use crate::machine::{ProcLocal, Step, StepMachine};
use crate::op::{OpCall, OpKind};
use crate::queues::{NaiveQueue, NaiveQueueOp, QueueKind, ScanQueue, ScanQueueOp};
use crate::registers::{CellId, CounterObject, Fault, FaiObject, ObjectOp, RenameMachine, RenamingObject};
use crate::stacks::{PushOrder, RenStack, RenStackOp, SeqStack, SeqStackOp, SetSeqStack, SetSeqStackOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    SeqStack(SeqStack),
    SetSeqStack(SetSeqStack),
    RenStack(RenStack),
    Queue(ScanQueue),
    NaiveQueue(NaiveQueue),
    Counter(CounterObject),
    Fai(FaiObject),
    Register,
    Renaming(RenamingObject),
    KFifo(KFifo),
}

/// Which sequential object an implementation is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Stack,
    Queue,
    Counter,
    Fai,
    Register,
    Renaming,
}

/// An algorithm instantiated for a fixed number of processes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Impl {
    pub algo: Algo,
    pub procs: usize,
}

pub const IMPL_NAMES: &[&str] = &[
    "seqstack",
    "setseqstack",
    "renstack",
    "renstack-published",
    "seqqueue",
    "setseqqueue",
    "naivequeue",
    "intseqqueue",
    "rwintseqqueue",
    "counter",
    "fai",
    "register",
    "renaming",
    "kfifo",
    "kfifo-random",
];

impl Impl {
    pub fn by_name(name: &str, procs: usize) -> Result<Impl, String> {
        if procs == 0 {
            return Err("at least one process is required".into());
        }
        let algo = match name {
            "seqstack" => Algo::SeqStack(SeqStack),
            "setseqstack" => Algo::SetSeqStack(SetSeqStack::new(procs)),
            "renstack" => Algo::RenStack(RenStack::new(procs, PushOrder::AnnounceFirst)),
            "renstack-published" => Algo::RenStack(RenStack::new(procs, PushOrder::Published)),
            "seqqueue" => Algo::Queue(ScanQueue::new(QueueKind::Seq, procs)),
            "setseqqueue" => Algo::Queue(ScanQueue::new(QueueKind::SetSeq, procs)),
            "intseqqueue" => Algo::Queue(ScanQueue::new(QueueKind::IntSeq, procs)),
            "rwintseqqueue" => Algo::Queue(ScanQueue::new(QueueKind::RwIntSeq, procs)),
            "naivequeue" => Algo::NaiveQueue(NaiveQueue),
            "counter" => Algo::Counter(CounterObject { procs }),
            "fai" => Algo::Fai(FaiObject { initial: 0 }),
            "register" => Algo::Register,
            "renaming" => Algo::Renaming(RenamingObject { procs }),
            "kfifo" => Algo::KFifo(KFifo::new(2, procs, Balancer::RoundRobin)),
            "kfifo-random" => Algo::KFifo(KFifo::new(2, procs, Balancer::Random)),
            other => {
                return Err(format!("unknown implementation `{other}` (known: {})", IMPL_NAMES.join(", ")))
            }
        };
        Ok(Impl { algo, procs })
    }

    pub fn name(&self) -> String {
        match self.algo {
            Algo::SeqStack(_) => "seqstack".into(),
            Algo::SetSeqStack(_) => "setseqstack".into(),
            Algo::RenStack(s) => match s.order {
                PushOrder::AnnounceFirst => "renstack".into(),
                PushOrder::Published => "renstack-published".into(),
            },
            Algo::Queue(q) => q.kind.name().into(),
            Algo::NaiveQueue(_) => "naivequeue".into(),
            Algo::Counter(_) => "counter".into(),
            Algo::Fai(_) => "fai".into(),
            Algo::Register => "register".into(),
            Algo::Renaming(_) => "renaming".into(),
            Algo::KFifo(k) => match (k.balancer, k.lanes) {
                (Balancer::RoundRobin, 2) => "kfifo".into(),
                (Balancer::Random, 2) => "kfifo-random".into(),
                (Balancer::RoundRobin, p) => format!("kfifo:{p}"),
                (Balancer::Random, p) => format!("kfifo-random:{p}"),
            },
        }
    }

    pub fn flavor(&self) -> Flavor {
        match self.algo {
            Algo::SeqStack(_) | Algo::SetSeqStack(_) | Algo::RenStack(_) => Flavor::Stack,
            Algo::Queue(_) | Algo::NaiveQueue(_) | Algo::KFifo(_) => Flavor::Queue,
            Algo::Counter(_) => Flavor::Counter,
            Algo::Fai(_) => Flavor::Fai,
            Algo::Register => Flavor::Register,
            Algo::Renaming(_) => Flavor::Renaming,
        }
    }

    /// Operation kinds accepted by the implementation.
    pub fn op_kinds(&self) -> &'static [OpKind] {
        match self.flavor() {
            Flavor::Stack => &[OpKind::Push, OpKind::Pop],
            Flavor::Queue => &[OpKind::Enq, OpKind::Deq],
            Flavor::Counter => &[OpKind::Inc, OpKind::Read],
            Flavor::Fai => &[OpKind::Fai],
            Flavor::Register => &[OpKind::Write, OpKind::Read],
            Flavor::Renaming => &[OpKind::Rename],
        }
    }

    /// Cells whose initial value is not zero.
    pub fn initial_cells(&self) -> Vec<(CellId, u64)> {
        match self.algo {
            Algo::SeqStack(s) => s.initial_cells(),
            Algo::Queue(q) => q.initial_cells(),
            Algo::NaiveQueue(q) => q.initial_cells(),
            Algo::Fai(f) if f.initial != 0 => vec![(FaiObject::CELL, f.initial)],
            _ => Vec::new(),
        }
    }

    /// Capacity that fits a run of `ops` operations with room to spare.
    pub fn capacity_for(&self, ops: usize) -> u64 {
        let n = self.procs as u64;
        let per_row = match self.algo {
            Algo::SeqStack(_) | Algo::NaiveQueue(_) => 1,
            Algo::Queue(q) => q.width(),
            Algo::SetSeqStack(_) => n,
            Algo::RenStack(s) => n + 2 * crate::registers::grid_size(self.procs) + s.row_width(),
            Algo::KFifo(k) => n * k.lanes as u64,
            Algo::Counter(_) | Algo::Fai(_) | Algo::Register => 0,
            Algo::Renaming(_) => 2 * crate::registers::grid_size(self.procs),
        };
        (ops as u64 + 2).saturating_mul(per_row.max(1)).saturating_add(4 * n + 64)
    }

    /// Starts an operation; the machine has not taken any step yet.
    pub fn begin(&self, call: &OpCall) -> Result<Machine, Fault> {
        Ok(match self.algo {
            Algo::SeqStack(s) => Machine::SeqStack(s.begin(call)?),
            Algo::SetSeqStack(s) => Machine::SetSeqStack(s.begin(call)?),
            Algo::RenStack(s) => Machine::RenStack(s.begin(call)?),
            Algo::Queue(q) => Machine::Queue(q.begin(call)?),
            Algo::NaiveQueue(q) => Machine::Naive(q.begin(call)?),
            Algo::Counter(c) => Machine::Object(ObjectOp::counter(&c, call)?),
            Algo::Fai(_) => Machine::Object(ObjectOp::fai(call)?),
            Algo::Register => Machine::Object(ObjectOp::register(call)?),
            Algo::Renaming(r) => Machine::Rename(r.begin(call)?),
            Algo::KFifo(k) => Machine::KFifo(k.begin(call)?),
        })
    }
}

impl fmt::Display for Impl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// In-flight operation of any implementation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Machine {
    SeqStack(SeqStackOp),
    SetSeqStack(SetSeqStackOp),
    RenStack(RenStackOp),
    Queue(ScanQueueOp),
    Naive(NaiveQueueOp),
    Object(ObjectOp),
    Rename(RenameMachine),
    KFifo(KFifoOp),
}

impl StepMachine for Machine {
    fn resume(&mut self, reply: Option<u64>, local: &mut ProcLocal) -> Result<Step, Fault> {
        match self {
            Machine::SeqStack(m) => m.resume(reply, local),
            Machine::SetSeqStack(m) => m.resume(reply, local),
            Machine::RenStack(m) => m.resume(reply, local),
            Machine::Queue(m) => m.resume(reply, local),
            Machine::Naive(m) => m.resume(reply, local),
            Machine::Object(m) => m.resume(reply, local),
            Machine::Rename(m) => m.resume(reply, local),
            Machine::KFifo(m) => m.resume(reply, local),
        }
    }
}
