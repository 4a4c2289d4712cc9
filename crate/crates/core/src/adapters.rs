//! Compositions on top of the relaxed structures: an idempotent
//! work-stealing pool and a k-FIFO queue made of several lanes.

use std::collections::{BTreeSet, HashMap};

use crate::harness::live::Concurrent;
use crate::machine::{unsupported, ProcLocal, Step, StepMachine};
use crate::op::{OpCall, Payload, ProcId};
use crate::queues::{QueueKind, ScanQueue, ScanQueueOp};
use crate::registers::{reply_of, Access, CellId, Fault, Item, Region};

/// How a k-FIFO operation picks its lane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Balancer {
    /// Separate FAI counters for enqueues and dequeues, lane = ticket mod p.
    RoundRobin,
    /// Process-local seeded random choice; touches no shared memory.
    Random,
}

/// `lanes` read/write set-concurrent queues interleaved in one address
/// space. Cells 0 and 1 hold the enqueue and dequeue tickets; lane `l`
/// maps its logical index `i` to cell `2 + l + i * lanes`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KFifo {
    pub lanes: usize,
    pub procs: usize,
    pub balancer: Balancer,
}

impl KFifo {
    pub const ENQ_TICKET: CellId = CellId(0);
    pub const DEQ_TICKET: CellId = CellId(1);

    pub fn new(lanes: usize, procs: usize, balancer: Balancer) -> KFifo {
        KFifo { lanes: lanes.max(1), procs, balancer }
    }

    pub fn lane(&self, l: usize) -> ScanQueue {
        let region = Region::new(2 + l as u64, self.lanes as u64);
        ScanQueue::in_region(QueueKind::SetSeq, self.procs, region)
    }

    pub fn begin(&self, call: &OpCall) -> Result<KFifoOp, Fault> {
        match call {
            OpCall::Enq(_) | OpCall::Deq => Ok(KFifoOp { obj: *self, call: *call, lane: None }),
            other => Err(unsupported("kfifo", other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KFifoOp {
    obj: KFifo,
    call: OpCall,
    lane: Option<ScanQueueOp>,
}

impl KFifoOp {
    fn enter(&mut self, lane: usize, local: &mut ProcLocal) -> Result<Step, Fault> {
        let mut op = self.obj.lane(lane).begin(&self.call)?;
        let step = op.resume(None, local)?;
        self.lane = Some(op);
        Ok(step)
    }
}

impl StepMachine for KFifoOp {
    fn resume(&mut self, reply: Option<u64>, local: &mut ProcLocal) -> Result<Step, Fault> {
        if let Some(op) = &mut self.lane {
            return op.resume(reply, local);
        }
        let p = self.obj.lanes as u64;
        match (self.obj.balancer, reply) {
            (Balancer::Random, _) => {
                let lane = (local.next_random() % p) as usize;
                self.enter(lane, local)
            }
            (Balancer::RoundRobin, None) => {
                let ticket = match self.call {
                    OpCall::Enq(_) => KFifo::ENQ_TICKET,
                    _ => KFifo::DEQ_TICKET,
                };
                Ok(Step::Access(Access::fai(ticket)))
            }
            (Balancer::RoundRobin, Some(_)) => {
                let lane = (reply_of(reply)? % p) as usize;
                self.enter(lane, local)
            }
        }
    }
}

/// One step of a sequential queue run, as seen by [`max_displacement`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueueEvent {
    Enq(u64),
    Deq(Option<u64>),
}

/// Largest number of older items still present when an item is dequeued,
/// over a sequential run. Zero for a FIFO queue.
pub fn max_displacement(run: &[QueueEvent]) -> usize {
    let mut order: HashMap<u64, usize> = HashMap::new();
    let mut present: BTreeSet<usize> = BTreeSet::new();
    let mut worst = 0;
    for ev in run {
        match *ev {
            QueueEvent::Enq(x) => {
                let pos = order.len();
                order.insert(x, pos);
                present.insert(pos);
            }
            QueueEvent::Deq(Some(x)) => {
                if let Some(&pos) = order.get(&x) {
                    if present.remove(&pos) {
                        worst = worst.max(present.range(..pos).count());
                    }
                }
            }
            QueueEvent::Deq(None) => {}
        }
    }
    worst
}

/// Task pool where `take` and `steal` are both removals, so a task may be
/// handed out more than once but only to overlapping callers.
pub struct WorkStealingPool {
    owner: ProcId,
    core: Concurrent,
}

impl WorkStealingPool {
    /// `core` must be a stack or queue implementation.
    pub fn new(owner: ProcId, core: Concurrent) -> Result<WorkStealingPool, Fault> {
        if owner >= core.procs() {
            return Err(Fault::Contract(format!("owner {owner} is not a registered process")));
        }
        Ok(WorkStealingPool { owner, core })
    }

    pub fn owner(&self) -> ProcId {
        self.owner
    }

    pub fn core(&self) -> &Concurrent {
        &self.core
    }

    pub fn put(&self, pid: ProcId, task: Item) -> Result<(), Fault> {
        if pid != self.owner {
            return Err(Fault::Contract(format!("process {pid} is not the owner {} of the pool", self.owner)));
        }
        self.core.insert(pid, task).map(|_| ())
    }

    pub fn take(&self, pid: ProcId) -> Result<Option<Item>, Fault> {
        self.remove(pid)
    }

    pub fn steal(&self, pid: ProcId) -> Result<Option<Item>, Fault> {
        self.remove(pid)
    }

    fn remove(&self, pid: ProcId) -> Result<Option<Item>, Fault> {
        Ok(match self.core.remove(pid)? {
            Payload::Int(v) => Item::new(v),
            _ => None,
        })
    }
}
