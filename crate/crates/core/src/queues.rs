//! Queue algorithms as step machines.
//!
//! Four of them share one dequeue skeleton: read the tail, scan slots from
//! the head, take the first item found and count slots already taken. They
//! differ in the base objects (FAI + SWAP, or counter + read/write matrix)
//! and in how a dequeue that finds nothing ends:
//!
//! * [`QueueKind::Seq`]: repeat scans until two consecutive scans count the
//!   same number of taken slots, then return empty. Linearizable.
//! * [`QueueKind::SetSeq`]: the same loop over read/write registers.
//!   Set-linearizable with multiplicity.
//! * [`QueueKind::IntSeq`]: exactly two scans; equal counts give `empty`,
//!   different counts give `weakempty`. Interval-linearizable, wait-free.
//! * [`QueueKind::RwIntSeq`]: two scans over read/write registers.
//!
//! [`NaiveQueue`] scans once and is not linearizable; it is kept as a
//! negative control.

use crate::machine::{unsupported, ProcLocal, Step, StepMachine};
use crate::op::{OpCall, Payload};
use crate::registers::{
    decode_value, reply_of, Access, CellId, CellValue, Collect, CounterLayout, CounterRead, Fault, Item, Matrix,
    Region,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueueKind {
    Seq,
    SetSeq,
    IntSeq,
    RwIntSeq,
}

impl QueueKind {
    /// Uses only read/write registers.
    pub fn read_write(self) -> bool {
        matches!(self, QueueKind::SetSeq | QueueKind::RwIntSeq)
    }

    pub fn two_pass(self) -> bool {
        matches!(self, QueueKind::IntSeq | QueueKind::RwIntSeq)
    }

    pub fn name(self) -> &'static str {
        match self {
            QueueKind::Seq => "seqqueue",
            QueueKind::SetSeq => "setseqqueue",
            QueueKind::IntSeq => "intseqqueue",
            QueueKind::RwIntSeq => "rwintseqqueue",
        }
    }
}

/// Array queue with a tail index and a slot matrix.
///
/// FAI variants keep `Tail` at logical index 0 and `Items[k]` at `k`
/// (a matrix of width 1). Read/write variants keep the tail counter at
/// `0..n` and the `[row][process]` matrix after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScanQueue {
    pub kind: QueueKind,
    pub procs: usize,
    pub region: Region,
}

impl ScanQueue {
    pub fn new(kind: QueueKind, procs: usize) -> ScanQueue {
        ScanQueue { kind, procs, region: Region::WHOLE }
    }

    pub fn in_region(kind: QueueKind, procs: usize, region: Region) -> ScanQueue {
        ScanQueue { kind, procs, region }
    }

    pub fn tail_cell(&self) -> CellId {
        self.region.cell(0)
    }

    pub fn tail(&self) -> CounterLayout {
        CounterLayout::new(self.region, 0, self.procs, 1)
    }

    pub fn width(&self) -> u64 {
        if self.kind.read_write() {
            self.procs as u64
        } else {
            1
        }
    }

    pub fn items(&self) -> Matrix {
        if self.kind.read_write() {
            Matrix::new(self.region, self.procs as u64, self.procs as u64)
        } else {
            Matrix::new(self.region, 1, 1)
        }
    }

    pub fn initial_cells(&self) -> Vec<(CellId, u64)> {
        if self.kind.read_write() {
            Vec::new()
        } else {
            vec![(self.tail_cell(), 1)]
        }
    }

    pub fn begin(&self, call: &OpCall) -> Result<ScanQueueOp, Fault> {
        let pc = match call {
            OpCall::Enq(x) => QPc::EnqStart(*x),
            OpCall::Deq => QPc::DeqStart,
            other => return Err(unsupported(self.kind.name(), other)),
        };
        Ok(ScanQueueOp { obj: *self, pc, scan: ScanState::default() })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
struct ScanState {
    /// Scans completed so far.
    pass: u8,
    /// Taken slots counted by the previous and current scans.
    taken: [u64; 2],
    tail: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum QPc {
    EnqStart(Item),
    EnqReadTail(Item, CounterRead),
    /// Waiting for `Tail.FAI` or `Tail.INC`; carries the tail index.
    EnqAdvance(Item, Option<u64>),
    EnqWrite,
    DeqStart,
    DeqReadTail(Option<CounterRead>),
    DeqRead { r: u64, s: u64 },
    DeqTake { r: u64, s: u64, seen: CellValue },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScanQueueOp {
    obj: ScanQueue,
    pc: QPc,
    scan: ScanState,
}

impl ScanQueueOp {
    fn start_pass(&mut self) -> Step {
        self.scan.taken[1] = 0;
        if self.obj.kind.read_write() {
            let (cr, a) = self.obj.tail().read();
            self.pc = QPc::DeqReadTail(Some(cr));
            Step::Access(a)
        } else {
            self.pc = QPc::DeqReadTail(None);
            Step::Access(Access::read_int(self.obj.tail_cell()))
        }
    }

    /// Visits slot `(r, s)` in scan order (rows up, columns up), or ends the
    /// pass when the scan ran past the observed tail.
    fn visit(&mut self, mut r: u64, mut s: u64) -> Step {
        if s > self.obj.width() {
            r += 1;
            s = 1;
        }
        if r > self.scan.tail {
            return self.end_pass();
        }
        self.pc = QPc::DeqRead { r, s };
        Step::Access(Access::read_value(self.obj.items().cell(r, s)))
    }

    fn end_pass(&mut self) -> Step {
        self.scan.pass = self.scan.pass.saturating_add(1);
        let [prev, cur] = self.scan.taken;
        if self.obj.kind.two_pass() {
            if self.scan.pass == 1 {
                self.scan.taken[0] = cur;
                return self.start_pass();
            }
            return Step::Done(if prev == cur { Payload::Empty } else { Payload::WeakEmpty });
        }
        if prev == cur {
            return Step::Done(Payload::Empty);
        }
        self.scan.taken[0] = cur;
        self.start_pass()
    }

    fn taken(&mut self, r: u64, s: u64, v: CellValue) -> Step {
        match v {
            CellValue::Item(x) => Step::Done(Payload::item(x)),
            _ => {
                self.scan.taken[1] += 1;
                self.visit(r, s + 1)
            }
        }
    }
}

impl StepMachine for ScanQueueOp {
    fn resume(&mut self, reply: Option<u64>, local: &mut ProcLocal) -> Result<Step, Fault> {
        let rw = self.obj.kind.read_write();
        Ok(match self.pc {
            QPc::EnqStart(x) if rw => {
                let (cr, a) = self.obj.tail().read();
                self.pc = QPc::EnqReadTail(x, cr);
                Step::Access(a)
            }
            QPc::EnqStart(x) => {
                self.pc = QPc::EnqAdvance(x, None);
                Step::Access(Access::fai(self.obj.tail_cell()))
            }
            QPc::EnqReadTail(x, mut cr) => match cr.feed(reply_of(reply)?) {
                Collect::Next(a) => {
                    self.pc = QPc::EnqReadTail(x, cr);
                    Step::Access(a)
                }
                Collect::Total(tail) => {
                    self.pc = QPc::EnqAdvance(x, Some(tail));
                    Step::Access(self.obj.tail().inc(local.pid, local))
                }
            },
            QPc::EnqAdvance(x, tail) => {
                let (row, col) = match tail {
                    Some(t) => (t, local.pid as u64 + 1),
                    None => (reply_of(reply)?, 1),
                };
                self.pc = QPc::EnqWrite;
                Step::Access(Access::write_value(self.obj.items().cell(row, col), CellValue::Item(x)))
            }
            QPc::EnqWrite => Step::Done(Payload::True),
            QPc::DeqStart => {
                self.scan = ScanState::default();
                self.start_pass()
            }
            QPc::DeqReadTail(None) => {
                self.scan.tail = reply_of(reply)?.saturating_sub(1);
                self.visit(1, 1)
            }
            QPc::DeqReadTail(Some(mut cr)) => match cr.feed(reply_of(reply)?) {
                Collect::Next(a) => {
                    self.pc = QPc::DeqReadTail(Some(cr));
                    Step::Access(a)
                }
                Collect::Total(tail) => {
                    self.scan.tail = tail.saturating_sub(1);
                    self.visit(1, 1)
                }
            },
            QPc::DeqRead { r, s } => {
                let seen = decode_value(reply_of(reply)?)?;
                if seen.is_bottom() {
                    self.visit(r, s + 1)
                } else {
                    self.pc = QPc::DeqTake { r, s, seen };
                    let cell = self.obj.items().cell(r, s);
                    Step::Access(if rw {
                        Access::write_value(cell, CellValue::Taken)
                    } else {
                        Access::swap_value(cell, CellValue::Taken)
                    })
                }
            }
            QPc::DeqTake { r, s, seen } => {
                let v = if rw { seen } else { decode_value(reply_of(reply)?)? };
                self.taken(r, s, v)
            }
        })
    }
}

/// Single-scan FAI/SWAP queue; not linearizable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NaiveQueue;

impl NaiveQueue {
    pub const TAIL: CellId = CellId(0);

    pub fn slot(k: u64) -> CellId {
        CellId(k)
    }

    pub fn initial_cells(&self) -> Vec<(CellId, u64)> {
        vec![(Self::TAIL, 1)]
    }

    pub fn begin(&self, call: &OpCall) -> Result<NaiveQueueOp, Fault> {
        match call {
            OpCall::Enq(x) => Ok(NaiveQueueOp::EnqStart(*x)),
            OpCall::Deq => Ok(NaiveQueueOp::DeqStart),
            other => Err(unsupported("naivequeue", other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NaiveQueueOp {
    EnqStart(Item),
    EnqFai(Item),
    EnqWrite,
    DeqStart,
    DeqReadTail,
    DeqSwap { r: u64, tail: u64 },
}

impl NaiveQueueOp {
    fn visit(&mut self, r: u64, tail: u64) -> Step {
        if r > tail {
            return Step::Done(Payload::Empty);
        }
        *self = NaiveQueueOp::DeqSwap { r, tail };
        Step::Access(Access::swap_value(NaiveQueue::slot(r), CellValue::Bottom))
    }
}

impl StepMachine for NaiveQueueOp {
    fn resume(&mut self, reply: Option<u64>, _local: &mut ProcLocal) -> Result<Step, Fault> {
        Ok(match *self {
            NaiveQueueOp::EnqStart(x) => {
                *self = NaiveQueueOp::EnqFai(x);
                Step::Access(Access::fai(NaiveQueue::TAIL))
            }
            NaiveQueueOp::EnqFai(x) => {
                let tail = reply_of(reply)?;
                *self = NaiveQueueOp::EnqWrite;
                Step::Access(Access::write_value(NaiveQueue::slot(tail), CellValue::Item(x)))
            }
            NaiveQueueOp::EnqWrite => Step::Done(Payload::True),
            NaiveQueueOp::DeqStart => {
                *self = NaiveQueueOp::DeqReadTail;
                Step::Access(Access::read_int(NaiveQueue::TAIL))
            }
            NaiveQueueOp::DeqReadTail => {
                let tail = reply_of(reply)?.saturating_sub(1);
                self.visit(1, tail)
            }
            NaiveQueueOp::DeqSwap { r, tail } => match decode_value(reply_of(reply)?)? {
                CellValue::Item(x) => Step::Done(Payload::item(x)),
                _ => self.visit(r + 1, tail),
            },
        })
    }
}
