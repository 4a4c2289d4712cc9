//! Stack algorithms as step machines.
//!
//! * [`SeqStack`]: FAI on `Top`, SWAP on the item slots. Linearizable.
//! * [`SetSeqStack`]: read/write only; a counter replaces FAI and every
//!   process owns one column of the item matrix. Set-linearizable with
//!   multiplicity: overlapping pops may return the same item.
//! * [`RenStack`]: like `SetSeqStack` but pushes pick their column by
//!   renaming and pops only scan the columns the row can have used.

use crate::machine::{unsupported, ProcLocal, Step, StepMachine};
use crate::op::{OpCall, Payload};
use crate::registers::{
    decode_value, grid_size, name_bound, reply_of, Access, CellId, CellValue, Collect, CounterLayout, CounterRead,
    Fault, GridLayout, Item, Matrix, Region, RenameWalk, Walk,
};

fn found(v: CellValue) -> Option<Item> {
    match v {
        CellValue::Item(x) => Some(x),
        _ => None,
    }
}

/// FAI/SWAP stack. `Top` lives in cell 0 and `Items[k]` in cell `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeqStack;

impl SeqStack {
    pub const TOP: CellId = CellId(0);

    pub fn slot(k: u64) -> CellId {
        CellId(k)
    }

    pub fn initial_cells(&self) -> Vec<(CellId, u64)> {
        vec![(Self::TOP, 1)]
    }

    pub fn begin(&self, call: &OpCall) -> Result<SeqStackOp, Fault> {
        match call {
            OpCall::Push(x) => Ok(SeqStackOp::PushStart(*x)),
            OpCall::Pop => Ok(SeqStackOp::PopStart),
            other => Err(unsupported("seqstack", other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeqStackOp {
    PushStart(Item),
    PushFai(Item),
    PushWrite,
    PopStart,
    PopReadTop,
    PopSwap(u64),
}

impl SeqStackOp {
    fn scan(&mut self, r: u64) -> Step {
        if r == 0 {
            return Step::Done(Payload::Empty);
        }
        *self = SeqStackOp::PopSwap(r);
        Step::Access(Access::swap_value(SeqStack::slot(r), CellValue::Bottom))
    }
}

impl StepMachine for SeqStackOp {
    fn resume(&mut self, reply: Option<u64>, _local: &mut ProcLocal) -> Result<Step, Fault> {
        Ok(match *self {
            SeqStackOp::PushStart(x) => {
                *self = SeqStackOp::PushFai(x);
                Step::Access(Access::fai(SeqStack::TOP))
            }
            SeqStackOp::PushFai(x) => {
                let top = reply_of(reply)?;
                *self = SeqStackOp::PushWrite;
                Step::Access(Access::write_value(SeqStack::slot(top), CellValue::Item(x)))
            }
            SeqStackOp::PushWrite => Step::Done(Payload::True),
            SeqStackOp::PopStart => {
                *self = SeqStackOp::PopReadTop;
                Step::Access(Access::read_int(SeqStack::TOP))
            }
            SeqStackOp::PopReadTop => {
                let top = reply_of(reply)?.saturating_sub(1);
                self.scan(top)
            }
            SeqStackOp::PopSwap(r) => match found(decode_value(reply_of(reply)?)?) {
                Some(x) => Step::Done(Payload::item(x)),
                None => self.scan(r - 1),
            },
        })
    }
}

/// Read/write stack. Counter entries occupy cells `0..n`, then the item
/// matrix with one column per process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SetSeqStack {
    pub procs: usize,
}

impl SetSeqStack {
    pub fn new(procs: usize) -> SetSeqStack {
        SetSeqStack { procs }
    }

    pub fn top(&self) -> CounterLayout {
        CounterLayout::new(Region::WHOLE, 0, self.procs, 1)
    }

    pub fn items(&self) -> Matrix {
        Matrix::new(Region::WHOLE, self.procs as u64, self.procs as u64)
    }

    pub fn begin(&self, call: &OpCall) -> Result<SetSeqStackOp, Fault> {
        let pc = match call {
            OpCall::Push(x) => SetPc::PushStart(*x),
            OpCall::Pop => SetPc::PopStart,
            other => return Err(unsupported("setseqstack", other)),
        };
        Ok(SetSeqStackOp { obj: *self, pc })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum SetPc {
    PushStart(Item),
    PushReadTop(Item, CounterRead),
    PushInc(Item, u64),
    PushWrite,
    PopStart,
    PopReadTop(CounterRead),
    PopRead { r: u64, s: u64 },
    PopErase(Item),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SetSeqStackOp {
    obj: SetSeqStack,
    pc: SetPc,
}

impl SetSeqStackOp {
    /// Next cell in the scan order (rows down, columns `n..1`), starting at
    /// `(r, s)` inclusive.
    fn scan(&mut self, mut r: u64, mut s: u64) -> Step {
        if s == 0 {
            r = r.saturating_sub(1);
            s = self.obj.procs as u64;
        }
        if r == 0 {
            return Step::Done(Payload::Empty);
        }
        self.pc = SetPc::PopRead { r, s };
        Step::Access(Access::read_value(self.obj.items().cell(r, s)))
    }
}

impl StepMachine for SetSeqStackOp {
    fn resume(&mut self, reply: Option<u64>, local: &mut ProcLocal) -> Result<Step, Fault> {
        let n = self.obj.procs as u64;
        Ok(match self.pc {
            SetPc::PushStart(x) => {
                let (cr, a) = self.obj.top().read();
                self.pc = SetPc::PushReadTop(x, cr);
                Step::Access(a)
            }
            SetPc::PushReadTop(x, mut cr) => match cr.feed(reply_of(reply)?) {
                Collect::Next(a) => {
                    self.pc = SetPc::PushReadTop(x, cr);
                    Step::Access(a)
                }
                Collect::Total(top) => {
                    self.pc = SetPc::PushInc(x, top);
                    Step::Access(self.obj.top().inc(local.pid, local))
                }
            },
            SetPc::PushInc(x, top) => {
                self.pc = SetPc::PushWrite;
                let col = local.pid as u64 + 1;
                Step::Access(Access::write_value(self.obj.items().cell(top, col), CellValue::Item(x)))
            }
            SetPc::PushWrite => Step::Done(Payload::True),
            SetPc::PopStart => {
                let (cr, a) = self.obj.top().read();
                self.pc = SetPc::PopReadTop(cr);
                Step::Access(a)
            }
            SetPc::PopReadTop(mut cr) => match cr.feed(reply_of(reply)?) {
                Collect::Next(a) => {
                    self.pc = SetPc::PopReadTop(cr);
                    Step::Access(a)
                }
                Collect::Total(top) => self.scan(top.saturating_sub(1), n),
            },
            SetPc::PopRead { r, s } => match found(decode_value(reply_of(reply)?)?) {
                Some(x) => {
                    self.pc = SetPc::PopErase(x);
                    Step::Access(Access::write_value(self.obj.items().cell(r, s), CellValue::Bottom))
                }
                None => self.scan(r, s - 1),
            },
            SetPc::PopErase(x) => Step::Done(Payload::item(x)),
        })
    }
}

/// Order of the shared steps of a [`RenStack`] push after reading `Top`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PushOrder {
    /// Rename, `Top.INC`, `NOPS[top].INC`, write. A pop that starts after
    /// such a push completes can still miss its item: a stalled concurrent
    /// pusher may have pushed the finished push to a name beyond
    /// `f(NOPS[top])`.
    Published,
    /// `NOPS[top].INC` before renaming, so every process that entered the
    /// row's renaming grid is already counted when a name is handed out.
    AnnounceFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Stage {
    Rename,
    IncTop,
    IncNops,
    Write,
}

impl PushOrder {
    fn stages(self) -> &'static [Stage] {
        match self {
            PushOrder::Published => &[Stage::Rename, Stage::IncTop, Stage::IncNops, Stage::Write],
            PushOrder::AnnounceFirst => &[Stage::IncNops, Stage::Rename, Stage::IncTop, Stage::Write],
        }
    }
}

/// Read/write stack whose rows are filled through per-row renaming.
///
/// `Top` entries occupy cells `0..n`. Row `b >= 1` is a block holding the
/// `NOPS[b]` counter, the renaming grid `Ren[b]` and `f(n)` item slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RenStack {
    pub procs: usize,
    pub order: PushOrder,
}

impl RenStack {
    pub fn new(procs: usize, order: PushOrder) -> RenStack {
        RenStack { procs, order }
    }

    /// Number of item slots per row.
    pub fn row_width(&self) -> u64 {
        name_bound(self.procs as u64)
    }

    fn block(&self) -> u64 {
        self.procs as u64 + 2 * grid_size(self.procs) + self.row_width()
    }

    fn row_base(&self, b: u64) -> u64 {
        self.procs as u64 + (b - 1) * self.block()
    }

    pub fn top(&self) -> CounterLayout {
        CounterLayout::new(Region::WHOLE, 0, self.procs, 1)
    }

    pub fn nops(&self, b: u64) -> CounterLayout {
        CounterLayout::new(Region::WHOLE, self.row_base(b), self.procs, 0)
    }

    pub fn grid(&self, b: u64) -> GridLayout {
        GridLayout { region: Region::WHOLE, offset: self.row_base(b) + self.procs as u64, procs: self.procs }
    }

    pub fn slot(&self, b: u64, t: u64) -> CellId {
        CellId(self.row_base(b) + self.procs as u64 + 2 * grid_size(self.procs) + (t - 1))
    }

    pub fn begin(&self, call: &OpCall) -> Result<RenStackOp, Fault> {
        let pc = match call {
            OpCall::Push(x) => RenPc::PushStart(*x),
            OpCall::Pop => RenPc::PopStart,
            other => return Err(unsupported("renstack", other)),
        };
        Ok(RenStackOp { obj: *self, pc })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct PushState {
    x: Item,
    top: u64,
    name: u64,
    stage: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum RenPc {
    PushStart(Item),
    PushReadTop(Item, CounterRead),
    PushRename(PushState, RenameWalk),
    /// Waiting for the reply of a single-access stage.
    PushStep(PushState),
    PopStart,
    PopReadTop(CounterRead),
    PopReadNops(u64, CounterRead),
    PopRead { r: u64, s: u64 },
    PopErase(Item),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RenStackOp {
    obj: RenStack,
    pc: RenPc,
}

impl RenStackOp {
    fn run_stage(&mut self, st: PushState, local: &mut ProcLocal) -> Result<Step, Fault> {
        let Some(&stage) = self.obj.order.stages().get(st.stage) else {
            return Ok(Step::Done(Payload::True));
        };
        let next = PushState { stage: st.stage + 1, ..st };
        Ok(match stage {
            Stage::Rename => {
                let (walk, a) = RenameWalk::start(self.obj.grid(st.top), local.pid, local)?;
                self.pc = RenPc::PushRename(next, walk);
                Step::Access(a)
            }
            Stage::IncTop => {
                self.pc = RenPc::PushStep(next);
                Step::Access(self.obj.top().inc(local.pid, local))
            }
            Stage::IncNops => {
                self.pc = RenPc::PushStep(next);
                Step::Access(self.obj.nops(st.top).inc(local.pid, local))
            }
            Stage::Write => {
                self.pc = RenPc::PushStep(next);
                Step::Access(Access::write_value(self.obj.slot(st.top, st.name), CellValue::Item(st.x)))
            }
        })
    }

    fn row(&mut self, r: u64) -> Step {
        if r == 0 {
            return Step::Done(Payload::Empty);
        }
        let (cr, a) = self.obj.nops(r).read();
        self.pc = RenPc::PopReadNops(r, cr);
        Step::Access(a)
    }

    fn scan(&mut self, r: u64, s: u64) -> Step {
        if s == 0 {
            return self.row(r - 1);
        }
        self.pc = RenPc::PopRead { r, s };
        Step::Access(Access::read_value(self.obj.slot(r, s)))
    }
}

impl StepMachine for RenStackOp {
    fn resume(&mut self, reply: Option<u64>, local: &mut ProcLocal) -> Result<Step, Fault> {
        match self.pc {
            RenPc::PushStart(x) => {
                let (cr, a) = self.obj.top().read();
                self.pc = RenPc::PushReadTop(x, cr);
                Ok(Step::Access(a))
            }
            RenPc::PushReadTop(x, mut cr) => match cr.feed(reply_of(reply)?) {
                Collect::Next(a) => {
                    self.pc = RenPc::PushReadTop(x, cr);
                    Ok(Step::Access(a))
                }
                Collect::Total(top) => self.run_stage(PushState { x, top, name: 0, stage: 0 }, local),
            },
            RenPc::PushRename(st, mut walk) => match walk.feed(reply_of(reply)?)? {
                Walk::Next(a) => {
                    self.pc = RenPc::PushRename(st, walk);
                    Ok(Step::Access(a))
                }
                Walk::Named(name) => self.run_stage(PushState { name, ..st }, local),
            },
            RenPc::PushStep(st) => self.run_stage(st, local),
            RenPc::PopStart => {
                let (cr, a) = self.obj.top().read();
                self.pc = RenPc::PopReadTop(cr);
                Ok(Step::Access(a))
            }
            RenPc::PopReadTop(mut cr) => Ok(match cr.feed(reply_of(reply)?) {
                Collect::Next(a) => {
                    self.pc = RenPc::PopReadTop(cr);
                    Step::Access(a)
                }
                Collect::Total(top) => self.row(top.saturating_sub(1)),
            }),
            RenPc::PopReadNops(r, mut cr) => Ok(match cr.feed(reply_of(reply)?) {
                Collect::Next(a) => {
                    self.pc = RenPc::PopReadNops(r, cr);
                    Step::Access(a)
                }
                Collect::Total(nops) => {
                    let max = name_bound(nops).min(self.obj.row_width());
                    self.scan(r, max)
                }
            }),
            RenPc::PopRead { r, s } => Ok(match found(decode_value(reply_of(reply)?)?) {
                Some(x) => {
                    self.pc = RenPc::PopErase(x);
                    Step::Access(Access::write_value(self.obj.slot(r, s), CellValue::Bottom))
                }
                None => self.scan(r, s - 1),
            }),
            RenPc::PopErase(x) => Ok(Step::Done(Payload::item(x))),
        }
    }
}
