//! Standalone objects: the counter, a FAI cell and a plain register, each
//! usable directly as a simulated or live implementation.

use super::{reply_of, Access, CellId, CellValue, Collect, CounterLayout, CounterRead, Fault, Region};
use crate::machine::{unsupported, ProcLocal, Step, StepMachine};
use crate::op::{OpCall, Payload};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CounterObject {
    pub procs: usize,
}

impl CounterObject {
    pub fn layout(&self) -> CounterLayout {
        CounterLayout::new(Region::WHOLE, 0, self.procs, 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FaiObject {
    pub initial: u64,
}

impl FaiObject {
    pub const CELL: CellId = CellId(0);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegisterObject;

impl RegisterObject {
    pub const CELL: CellId = CellId(0);
}

/// Machine for any of the standalone objects above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObjectOp {
    IncStart(CounterLayout),
    IncWrite,
    ReadStart(CounterLayout),
    Reading(CounterRead),
    FaiStart,
    FaiDone,
    RegWriteStart(CellValue),
    RegWriteDone,
    RegReadStart,
    RegReadDone,
}

impl ObjectOp {
    pub fn counter(obj: &CounterObject, call: &OpCall) -> Result<ObjectOp, Fault> {
        match call {
            OpCall::Inc => Ok(ObjectOp::IncStart(obj.layout())),
            OpCall::Read => Ok(ObjectOp::ReadStart(obj.layout())),
            other => Err(unsupported("counter", other)),
        }
    }

    pub fn fai(call: &OpCall) -> Result<ObjectOp, Fault> {
        match call {
            OpCall::Fai => Ok(ObjectOp::FaiStart),
            other => Err(unsupported("fai", other)),
        }
    }

    pub fn register(call: &OpCall) -> Result<ObjectOp, Fault> {
        match call {
            OpCall::Write(x) => Ok(ObjectOp::RegWriteStart(CellValue::Item(*x))),
            OpCall::Read => Ok(ObjectOp::RegReadStart),
            other => Err(unsupported("register", other)),
        }
    }
}

impl StepMachine for ObjectOp {
    fn resume(&mut self, reply: Option<u64>, local: &mut ProcLocal) -> Result<Step, Fault> {
        let step = match *self {
            ObjectOp::IncStart(layout) => {
                *self = ObjectOp::IncWrite;
                Step::Access(layout.inc(local.pid, local))
            }
            ObjectOp::IncWrite | ObjectOp::RegWriteDone => Step::Done(Payload::True),
            ObjectOp::ReadStart(layout) => {
                let (r, a) = layout.read();
                *self = ObjectOp::Reading(r);
                Step::Access(a)
            }
            ObjectOp::Reading(mut r) => match r.feed(reply_of(reply)?) {
                Collect::Next(a) => {
                    *self = ObjectOp::Reading(r);
                    Step::Access(a)
                }
                Collect::Total(t) => Step::Done(Payload::Int(t)),
            },
            ObjectOp::FaiStart => {
                *self = ObjectOp::FaiDone;
                Step::Access(Access::fai(FaiObject::CELL))
            }
            ObjectOp::FaiDone => Step::Done(Payload::Int(reply_of(reply)?)),
            ObjectOp::RegWriteStart(v) => {
                *self = ObjectOp::RegWriteDone;
                Step::Access(Access::write_value(RegisterObject::CELL, v))
            }
            ObjectOp::RegReadStart => {
                *self = ObjectOp::RegReadDone;
                Step::Access(Access::read_value(RegisterObject::CELL))
            }
            ObjectOp::RegReadDone => match super::decode_value(reply_of(reply)?)? {
                CellValue::Item(x) => Step::Done(Payload::item(x)),
                _ => Step::Done(Payload::Empty),
            },
        };
        Ok(step)
    }
}
