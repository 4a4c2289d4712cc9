//! Resumable operation state machines.
//!
//! Every algorithm is written as a step machine: each call to `resume`
//! consumes the reply of the previous shared access and either requests the
//! next access or finishes with a response. Local computation between two
//! accesses is folded into the resume call, so one resume is one step.
//! The same machines drive the deterministic simulator and real threads.

use std::collections::{BTreeMap, BTreeSet};

use crate::op::{Payload, ProcId};
use crate::registers::{Access, CellId, Fault};

/// What an operation wants to do next.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Access(Access),
    Done(Payload),
}

/// Process-local state that survives across operations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ProcLocal {
    pub pid: ProcId,
    own: BTreeMap<CellId, u64>,
    renamed: BTreeSet<CellId>,
    rng: u64,
}

impl ProcLocal {
    pub fn new(pid: ProcId) -> ProcLocal {
        ProcLocal { pid, ..ProcLocal::default() }
    }

    pub fn with_seed(pid: ProcId, seed: u64) -> ProcLocal {
        // splitmix64 of (seed, pid); never zero so xorshift keeps moving
        let mut z = seed ^ (pid as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        ProcLocal { pid, rng: z | 1, ..ProcLocal::default() }
    }

    /// Last value this process wrote to a counter entry it owns.
    pub fn own_entry(&self, cell: CellId) -> u64 {
        self.own.get(&cell).copied().unwrap_or(0)
    }

    pub(crate) fn set_own_entry(&mut self, cell: CellId, v: u64) {
        self.own.insert(cell, v);
    }

    /// Records participation in a renaming instance; errors on a second call.
    pub(crate) fn enter_renaming(&mut self, instance: CellId) -> Result<(), Fault> {
        if self.renamed.insert(instance) {
            Ok(())
        } else {
            Err(Fault::Contract(format!(
                "process {} called rename twice on instance {instance}",
                self.pid
            )))
        }
    }

    /// Local pseudo-random draw (xorshift64); never touches shared memory.
    pub(crate) fn next_random(&mut self) -> u64 {
        let mut x = self.rng.max(1);
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.rng = x;
        x
    }
}

/// Common interface of every per-operation machine.
pub trait StepMachine {
    /// `reply` is `None` on the first call and otherwise carries the value
    /// the previous access observed (the old value for writes, FAI and SWAP).
    fn resume(&mut self, reply: Option<u64>, local: &mut ProcLocal) -> Result<Step, Fault>;
}

pub(crate) fn unsupported(impl_name: &str, call: &crate::op::OpCall) -> Fault {
    Fault::Contract(format!("{impl_name} does not support `{}`", call.kind()))
}
