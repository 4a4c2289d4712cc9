//! Named scripted executions.

use super::program::Program;
use super::sim::{replay, SimError, SimOptions, SimRun};
use crate::impls::Impl;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Script {
    pub name: &'static str,
    pub impl_name: &'static str,
    pub program: &'static str,
    pub schedule: &'static str,
    pub about: &'static str,
}

pub const SCRIPTS: &[Script] = &[
    Script {
        name: "fig8",
        impl_name: "naivequeue",
        program: "p0: enq(1) ; p1: deq || p2: enq(2) || p0: deq",
        // p1 reads the tail before enq(2); p0 takes 1; p1 finds slot 1 empty
        schedule: "0 0 1 2 2 0 0 1",
        about: "tail chasing: a dequeue returns empty although the queue is never empty during it",
    },
    Script {
        name: "weakempty",
        impl_name: "intseqqueue",
        program: "p0: enq(1) ; p1: deq || p2: enq(2) || p0: deq, deq",
        // p1's two scans count 1 and 2 taken slots
        schedule: "0 0 1 2 2 0 0 0 0 0 0 0 0 1 1 1 1 1 1 1",
        about: "a dequeue sees a different number of taken slots in its two scans and answers weakempty",
    },
    Script {
        name: "multiplicity",
        impl_name: "setseqstack",
        program: "p0: push(1) ; p0: pop || p1: pop",
        // both pops read the item before either erases it
        schedule: "0 0 0 0 0 0 0 0 1 1 1 1 0 1",
        about: "two overlapping pops return the same item",
    },
    Script {
        name: "renstack-published",
        impl_name: "renstack-published",
        program: "p0: push(1), pop || p1: push(2)",
        schedule: "0 0 0 1 1 1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0",
        about: "published push order: a stalled pusher hides a completed push from the pusher's own pop",
    },
];

pub fn script(name: &str) -> Option<&'static Script> {
    SCRIPTS.iter().find(|s| s.name == name)
}

impl Script {
    pub fn program(&self) -> Program {
        self.program.parse().expect("built-in program parses")
    }

    pub fn implementation(&self) -> Impl {
        Impl::by_name(self.impl_name, self.program().procs).expect("built-in implementation exists")
    }

    pub fn run(&self, opts: SimOptions) -> Result<SimRun, SimError> {
        let schedule = self.schedule.parse().expect("built-in schedule parses");
        replay(self.implementation(), &self.program(), &schedule, opts)
    }
}
