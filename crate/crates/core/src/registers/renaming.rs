//! Moir–Anderson adaptive renaming on a triangular grid of splitters.
//!
//! Splitter `(r, c)` with `d = r + c` gets name `d(d+1)/2 + r + 1`. A process
//! entering a splitter writes its id to `X`; if `Y` is already set it moves
//! right, otherwise it sets `Y` and re-reads `X`: unchanged means stop,
//! changed means move down. With `p` participants every process stops on a
//! diagonal `d < p`, so names stay within `1..=p(p+1)/2`, after at most
//! `4p` register accesses.

use super::{Access, CellId, Fault, Region};
use crate::machine::{ProcLocal, Step, StepMachine};
use crate::op::{OpCall, Payload, ProcId};

/// Size of the name space for `p` participants.
pub fn name_bound(p: u64) -> u64 {
    p * (p + 1) / 2
}

/// Number of splitters in a grid for `n` processes.
pub fn grid_size(n: usize) -> u64 {
    name_bound(n as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridLayout {
    pub region: Region,
    pub offset: u64,
    pub procs: usize,
}

impl GridLayout {
    /// Identifies the renaming instance (the cell of its first splitter).
    pub fn instance(&self) -> CellId {
        self.region.cell(self.offset)
    }

    fn splitter(&self, row: u64, col: u64) -> u64 {
        let d = row + col;
        d * (d + 1) / 2 + row
    }

    fn x(&self, row: u64, col: u64) -> CellId {
        self.region.cell(self.offset + 2 * self.splitter(row, col))
    }

    fn y(&self, row: u64, col: u64) -> CellId {
        self.region.cell(self.offset + 2 * self.splitter(row, col) + 1)
    }

    /// Number of cells occupied by the grid.
    pub fn cells(procs: usize) -> u64 {
        2 * grid_size(procs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Phase {
    WriteX,
    ReadY,
    WriteY,
    ReadX,
}

/// A process walking the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RenameWalk {
    grid: GridLayout,
    me: u64,
    row: u64,
    col: u64,
    phase: Phase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Walk {
    Next(Access),
    Named(u64),
}

impl RenameWalk {
    pub fn start(grid: GridLayout, pid: ProcId, local: &mut ProcLocal) -> Result<(RenameWalk, Access), Fault> {
        local.enter_renaming(grid.instance())?;
        let walk = RenameWalk { grid, me: pid as u64 + 1, row: 0, col: 0, phase: Phase::WriteX };
        Ok((walk, Access::write_int(grid.x(0, 0), walk.me)))
    }

    fn enter(&mut self) -> Result<Walk, Fault> {
        if self.row + self.col >= self.grid.procs as u64 {
            return Err(Fault::Corrupt(format!(
                "renaming walked off a grid for {} processes",
                self.grid.procs
            )));
        }
        self.phase = Phase::WriteX;
        Ok(Walk::Next(Access::write_int(self.grid.x(self.row, self.col), self.me)))
    }

    pub fn feed(&mut self, v: u64) -> Result<Walk, Fault> {
        match self.phase {
            Phase::WriteX => {
                self.phase = Phase::ReadY;
                Ok(Walk::Next(Access::read_int(self.grid.y(self.row, self.col))))
            }
            Phase::ReadY if v != 0 => {
                self.col += 1;
                self.enter()
            }
            Phase::ReadY => {
                self.phase = Phase::WriteY;
                Ok(Walk::Next(Access::write_int(self.grid.y(self.row, self.col), 1)))
            }
            Phase::WriteY => {
                self.phase = Phase::ReadX;
                Ok(Walk::Next(Access::read_int(self.grid.x(self.row, self.col))))
            }
            Phase::ReadX if v == self.me => Ok(Walk::Named(self.grid.splitter(self.row, self.col) + 1)),
            Phase::ReadX => {
                self.row += 1;
                self.enter()
            }
        }
    }
}

/// A standalone renaming instance, exposed as an object with one operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RenamingObject {
    pub procs: usize,
}

impl RenamingObject {
    pub fn grid(&self) -> GridLayout {
        GridLayout { region: Region::WHOLE, offset: 0, procs: self.procs }
    }

    pub fn begin(&self, call: &OpCall) -> Result<RenameMachine, Fault> {
        match call {
            OpCall::Rename => Ok(RenameMachine { grid: self.grid(), walk: None }),
            other => Err(crate::machine::unsupported("renaming", other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RenameMachine {
    grid: GridLayout,
    walk: Option<RenameWalk>,
}

impl StepMachine for RenameMachine {
    fn resume(&mut self, reply: Option<u64>, local: &mut ProcLocal) -> Result<Step, Fault> {
        match (&mut self.walk, reply) {
            (None, _) => {
                let (walk, a) = RenameWalk::start(self.grid, local.pid, local)?;
                self.walk = Some(walk);
                Ok(Step::Access(a))
            }
            (Some(walk), Some(v)) => Ok(match walk.feed(v)? {
                Walk::Next(a) => Step::Access(a),
                Walk::Named(name) => Step::Done(Payload::Int(name)),
            }),
            (Some(_), None) => Err(Fault::Corrupt("rename resumed without a reply".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::SimMemory;

    fn run_solo(obj: &RenamingObject, pid: ProcId, mem: &mut SimMemory) -> (u64, usize) {
        let mut local = ProcLocal::new(pid);
        let mut m = obj.begin(&OpCall::Rename).unwrap();
        let mut reply = None;
        let mut steps = 0;
        loop {
            match m.resume(reply, &mut local).unwrap() {
                Step::Access(a) => {
                    reply = Some(mem.apply(&a).unwrap().0);
                    steps += 1;
                }
                Step::Done(Payload::Int(name)) => return (name, steps),
                Step::Done(other) => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn solo_participant_gets_name_one() {
        let obj = RenamingObject { procs: 4 };
        let mut mem = SimMemory::new(1024, &[]);
        assert_eq!(run_solo(&obj, 2, &mut mem), (1, 4));
    }

    #[test]
    fn sequential_participants_stay_within_bound() {
        for n in 1..=8usize {
            let obj = RenamingObject { procs: n };
            let mut mem = SimMemory::new(1024, &[]);
            let mut names = Vec::new();
            for pid in 0..n {
                let (name, steps) = run_solo(&obj, pid, &mut mem);
                let p = (pid + 1) as u64;
                assert!(name <= name_bound(p), "name {name} for {p} participants");
                assert!(steps <= 4 * (pid + 1));
                names.push(name);
            }
            let mut dedup = names.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), names.len());
        }
    }

    #[test]
    fn renaming_twice_is_a_contract_violation() {
        let obj = RenamingObject { procs: 2 };
        let mut local = ProcLocal::new(0);
        let mut mem = SimMemory::new(64, &[]);
        let mut m = obj.begin(&OpCall::Rename).unwrap();
        let mut reply = None;
        while let Step::Access(a) = m.resume(reply, &mut local).unwrap() {
            reply = Some(mem.apply(&a).unwrap().0);
        }
        let mut again = obj.begin(&OpCall::Rename).unwrap();
        assert!(matches!(again.resume(None, &mut local), Err(Fault::Contract(_))));
    }
}
