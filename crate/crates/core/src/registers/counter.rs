//! Wait-free linearizable counter from read/write registers.
//!
//! One register per process. `inc` writes the owner's cached entry plus one
//! (a single write, no shared read); `read` collects all entries one by one
//! and returns their sum plus a constant initial offset.

use super::{Access, CellId, Region};
use crate::machine::ProcLocal;
use crate::op::ProcId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CounterLayout {
    pub region: Region,
    /// Logical index of entry `M[0]` inside `region`.
    pub offset: u64,
    pub procs: usize,
    /// Value returned by a read before any increment.
    pub initial: u64,
}

impl CounterLayout {
    pub fn new(region: Region, offset: u64, procs: usize, initial: u64) -> CounterLayout {
        CounterLayout { region, offset, procs, initial }
    }

    pub fn entry(&self, pid: ProcId) -> CellId {
        self.region.cell(self.offset + pid as u64)
    }

    /// The single write performing `inc` for `pid`.
    pub fn inc(&self, pid: ProcId, local: &mut ProcLocal) -> Access {
        let cell = self.entry(pid);
        let next = local.own_entry(cell) + 1;
        local.set_own_entry(cell, next);
        Access::write_int(cell, next)
    }

    pub fn read(&self) -> (CounterRead, Access) {
        (CounterRead { layout: *self, next: 0, sum: 0 }, Access::read_int(self.entry(0)))
    }
}

/// Progress of a collect over the counter entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CounterRead {
    layout: CounterLayout,
    next: usize,
    sum: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Collect {
    Next(Access),
    Total(u64),
}

impl CounterRead {
    /// Feeds the value read from the entry requested last.
    pub fn feed(&mut self, v: u64) -> Collect {
        self.sum += v;
        self.next += 1;
        if self.next < self.layout.procs {
            Collect::Next(Access::read_int(self.layout.entry(self.next)))
        } else {
            Collect::Total(self.sum + self.layout.initial)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::SimMemory;

    fn read_all(layout: &CounterLayout, mem: &mut SimMemory) -> (u64, usize) {
        let (mut r, mut a) = layout.read();
        let mut steps = 0;
        loop {
            let (v, _) = mem.apply(&a).unwrap();
            steps += 1;
            match r.feed(v) {
                Collect::Next(next) => a = next,
                Collect::Total(t) => return (t, steps),
            }
        }
    }

    #[test]
    fn fresh_counter_reads_initial() {
        let layout = CounterLayout::new(Region::WHOLE, 0, 3, 0);
        let mut mem = SimMemory::new(64, &[]);
        assert_eq!(read_all(&layout, &mut mem), (0, 3));
        let offset = CounterLayout::new(Region::WHOLE, 0, 3, 1);
        assert_eq!(read_all(&offset, &mut mem).0, 1);
    }

    #[test]
    fn inc_is_one_write_of_cached_plus_one() {
        let layout = CounterLayout::new(Region::WHOLE, 0, 4, 0);
        let mut mem = SimMemory::new(64, &[]);
        let mut p0 = ProcLocal::new(0);
        let a = layout.inc(0, &mut p0);
        assert_eq!(a, Access::write_int(CellId(0), 1));
        mem.apply(&a).unwrap();
        assert_eq!(mem.load(CellId(0)), 1);
        assert_eq!(mem.load(CellId(1)), 0);
        for _ in 0..9 {
            let a = layout.inc(0, &mut p0);
            mem.apply(&a).unwrap();
        }
        assert_eq!(read_all(&layout, &mut mem).0, 10);
    }
}
