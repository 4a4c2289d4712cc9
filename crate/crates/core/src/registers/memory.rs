use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use thiserror::Error;

use super::CellValue;
use crate::op::ProcId;

/// Default number of addressable slots of an "unbounded" array.
pub const DEFAULT_CAPACITY: u64 = 1 << 16;

const SEGMENT_BITS: u32 = 12;
const SEGMENT_LEN: usize = 1 << SEGMENT_BITS;

/// Identifier of a shared base object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId(pub u64);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Maps the logical slot indices of one structure onto global cell ids.
///
/// A stride larger than one lets several structures share one address space
/// while each keeps an unbounded index range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub base: u64,
    pub stride: u64,
}

impl Region {
    pub const WHOLE: Region = Region { base: 0, stride: 1 };

    pub fn new(base: u64, stride: u64) -> Region {
        Region { base, stride }
    }

    pub fn cell(&self, index: u64) -> CellId {
        CellId(index.saturating_mul(self.stride).saturating_add(self.base))
    }
}

/// How a word is interpreted when rendered in the access log.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WordKind {
    Value,
    Int,
}

impl WordKind {
    pub fn render(self, raw: u64) -> String {
        match self {
            WordKind::Int => raw.to_string(),
            WordKind::Value => match CellValue::decode(raw) {
                Some(v) => v.to_string(),
                None => format!("?{raw}"),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccessOp {
    Read,
    Write(u64),
    Fai,
    Swap(u64),
}

/// One shared-memory step requested by an operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Access {
    pub cell: CellId,
    pub op: AccessOp,
    pub word: WordKind,
}

impl Access {
    pub fn read_value(cell: CellId) -> Access {
        Access { cell, op: AccessOp::Read, word: WordKind::Value }
    }

    pub fn write_value(cell: CellId, v: CellValue) -> Access {
        Access { cell, op: AccessOp::Write(v.encode()), word: WordKind::Value }
    }

    pub fn swap_value(cell: CellId, v: CellValue) -> Access {
        Access { cell, op: AccessOp::Swap(v.encode()), word: WordKind::Value }
    }

    pub fn read_int(cell: CellId) -> Access {
        Access { cell, op: AccessOp::Read, word: WordKind::Int }
    }

    pub fn write_int(cell: CellId, v: u64) -> Access {
        Access { cell, op: AccessOp::Write(v), word: WordKind::Int }
    }

    pub fn fai(cell: CellId) -> Access {
        Access { cell, op: AccessOp::Fai, word: WordKind::Int }
    }

    pub fn kind(&self) -> AccessKind {
        match self.op {
            AccessOp::Read => AccessKind::Read,
            AccessOp::Write(_) => AccessKind::Write,
            AccessOp::Fai => AccessKind::Fai,
            AccessOp::Swap(_) => AccessKind::Swap,
        }
    }

    /// Value after the access given the value before it.
    pub fn after(&self, before: u64) -> u64 {
        match self.op {
            AccessOp::Read => before,
            AccessOp::Write(v) | AccessOp::Swap(v) => v,
            AccessOp::Fai => before.wrapping_add(1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccessKind {
    Read,
    Write,
    Fai,
    Swap,
}

impl AccessKind {
    pub fn is_rmw(self) -> bool {
        matches!(self, AccessKind::Fai | AccessKind::Swap)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AccessKind::Read => "read",
            AccessKind::Write => "write",
            AccessKind::Fai => "fai",
            AccessKind::Swap => "swap",
        }
    }
}

impl FromStr for AccessKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "read" => AccessKind::Read,
            "write" => AccessKind::Write,
            "fai" => AccessKind::Fai,
            "swap" => AccessKind::Swap,
            _ => return Err(format!("unknown access kind `{s}`")),
        })
    }
}

/// A logged shared access: `seq proc kind cell_id value_before value_after`.
///
/// `op` is the index (in invocation order) of the high-level operation that
/// performed the access. It is kept in memory for audits and is not part of
/// the text format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AccessRecord {
    pub seq: u64,
    pub proc: ProcId,
    pub op: usize,
    pub kind: AccessKind,
    pub cell: CellId,
    pub before: u64,
    pub after: u64,
    pub word: WordKind,
}

impl AccessRecord {
    /// A write that changed the stored value.
    pub fn is_effectful_write(&self) -> bool {
        self.kind != AccessKind::Read && self.before != self.after
    }
}

impl fmt::Display for AccessRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {}",
            self.seq,
            self.proc,
            self.kind.as_str(),
            self.cell,
            self.word.render(self.before),
            self.word.render(self.after)
        )
    }
}

impl FromStr for AccessRecord {
    type Err = String;

    /// Parses one access-log line. Records read back carry `op = 0`.
    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 6 {
            return Err(format!("expected 6 fields, found {}: `{line}`", fields.len()));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| format!("bad number `{s}`"));
        let is_sentinel = |s: &str| s == "bot" || s == "top";
        let word = if is_sentinel(fields[4]) || is_sentinel(fields[5]) {
            WordKind::Value
        } else {
            WordKind::Int
        };
        let value = |s: &str| -> Result<u64, String> {
            match (word, s) {
                (WordKind::Value, "bot") => Ok(CellValue::Bottom.encode()),
                (WordKind::Value, "top") => Ok(CellValue::Taken.encode()),
                (WordKind::Value, s) => Ok(num(s)? + 1),
                (WordKind::Int, s) => num(s),
            }
        };
        Ok(AccessRecord {
            seq: num(fields[0])?,
            proc: num(fields[1])? as ProcId,
            op: 0,
            kind: fields[2].parse()?,
            cell: CellId(num(fields[3])?),
            before: value(fields[4])?,
            after: value(fields[5])?,
            word,
        })
    }
}

/// Renders an access log, one record per line.
pub fn render_access_log(records: &[AccessRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_access_log(text: &str) -> Result<Vec<AccessRecord>, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| l.parse().map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Fault {
    #[error("cell {cell} is beyond the configured capacity of {capacity} slots")]
    CapacityExceeded { cell: u64, capacity: u64 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("corrupt shared state: {0}")]
    Corrupt(String),
}

pub(crate) fn decode_value(raw: u64) -> Result<CellValue, Fault> {
    CellValue::decode(raw).ok_or_else(|| Fault::Corrupt(format!("word {raw} is not a cell value")))
}

/// Single-owner memory used by the deterministic simulator.
#[derive(Clone, Debug)]
pub struct SimMemory {
    cells: Vec<u64>,
    capacity: u64,
}

impl SimMemory {
    pub fn new(capacity: u64, initial: &[(CellId, u64)]) -> SimMemory {
        let mut mem = SimMemory { cells: Vec::new(), capacity };
        for &(cell, v) in initial {
            mem.store(cell, v);
        }
        mem
    }

    fn store(&mut self, cell: CellId, v: u64) {
        let idx = cell.0 as usize;
        if idx >= self.cells.len() {
            if v == 0 {
                return;
            }
            self.cells.resize(idx + 1, 0);
        }
        self.cells[idx] = v;
    }

    pub fn load(&self, cell: CellId) -> u64 {
        self.cells.get(cell.0 as usize).copied().unwrap_or(0)
    }

    /// Performs the access and returns `(before, after)`.
    pub fn apply(&mut self, access: &Access) -> Result<(u64, u64), Fault> {
        if access.cell.0 >= self.capacity {
            return Err(Fault::CapacityExceeded { cell: access.cell.0, capacity: self.capacity });
        }
        let before = self.load(access.cell);
        let after = access.after(before);
        if after != before {
            self.store(access.cell, after);
        }
        Ok((before, after))
    }
}

impl PartialEq for SimMemory {
    fn eq(&self, other: &Self) -> bool {
        let trim = |v: &[u64]| {
            let end = v.iter().rposition(|&w| w != 0).map_or(0, |p| p + 1);
            v[..end].to_vec()
        };
        self.capacity == other.capacity && trim(&self.cells) == trim(&other.cells)
    }
}

impl Eq for SimMemory {}

impl Hash for SimMemory {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let end = self.cells.iter().rposition(|&w| w != 0).map_or(0, |p| p + 1);
        self.cells[..end].hash(state);
    }
}

/// Lock-free memory for real threads: a segmented array of atomics whose
/// segments are materialized on first touch.
pub struct LiveMemory {
    segments: Box<[OnceLock<Box<[AtomicU64]>>]>,
    capacity: u64,
    initial: Vec<(CellId, u64)>,
}

impl LiveMemory {
    pub fn new(capacity: u64, initial: &[(CellId, u64)]) -> LiveMemory {
        let nseg = capacity.div_ceil(SEGMENT_LEN as u64) as usize;
        let mut initial = initial.to_vec();
        initial.sort();
        LiveMemory {
            segments: (0..nseg).map(|_| OnceLock::new()).collect(),
            capacity,
            initial,
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    fn slot(&self, cell: CellId) -> Result<&AtomicU64, Fault> {
        if cell.0 >= self.capacity {
            return Err(Fault::CapacityExceeded { cell: cell.0, capacity: self.capacity });
        }
        let seg = (cell.0 >> SEGMENT_BITS) as usize;
        let off = (cell.0 as usize) & (SEGMENT_LEN - 1);
        let segment = self.segments[seg].get_or_init(|| {
            let lo = (seg as u64) << SEGMENT_BITS;
            let hi = lo + SEGMENT_LEN as u64;
            let words: Box<[AtomicU64]> = (0..SEGMENT_LEN).map(|_| AtomicU64::new(0)).collect();
            for &(c, v) in self.initial.iter().filter(|(c, _)| (lo..hi).contains(&c.0)) {
                words[(c.0 - lo) as usize].store(v, Ordering::Relaxed);
            }
            words
        });
        Ok(&segment[off])
    }

    pub fn load(&self, cell: CellId) -> Result<u64, Fault> {
        Ok(self.slot(cell)?.load(Ordering::SeqCst))
    }

    /// Performs the access atomically and returns `(before, after)`.
    ///
    /// With `observe_writes` set, plain writes are issued as atomic swaps so
    /// the previous value can be logged; the stored result is identical.
    pub fn apply(&self, access: &Access, observe_writes: bool) -> Result<(u64, u64), Fault> {
        let slot = self.slot(access.cell)?;
        let before = match access.op {
            AccessOp::Read => slot.load(Ordering::SeqCst),
            AccessOp::Write(v) if observe_writes => slot.swap(v, Ordering::SeqCst),
            AccessOp::Write(v) => {
                slot.store(v, Ordering::SeqCst);
                return Ok((v, v));
            }
            AccessOp::Fai => slot.fetch_add(1, Ordering::SeqCst),
            AccessOp::Swap(v) => slot.swap(v, Ordering::SeqCst),
        };
        Ok((before, access.after(before)))
    }
}

impl fmt::Debug for LiveMemory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let live = self.segments.iter().filter(|s| s.get().is_some()).count();
        f.debug_struct("LiveMemory")
            .field("capacity", &self.capacity)
            .field("segments_materialized", &live)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::Item;

    fn item(v: u64) -> CellValue {
        CellValue::Item(Item::new(v).unwrap())
    }

    #[test]
    fn fresh_cell_reads_bottom() {
        let mut m = SimMemory::new(16, &[]);
        let (before, _) = m.apply(&Access::read_value(CellId(3))).unwrap();
        assert_eq!(CellValue::decode(before), Some(CellValue::Bottom));
    }

    #[test]
    fn write_then_read() {
        let mut m = SimMemory::new(16, &[]);
        m.apply(&Access::write_value(CellId(2), item(3))).unwrap();
        let (v, _) = m.apply(&Access::read_value(CellId(2))).unwrap();
        assert_eq!(CellValue::decode(v), Some(item(3)));
    }

    #[test]
    fn taken_over_taken_is_idempotent() {
        let mut m = SimMemory::new(16, &[]);
        m.apply(&Access::write_value(CellId(1), CellValue::Taken)).unwrap();
        let (b, a) = m.apply(&Access::write_value(CellId(1), CellValue::Taken)).unwrap();
        assert_eq!(b, a);
        assert_eq!(CellValue::decode(m.load(CellId(1))), Some(CellValue::Taken));
    }

    #[test]
    fn fai_and_swap() {
        let mut m = SimMemory::new(16, &[(CellId(0), 1)]);
        assert_eq!(m.apply(&Access::fai(CellId(0))).unwrap(), (1, 2));
        assert_eq!(m.load(CellId(0)), 2);

        m.apply(&Access::write_value(CellId(5), item(4))).unwrap();
        let (old, _) = m.apply(&Access::swap_value(CellId(5), CellValue::Bottom)).unwrap();
        assert_eq!(CellValue::decode(old), Some(item(4)));
        assert_eq!(CellValue::decode(m.load(CellId(5))), Some(CellValue::Bottom));
    }

    #[test]
    fn capacity_is_enforced() {
        let mut m = SimMemory::new(4, &[]);
        assert!(matches!(
            m.apply(&Access::read_int(CellId(4))),
            Err(Fault::CapacityExceeded { cell: 4, capacity: 4 })
        ));
        let live = LiveMemory::new(4, &[]);
        assert!(live.apply(&Access::read_int(CellId(9)), false).is_err());
    }

    #[test]
    fn live_memory_initial_values_and_segments() {
        let live = LiveMemory::new(3 * SEGMENT_LEN as u64, &[(CellId(0), 1), (CellId(5000), 9)]);
        assert_eq!(live.load(CellId(0)).unwrap(), 1);
        assert_eq!(live.load(CellId(5000)).unwrap(), 9);
        assert_eq!(live.apply(&Access::fai(CellId(0)), false).unwrap(), (1, 2));
        let (b, a) = live.apply(&Access::write_int(CellId(7), 4), true).unwrap();
        assert_eq!((b, a), (0, 4));
    }

    #[test]
    fn sim_memory_equality_ignores_trailing_zeros() {
        let mut a = SimMemory::new(16, &[]);
        let b = SimMemory::new(16, &[]);
        a.apply(&Access::write_int(CellId(6), 3)).unwrap();
        a.apply(&Access::write_int(CellId(6), 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn access_record_text_round_trip() {
        let rec = AccessRecord {
            seq: 4,
            proc: 1,
            op: 0,
            kind: AccessKind::Write,
            cell: CellId(12),
            before: CellValue::Bottom.encode(),
            after: item(7).encode(),
            word: WordKind::Value,
        };
        let line = rec.to_string();
        assert_eq!(line, "4 1 write 12 bot 7");
        assert_eq!(line.parse::<AccessRecord>().unwrap(), rec);
        let int: AccessRecord = "0 0 fai 0 1 2".parse().unwrap();
        assert_eq!(int.to_string(), "0 0 fai 0 1 2");
        assert!(int.kind.is_rmw());
    }
}
