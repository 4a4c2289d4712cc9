//! Per-operation checks over access logs.

use std::collections::BTreeMap;
use std::fmt;

use crate::op::ProcId;
use crate::registers::{AccessKind, AccessRecord, CellId, CellValue};

/// Findings for one operation instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpAudit {
    pub proc: ProcId,
    pub op: usize,
    pub accesses: usize,
    /// FAI and SWAP accesses.
    pub rmw: usize,
    /// Reads issued after the operation's first effectful write (after any
    /// write in strict mode).
    pub read_after_write: usize,
    /// Writes that stored the value already present.
    pub redundant_writes: usize,
}

impl OpAudit {
    pub fn flagged(&self) -> bool {
        self.rmw > 0 || self.read_after_write > 0
    }
}

/// Audit of one operation's accesses, in program order.
pub fn audit_op(accesses: &[AccessRecord], strict: bool) -> OpAudit {
    let mut a = OpAudit { accesses: accesses.len(), ..OpAudit::default() };
    if let Some(first) = accesses.first() {
        a.proc = first.proc;
        a.op = first.op;
    }
    let mut wrote = false;
    for r in accesses {
        match r.kind {
            AccessKind::Read => {
                if wrote {
                    a.read_after_write += 1;
                }
            }
            kind => {
                if kind.is_rmw() {
                    a.rmw += 1;
                }
                if kind == AccessKind::Write && r.before == r.after {
                    a.redundant_writes += 1;
                }
                if strict || r.is_effectful_write() {
                    wrote = true;
                }
            }
        }
    }
    a
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub strict: bool,
    pub ops: usize,
    pub accesses: usize,
    pub rmw: usize,
    pub read_after_write: usize,
    pub redundant_writes: usize,
    pub flagged_ops: usize,
    /// The first few flagged operations.
    pub examples: Vec<OpAudit>,
}

const EXAMPLES: usize = 5;

impl AuditReport {
    pub fn new(strict: bool) -> AuditReport {
        AuditReport { strict, ..AuditReport::default() }
    }

    pub fn add(&mut self, a: OpAudit) {
        self.ops += 1;
        self.accesses += a.accesses;
        self.rmw += a.rmw;
        self.read_after_write += a.read_after_write;
        self.redundant_writes += a.redundant_writes;
        if a.flagged() {
            self.flagged_ops += 1;
            if self.examples.len() < EXAMPLES {
                self.examples.push(a);
            }
        }
    }

    pub fn clean(&self) -> bool {
        self.flagged_ops == 0
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "operations: {}  accesses: {}", self.ops, self.accesses)?;
        writeln!(f, "read-modify-write accesses: {}", self.rmw)?;
        let label = if self.strict { "reads after a write" } else { "reads after an effectful write" };
        writeln!(f, "{label}: {}", self.read_after_write)?;
        writeln!(f, "redundant writes: {}", self.redundant_writes)?;
        writeln!(f, "flagged operations: {}", self.flagged_ops)?;
        for e in &self.examples {
            writeln!(
                f,
                "  p{} op {}: {} rmw, {} reads after write",
                e.proc, e.op, e.rmw, e.read_after_write
            )?;
        }
        Ok(())
    }
}

/// Groups a log by operation (keeping program order) and audits each one.
pub fn audit_access_patterns(records: &[AccessRecord], strict: bool) -> AuditReport {
    let mut by_op: BTreeMap<(usize, ProcId), Vec<AccessRecord>> = BTreeMap::new();
    for r in records {
        by_op.entry((r.op, r.proc)).or_default().push(*r);
    }
    let mut report = AuditReport::new(strict);
    for accesses in by_op.values() {
        report.add(audit_op(accesses, strict));
    }
    report
}

/// Scan structure of one dequeue of a scanning queue: the number of scans
/// (reads of the tail's first cell) and, per scan, how many slots it found
/// already taken (taken-mark writes over a taken mark).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanAudit {
    pub passes: usize,
    pub taken: Vec<u64>,
}

pub fn scan_passes(accesses: &[AccessRecord], tail: CellId) -> ScanAudit {
    let top = CellValue::Taken.encode();
    let mut a = ScanAudit::default();
    for r in accesses {
        if r.cell == tail && r.kind == AccessKind::Read {
            a.passes += 1;
            a.taken.push(0);
        } else if matches!(r.kind, AccessKind::Swap | AccessKind::Write) && r.before == top && r.after == top {
            if let Some(t) = a.taken.last_mut() {
                *t += 1;
            }
        }
    }
    a
}
