//! Real threads over atomic memory.
//!
//! Every invocation and response takes a stamp from one global atomic
//! counter, which totally orders the endpoint events consistently with each
//! thread's program order. Interior steps are not ordered across threads;
//! access-log sequence numbers only order one thread's own accesses.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Mutex, TryLockError};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checker::{Event, EventKind, History};
use crate::impls::{Flavor, Impl};
use crate::machine::{ProcLocal, Step, StepMachine};
use crate::op::{OpCall, Payload, ProcId};
use crate::registers::{AccessRecord, Fault, Item, LiveMemory, DEFAULT_CAPACITY};

/// A shared concurrent object usable from several threads. Process `p`'s
/// operations must not overlap each other; a second concurrent call with
/// the same process id is reported as a contract violation.
pub struct Concurrent {
    imp: Impl,
    mem: LiveMemory,
    locals: Vec<Mutex<ProcLocal>>,
    access_clock: AtomicU64,
}

/// Where a recorded operation puts its accesses.
pub(crate) struct Recording<'a> {
    pub op: usize,
    pub log: &'a mut Vec<AccessRecord>,
}

impl Concurrent {
    pub fn new(imp: Impl, capacity: u64, seed: u64) -> Concurrent {
        Concurrent {
            imp,
            mem: LiveMemory::new(capacity, &imp.initial_cells()),
            locals: (0..imp.procs).map(|p| Mutex::new(ProcLocal::with_seed(p, seed))).collect(),
            access_clock: AtomicU64::new(0),
        }
    }

    pub fn procs(&self) -> usize {
        self.imp.procs
    }

    pub fn implementation(&self) -> Impl {
        self.imp
    }

    /// Runs one operation to completion on behalf of `pid`.
    pub fn execute(&self, pid: ProcId, call: &OpCall) -> Result<Payload, Fault> {
        self.run(pid, call, None, &mut || {})
    }

    /// `push` or `enq`, depending on the implementation.
    pub fn insert(&self, pid: ProcId, x: Item) -> Result<Payload, Fault> {
        match self.imp.flavor() {
            Flavor::Stack => self.execute(pid, &OpCall::Push(x)),
            Flavor::Queue => self.execute(pid, &OpCall::Enq(x)),
            _ => Err(Fault::Contract(format!("{} has no insert operation", self.imp))),
        }
    }

    /// `pop` or `deq`, depending on the implementation.
    pub fn remove(&self, pid: ProcId) -> Result<Payload, Fault> {
        match self.imp.flavor() {
            Flavor::Stack => self.execute(pid, &OpCall::Pop),
            Flavor::Queue => self.execute(pid, &OpCall::Deq),
            _ => Err(Fault::Contract(format!("{} has no remove operation", self.imp))),
        }
    }

    pub(crate) fn run(
        &self,
        pid: ProcId,
        call: &OpCall,
        mut rec: Option<Recording<'_>>,
        between_steps: &mut dyn FnMut(),
    ) -> Result<Payload, Fault> {
        let slot = self
            .locals
            .get(pid)
            .ok_or_else(|| Fault::Contract(format!("process {pid} but the object has {} processes", self.procs())))?;
        let mut local = match slot.try_lock() {
            Ok(g) => g,
            Err(TryLockError::WouldBlock) => {
                return Err(Fault::Contract(format!("process {pid} invoked an operation while another is pending")))
            }
            Err(TryLockError::Poisoned(_)) => {
                return Err(Fault::Contract(format!("process {pid} panicked during an earlier operation")))
            }
        };
        let mut machine = self.imp.begin(call)?;
        let mut step = machine.resume(None, &mut local)?;
        loop {
            match step {
                Step::Done(r) => return Ok(r),
                Step::Access(a) => {
                    let logging = rec.is_some();
                    let (before, after) = self.mem.apply(&a, logging)?;
                    if let Some(rec) = &mut rec {
                        rec.log.push(AccessRecord {
                            seq: self.access_clock.fetch_add(1, Ordering::Relaxed),
                            proc: pid,
                            op: rec.op,
                            kind: a.kind(),
                            cell: a.cell,
                            before,
                            after,
                            word: a.word,
                        });
                    }
                    between_steps();
                    step = machine.resume(Some(before), &mut local)?;
                }
            }
        }
    }
}

/// What the stress driver runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Workload {
    /// Total operations over all processes.
    pub ops: usize,
    /// Probability that a generated operation inserts (push, enq, inc, write).
    pub insert_ratio: f64,
    pub seed: u64,
    pub capacity: u64,
    /// Record every shared access (writes then go through swap to observe
    /// the overwritten value).
    pub log_accesses: bool,
    /// Probability of yielding the thread after a step.
    pub yield_prob: f64,
    /// Fixed per-process scripts instead of generated operations.
    pub scripts: Option<Vec<Vec<OpCall>>>,
}

impl Default for Workload {
    fn default() -> Workload {
        Workload {
            ops: 1000,
            insert_ratio: 0.5,
            seed: 0,
            capacity: DEFAULT_CAPACITY,
            log_accesses: false,
            yield_prob: 0.0,
            scripts: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StressRun {
    pub history: History,
    pub log: Vec<AccessRecord>,
}

fn generated(imp: Impl, pid: ProcId, count: usize, ratio: f64, rng: &mut ChaCha8Rng) -> Vec<OpCall> {
    let procs = imp.procs as u64;
    let mut inserted = 0u64;
    let mut fresh = || {
        let v = pid as u64 + 1 + inserted * procs;
        inserted += 1;
        Item::new(v).ok_or_else(|| Fault::Contract(format!("item {v} does not fit in an item slot")))
    };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let insert = rng.gen_bool(ratio.clamp(0.0, 1.0));
        let call = match (imp.flavor(), insert) {
            (Flavor::Stack, true) => fresh().map(OpCall::Push),
            (Flavor::Stack, false) => Ok(OpCall::Pop),
            (Flavor::Queue, true) => fresh().map(OpCall::Enq),
            (Flavor::Queue, false) => Ok(OpCall::Deq),
            (Flavor::Counter, true) => Ok(OpCall::Inc),
            (Flavor::Counter, false) | (Flavor::Register, false) => Ok(OpCall::Read),
            (Flavor::Register, true) => fresh().map(OpCall::Write),
            (Flavor::Fai, _) => Ok(OpCall::Fai),
            (Flavor::Renaming, _) => {
                out.push(OpCall::Rename);
                break;
            }
        };
        match call {
            Ok(c) => out.push(c),
            Err(_) => break,
        }
    }
    out
}

/// Per-process operation lists for `ops` operations in total. Inserted
/// items are `pid + 1 + k * procs`, so they are unique across processes.
pub fn generate_scripts(imp: Impl, ops: usize, insert_ratio: f64, seed: u64) -> Vec<Vec<OpCall>> {
    let procs = imp.procs;
    (0..procs)
        .map(|p| {
            let count = ops / procs + usize::from(p < ops % procs);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            generated(imp, p, count, insert_ratio, &mut rng)
        })
        .collect()
}

/// Runs a workload with one thread per process and records the history.
/// The first fault stops every thread and is returned.
pub fn run_stress(imp: Impl, w: &Workload) -> Result<StressRun, Fault> {
    let procs = imp.procs;
    let scripts: Vec<Vec<OpCall>> = match &w.scripts {
        Some(s) if s.len() == procs => s.clone(),
        Some(s) => {
            return Err(Fault::Contract(format!("{} scripts for {procs} processes", s.len())));
        }
        None => generate_scripts(imp, w.ops, w.insert_ratio, w.seed),
    };
    let object = Concurrent::new(imp, w.capacity, w.seed);
    let clock = AtomicU64::new(0);
    let abort = AtomicBool::new(false);
    let results: Vec<Result<(Vec<Event>, Vec<AccessRecord>), Fault>> = thread::scope(|s| {
        let handles: Vec<_> = scripts
            .iter()
            .enumerate()
            .map(|(pid, script)| {
                let (object, clock, abort) = (&object, &clock, &abort);
                s.spawn(move || {
                    let mut events = Vec::with_capacity(2 * script.len());
                    let mut log = Vec::new();
                    let mut rng = ChaCha8Rng::seed_from_u64(!w.seed ^ pid as u64);
                    let mut perturb = || {
                        if w.yield_prob > 0.0 && rng.gen_bool(w.yield_prob.min(1.0)) {
                            thread::yield_now();
                        }
                    };
                    for call in script {
                        if abort.load(Ordering::Relaxed) {
                            break;
                        }
                        let seq = clock.fetch_add(1, Ordering::SeqCst);
                        events.push(Event { seq, proc: pid, kind: EventKind::Inv, op: call.kind(), payload: call.arg() });
                        let rec = w.log_accesses.then(|| Recording { op: seq as usize, log: &mut log });
                        match object.run(pid, call, rec, &mut perturb) {
                            Ok(r) => {
                                let seq = clock.fetch_add(1, Ordering::SeqCst);
                                events.push(Event { seq, proc: pid, kind: EventKind::Res, op: call.kind(), payload: r });
                            }
                            Err(f) => {
                                abort.store(true, Ordering::Relaxed);
                                return Err(f);
                            }
                        }
                    }
                    Ok((events, log))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("stress worker panicked")).collect()
    });
    let mut events = Vec::new();
    let mut log = Vec::new();
    for r in results {
        let (e, l) = r?;
        events.extend(e);
        log.extend(l);
    }
    events.sort_by_key(|e| e.seq);
    log.sort_by_key(|r| r.seq);
    Ok(StressRun { history: History { procs, impl_name: imp.name(), events }, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{replay, Program, Schedule, SimOptions};

    #[test]
    fn single_process_matches_sequential_replay() {
        let program: Program = "p0: push(1), push(2), pop, pop, pop".parse().unwrap();
        let imp = Impl::by_name("setseqstack", 1).unwrap();
        let w = Workload { scripts: Some(program.phases[0].ops.clone()), ..Workload::default() };
        let live = run_stress(imp, &w).unwrap();
        let mut sim = crate::harness::Simulator::new(imp, &program, SimOptions::default()).unwrap();
        while !sim.is_done() {
            sim.step(0).unwrap();
        }
        assert_eq!(live.history.render(), sim.history().render());
        let again = replay(imp, &program, &sim.schedule(), SimOptions::default()).unwrap();
        assert_eq!(again.history, live.history);
        assert_eq!(Schedule(vec![0; 0]).to_string(), "");
    }

    #[test]
    fn generated_items_are_unique_and_logged() {
        let imp = Impl::by_name("setseqqueue", 3).unwrap();
        let w = Workload { ops: 300, seed: 7, log_accesses: true, ..Workload::default() };
        let run = run_stress(imp, &w).unwrap();
        let ops = run.history.operations().unwrap();
        assert_eq!(ops.len(), 300);
        let mut items: Vec<u64> = ops.iter().filter_map(|o| o.call.arg().as_int()).collect();
        let n = items.len();
        items.sort_unstable();
        items.dedup();
        assert_eq!(items.len(), n);
        assert!(!run.log.is_empty());
    }

    #[test]
    fn overlapping_calls_by_one_process_are_rejected() {
        let imp = Impl::by_name("setseqstack", 2).unwrap();
        let obj = Concurrent::new(imp, 64, 0);
        let _held = obj.locals[0].lock().unwrap();
        assert!(matches!(obj.execute(0, &OpCall::Pop), Err(Fault::Contract(_))));
        assert_eq!(obj.execute(1, &OpCall::Pop), Ok(Payload::Empty));
        assert!(obj.execute(5, &OpCall::Pop).is_err());
    }

    #[test]
    fn capacity_exhaustion_is_reported() {
        let imp = Impl::by_name("seqstack", 1).unwrap();
        let w = Workload { ops: 100, insert_ratio: 1.0, capacity: 16, ..Workload::default() };
        assert!(matches!(run_stress(imp, &w), Err(Fault::CapacityExceeded { .. })));
    }
}
