//! Deterministic single-threaded execution of a program under an explicit
//! schedule, and exhaustive enumeration of schedules.
//!
//! A step is one shared access. Scheduling an idle process invokes its
//! next operation and performs that operation's first access in the same
//! step; the response is recorded in the step that performs the last
//! access. An operation with `k` accesses therefore takes `k` steps.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::program::Program;
use crate::checker::{Event, History};
use crate::impls::{Impl, Machine};
use crate::machine::{ProcLocal, Step, StepMachine};
use crate::op::{OpCall, Payload, ProcId};
use crate::registers::{Access, AccessRecord, Fault, SimMemory, DEFAULT_CAPACITY};

/// Step bound used when none is given.
pub const DEFAULT_STEP_BOUND: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("process {proc} cannot take a step at position {pos} of the schedule")]
    InvalidSchedule { proc: ProcId, pos: usize },
    #[error("an execution exceeded the bound of {bound} steps")]
    BoundExceeded { bound: usize },
    #[error("program has {program} processes but the implementation was built for {imp}")]
    ProcessMismatch { program: usize, imp: usize },
    #[error(transparent)]
    Fault(#[from] Fault),
}

/// Sequence of process ids, one per step.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Schedule(pub Vec<ProcId>);

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Schedule, String> {
        s.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|w| !w.is_empty())
            .map(|w| w.trim_start_matches('p').parse().map_err(|_| format!("bad process id `{w}`")))
            .collect::<Result<_, _>>()
            .map(Schedule)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimOptions {
    pub capacity: u64,
    /// Seed of the process-local generators (random balancers).
    pub seed: u64,
    /// Keep a global access log.
    pub log: bool,
}

impl Default for SimOptions {
    fn default() -> SimOptions {
        SimOptions { capacity: DEFAULT_CAPACITY, seed: 0, log: false }
    }
}

/// A finished operation together with its own shared accesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpTrace {
    pub proc: ProcId,
    pub call: OpCall,
    pub result: Payload,
    pub accesses: Vec<AccessRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Running {
    op: usize,
    call: OpCall,
    machine: Machine,
    next: Access,
    trail: Vec<AccessRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct ProcState {
    local: ProcLocal,
    /// Index of the next operation of the current phase.
    next: usize,
    running: Option<Running>,
}

/// Result of driving a program under one schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimRun {
    pub schedule: Schedule,
    pub history: History,
    pub log: Vec<AccessRecord>,
    pub finished: bool,
}

#[derive(Clone, Debug)]
pub struct Simulator {
    imp: Impl,
    program: Program,
    mem: SimMemory,
    phase: usize,
    procs: Vec<ProcState>,
    history: History,
    started: usize,
    schedule: Vec<ProcId>,
    log: Option<Vec<AccessRecord>>,
}

impl Simulator {
    pub fn new(imp: Impl, program: &Program, opts: SimOptions) -> Result<Simulator, SimError> {
        if imp.procs != program.procs {
            return Err(SimError::ProcessMismatch { program: program.procs, imp: imp.procs });
        }
        let mut sim = Simulator {
            imp,
            program: program.clone(),
            mem: SimMemory::new(opts.capacity, &imp.initial_cells()),
            phase: 0,
            procs: (0..program.procs)
                .map(|p| ProcState { local: ProcLocal::with_seed(p, opts.seed), next: 0, running: None })
                .collect(),
            history: History::new(program.procs, imp.name()),
            started: 0,
            schedule: Vec::new(),
            log: opts.log.then(Vec::new),
        };
        sim.settle_phase();
        Ok(sim)
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn schedule(&self) -> Schedule {
        Schedule(self.schedule.clone())
    }

    pub fn access_log(&self) -> &[AccessRecord] {
        self.log.as_deref().unwrap_or(&[])
    }

    pub fn steps(&self) -> usize {
        self.schedule.len()
    }

    pub fn can_step(&self, p: ProcId) -> bool {
        match self.procs.get(p) {
            Some(st) => st.running.is_some() || st.next < self.program.ops(self.phase, p).len(),
            None => false,
        }
    }

    pub fn runnable(&self) -> Vec<ProcId> {
        (0..self.procs.len()).filter(|&p| self.can_step(p)).collect()
    }

    pub fn is_done(&self) -> bool {
        self.phase >= self.program.phases.len()
    }

    /// Whether `p` is in the middle of an operation.
    pub fn is_running(&self, p: ProcId) -> bool {
        self.procs.get(p).is_some_and(|st| st.running.is_some())
    }

    /// The access `p` performs at its next step, if it is mid-operation.
    pub fn pending_access(&self, p: ProcId) -> Option<Access> {
        self.procs.get(p)?.running.as_ref().map(|r| r.next)
    }

    fn settle_phase(&mut self) {
        while !self.is_done() && (0..self.procs.len()).all(|p| !self.can_step(p)) {
            self.phase += 1;
            for st in &mut self.procs {
                st.next = 0;
            }
        }
    }

    /// Lets `p` take one step. Returns the finished operation, if any.
    pub fn step(&mut self, p: ProcId) -> Result<Option<OpTrace>, SimError> {
        if !self.can_step(p) {
            return Err(SimError::InvalidSchedule { proc: p, pos: self.schedule.len() });
        }
        self.schedule.push(p);
        let st = &mut self.procs[p];
        if st.running.is_none() {
            let call = self.program.ops(self.phase, p)[st.next];
            st.next += 1;
            self.history.invoke(p, &call);
            let op = self.started;
            self.started += 1;
            let mut machine = self.imp.begin(&call)?;
            match machine.resume(None, &mut st.local)? {
                Step::Access(next) => st.running = Some(Running { op, call, machine, next, trail: Vec::new() }),
                Step::Done(result) => {
                    self.history.respond(p, call.kind(), result);
                    self.settle_phase();
                    return Ok(Some(OpTrace { proc: p, call, result, accesses: Vec::new() }));
                }
            }
        }
        let st = &mut self.procs[p];
        let run = st.running.as_mut().expect("operation in flight");
        let (before, after) = self.mem.apply(&run.next)?;
        let mut rec = AccessRecord {
            seq: 0,
            proc: p,
            op: run.op,
            kind: run.next.kind(),
            cell: run.next.cell,
            before,
            after,
            word: run.next.word,
        };
        if let Some(log) = &mut self.log {
            rec.seq = log.len() as u64;
            log.push(rec);
            rec.seq = 0;
        }
        run.trail.push(rec);
        let finished = match run.machine.resume(Some(before), &mut st.local)? {
            Step::Access(next) => {
                run.next = next;
                None
            }
            Step::Done(result) => {
                let run = st.running.take().expect("operation in flight");
                self.history.respond(p, run.call.kind(), result);
                Some(OpTrace { proc: p, call: run.call, result, accesses: run.trail })
            }
        };
        if finished.is_some() {
            self.settle_phase();
        }
        Ok(finished)
    }

    /// Runs `p` until its current operation responds.
    pub fn finish_op(&mut self, p: ProcId) -> Result<Option<OpTrace>, SimError> {
        loop {
            if let Some(t) = self.step(p)? {
                return Ok(Some(t));
            }
        }
    }

    pub fn into_run(self) -> SimRun {
        let finished = self.is_done();
        SimRun {
            schedule: Schedule(self.schedule),
            history: self.history,
            log: self.log.unwrap_or_default(),
            finished,
        }
    }

    /// Hash of everything that determines future behavior and the history
    /// so far (the schedule and global log are excluded).
    fn state_key(&self) -> u128 {
        let mut lo = DefaultHasher::new();
        let mut hi = DefaultHasher::new();
        0xA5u8.hash(&mut hi);
        for h in [&mut lo, &mut hi] {
            self.mem.hash(h);
            self.phase.hash(h);
            self.procs.hash(h);
            self.history.events.hash(h);
        }
        (u128::from(hi.finish()) << 64) | u128::from(lo.finish())
    }
}

/// Drives `program` under `schedule`. A schedule that stops early models
/// the remaining processes crashing; their operations stay pending.
pub fn replay(imp: Impl, program: &Program, schedule: &Schedule, opts: SimOptions) -> Result<SimRun, SimError> {
    let mut sim = Simulator::new(imp, program, opts)?;
    for &p in &schedule.0 {
        sim.step(p)?;
    }
    Ok(sim.into_run())
}

/// A seeded random schedule, stopped after `bound` steps if still running.
pub fn random_run(imp: Impl, program: &Program, seed: u64, bound: usize, opts: SimOptions) -> Result<SimRun, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sim = Simulator::new(imp, program, opts)?;
    while !sim.is_done() && sim.steps() < bound {
        let p = *sim.runnable().choose(&mut rng).expect("a runnable process while not done");
        sim.step(p)?;
    }
    Ok(sim.into_run())
}

/// Visits every maximal schedule explicitly; `visit` returns false to stop.
/// Returns the number of schedules visited.
pub fn for_each_schedule(
    imp: Impl,
    program: &Program,
    bound: usize,
    opts: SimOptions,
    visit: &mut dyn FnMut(&SimRun) -> bool,
) -> Result<u64, SimError> {
    fn go(sim: &Simulator, bound: usize, count: &mut u64, visit: &mut dyn FnMut(&SimRun) -> bool) -> Result<bool, SimError> {
        if sim.is_done() {
            *count += 1;
            return Ok(visit(&sim.clone().into_run()));
        }
        if sim.steps() >= bound {
            return Err(SimError::BoundExceeded { bound });
        }
        for p in sim.runnable() {
            let mut next = sim.clone();
            next.step(p)?;
            if !go(&next, bound, count, visit)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
    let sim = Simulator::new(imp, program, opts)?;
    let mut count = 0;
    go(&sim, bound, &mut count, visit)?;
    Ok(count)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    pub bound: usize,
    pub opts: SimOptions,
}

impl Default for EnumConfig {
    fn default() -> EnumConfig {
        EnumConfig { bound: DEFAULT_STEP_BOUND, opts: SimOptions::default() }
    }
}

/// Outcome of an exhaustive enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    /// Number of maximal schedules.
    pub schedules: u128,
    /// Distinct histories of maximal schedules, in discovery order.
    pub histories: Vec<History>,
    /// Distinct states explored.
    pub states: usize,
    /// Length of the longest schedule.
    pub max_steps: usize,
}

impl Enumeration {
    /// Distinct event prefixes of the maximal histories that are not
    /// themselves maximal. These are exactly the histories of schedules in
    /// which some processes crash: deferring the steps of crashed processes
    /// to the end of their phase does not change any earlier event.
    pub fn crash_histories(&self) -> Vec<History> {
        let mut seen: HashSet<Vec<Event>> = self.histories.iter().map(|h| h.events.clone()).collect();
        let mut out = Vec::new();
        for h in &self.histories {
            for len in 0..h.events.len() {
                let p = h.prefix(len);
                if seen.insert(p.events.clone()) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// Explores all schedules with states merged by hash. Schedule counts are
/// exact: each state's count is the sum over its successors. `on_op` sees
/// every completed operation of every explored path at least once.
pub fn enumerate_schedules(
    imp: Impl,
    program: &Program,
    cfg: EnumConfig,
    on_op: &mut dyn FnMut(&OpTrace),
) -> Result<Enumeration, SimError> {
    struct Walk<'a> {
        bound: usize,
        memo: HashMap<u128, (u128, usize)>,
        seen: HashSet<u128>,
        histories: Vec<History>,
        on_op: &'a mut dyn FnMut(&OpTrace),
    }

    impl Walk<'_> {
        fn go(&mut self, sim: &Simulator) -> Result<(u128, usize), SimError> {
            let depth = sim.steps();
            if sim.is_done() {
                let mut h = DefaultHasher::new();
                sim.history.events.hash(&mut h);
                let mut h2 = DefaultHasher::new();
                1u8.hash(&mut h2);
                sim.history.events.hash(&mut h2);
                if self.seen.insert((u128::from(h2.finish()) << 64) | u128::from(h.finish())) {
                    self.histories.push(sim.history.clone());
                }
                return Ok((1, 0));
            }
            let key = sim.state_key();
            if let Some(&(count, len)) = self.memo.get(&key) {
                if depth + len > self.bound {
                    return Err(SimError::BoundExceeded { bound: self.bound });
                }
                return Ok((count, len));
            }
            if depth >= self.bound {
                return Err(SimError::BoundExceeded { bound: self.bound });
            }
            let mut total = 0u128;
            let mut longest = 0;
            for p in sim.runnable() {
                let mut next = sim.clone();
                if let Some(t) = next.step(p)? {
                    (self.on_op)(&t);
                }
                let (c, l) = self.go(&next)?;
                total += c;
                longest = longest.max(l + 1);
            }
            self.memo.insert(key, (total, longest));
            Ok((total, longest))
        }
    }

    let opts = SimOptions { log: false, ..cfg.opts };
    let sim = Simulator::new(imp, program, opts)?;
    let mut walk = Walk { bound: cfg.bound, memo: HashMap::new(), seen: HashSet::new(), histories: Vec::new(), on_op };
    let (schedules, max_steps) = walk.go(&sim)?;
    Ok(Enumeration { schedules, histories: walk.histories, states: walk.memo.len(), max_steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(name: &str, text: &str) -> (Impl, Program) {
        let program: Program = text.parse().unwrap();
        (Impl::by_name(name, program.procs).unwrap(), program)
    }

    fn binomial(n: u128, k: u128) -> u128 {
        (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
    }

    #[test]
    fn single_op_has_one_schedule() {
        let (imp, program) = setup("seqstack", "p0: push(1)");
        let e = enumerate_schedules(imp, &program, EnumConfig::default(), &mut |_| {}).unwrap();
        assert_eq!(e.schedules, 1);
        assert_eq!(e.max_steps, 2);
        assert_eq!(e.histories.len(), 1);
    }

    #[test]
    fn two_one_step_ops_have_two_schedules() {
        let (imp, program) = setup("register", "p0: write(1) || p1: read");
        let e = enumerate_schedules(imp, &program, EnumConfig::default(), &mut |_| {}).unwrap();
        assert_eq!(e.schedules, 2);
        assert_eq!(e.histories.len(), 2);
    }

    #[test]
    fn schedule_count_is_binomial() {
        // enq: fai + write; deq on empty queue: one tail read
        for (text, a, b) in [("p0: enq(1) || p1: enq(2)", 2, 2), ("p0: enq(1), enq(2) || p1: enq(3)", 4, 2)] {
            let (imp, program) = setup("naivequeue", text);
            let raw = for_each_schedule(imp, &program, 64, SimOptions::default(), &mut |_| true).unwrap();
            let cached = enumerate_schedules(imp, &program, EnumConfig::default(), &mut |_| {}).unwrap();
            assert_eq!(u128::from(raw), binomial(a + b, a));
            assert_eq!(cached.schedules, binomial(a + b, a));
        }
    }

    #[test]
    fn cached_and_raw_find_the_same_histories() {
        let (imp, program) = setup("setseqstack", "p0: push(1) ; p0: pop || p1: pop, push(2)");
        let mut raw = HashSet::new();
        let n = for_each_schedule(imp, &program, 64, SimOptions::default(), &mut |run| {
            raw.insert(run.history.render());
            true
        })
        .unwrap();
        let e = enumerate_schedules(imp, &program, EnumConfig::default(), &mut |_| {}).unwrap();
        let cached: HashSet<String> = e.histories.iter().map(|h| h.render()).collect();
        assert_eq!(raw, cached);
        assert_eq!(u128::from(n), e.schedules);
        assert!(e.states < n as usize);
    }

    #[test]
    fn replay_matches_enumeration() {
        let (imp, program) = setup("setseqqueue", "p0: enq(1) || p1: deq");
        for_each_schedule(imp, &program, 64, SimOptions::default(), &mut |run| {
            let again = replay(imp, &program, &run.schedule, SimOptions::default()).unwrap();
            assert_eq!(again.history.render(), run.history.render());
            true
        })
        .unwrap();
    }

    #[test]
    fn truncated_schedule_leaves_pending_op() {
        let (imp, program) = setup("seqstack", "p0: push(1) || p1: pop");
        let run = replay(imp, &program, &"0 1".parse().unwrap(), SimOptions::default()).unwrap();
        assert!(!run.finished);
        let ops = run.history.operations().unwrap();
        assert!(ops.iter().all(|o| !o.is_complete()));
    }

    #[test]
    fn invalid_steps_and_bounds() {
        let (imp, program) = setup("seqstack", "p0: push(1)");
        assert!(matches!(
            replay(imp, &program, &"1".parse().unwrap(), SimOptions::default()),
            Err(SimError::InvalidSchedule { proc: 1, pos: 0 })
        ));
        assert!(matches!(
            replay(imp, &program, &"0 0 0".parse().unwrap(), SimOptions::default()),
            Err(SimError::InvalidSchedule { pos: 2, .. })
        ));
        let cfg = EnumConfig { bound: 1, ..EnumConfig::default() };
        assert!(matches!(
            enumerate_schedules(imp, &program, cfg, &mut |_| {}),
            Err(SimError::BoundExceeded { bound: 1 })
        ));
        let wrong = Impl::by_name("seqstack", 3).unwrap();
        assert!(Simulator::new(wrong, &program, SimOptions::default()).is_err());
    }

    #[test]
    fn phases_wait_for_each_other() {
        let (imp, program) = setup("seqstack", "p0: push(1) ; p1: pop");
        let sim = Simulator::new(imp, &program, SimOptions::default()).unwrap();
        assert_eq!(sim.runnable(), vec![0]);
        let run = replay(imp, &program, &"0 0 1 1".parse().unwrap(), SimOptions { log: true, ..SimOptions::default() })
            .unwrap();
        assert!(run.finished);
        assert_eq!(run.log.len(), 4);
        assert_eq!(run.history.events.last().unwrap().payload, Payload::Int(1));
    }

    #[test]
    fn crash_histories_are_fresh_prefixes() {
        let (imp, program) = setup("seqstack", "p0: push(1) || p1: pop");
        let e = enumerate_schedules(imp, &program, EnumConfig::default(), &mut |_| {}).unwrap();
        let crashes = e.crash_histories();
        assert!(crashes.iter().any(|h| h.events.is_empty()));
        for c in &crashes {
            assert!(e.histories.iter().all(|h| h.events != c.events));
        }
    }
}
