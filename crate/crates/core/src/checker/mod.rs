//! Brute-force deciders for linearizability, set-linearizability and
//! interval-linearizability, plus direct checks of the duplicate-return
//! properties of relaxed stacks and queues.
//!
//! All three searches are depth-first over the operations that may take
//! effect next (those whose real-time predecessors already did), memoizing
//! failed (frontier, spec state) pairs. Candidates are tried in process
//! order, so witnesses are reproducible.

mod history;
mod interval;
mod lemmas;
mod lin;
mod witness;

use std::fmt;

use thiserror::Error;

pub use history::{Event, EventKind, History, Operation, TraceError};
pub use interval::check_interval_linearizable;
pub use lemmas::{check_lemma_properties, DuplicatePair, LemmaReport, LinOutcome};
pub use lin::{check_linearizable, check_set_linearizable};
pub use witness::{validate_witness, IntervalStep, Linearized, Witness};

use crate::specs::{IntervalSpec, SeqSpec, SetSpec};

/// Environment variable overriding the node budget.
pub const BUDGET_ENV: &str = "RELAXEDSYNC_BUDGET";
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
pub const DEFAULT_MAX_OPS: usize = 14;
pub const DEFAULT_MAX_INTERVAL_OPS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub node_budget: u64,
    /// History size cap for linearizability and set-linearizability.
    pub max_ops: usize,
    /// History size cap for interval-linearizability.
    pub max_interval_ops: usize,
    /// Set-linearizability only: allow singleton classes only.
    pub singleton_classes: bool,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            node_budget: DEFAULT_NODE_BUDGET,
            max_ops: DEFAULT_MAX_OPS,
            max_interval_ops: DEFAULT_MAX_INTERVAL_OPS,
            singleton_classes: false,
        }
    }
}

impl SearchConfig {
    /// Defaults, with the node budget taken from `RELAXEDSYNC_BUDGET` when set.
    pub fn from_env() -> SearchConfig {
        let mut cfg = SearchConfig::default();
        if let Some(b) = std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            cfg.node_budget = b;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("history has {ops} operations; the search is capped at {cap}")]
    HistoryTooLarge { ops: usize, cap: usize },
    #[error("search budget of {budget} nodes exceeded")]
    SearchBudgetExceeded { budget: u64 },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub memo_hits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub witness: Option<Witness>,
    pub stats: SearchStats,
}

impl Verdict {
    pub(crate) fn accept(witness: Witness, stats: SearchStats) -> Verdict {
        Verdict { accepted: true, witness: Some(witness), stats }
    }

    pub(crate) fn reject(stats: SearchStats) -> Verdict {
        Verdict { accepted: false, witness: None, stats }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.witness, self.accepted) {
            (Some(w), true) => write!(f, "accepted ({} nodes)\n{w}", self.stats.nodes),
            _ => writeln!(f, "rejected: no valid order exists ({} nodes explored)", self.stats.nodes),
        }
    }
}

/// Correctness condition plus the object model it is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    Lin(SeqSpec),
    SetLin(SetSpec),
    IntervalLin(IntervalSpec),
}

impl Condition {
    pub fn check(&self, h: &History, cfg: &SearchConfig) -> Result<Verdict, CheckError> {
        match self {
            Condition::Lin(spec) => check_linearizable(h, *spec, cfg),
            Condition::SetLin(spec) => check_set_linearizable(h, *spec, cfg),
            Condition::IntervalLin(spec) => check_interval_linearizable(h, spec, cfg),
        }
    }
}

/// Bitset of operation ids with per-operation predecessor masks.
#[derive(Clone, Debug)]
pub(crate) struct OrderTable {
    pub ops: Vec<Operation>,
    pub preds: Vec<u64>,
    pub complete: u64,
}

impl OrderTable {
    pub fn new(ops: Vec<Operation>, cap: usize) -> Result<OrderTable, CheckError> {
        if ops.len() > cap.min(64) {
            return Err(CheckError::HistoryTooLarge { ops: ops.len(), cap: cap.min(64) });
        }
        let mut preds = vec![0u64; ops.len()];
        let mut complete = 0u64;
        for b in &ops {
            if b.is_complete() {
                complete |= 1 << b.id;
            }
            for a in &ops {
                if a.precedes(b) {
                    preds[b.id] |= 1 << a.id;
                }
            }
        }
        Ok(OrderTable { ops, preds, complete })
    }

    /// Operations not in `started` whose predecessors are all in `done`,
    /// in process order.
    pub fn eligible(&self, done: u64, started: u64) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.ops.len())
            .filter(|&i| started & (1 << i) == 0 && self.preds[i] & !done == 0)
            .collect();
        out.sort_by_key(|&i| (self.ops[i].proc, self.ops[i].call.kind() as u8, i));
        out
    }
}

/// Counts nodes against the budget.
pub(crate) struct Budget {
    pub limit: u64,
    pub stats: SearchStats,
}

impl Budget {
    pub fn new(limit: u64) -> Budget {
        Budget { limit, stats: SearchStats::default() }
    }

    pub fn tick(&mut self) -> Result<(), CheckError> {
        self.stats.nodes += 1;
        if self.stats.nodes > self.limit {
            Err(CheckError::SearchBudgetExceeded { budget: self.limit })
        } else {
            Ok(())
        }
    }
}
