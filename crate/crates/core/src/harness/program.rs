//! Test programs: phases of per-process operation lists.
//!
//! ```text
//! p0: push(1) ; p0: pop || p1: pop
//! ```
//!
//! Phases are separated by `;` or newlines and run one after another (a
//! phase starts once every operation of the previous one has responded).
//! Inside a phase, `||` separates processes and `,` separates the
//! operations one process runs in order.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::op::{OpCall, ProcId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("program syntax: {0}")]
    Syntax(String),
    #[error("item {0} is inserted more than once")]
    DuplicateItem(u64),
    #[error("process {proc} used but the program has {procs} processes")]
    ProcOutOfRange { proc: ProcId, procs: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Phase {
    /// `ops[p]` is what process `p` runs in this phase.
    pub ops: Vec<Vec<OpCall>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    pub procs: usize,
    pub phases: Vec<Phase>,
}

impl Program {
    /// One phase where process `p` runs `scripts[p]`.
    pub fn concurrent(scripts: Vec<Vec<OpCall>>) -> Result<Program, ProgramError> {
        let p = Program { procs: scripts.len(), phases: vec![Phase { ops: scripts }] };
        p.validate()?;
        Ok(p)
    }

    /// Parses with at least `procs` processes (more if the text names them).
    pub fn parse_with_procs(text: &str, procs: usize) -> Result<Program, ProgramError> {
        let mut phases: Vec<Vec<(ProcId, Vec<OpCall>)>> = Vec::new();
        let mut max_proc = None;
        for chunk in text.split([';', '\n']) {
            if chunk.trim().is_empty() {
                continue;
            }
            let mut phase = Vec::new();
            for part in chunk.split("||") {
                let (who, ops) = part
                    .split_once(':')
                    .ok_or_else(|| ProgramError::Syntax(format!("expected `p<id>: ops` in `{}`", part.trim())))?;
                let who = who.trim();
                let proc: ProcId = who
                    .strip_prefix('p')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| ProgramError::Syntax(format!("bad process `{who}`")))?;
                let calls = ops
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<OpCall>().map_err(ProgramError::Syntax))
                    .collect::<Result<Vec<_>, _>>()?;
                max_proc = max_proc.max(Some(proc));
                phase.push((proc, calls));
            }
            phases.push(phase);
        }
        let procs = procs.max(max_proc.map_or(0, |p| p + 1));
        let phases = phases
            .into_iter()
            .map(|parts| {
                let mut ops = vec![Vec::new(); procs];
                for (p, calls) in parts {
                    ops[p].extend(calls);
                }
                Phase { ops }
            })
            .collect();
        let p = Program { procs, phases };
        p.validate()?;
        Ok(p)
    }

    /// Inserted items must be distinct and processes in range.
    pub fn validate(&self) -> Result<(), ProgramError> {
        let mut seen = HashSet::new();
        for phase in &self.phases {
            if phase.ops.len() > self.procs {
                return Err(ProgramError::ProcOutOfRange { proc: phase.ops.len() - 1, procs: self.procs });
            }
            for call in phase.ops.iter().flatten() {
                if let OpCall::Push(x) | OpCall::Enq(x) = call {
                    if !seen.insert(x.get()) {
                        return Err(ProgramError::DuplicateItem(x.get()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn op_count(&self) -> usize {
        self.phases.iter().flat_map(|p| &p.ops).map(Vec::len).sum()
    }

    /// Operations of `proc` in `phase`; empty when out of range.
    pub fn ops(&self, phase: usize, proc: ProcId) -> &[OpCall] {
        self.phases.get(phase).and_then(|p| p.ops.get(proc)).map_or(&[], Vec::as_slice)
    }
}

impl FromStr for Program {
    type Err = ProgramError;

    fn from_str(text: &str) -> Result<Program, ProgramError> {
        Program::parse_with_procs(text, 0)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut phases = Vec::new();
        for phase in &self.phases {
            let parts: Vec<String> = phase
                .ops
                .iter()
                .enumerate()
                .filter(|(_, ops)| !ops.is_empty())
                .map(|(p, ops)| {
                    let calls: Vec<String> = ops.iter().map(|c| c.to_string()).collect();
                    format!("p{p}: {}", calls.join(", "))
                })
                .collect();
            phases.push(parts.join(" || "));
        }
        f.write_str(&phases.join(" ; "))
    }
}
