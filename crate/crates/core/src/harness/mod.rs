//! Execution engines: a deterministic simulator that enumerates or replays
//! schedules, and a live driver running real threads, plus access audits.

mod audit;
pub mod live;
mod program;
mod scripts;
mod sim;

pub use audit::{audit_access_patterns, audit_op, scan_passes, AuditReport, OpAudit, ScanAudit};
pub use live::{generate_scripts, run_stress, Concurrent, StressRun, Workload};
pub use program::{Phase, Program, ProgramError};
pub use scripts::{script, Script, SCRIPTS};
pub use sim::{
    enumerate_schedules, for_each_schedule, random_run, replay, EnumConfig, Enumeration, OpTrace, Schedule, SimError,
    SimOptions, SimRun, Simulator, DEFAULT_STEP_BOUND,
};
