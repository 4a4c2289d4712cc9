//! Relaxed concurrent stacks and queues built from read/write registers
//! (with FAI/SWAP reference versions), executable set- and
//! interval-sequential specifications, brute-force checkers, and a harness
//! that runs the algorithms under real threads or enumerated schedules.

pub mod adapters;
pub mod checker;
pub mod cli;
pub mod harness;
pub mod impls;
pub mod machine;
pub mod op;
pub mod queues;
pub mod registers;
pub mod specs;
pub mod stacks;
