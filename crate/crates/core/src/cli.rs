//! Command-line front end.
//!
//! Exit codes of `check` and `enumerate`: 0 accepted, 1 rejected, 2 search
//! budget or step bound exceeded, 3 unreadable input. `run` exits 0 on a
//! clean run and 1 on a fault.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checker::{check_lemma_properties, CheckError, Condition, History, SearchConfig};
use crate::harness::{
    audit_access_patterns, enumerate_schedules, generate_scripts, random_run, replay, run_stress, script, AuditReport,
    EnumConfig, Program, Schedule, SimError, SimOptions, Workload, DEFAULT_STEP_BOUND, SCRIPTS,
};
use crate::impls::{Algo, Flavor, Impl, IMPL_NAMES};
use crate::op::{OpKind, Payload};
use crate::registers::render_access_log;
use crate::specs::{IntervalSpec, SeqSpec, SetSpec};

pub const EXIT_ACCEPTED: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "relaxedsync", version, about = "Relaxed read/write stacks and queues: run, enumerate and check")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a workload and write its trace.
    Run(RunArgs),
    /// Check a trace against a correctness condition.
    Check(CheckArgs),
    /// Run every schedule of a small program and check each history.
    Enumerate(EnumArgs),
    /// List implementations and built-in scripts.
    List,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Live,
    Sim,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    #[arg(long = "impl")]
    imp: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    procs: Option<usize>,
    #[arg(long)]
    ops: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Probability that a generated operation inserts.
    #[arg(long)]
    mix: Option<f64>,
    /// Built-in scripted schedule (sim mode).
    #[arg(long)]
    script: Option<String>,
    /// Program text for sim mode, e.g. `p0: push(1) ; p0: pop || p1: pop`.
    #[arg(long)]
    program: Option<String>,
    /// Explicit schedule for sim mode, e.g. `0 0 1 1`.
    #[arg(long)]
    schedule: Option<String>,
    /// Trace output path (stdout when absent).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Access-log output path.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    capacity: Option<u64>,
    /// Live mode: probability of yielding after each step.
    #[arg(long)]
    yield_prob: Option<f64>,
    /// Print an access-pattern audit to stderr.
    #[arg(long)]
    audit: bool,
    /// Audit flags every read after any write, not only effectful ones.
    #[arg(long)]
    strict: bool,
    /// File of `key=value` lines supplying defaults for the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CondArg {
    Lin,
    Setlin,
    Intlin,
    Lemmas,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SpecArg {
    Stack,
    Queue,
    Intqueue,
    Counter,
    Fai,
    Register,
}

#[derive(Args, Debug)]
struct CondArgs {
    #[arg(long, value_enum)]
    condition: Option<CondArg>,
    #[arg(long, value_enum)]
    spec: Option<SpecArg>,
    /// Set-linearizability with singleton classes only.
    #[arg(long)]
    singleton: bool,
    /// Interval queue: allow several dequeues to take the same item at once.
    #[arg(long)]
    multiplicity: bool,
    /// Interval queue: a lone dequeue on the empty queue may only answer `empty`.
    #[arg(long)]
    no_point_weakempty: bool,
    /// Node budget of the search (overrides RELAXEDSYNC_BUDGET).
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Trace file, or `-` for stdin.
    trace: PathBuf,
    #[command(flatten)]
    cond: CondArgs,
}

#[derive(Args, Debug)]
struct EnumArgs {
    #[arg(long = "impl")]
    imp: String,
    #[arg(long)]
    program: String,
    #[arg(long, default_value_t = DEFAULT_STEP_BOUND)]
    bound: usize,
    /// Skip the histories of crash-truncated schedules.
    #[arg(long)]
    no_crashes: bool,
    /// Print an access-pattern audit of every operation explored.
    #[arg(long)]
    audit: bool,
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    cond: CondArgs,
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_ACCEPTED };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match cli.command {
        Command::Run(a) => cmd_run(a, &mut out),
        Command::Check(a) => cmd_check(a, &mut out),
        Command::Enumerate(a) => cmd_enumerate(a, &mut out),
        Command::List => cmd_list(&mut out),
    };
    let _ = out.flush();
    code
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn cmd_list(out: &mut dyn Write) -> i32 {
    let _ = writeln!(out, "implementations: {}", IMPL_NAMES.join(", "));
    for s in SCRIPTS {
        let _ = writeln!(out, "script {} ({}): {}", s.name, s.impl_name, s.about);
    }
    EXIT_ACCEPTED
}

fn read_config(path: &PathBuf) -> Result<HashMap<String, String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

fn apply_config(a: &mut RunArgs, cfg: &HashMap<String, String>) -> Result<(), String> {
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T, String> {
        v.parse().map_err(|_| format!("config: bad value `{v}` for {k}"))
    }
    for (k, v) in cfg {
        match k.as_str() {
            "impl" => a.imp = a.imp.take().or(Some(v.clone())),
            "mode" => {
                let m = Mode::from_str(v, true).map_err(|_| format!("config: bad mode `{v}`"))?;
                a.mode = a.mode.or(Some(m));
            }
            "procs" => a.procs = a.procs.or(Some(num(k, v)?)),
            "ops" => a.ops = a.ops.or(Some(num(k, v)?)),
            "seed" => a.seed = a.seed.or(Some(num(k, v)?)),
            "mix" => a.mix = a.mix.or(Some(num(k, v)?)),
            "capacity" => a.capacity = a.capacity.or(Some(num(k, v)?)),
            "yield-prob" => a.yield_prob = a.yield_prob.or(Some(num(k, v)?)),
            "script" => a.script = a.script.take().or(Some(v.clone())),
            "program" => a.program = a.program.take().or(Some(v.clone())),
            "schedule" => a.schedule = a.schedule.take().or(Some(v.clone())),
            "trace" => a.trace = a.trace.take().or(Some(v.into())),
            "log" => a.log = a.log.take().or(Some(v.into())),
            other => return Err(format!("config: unknown key `{other}`")),
        }
    }
    Ok(())
}

fn write_output(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn cmd_run(mut a: RunArgs, out: &mut dyn Write) -> i32 {
    if let Some(path) = a.config.clone() {
        if let Err(e) = read_config(&path).and_then(|cfg| apply_config(&mut a, &cfg)) {
            return fail(EXIT_INPUT, e);
        }
    }
    let seed = a.seed.unwrap_or(0);
    let (history, log) = if let Some(name) = &a.script {
        let Some(s) = script(name) else {
            let names: Vec<&str> = SCRIPTS.iter().map(|s| s.name).collect();
            return fail(EXIT_INPUT, format!("unknown script `{name}` (known: {})", names.join(", ")));
        };
        if a.imp.as_deref().is_some_and(|i| i != s.impl_name) {
            return fail(EXIT_INPUT, format!("script {} runs on {}", s.name, s.impl_name));
        }
        if a.mode == Some(Mode::Live) {
            return fail(EXIT_INPUT, "scripts run in sim mode");
        }
        match s.run(SimOptions { log: true, seed, ..SimOptions::default() }) {
            Ok(run) => (run.history, run.log),
            Err(e) => return fail(EXIT_REJECTED, e),
        }
    } else {
        let Some(name) = a.imp.as_deref() else {
            return fail(EXIT_INPUT, "--impl is required without --script");
        };
        let program = match &a.program {
            Some(text) => match Program::parse_with_procs(text, a.procs.unwrap_or(0)) {
                Ok(p) => Some(p),
                Err(e) => return fail(EXIT_INPUT, e),
            },
            None => None,
        };
        let procs = program.as_ref().map_or(a.procs.unwrap_or(1), |p| p.procs);
        let imp = match Impl::by_name(name, procs) {
            Ok(i) => i,
            Err(e) => return fail(EXIT_INPUT, e),
        };
        let ops = a.ops.unwrap_or(10);
        let mix = a.mix.unwrap_or(0.5);
        let capacity = a.capacity.unwrap_or_else(|| imp.capacity_for(ops).max(crate::registers::DEFAULT_CAPACITY));
        let mode = a.mode.unwrap_or(if program.is_some() || a.schedule.is_some() { Mode::Sim } else { Mode::Live });
        match mode {
            Mode::Live => {
                if program.is_some() || a.schedule.is_some() {
                    return fail(EXIT_INPUT, "--program and --schedule need sim mode");
                }
                let w = Workload {
                    ops,
                    insert_ratio: mix,
                    seed,
                    capacity,
                    log_accesses: a.log.is_some() || a.audit,
                    yield_prob: a.yield_prob.unwrap_or(0.0),
                    scripts: None,
                };
                match run_stress(imp, &w) {
                    Ok(run) => (run.history, run.log),
                    Err(e) => return fail(EXIT_REJECTED, e),
                }
            }
            Mode::Sim => {
                let program = match program {
                    Some(p) => p,
                    None => match Program::concurrent(generate_scripts(imp, ops, mix, seed)) {
                        Ok(p) => p,
                        Err(e) => return fail(EXIT_INPUT, e),
                    },
                };
                let opts = SimOptions { capacity, seed, log: true };
                let run = match &a.schedule {
                    Some(text) => match text.parse::<Schedule>() {
                        Ok(s) => replay(imp, &program, &s, opts),
                        Err(e) => return fail(EXIT_INPUT, e),
                    },
                    None => random_run(imp, &program, seed, usize::MAX, opts),
                };
                match run {
                    Ok(run) => (run.history, run.log),
                    Err(e) => return fail(EXIT_REJECTED, e),
                }
            }
        }
    };
    if let Err(e) = write_output(&a.trace, &history.render(), out) {
        return fail(EXIT_REJECTED, e);
    }
    if let Some(path) = &a.log {
        if let Err(e) = fs::write(path, render_access_log(&log)) {
            return fail(EXIT_REJECTED, format!("{}: {e}", path.display()));
        }
    }
    if a.audit {
        eprint!("{}", audit_access_patterns(&log, a.strict));
    }
    EXIT_ACCEPTED
}

/// What a history is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    Condition(Condition),
    Lemmas(SeqSpec),
}

fn infer_spec(h: &History) -> Option<SpecArg> {
    let e = h.events.first()?;
    Some(match e.op {
        OpKind::Push | OpKind::Pop => SpecArg::Stack,
        OpKind::Enq | OpKind::Deq => SpecArg::Queue,
        OpKind::Inc => SpecArg::Counter,
        OpKind::Fai => SpecArg::Fai,
        OpKind::Write => SpecArg::Register,
        OpKind::Read | OpKind::Rename => return None,
    })
}

fn seq_spec(s: SpecArg) -> SeqSpec {
    match s {
        SpecArg::Stack => SeqSpec::Stack,
        SpecArg::Queue | SpecArg::Intqueue => SeqSpec::Queue,
        SpecArg::Counter => SeqSpec::Counter,
        SpecArg::Fai => SeqSpec::Fai { initial: 0 },
        SpecArg::Register => SeqSpec::Register,
    }
}

fn target(c: &CondArgs, procs: usize, default: Option<(CondArg, SpecArg)>) -> Result<Target, String> {
    let (cond, spec) = match (c.condition, c.spec, default) {
        (Some(cond), Some(spec), _) => (cond, spec),
        (None, Some(SpecArg::Intqueue), _) => (CondArg::Intlin, SpecArg::Intqueue),
        (Some(CondArg::Intlin), None, _) => (CondArg::Intlin, SpecArg::Intqueue),
        (Some(cond), None, Some((_, spec))) => (cond, spec),
        (None, Some(spec), Some((cond, _))) => (cond, spec),
        (None, Some(spec), None) => (CondArg::Lin, spec),
        (None, None, Some(d)) => d,
        (_, None, None) => return Err("cannot tell which object the history is of; pass --spec".into()),
    };
    Ok(match cond {
        CondArg::Lin => Target::Condition(Condition::Lin(seq_spec(spec))),
        CondArg::Lemmas => match spec {
            SpecArg::Stack | SpecArg::Queue | SpecArg::Intqueue => Target::Lemmas(seq_spec(spec)),
            other => return Err(format!("lemmas need a stack or queue spec, not {other:?}")),
        },
        CondArg::Setlin => Target::Condition(Condition::SetLin(match spec {
            SpecArg::Stack => SetSpec::Stack,
            SpecArg::Queue => SetSpec::Queue,
            other => return Err(format!("set-linearizability needs stack or queue, not {other:?}")),
        })),
        CondArg::Intlin => {
            if !matches!(spec, SpecArg::Queue | SpecArg::Intqueue) {
                return Err("interval-linearizability is defined for the queue only".into());
            }
            let mut s = if c.multiplicity { IntervalSpec::with_multiplicity(procs) } else { IntervalSpec::new(procs) };
            s.point_weak_empty = !c.no_point_weakempty;
            Target::Condition(Condition::IntervalLin(s))
        }
    })
}

fn search_config(c: &CondArgs) -> SearchConfig {
    let mut cfg = SearchConfig::from_env();
    if let Some(b) = c.budget {
        cfg.node_budget = b;
    }
    cfg.singleton_classes = c.singleton;
    cfg
}

fn error_code(e: &CheckError) -> i32 {
    match e {
        CheckError::HistoryTooLarge { .. } | CheckError::SearchBudgetExceeded { .. } => EXIT_BUDGET,
        CheckError::Trace(_) | CheckError::Unsupported(_) => EXIT_INPUT,
    }
}

/// Checks one history; returns the exit code and the text to print.
fn check_one(h: &History, t: Target, cfg: &SearchConfig) -> (i32, String) {
    match t {
        Target::Lemmas(spec) => match check_lemma_properties(h, spec, cfg) {
            Ok(r) if r.holds() => (EXIT_ACCEPTED, format!("properties hold\n{r}")),
            Ok(r) => (EXIT_REJECTED, format!("properties violated\n{r}")),
            Err(e) => (error_code(&e), format!("error: {e}\n")),
        },
        Target::Condition(c) => match c.check(h, cfg) {
            Ok(v) if v.accepted => (EXIT_ACCEPTED, v.to_string()),
            Ok(v) => {
                let ops = h.operations().map(|o| o.len()).unwrap_or(0);
                (EXIT_REJECTED, format!("rejected: no valid order of the {ops} operations exists ({} nodes explored)\n", v.stats.nodes))
            }
            Err(e) => (error_code(&e), format!("error: {e}\n")),
        },
    }
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> i32 {
    let text = if a.trace.as_os_str() == "-" {
        let mut s = String::new();
        if let Err(e) = io::stdin().read_to_string(&mut s) {
            return fail(EXIT_INPUT, e);
        }
        s
    } else {
        match fs::read_to_string(&a.trace) {
            Ok(s) => s,
            Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", a.trace.display())),
        }
    };
    if text.trim().is_empty() {
        let _ = writeln!(out, "accepted: empty history");
        return EXIT_ACCEPTED;
    }
    let h: History = match text.parse() {
        Ok(h) => h,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    if let Err(e) = h.operations() {
        return fail(EXIT_INPUT, e);
    }
    if h.events.is_empty() {
        let _ = writeln!(out, "accepted: empty history");
        return EXIT_ACCEPTED;
    }
    let default = Impl::by_name(&h.impl_name, h.procs.max(1))
        .ok()
        .and_then(|i| default_target(&i))
        .or_else(|| infer_spec(&h).map(|s| (CondArg::Lin, s)));
    let t = match target(&a.cond, h.procs, default) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let (code, text) = check_one(&h, t, &search_config(&a.cond));
    let _ = out.write_all(text.as_bytes());
    code
}

/// The condition an implementation is meant to satisfy.
fn default_target(imp: &Impl) -> Option<(CondArg, SpecArg)> {
    Some(match (imp.algo, imp.flavor()) {
        (Algo::SeqStack(_), _) => (CondArg::Lin, SpecArg::Stack),
        (Algo::SetSeqStack(_) | Algo::RenStack(_), _) => (CondArg::Setlin, SpecArg::Stack),
        (Algo::Queue(q), _) if q.kind.two_pass() => (CondArg::Intlin, SpecArg::Intqueue),
        (Algo::Queue(q), _) if q.kind.read_write() => (CondArg::Setlin, SpecArg::Queue),
        (Algo::Queue(_) | Algo::NaiveQueue(_), _) => (CondArg::Lin, SpecArg::Queue),
        (_, Flavor::Counter) => (CondArg::Lin, SpecArg::Counter),
        (_, Flavor::Fai) => (CondArg::Lin, SpecArg::Fai),
        (_, Flavor::Register) => (CondArg::Lin, SpecArg::Register),
        _ => return None,
    })
}

fn cmd_enumerate(a: EnumArgs, out: &mut dyn Write) -> i32 {
    let program: Program = match a.program.parse() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let imp = match Impl::by_name(&a.imp, program.procs) {
        Ok(i) => i,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let t = match target(&a.cond, program.procs, default_target(&imp)) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let mut audit = AuditReport::new(a.strict);
    let cfg = EnumConfig { bound: a.bound, opts: SimOptions::default() };
    let e = match enumerate_schedules(imp, &program, cfg, &mut |t| audit.add(crate::harness::audit_op(&t.accesses, a.strict))) {
        Ok(e) => e,
        Err(err @ SimError::BoundExceeded { .. }) => return fail(EXIT_BUDGET, err),
        Err(err) => return fail(EXIT_REJECTED, err),
    };
    let crashes = if a.no_crashes { Vec::new() } else { e.crash_histories() };
    let search = search_config(&a.cond);
    let mut accepted = 0usize;
    let mut with_duplicates = 0usize;
    let _ = writeln!(out, "impl: {imp}");
    let _ = writeln!(out, "program: {program}");
    let _ = writeln!(out, "schedules: {}", e.schedules);
    let _ = writeln!(out, "states: {}", e.states);
    let _ = writeln!(out, "longest schedule: {} steps", e.max_steps);
    let _ = writeln!(out, "histories: {} ({} crash-truncated)", e.histories.len() + crashes.len(), crashes.len());
    for h in e.histories.iter().chain(&crashes) {
        if has_duplicate_return(h) {
            with_duplicates += 1;
        }
        let (code, text) = check_one(h, t, &search);
        if code != EXIT_ACCEPTED {
            let _ = writeln!(out, "accepted: {accepted}");
            let _ = write!(out, "first failing history:\n{h}{text}");
            return code;
        }
        accepted += 1;
    }
    let _ = writeln!(out, "accepted: {accepted}");
    let _ = writeln!(out, "rejected: 0");
    let _ = writeln!(out, "histories with a duplicate return: {with_duplicates}");
    if a.audit {
        let _ = write!(out, "{audit}");
    }
    EXIT_ACCEPTED
}

fn has_duplicate_return(h: &History) -> bool {
    let Ok(ops) = h.operations() else { return false };
    let mut seen = std::collections::HashSet::new();
    ops.iter().filter(|o| o.call.kind().is_removal()).any(|o| match o.result {
        Some(Payload::Int(x)) => !seen.insert(x),
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String) {
        let cli = Cli::try_parse_from(std::iter::once("relaxedsync").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let code = match cli.command {
            Command::Run(a) => cmd_run(a, &mut buf),
            Command::Check(a) => cmd_check(a, &mut buf),
            Command::Enumerate(a) => cmd_enumerate(a, &mut buf),
            Command::List => cmd_list(&mut buf),
        };
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn enumerate_small_program() {
        let (code, text) = run(&["enumerate", "--impl", "setseqstack", "--program", "p0: push(1) ; p0: pop || p1: pop"]);
        assert_eq!(code, 0, "{text}");
        assert!(text.contains("rejected: 0"));
        assert!(!text.contains("histories with a duplicate return: 0"));
    }

    #[test]
    fn naive_queue_enumeration_finds_a_rejection() {
        let (code, text) =
            run(&["enumerate", "--impl", "naivequeue", "--program", "p0: enq(1) ; p1: deq || p2: enq(2) || p0: deq"]);
        assert_eq!(code, 1, "{text}");
        assert!(text.contains("first failing history"));
    }

    #[test]
    fn config_defaults_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# demo\nimpl = seqstack\nprocs=1\nops = 4\nseed=3\n").unwrap();
        let (code, text) = run(&["run", "--config", cfg.to_str().unwrap(), "--ops", "2"]);
        assert_eq!(code, 0);
        let h: History = text.parse().unwrap();
        assert_eq!(h.operations().unwrap().len(), 2);
        fs::write(&cfg, "colour=blue\n").unwrap();
        assert_eq!(run(&["run", "--config", cfg.to_str().unwrap()]).0, EXIT_INPUT);
    }
}
