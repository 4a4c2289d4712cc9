use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relaxedsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxedsync")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

// Worked by hand from the schedule `0 0 1 2 2 0 0 1`: p0's enqueue takes
// two steps, p1 reads tail 1, p2 enqueues 2 into slot 2, p0 swaps slot 1,
// and p1 finds slot 1 already emptied and stops at its observed tail.
const FIG8: &str = "\
trace v1 n=3 impl=naivequeue
0 0 inv enq 1
1 0 res enq true
2 1 inv deq -
3 2 inv enq 2
4 2 res enq true
5 0 inv deq -
6 0 res deq 1
7 1 res deq empty
";

#[test]
fn fig8_script_trace_is_golden() {
    let o = relaxedsync(&["run", "--impl", "naivequeue", "--mode", "sim", "--script", "fig8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), FIG8);
}

#[test]
fn demo_scripts_are_byte_stable() {
    for name in ["fig8", "weakempty", "multiplicity"] {
        let a = relaxedsync(&["run", "--script", name, "--seed", "5"]);
        let b = relaxedsync(&["run", "--script", name, "--seed", "5"]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fig8 = write(dir.path(), "fig8.trace", FIG8);
    let o = relaxedsync(&["check", &fig8, "--condition", "lin", "--spec", "queue"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("rejected"));

    let weak = write(dir.path(), "weak.trace", &FIG8.replace("empty", "weakempty"));
    let o = relaxedsync(&["check", &weak, "--condition", "intlin", "--spec", "intqueue"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let empty = write(dir.path(), "empty.trace", "");
    assert_eq!(code(&relaxedsync(&["check", &empty])), 0);
    let header = write(dir.path(), "header.trace", "trace v1 n=2 impl=setseqstack\n");
    assert_eq!(code(&relaxedsync(&["check", &header])), 0);

    let junk = write(dir.path(), "junk.trace", "not a trace\n");
    assert_eq!(code(&relaxedsync(&["check", &junk])), 3);
    assert_eq!(code(&relaxedsync(&["check", "/no/such/file"])), 3);
    assert_eq!(code(&relaxedsync(&["check", &fig8, "--condition", "bogus"])), 3);

    let o = relaxedsync(&["check", &fig8, "--condition", "lin", "--spec", "queue", "--budget", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn weakempty_script_checks_with_interval_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.trace");
    let o = relaxedsync(&["run", "--script", "weakempty", "--trace", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(&path).unwrap().contains("weakempty"));
    let o = relaxedsync(&["check", path.to_str().unwrap(), "--condition", "intlin", "--spec", "intqueue"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).trim().is_empty());
    // plain linearizability has no weakempty response
    let o = relaxedsync(&["check", path.to_str().unwrap(), "--condition", "lin", "--spec", "queue"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn run_sequential_and_live() {
    let o = relaxedsync(&["run", "--impl", "seqstack", "--procs", "1", "--ops", "10"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("trace v1 n=1 impl=seqstack\n"));
    assert_eq!(text.lines().count(), 21);

    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.trace");
    let log = dir.path().join("t.log");
    let o = relaxedsync(&[
        "run", "--impl", "setseqstack", "--mode", "live", "--procs", "4", "--ops", "2000", "--seed", "1",
        "--trace", trace.to_str().unwrap(), "--log", log.to_str().unwrap(), "--audit",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("read-modify-write"));
    assert!(fs::metadata(&log).unwrap().len() > 0);
    let o = relaxedsync(&["check", trace.to_str().unwrap(), "--condition", "lemmas", "--spec", "stack"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn run_sim_with_program_and_schedule() {
    let o = relaxedsync(&[
        "run", "--impl", "setseqstack", "--program", "p0: push(1) ; p0: pop || p1: pop", "--schedule",
        "0 0 0 0 0 0 0 0 1 1 1 1 0 1",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("res pop 1").count(), 2);
    let o = relaxedsync(&["run", "--impl", "setseqstack", "--program", "p0: push(1)", "--schedule", "1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn enumerate_examples() {
    let o = relaxedsync(&["enumerate", "--impl", "setseqstack", "--program", "p0: push(1) ; p0: pop || p1: pop"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("rejected: 0"));
    assert!(!text.contains("duplicate return: 0"));

    let o = relaxedsync(&["enumerate", "--impl", "seqstack", "--program", "p0: push(1)"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("schedules: 1\n"));

    let o = relaxedsync(&["enumerate", "--impl", "naivequeue", "--program", "p0: enq(1) ; p1: deq || p2: enq(2) || p0: deq"]);
    assert_eq!(code(&o), 1);

    let o = relaxedsync(&["enumerate", "--impl", "setseqstack", "--program", "p0: push(1), pop", "--bound", "3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn argument_and_config_errors() {
    assert_eq!(code(&relaxedsync(&["run", "--impl", "nosuch"])), 3);
    assert_eq!(code(&relaxedsync(&["frobnicate"])), 3);
    assert_eq!(code(&relaxedsync(&["run", "--script", "nosuch"])), 3);
    assert_eq!(code(&relaxedsync(&["--help"])), 0);
    let o = relaxedsync(&["list"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("setseqstack"));
    assert!(stdout(&o).contains("script fig8"));
}
