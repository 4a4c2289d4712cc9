//! C interface to the relaxed stacks and queues and to the trace checkers.
//!
//! Objects are opaque handles created by [`rs_object_new`] and released by
//! [`rs_object_free`]. A handle may be shared by several threads as long as
//! each thread uses its own process id. Every call returns an [`RsStatus`];
//! on failure a message is available from [`rs_last_error`] on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use relaxedsync::checker::{CheckError, Condition, History, SearchConfig};
use relaxedsync::harness::Concurrent;
use relaxedsync::impls::Impl;
use relaxedsync::op::Payload;
use relaxedsync::registers::{Fault, Item};
use relaxedsync::specs::{IntervalSpec, SeqSpec, SetSpec};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CapacityExceeded = 3,
    ContractViolation = 4,
    ParseError = 5,
    BudgetExceeded = 6,
    Panic = 7,
}

/// What a removal returned.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsResultKind {
    Item = 0,
    Empty = 1,
    WeakEmpty = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RsRemoved {
    pub kind: RsResultKind,
    /// The item when `kind` is `Item`, zero otherwise.
    pub item: u32,
}

/// Correctness condition for [`rs_check_trace`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsCondition {
    LinStack = 0,
    LinQueue = 1,
    SetLinStack = 2,
    SetLinQueue = 3,
    IntervalQueue = 4,
}

/// Opaque concurrent object.
pub struct RsObject {
    inner: Concurrent,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn guard(f: impl FnOnce() -> Result<(), (RsStatus, String)>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RsStatus::Panic
        }
    }
}

fn null(what: &str) -> (RsStatus, String) {
    (RsStatus::NullPointer, format!("{what} is null"))
}

fn fault(f: Fault) -> (RsStatus, String) {
    let status = match f {
        Fault::CapacityExceeded { .. } => RsStatus::CapacityExceeded,
        Fault::Contract(_) | Fault::Corrupt(_) => RsStatus::ContractViolation,
    };
    (status, f.to_string())
}

/// # Safety
/// `s` must be null or point to a NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, (RsStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (RsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// # Safety
/// `obj` must be null or a live handle from `rs_object_new`.
unsafe fn object<'a>(obj: *const RsObject) -> Result<&'a Concurrent, (RsStatus, String)> {
    obj.as_ref().map(|o| &o.inner).ok_or_else(|| null("object"))
}

/// Creates an object. `name` is an implementation name such as
/// `"setseqstack"`; `capacity` of zero picks a default.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_object_new(
    name: *const c_char,
    procs: usize,
    capacity: u64,
    out: *mut *mut RsObject,
) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let name = text(name, "name")?;
        let imp = Impl::by_name(name, procs).map_err(|e| (RsStatus::InvalidArgument, e))?;
        let capacity = if capacity == 0 { imp.capacity_for(1 << 14) } else { capacity };
        *out = Box::into_raw(Box::new(RsObject { inner: Concurrent::new(imp, capacity, 0) }));
        Ok(())
    })
}

/// Releases an object. Null is ignored.
///
/// # Safety
/// `obj` must be null or a handle from `rs_object_new` not yet freed, and
/// no other thread may be using it.
#[no_mangle]
pub unsafe extern "C" fn rs_object_free(obj: *mut RsObject) {
    if !obj.is_null() {
        drop(Box::from_raw(obj));
    }
}

/// Pushes or enqueues `item` (nonzero) on behalf of process `pid`.
///
/// # Safety
/// `obj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_insert(obj: *const RsObject, pid: usize, item: u32) -> RsStatus {
    guard(|| {
        let o = object(obj)?;
        check_pid(o, pid)?;
        let x = Item::new(u64::from(item)).ok_or((RsStatus::InvalidArgument, "item must be nonzero".into()))?;
        o.insert(pid, x).map(|_| ()).map_err(fault)
    })
}

/// Pops or dequeues on behalf of process `pid`.
///
/// # Safety
/// `obj` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_remove(obj: *const RsObject, pid: usize, out: *mut RsRemoved) -> RsStatus {
    guard(|| {
        let o = object(obj)?;
        if out.is_null() {
            return Err(null("out"));
        }
        check_pid(o, pid)?;
        let r = match o.remove(pid).map_err(fault)? {
            Payload::Int(x) => RsRemoved { kind: RsResultKind::Item, item: x as u32 },
            Payload::Empty => RsRemoved { kind: RsResultKind::Empty, item: 0 },
            Payload::WeakEmpty => RsRemoved { kind: RsResultKind::WeakEmpty, item: 0 },
            other => return Err((RsStatus::ContractViolation, format!("unexpected result {other}"))),
        };
        *out = r;
        Ok(())
    })
}

fn check_pid(o: &Concurrent, pid: usize) -> Result<(), (RsStatus, String)> {
    if pid >= o.procs() {
        return Err((RsStatus::InvalidArgument, format!("process {pid} out of range (procs {})", o.procs())));
    }
    Ok(())
}

/// Checks a trace in the text format written by the command-line tool.
/// `budget` of zero keeps the default search budget. `accepted` receives 1
/// or 0 when the status is `Ok`.
///
/// # Safety
/// `trace` must be a NUL-terminated string and `accepted` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_check_trace(
    trace: *const c_char,
    condition: RsCondition,
    budget: u64,
    accepted: *mut i32,
) -> RsStatus {
    guard(|| {
        if accepted.is_null() {
            return Err(null("accepted"));
        }
        let h: History = text(trace, "trace")?.parse().map_err(|e| (RsStatus::ParseError, format!("{e}")))?;
        let cond = match condition {
            RsCondition::LinStack => Condition::Lin(SeqSpec::Stack),
            RsCondition::LinQueue => Condition::Lin(SeqSpec::Queue),
            RsCondition::SetLinStack => Condition::SetLin(SetSpec::Stack),
            RsCondition::SetLinQueue => Condition::SetLin(SetSpec::Queue),
            RsCondition::IntervalQueue => Condition::IntervalLin(IntervalSpec::new(h.procs)),
        };
        let mut cfg = SearchConfig::default();
        if budget > 0 {
            cfg.node_budget = budget;
        }
        let v = cond.check(&h, &cfg).map_err(|e| {
            let status = match e {
                CheckError::HistoryTooLarge { .. } | CheckError::SearchBudgetExceeded { .. } => RsStatus::BudgetExceeded,
                CheckError::Trace(_) => RsStatus::ParseError,
                CheckError::Unsupported(_) => RsStatus::InvalidArgument,
            };
            (status, e.to_string())
        })?;
        *accepted = i32::from(v.accepted);
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns its full length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}
