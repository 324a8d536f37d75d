//! C interface to `efp-core`.
//!
//! Instances and solve results are opaque handles created by `efp_*`
//! constructors and released with the matching `*_free` function. Every
//! fallible call returns an [`EfpStatus`]; on failure a description is
//! available from [`efp_last_error`] on the same thread. Indices are
//! 0-based. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::time::Duration;

use efp_core::allocation::envy_free_allocation;
use efp_core::formulations::{build, FormulationKind};
use efp_core::generators::{preset, Model, Seed};
use efp_core::geometric::{guarantee_factor, round_pricing_eps, round_pricing_half};
use efp_core::io::{parse_instance, serialize_instance};
use efp_core::solver::{solve_mip, MipLimits, MipResult, MipStatus};
use efp_core::{Edge, Error, Instance, Pricing};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SolverError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Termination state of a MIP solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfpSolveStatus {
    Optimal = 0,
    Feasible = 1,
    Infeasible = 2,
    Unknown = 3,
}

/// Opaque market handle.
pub struct EfpInstance(Instance);

/// Opaque result of [`efp_solve`].
pub struct EfpResult(MipResult);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> EfpStatus {
    match e {
        Error::Parse { .. } => EfpStatus::ParseError,
        Error::Lp(_) => EfpStatus::SolverError,
        _ => EfpStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> EfpStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

/// Runs `f`, turning panics into [`EfpStatus::Panic`].
fn guard(f: impl FnOnce() -> EfpStatus) -> EfpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            EfpStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return EfpStatus::NullPointer;
        })+
    };
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, EfpStatus> {
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        EfpStatus::InvalidArgument
    })
}

unsafe fn pricing(inst: &Instance, prices: *const f64, len: usize) -> Result<Pricing, EfpStatus> {
    let v = slice::from_raw_parts(prices, len).to_vec();
    Pricing::for_instance(inst, v).map_err(fail)
}

unsafe fn write_out<T: Copy>(src: &[T], dst: *mut T, cap: usize) -> EfpStatus {
    if cap < src.len() {
        set_error(format!("buffer holds {cap} entries, {} needed", src.len()));
        return EfpStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    EfpStatus::Ok
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn efp_status_message(status: EfpStatus) -> *const c_char {
    let s: &'static CStr = match status {
        EfpStatus::Ok => c"ok",
        EfpStatus::NullPointer => c"null pointer argument",
        EfpStatus::InvalidArgument => c"invalid argument",
        EfpStatus::ParseError => c"parse error",
        EfpStatus::SolverError => c"solver error",
        EfpStatus::BufferTooSmall => c"buffer too small",
        EfpStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `cap`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn efp_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let k = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Builds a market from parallel edge arrays.
///
/// # Safety
/// The three arrays must hold `num_edges` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn efp_instance_new(
    num_items: usize,
    num_bidders: usize,
    items: *const usize,
    bidders: *const usize,
    values: *const f64,
    num_edges: usize,
    out: *mut *mut EfpInstance,
) -> EfpStatus {
    non_null!(out);
    if num_edges > 0 {
        non_null!(items, bidders, values);
    }
    guard(|| {
        let edges: Vec<Edge> = if num_edges == 0 {
            Vec::new()
        } else {
            let (i, b, v) = (
                slice::from_raw_parts(items, num_edges),
                slice::from_raw_parts(bidders, num_edges),
                slice::from_raw_parts(values, num_edges),
            );
            (0..num_edges).map(|k| Edge::new(i[k], b[k], v[k])).collect()
        };
        match Instance::new(num_items, num_bidders, &edges) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(EfpInstance(inst)));
                EfpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Generates a preset market of `model` ("characteristics",
/// "neighborhood" or "popularity") with `n` items and bidders.
///
/// # Safety
/// `model` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn efp_instance_generate(
    model: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut EfpInstance,
) -> EfpStatus {
    non_null!(model, out);
    guard(|| {
        let name = match c_str(model) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let made = name
            .parse::<Model>()
            .and_then(|m| preset(m, n))
            .and_then(|cfg| cfg.generate(Seed(seed)));
        match made {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(EfpInstance(inst)));
                EfpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reads a market from the instance text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn efp_instance_parse(text: *const c_char, out: *mut *mut EfpInstance) -> EfpStatus {
    non_null!(text, out);
    guard(|| {
        let s = match c_str(text) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match parse_instance(s) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(EfpInstance(inst)));
                EfpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the instance text into `buf`. `needed` receives the size
/// including the terminating NUL, also when the buffer is too small.
///
/// # Safety
/// `inst` must come from this library; `buf` must be null or valid for
/// `cap` bytes; `needed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn efp_instance_serialize(
    inst: *const EfpInstance,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> EfpStatus {
    non_null!(inst, needed);
    guard(|| {
        let text = serialize_instance(&(*inst).0);
        *needed = text.len() + 1;
        if buf.is_null() || cap < text.len() + 1 {
            set_error("buffer too small for the instance text");
            return EfpStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(text.as_ptr().cast::<c_char>(), buf, text.len());
        *buf.add(text.len()) = 0;
        EfpStatus::Ok
    })
}

/// Item, bidder and edge counts; any output pointer may be null.
///
/// # Safety
/// `inst` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn efp_instance_size(
    inst: *const EfpInstance,
    num_items: *mut usize,
    num_bidders: *mut usize,
    num_edges: *mut usize,
) -> EfpStatus {
    non_null!(inst);
    let i = &(*inst).0;
    if !num_items.is_null() {
        *num_items = i.num_items();
    }
    if !num_bidders.is_null() {
        *num_bidders = i.num_bidders();
    }
    if !num_edges.is_null() {
        *num_edges = i.num_edges();
    }
    EfpStatus::Ok
}

/// # Safety
/// `inst` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn efp_instance_free(inst: *mut EfpInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Revenue of the envy-free allocation induced by `prices`. When
/// `assignment` is non-null it receives, per bidder, the item bought or -1.
///
/// # Safety
/// `prices` must hold `num_items` entries; `assignment` must be null or hold
/// `num_bidders` entries; `profit` must be writable.
#[no_mangle]
pub unsafe extern "C" fn efp_allocate(
    inst: *const EfpInstance,
    prices: *const f64,
    num_prices: usize,
    assignment: *mut i64,
    num_bidders: usize,
    profit: *mut f64,
) -> EfpStatus {
    non_null!(inst, prices, profit);
    guard(|| {
        let inst = &(*inst).0;
        let p = match pricing(inst, prices, num_prices) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let outcome = match envy_free_allocation(inst, &p) {
            Ok(o) => o,
            Err(e) => return fail(e),
        };
        if !assignment.is_null() {
            let a: Vec<i64> = outcome
                .allocation
                .as_slice()
                .iter()
                .map(|x| x.map_or(-1, |i| i as i64))
                .collect();
            let s = write_out(&a, assignment, num_bidders);
            if s != EfpStatus::Ok {
                return s;
            }
        }
        *profit = outcome.profit;
        EfpStatus::Ok
    })
}

/// Rounds `prices` onto a geometric grid: the factor-4 rounding when
/// `eps == 1`, otherwise the `1+eps` rounding for `eps` in (0, 1).
///
/// # Safety
/// `prices` and `rounded` must hold `num_prices` entries.
#[no_mangle]
pub unsafe extern "C" fn efp_round(
    inst: *const EfpInstance,
    prices: *const f64,
    num_prices: usize,
    eps: f64,
    rounded: *mut f64,
) -> EfpStatus {
    non_null!(inst, prices, rounded);
    guard(|| {
        let inst = &(*inst).0;
        let p = match pricing(inst, prices, num_prices) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let q = if eps == 1.0 {
            round_pricing_half(inst, &p)
        } else {
            round_pricing_eps(inst, &p, eps)
        };
        match q {
            Ok(q) => write_out(q.as_slice(), rounded, num_prices),
            Err(e) => fail(e),
        }
    })
}

/// Guaranteed profit fraction of the `1+eps` rounding.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn efp_guarantee_factor(eps: f64, out: *mut f64) -> EfpStatus {
    non_null!(out);
    match guarantee_factor(eps) {
        Ok(f) => {
            *out = f;
            EfpStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Builds formulation `formulation` ("STM", "I", "L", "P" or "U") and
/// solves it by branch-and-bound. A non-positive `time_limit` means none.
///
/// # Safety
/// `inst` must come from this library; `formulation` must be a
/// NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn efp_solve(
    inst: *const EfpInstance,
    formulation: *const c_char,
    time_limit: f64,
    out: *mut *mut EfpResult,
) -> EfpStatus {
    non_null!(inst, formulation, out);
    guard(|| {
        let inst = &(*inst).0;
        let kind: FormulationKind = match c_str(formulation).map(str::parse) {
            Ok(Ok(k)) => k,
            Ok(Err(e)) => return fail(e),
            Err(s) => return s,
        };
        let limits = MipLimits {
            time_limit: (time_limit > 0.0).then(|| Duration::from_secs_f64(time_limit)),
            ..MipLimits::default()
        };
        match solve_mip(&build(inst, kind), inst, &limits) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(EfpResult(r)));
                EfpStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Summary of a solve; any output pointer may be null.
///
/// # Safety
/// `res` must come from [`efp_solve`].
#[no_mangle]
pub unsafe extern "C" fn efp_result_summary(
    res: *const EfpResult,
    status: *mut EfpSolveStatus,
    objective: *mut f64,
    bound: *mut f64,
    gap: *mut f64,
    nodes: *mut u64,
) -> EfpStatus {
    non_null!(res);
    let r = &(*res).0;
    if !status.is_null() {
        *status = match r.status {
            MipStatus::Optimal => EfpSolveStatus::Optimal,
            MipStatus::Feasible => EfpSolveStatus::Feasible,
            MipStatus::Infeasible => EfpSolveStatus::Infeasible,
            MipStatus::Unknown => EfpSolveStatus::Unknown,
        };
    }
    for (p, v) in [(objective, r.objective), (bound, r.bound), (gap, r.gap)] {
        if !p.is_null() {
            *p = v;
        }
    }
    if !nodes.is_null() {
        *nodes = r.nodes;
    }
    EfpStatus::Ok
}

/// Prices and per-bidder items (-1 when unserved) of the incumbent.
/// Either output may be null.
///
/// # Safety
/// `res` must come from [`efp_solve`]; `prices` must be null or hold
/// `num_items` entries; `assignment` null or `num_bidders` entries.
#[no_mangle]
pub unsafe extern "C" fn efp_result_outcome(
    res: *const EfpResult,
    prices: *mut f64,
    num_items: usize,
    assignment: *mut i64,
    num_bidders: usize,
) -> EfpStatus {
    non_null!(res);
    let Some(o) = &(*res).0.incumbent else {
        set_error("the solve found no incumbent");
        return EfpStatus::InvalidArgument;
    };
    if !prices.is_null() {
        let s = write_out(o.pricing.as_slice(), prices, num_items);
        if s != EfpStatus::Ok {
            return s;
        }
    }
    if !assignment.is_null() {
        let a: Vec<i64> = o.allocation.as_slice().iter().map(|x| x.map_or(-1, |i| i as i64)).collect();
        return write_out(&a, assignment, num_bidders);
    }
    EfpStatus::Ok
}

/// # Safety
/// `res` must be null or come from [`efp_solve`], and not be used again.
#[no_mangle]
pub unsafe extern "C" fn efp_result_free(res: *mut EfpResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}
