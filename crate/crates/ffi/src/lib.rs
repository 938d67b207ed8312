//! C interface to homfill.
//!
//! Groups and balls are opaque handles released with their `_free`
//! function. Every fallible call returns an `HfStatus`; on failure the
//! message is available from `hf_last_error` on the same thread until the
//! next call. Strings returned through out-pointers are owned by the caller
//! and released with `hf_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use homfill::cayley::CayleyBall;
use homfill::experiments::{measure_ar_pair_in, FillingPolicy};
use homfill::extension::compute_constants;
use homfill::filling::{fa_table, harea_fill_with, EnumerationScope, FillConfig, FillStatus, Solver};
use homfill::format::{load_group, parse_group, GroupSpec};
use homfill::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    /// Infeasible in the ball, budgets, unclosed words and similar outcomes.
    Domain = 4,
    /// An internal consistency check failed.
    Invariant = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfSolver {
    Ilp = 0,
    Brute = 1,
}

/// A parsed group file.
pub struct HfGroup(GroupSpec);

/// A ball in the Cayley complex of a group.
pub struct HfBall(CayleyBall);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HfStatus {
    match e {
        Error::Parse { .. } => HfStatus::Parse,
        Error::Invariant(_) => HfStatus::Invariant,
        Error::Io(_) => HfStatus::Io,
        _ => HfStatus::Domain,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (HfStatus, String)>) -> HfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HfStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HfStatus::Panic
        }
    }
}

fn lift<T>(r: homfill::Result<T>) -> Result<T, (HfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (HfStatus, String)> {
    if p.is_null() {
        return Err((HfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (HfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HfStatus, String)> {
    p.as_ref().ok_or_else(|| (HfStatus::NullPointer, format!("{what} is null")))
}

fn check_out<T>(p: *mut T) -> Result<(), (HfStatus, String)> {
    if p.is_null() {
        Err((HfStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

unsafe fn put_json(out: *mut *mut c_char, v: &impl serde::Serialize) -> Result<(), (HfStatus, String)> {
    let s = serde_json::to_string(v).map_err(|e| (HfStatus::Io, e.to_string()))?;
    *out = CString::new(s).map_err(|e| (HfStatus::Io, e.to_string()))?.into_raw();
    Ok(())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn hf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL.
#[no_mangle]
pub extern "C" fn hf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` is NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a group file held in memory.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hf_group_parse(text: *const c_char, out: *mut *mut HfGroup) -> HfStatus {
    guard(|| {
        check_out(out)?;
        let g = lift(parse_group(str_arg(text, "text")?))?;
        *out = Box::into_raw(Box::new(HfGroup(g)));
        Ok(())
    })
}

/// # Safety
/// `path` is a NUL-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hf_group_load(path: *const c_char, out: *mut *mut HfGroup) -> HfStatus {
    guard(|| {
        check_out(out)?;
        let g = lift(load_group(Path::new(str_arg(path, "path")?)))?;
        *out = Box::into_raw(Box::new(HfGroup(g)));
        Ok(())
    })
}

/// # Safety
/// `g` is NULL or a handle from `hf_group_parse`/`hf_group_load`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_group_free(g: *mut HfGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of generators, stable letters included.
///
/// # Safety
/// `g` is a live group handle.
#[no_mangle]
pub unsafe extern "C" fn hf_group_rank(g: *const HfGroup) -> usize {
    g.as_ref().map_or(0, |g| g.0.presentation.rank())
}

/// # Safety
/// `g` is a live group handle; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hf_ball_build(g: *const HfGroup, radius: usize, out: *mut *mut HfBall) -> HfStatus {
    guard(|| {
        check_out(out)?;
        let g = ref_arg(g, "group")?;
        let b = lift(CayleyBall::build(&g.0.backend, &g.0.presentation, radius))?;
        *out = Box::into_raw(Box::new(HfBall(b)));
        Ok(())
    })
}

/// # Safety
/// `b` is NULL or a handle from `hf_ball_build`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_ball_free(b: *mut HfBall) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Vertex, edge and cell counts; any output pointer may be NULL.
///
/// # Safety
/// `b` is a live ball handle; non-NULL outputs point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hf_ball_counts(
    b: *const HfBall,
    vertices: *mut usize,
    edges: *mut usize,
    cells: *mut usize,
) -> HfStatus {
    guard(|| {
        let b = &ref_arg(b, "ball")?.0;
        for (p, v) in [(vertices, b.vertex_count()), (edges, b.edge_count()), (cells, b.cell_count())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Minimal filling area of the loop `word` read from the identity. A loop
/// with no filling inside the ball gives `HF_STATUS_DOMAIN`.
///
/// # Safety
/// `b` is a live ball handle, `word` a NUL-terminated string and `area`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hf_fill_area(b: *const HfBall, word: *const c_char, solver: HfSolver, area: *mut i64) -> HfStatus {
    guard(|| {
        check_out(area)?;
        let ball = &ref_arg(b, "ball")?.0;
        let w = lift(ball.presentation().parse_word(str_arg(word, "word")?))?;
        let gamma = lift(ball.loop_to_cycle(0, &w))?;
        let solver = match solver {
            HfSolver::Ilp => Solver::ExactIlp,
            HfSolver::Brute => Solver::BruteForce,
        };
        let r = lift(harea_fill_with(ball, &gamma, &FillConfig::with_solver(solver)))?;
        if r.status != FillStatus::Optimal {
            return Err((HfStatus::Domain, format!("no filling found: {:?}", r.status)));
        }
        *area = r.area;
        Ok(())
    })
}

/// Filling-area table up to `n_max` as JSON.
///
/// # Safety
/// `b` is a live ball handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_fa_table_json(b: *const HfBall, n_max: usize, out: *mut *mut c_char) -> HfStatus {
    guard(|| {
        check_out(out)?;
        let ball = &ref_arg(b, "ball")?.0;
        let t = lift(fa_table(ball, n_max, &FillConfig::default(), EnumerationScope::LoopsOnly))?;
        put_json(out, &t)
    })
}

/// Area-radius pair up to `n_max` as JSON, minimal-area policy.
///
/// # Safety
/// `b` is a live ball handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_arpair_json(b: *const HfBall, n_max: usize, out: *mut *mut c_char) -> HfStatus {
    guard(|| {
        check_out(out)?;
        let ball = &ref_arg(b, "ball")?.0;
        let r = lift(measure_ar_pair_in(ball, n_max, FillingPolicy::MinAreaThenMeasureRadius))?;
        put_json(out, &r)
    })
}

/// Transfer constants of an extension group as JSON.
///
/// # Safety
/// `g` is a live group handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hf_constants_json(g: *const HfGroup, kernel_radius: usize, out: *mut *mut c_char) -> HfStatus {
    guard(|| {
        check_out(out)?;
        let g = ref_arg(g, "group")?;
        let ext = g.0.extension.as_ref().ok_or((HfStatus::Domain, "not an extension group".to_string()))?;
        let k = lift(compute_constants(ext, kernel_radius))?;
        put_json(out, &k)
    })
}
