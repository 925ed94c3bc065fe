//! C ABI over maslov-core.
//!
//! Every function returns a [`MaslovStatus`]; on failure the message is kept
//! per thread and read with [`maslov_last_error_message`]. Problems are opaque
//! handles created by [`maslov_problem_new`] and released by [`maslov_problem_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use maslov_core::evans::{evans_at, evans_roots};
use maslov_core::integrator::SolverOptions;
use maslov_core::maslov::{maslov_index_2d, maslov_index_angle, maslov_index_intersection};
use maslov_core::{get_problem, MaslovError, Params, Problem};

/// Status codes; the nonzero values match the CLI exit codes where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaslovStatus {
    Ok = 0,
    /// Unknown problem, bad parameter, violated precondition, near eigenvalue.
    Usage = 2,
    /// Essential spectrum or loss of hyperbolicity.
    Domain = 3,
    /// Geometry, solver or method-disagreement failure.
    Solver = 4,
    NullPointer = 5,
    /// The output buffer is too small; the required length was written.
    BufferTooSmall = 6,
    Panic = 7,
}

/// Integration controls. `half_length <= 0` selects L automatically.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MaslovOptions {
    pub half_length: f64,
    pub dx: f64,
}

/// Opaque problem handle.
pub struct MaslovProblem {
    inner: Problem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &MaslovError) -> MaslovStatus {
    match e.exit_code() {
        2 => MaslovStatus::Usage,
        3 => MaslovStatus::Domain,
        _ => MaslovStatus::Solver,
    }
}

enum Failure {
    Core(MaslovError),
    Null(&'static str),
    Buffer(usize),
}

impl From<MaslovError> for Failure {
    fn from(e: MaslovError) -> Self {
        Failure::Core(e)
    }
}

fn guard<F>(f: F) -> MaslovStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MaslovStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            MaslovStatus::NullPointer
        }
        Ok(Err(Failure::Buffer(need))) => {
            set_error(format!("buffer too small: {need} entries needed"));
            MaslovStatus::BufferTooSmall
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MaslovStatus::Panic
        }
    }
}

unsafe fn problem_ref<'a>(p: *const MaslovProblem) -> Result<&'a Problem, Failure> {
    p.as_ref().map(|p| &p.inner).ok_or(Failure::Null("problem"))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| MaslovError::InvalidParameter(format!("{what} is not UTF-8")).into())
}

unsafe fn solver_options(opts: *const MaslovOptions) -> SolverOptions {
    match opts.as_ref() {
        None => SolverOptions::default(),
        Some(o) => SolverOptions {
            half_length: (o.half_length > 0.0).then_some(o.half_length),
            dx: o.dx,
        },
    }
}

/// Default options: automatic L, dx = 0.01.
#[no_mangle]
pub extern "C" fn maslov_options_default() -> MaslovOptions {
    let d = SolverOptions::default();
    MaslovOptions {
        half_length: 0.0,
        dx: d.dx,
    }
}

/// Builds a catalog problem from `n` key/value pairs.
///
/// # Safety
/// `name` must be a nul-terminated string, `keys` and `values` must point to
/// `n` entries each (or be null with `n == 0`), and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maslov_problem_new(
    name: *const c_char,
    keys: *const *const c_char,
    values: *const f64,
    n: usize,
    out: *mut *mut MaslovProblem,
) -> MaslovStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        let name = str_arg(name, "name")?;
        let mut params = Params::new();
        if n > 0 {
            if keys.is_null() || values.is_null() {
                return Err(Failure::Null("keys/values"));
            }
            for i in 0..n {
                let k = str_arg(*keys.add(i), "key")?;
                params.insert(k.to_string(), *values.add(i));
            }
        }
        let inner = get_problem(name, &params)?;
        *out = Box::into_raw(Box::new(MaslovProblem { inner }));
        Ok(())
    })
}

/// Releases a handle from [`maslov_problem_new`]; null is ignored.
///
/// # Safety
/// `p` must come from [`maslov_problem_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn maslov_problem_free(p: *mut MaslovProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Half-dimension n of the phase space (1 or 2).
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maslov_problem_dimension(
    p: *const MaslovProblem,
    out: *mut usize,
) -> MaslovStatus {
    guard(|| {
        let problem = problem_ref(p)?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = problem.n();
        Ok(())
    })
}

/// Evans function D(lambda). `opts` may be null for defaults.
///
/// # Safety
/// `p` must be a live handle, `opts` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn maslov_evans(
    p: *const MaslovProblem,
    lambda: f64,
    opts: *const MaslovOptions,
    out: *mut f64,
) -> MaslovStatus {
    guard(|| {
        let problem = problem_ref(p)?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = evans_at(problem, lambda, &solver_options(opts))?.d;
        Ok(())
    })
}

/// Maslov index from the winding of the angle function.
///
/// # Safety
/// As for [`maslov_evans`].
#[no_mangle]
pub unsafe extern "C" fn maslov_index_by_angle(
    p: *const MaslovProblem,
    lambda: f64,
    opts: *const MaslovOptions,
    out: *mut i64,
) -> MaslovStatus {
    guard(|| {
        let problem = problem_ref(p)?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = maslov_index_angle(problem, lambda, &solver_options(opts))?.index;
        Ok(())
    })
}

/// Maslov index as a signed count of crossings with the stable plane.
///
/// # Safety
/// As for [`maslov_evans`].
#[no_mangle]
pub unsafe extern "C" fn maslov_index_by_intersection(
    p: *const MaslovProblem,
    lambda: f64,
    opts: *const MaslovOptions,
    out: *mut i64,
) -> MaslovStatus {
    guard(|| {
        let problem = problem_ref(p)?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        let opts = solver_options(opts);
        let r = match problem.n() {
            1 => maslov_index_2d(problem, lambda, &opts)?,
            _ => maslov_index_intersection(problem, lambda, &opts)?,
        };
        *out = r.index;
        Ok(())
    })
}

/// Roots of D on [lo, hi] from a `grid`-point sign scan.
///
/// Writes up to `capacity` roots and always writes the total to `count`;
/// returns `BufferTooSmall` when `capacity < count`.
///
/// # Safety
/// `roots` must have room for `capacity` values (may be null when 0).
#[no_mangle]
pub unsafe extern "C" fn maslov_evans_roots(
    p: *const MaslovProblem,
    lo: f64,
    hi: f64,
    grid: usize,
    opts: *const MaslovOptions,
    roots: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> MaslovStatus {
    guard(|| {
        let problem = problem_ref(p)?;
        let count = count.as_mut().ok_or(Failure::Null("count"))?;
        let found = evans_roots(problem, lo, hi, grid, &solver_options(opts))?.roots;
        *count = found.len();
        if found.len() > capacity {
            return Err(Failure::Buffer(found.len()));
        }
        if !found.is_empty() {
            if roots.is_null() {
                return Err(Failure::Null("roots"));
            }
            ptr::copy_nonoverlapping(found.as_ptr(), roots, found.len());
        }
        Ok(())
    })
}

/// Message of the last failure on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn maslov_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn maslov_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
