//! C ABI over `tdho`.
//!
//! Solutions are opaque heap handles created by `tdho_solution_*` and released
//! with [`tdho_solution_free`]. Every fallible call returns a [`TdhoStatus`];
//! the message of the most recent failure on the calling thread is available
//! from [`tdho_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tdho::ermakov::SolverTolerances;
use tdho::frequency::RationalFrequency;
use tdho::tdse::oracle_comparison;
use tdho::{Branch, Error, ExactSolution, FrequencyProfile};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdhoStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    Integration = 4,
    Io = 5,
    Panic = 6,
}

/// Exact Gaussian state of a time-dependent oscillator.
pub struct TdhoSolution {
    inner: ExactSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(TdhoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => TdhoStatus::Domain,
            Error::Integration { .. } => TdhoStatus::Integration,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => TdhoStatus::Io,
            _ => TdhoStatus::Config,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TdhoStatus::NullPointer, format!("{what} is null"))
}

fn guard<F>(f: F) -> TdhoStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TdhoStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            TdhoStatus::Panic
        }
    }
}

unsafe fn solution<'a>(handle: *const TdhoSolution) -> Result<&'a ExactSolution, Failure> {
    handle.as_ref().map(|h| &h.inner).ok_or_else(|| null("solution"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn create(out: *mut *mut TdhoSolution, make: impl FnOnce() -> tdho::Result<ExactSolution>) -> TdhoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = make()?;
        out.write(Box::into_raw(Box::new(TdhoSolution { inner })));
        Ok(())
    })
}

/// Writes the message of the last failure on this thread into `buf` (NUL
/// terminated, truncated to `len`) and returns its full length without the NUL.
/// Returns 0 when no failure has been recorded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tdho_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tdho_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `Ω(t) = 1/(a + bt)` with `a = √(1 - b²/4)`, `0 ≤ b < 2`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn tdho_solution_subcritical(b: f64, out: *mut *mut TdhoSolution) -> TdhoStatus {
    create(out, || ExactSolution::from_branch(Branch::Subcritical { b }))
}

/// `Ω(t) = 1/(1 + 2t)`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn tdho_solution_critical(out: *mut *mut TdhoSolution) -> TdhoStatus {
    create(out, || ExactSolution::from_branch(Branch::Critical))
}

/// `Ω ≡ 1`: the stationary ground state.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn tdho_solution_static(out: *mut *mut TdhoSolution) -> TdhoStatus {
    create(out, || ExactSolution::from_branch(Branch::Static))
}

/// Numerically integrated Ermakov solution for `Ω(t) = 1/(a + bt)` on `[0, t_max]`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn tdho_solution_numeric_rational(
    a: f64,
    b: f64,
    rho0: f64,
    rho_dot0: f64,
    t_max: f64,
    out: *mut *mut TdhoSolution,
) -> TdhoStatus {
    create(out, || {
        let profile = FrequencyProfile::rational(RationalFrequency::new(a, b)?);
        ExactSolution::numeric(profile, rho0, rho_dot0, t_max, SolverTolerances::default())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `handle` must be null or come from a `tdho_solution_*` constructor and not
/// have been freed.
#[no_mangle]
pub unsafe extern "C" fn tdho_solution_free(handle: *mut TdhoSolution) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// `ρ(t)`.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tdho_rho(handle: *const TdhoSolution, t: f64, out: *mut f64) -> TdhoStatus {
    guard(|| write(out, solution(handle)?.rho(t)?, "out"))
}

/// `ν = ln ρ` and its first two time derivatives; any output may be null.
///
/// # Safety
/// `handle` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn tdho_nu(
    handle: *const TdhoSolution,
    t: f64,
    nu: *mut f64,
    nu_dot: *mut f64,
    nu_ddot: *mut f64,
) -> TdhoStatus {
    guard(|| {
        let v = solution(handle)?.scale().at(t)?;
        for (p, value) in [(nu, v.nu), (nu_dot, v.nu_dot), (nu_ddot, v.nu_ddot)] {
            if !p.is_null() {
                p.write(value);
            }
        }
        Ok(())
    })
}

/// Bohm potential `V_B(x, t)`.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tdho_bohm_potential(handle: *const TdhoSolution, x: f64, t: f64, out: *mut f64) -> TdhoStatus {
    guard(|| write(out, solution(handle)?.bohm_potential(x, t)?, "out"))
}

/// Classical potential `Ω(t)² x² / 2`.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tdho_classical_potential(
    handle: *const TdhoSolution,
    x: f64,
    t: f64,
    out: *mut f64,
) -> TdhoStatus {
    guard(|| write(out, solution(handle)?.classical_potential(x, t)?, "out"))
}

/// `ψ(x, t)` split into real and imaginary parts.
///
/// # Safety
/// `handle` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tdho_psi(
    handle: *const TdhoSolution,
    x: f64,
    t: f64,
    re: *mut f64,
    im: *mut f64,
) -> TdhoStatus {
    guard(|| {
        let psi = solution(handle)?.psi(x, t)?;
        write(re, psi.re, "re")?;
        write(im, psi.im, "im")
    })
}

/// `ψ(xs[i], t)` for `n` points.
///
/// # Safety
/// `xs` must hold `n` readable values; `re` and `im` must hold `n` writable values.
#[no_mangle]
pub unsafe extern "C" fn tdho_psi_batch(
    handle: *const TdhoSolution,
    xs: *const f64,
    n: usize,
    t: f64,
    re: *mut f64,
    im: *mut f64,
) -> TdhoStatus {
    guard(|| {
        let exact = solution(handle)?;
        if n == 0 {
            return Ok(());
        }
        if xs.is_null() || re.is_null() || im.is_null() {
            return Err(null("array argument"));
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let re = std::slice::from_raw_parts_mut(re, n);
        let im = std::slice::from_raw_parts_mut(im, n);
        for ((x, r), i) in xs.iter().zip(re.iter_mut()).zip(im.iter_mut()) {
            let psi = exact.psi(*x, t)?;
            *r = psi.re;
            *i = psi.im;
        }
        Ok(())
    })
}

/// Propagates `ψ(x, 0)` with the split-step solver on `n` points and
/// compares with the exact state at `samples` uniform times in `[0, t_max]`.
/// A non-positive `half_width` sizes the domain automatically. Reports the
/// smallest fidelity and the largest norm error.
///
/// # Safety
/// `handle` must be a live handle; `min_fidelity` and `max_norm_error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tdho_tdse_check(
    handle: *const TdhoSolution,
    t_max: f64,
    dt: f64,
    n: usize,
    half_width: f64,
    samples: usize,
    min_fidelity: *mut f64,
    max_norm_error: *mut f64,
) -> TdhoStatus {
    guard(|| {
        let exact = solution(handle)?;
        if min_fidelity.is_null() || max_norm_error.is_null() {
            return Err(null("output"));
        }
        let hw = (half_width > 0.0).then_some(half_width);
        let rows = oracle_comparison(exact, t_max, dt, n, hw, samples)?;
        let fid = rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min);
        let norm = rows.iter().map(|r| r.norm_error).fold(0.0, f64::max);
        write(min_fidelity, fid, "min_fidelity")?;
        write(max_norm_error, norm, "max_norm_error")
    })
}
