//! C interface to `smoothsched`.
//!
//! Instances and schedules are opaque handles created by `ss_*_new`-style
//! functions and released with the matching `ss_*_free`. Every fallible
//! function returns an [`SsStatus`]; on failure `ss_last_error` describes the
//! problem until the next call on the same thread. Machine and job indices are
//! zero-based. Strings returned to the caller are freed with
//! [`ss_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use smoothsched::algorithms::{self, Neighborhood, Pivot};
use smoothsched::constructions::{build_by_name, Mode};
use smoothsched::{json, model, oracle, smoothing, Error, Instance, Schedule};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInstance = 3,
    Infeasible = 4,
    BudgetExceeded = 5,
    TooLarge = 6,
    Parse = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsNeighborhood {
    Jump = 0,
    LexJump = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsPivot {
    First = 0,
    MaxGain = 1,
    MinGain = 2,
    /// Uses the seed passed alongside.
    Random = 3,
}

/// Opaque instance handle.
pub struct SsInstance(Instance);

/// Opaque schedule handle.
pub struct SsSchedule(Schedule);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> SsStatus {
    match err {
        Error::InvalidInstance(_) | Error::InvalidDensity(_) | Error::NoEligibleMachine { .. } => {
            SsStatus::InvalidInstance
        }
        Error::InfeasibleSchedule(_) | Error::MachineOutOfRange { .. } | Error::NoFeasibleAssignment => {
            SsStatus::Infeasible
        }
        Error::BudgetExceeded { .. } | Error::LimitExceeded { .. } => SsStatus::BudgetExceeded,
        Error::TooLarge { .. } => SsStatus::TooLarge,
        Error::Json(_) => SsStatus::Parse,
        _ => SsStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (SsStatus, String)>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SsStatus::Panic
        }
    }
}

fn lib<T>(r: smoothsched::Result<T>) -> Result<T, (SsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SsStatus, String) {
    (SsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (SsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (SsStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn neighborhood(n: SsNeighborhood) -> Neighborhood {
    match n {
        SsNeighborhood::Jump => Neighborhood::Jump,
        SsNeighborhood::LexJump => Neighborhood::LexJump,
    }
}

fn pivot(p: SsPivot, seed: u64) -> Pivot {
    match p {
        SsPivot::First => Pivot::First,
        SsPivot::MaxGain => Pivot::MaxGain,
        SsPivot::MinGain => Pivot::MinGain,
        SsPivot::Random => Pivot::Random(seed),
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Unrestricted instance from `m` non-increasing speeds and `n` processing
/// requirements.
///
/// # Safety
/// `speeds` and `jobs` must point to `m` and `n` readable doubles; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_new(
    speeds: *const f64,
    m: usize,
    jobs: *const f64,
    n: usize,
    out: *mut *mut SsInstance,
) -> SsStatus {
    guard(|| {
        let s = slice(speeds, m, "speeds")?.to_vec();
        let p = slice(jobs, n, "jobs")?.to_vec();
        let inst = lib(Instance::new(s, p))?;
        write_out(out, Box::into_raw(Box::new(SsInstance(inst))), "out")
    })
}

/// Instance from its JSON form (one-based machine indices in allowed sets).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_from_json(text: *const c_char, out: *mut *mut SsInstance) -> SsStatus {
    guard(|| {
        let inst = lib(json::instance_from_str(str_arg(text, "text")?))?;
        write_out(out, Box::into_raw(Box::new(SsInstance(inst))), "out")
    })
}

/// Sample an instance from a smoothed spec given as JSON.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_sample(
    spec_json: *const c_char,
    seed: u64,
    out: *mut *mut SsInstance,
) -> SsStatus {
    guard(|| {
        let spec = lib(json::spec_from_str(str_arg(spec_json, "spec_json")?))?;
        let inst = lib(smoothing::sample_instance(&spec, seed))?;
        write_out(out, Box::into_raw(Box::new(SsInstance(inst))), "out")
    })
}

/// # Safety
/// `instance` must be a live handle; `out` must be writable. Free the string
/// with [`ss_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ss_instance_to_json(instance: *const SsInstance, out: *mut *mut c_char) -> SsStatus {
    guard(|| {
        let inst = handle(instance, "instance")?;
        write_out(out, into_c_string(json::instance_to_string(&inst.0)), "out")
    })
}

/// # Safety
/// `instance` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_free(instance: *mut SsInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// # Safety
/// `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_num_jobs(instance: *const SsInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.0.num_jobs())
}

/// # Safety
/// `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_instance_num_machines(instance: *const SsInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.0.num_machines())
}

/// Schedule from `n` zero-based machine indices.
///
/// # Safety
/// `assignment` must point to `n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_schedule_new(
    assignment: *const usize,
    n: usize,
    out: *mut *mut SsSchedule,
) -> SsStatus {
    guard(|| {
        let a = slice(assignment, n, "assignment")?.to_vec();
        write_out(out, Box::into_raw(Box::new(SsSchedule(Schedule::new(a)))), "out")
    })
}

/// Copy the assignment into `buf`, which must hold `len` entries, the number
/// of jobs.
///
/// # Safety
/// `schedule` must be a live handle; `buf` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn ss_schedule_assignment(schedule: *const SsSchedule, buf: *mut usize, len: usize) -> SsStatus {
    guard(|| {
        let s = handle(schedule, "schedule")?;
        if len != s.0.len() {
            return Err((
                SsStatus::InvalidArgument,
                format!("buffer holds {len} entries, schedule has {}", s.0.len()),
            ));
        }
        if len > 0 && buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(s.0.assignment().as_ptr(), buf, len);
        Ok(())
    })
}

/// # Safety
/// `schedule` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_schedule_free(schedule: *mut SsSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_makespan(
    instance: *const SsInstance,
    schedule: *const SsSchedule,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        let (i, s) = (handle(instance, "instance")?, handle(schedule, "schedule")?);
        write_out(out, lib(model::makespan(&i.0, &s.0))?, "out")
    })
}

/// List schedule for a job order of length `n`; a null `order` means the
/// identity order.
///
/// # Safety
/// `instance` must be live; `order` null or pointing to `n` values; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ss_list_schedule(
    instance: *const SsInstance,
    order: *const usize,
    n: usize,
    out: *mut *mut SsSchedule,
) -> SsStatus {
    guard(|| {
        let inst = handle(instance, "instance")?;
        let order = if order.is_null() {
            (0..inst.0.num_jobs()).collect()
        } else {
            slice(order, n, "order")?.to_vec()
        };
        let s = lib(algorithms::list_schedule(&inst.0, &order, None))?;
        write_out(out, Box::into_raw(Box::new(SsSchedule(s))), "out")
    })
}

/// # Safety
/// `instance` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_lpt_schedule(instance: *const SsInstance, out: *mut *mut SsSchedule) -> SsStatus {
    guard(|| {
        let inst = handle(instance, "instance")?;
        let s = lib(algorithms::lpt_schedule(&inst.0, None))?;
        write_out(out, Box::into_raw(Box::new(SsSchedule(s))), "out")
    })
}

/// Local search from `start` until no improving move remains. `steps` may be
/// null.
///
/// # Safety
/// Handles must be live; `out` writable; `steps` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ss_local_search(
    instance: *const SsInstance,
    start: *const SsSchedule,
    nb: SsNeighborhood,
    rule: SsPivot,
    seed: u64,
    eps: f64,
    out: *mut *mut SsSchedule,
    steps: *mut usize,
) -> SsStatus {
    guard(|| {
        let (i, s) = (handle(instance, "instance")?, handle(start, "start")?);
        let run = lib(algorithms::local_search(&i.0, &s.0, neighborhood(nb), pivot(rule, seed), eps))?;
        if !steps.is_null() {
            steps.write(run.steps);
        }
        write_out(out, Box::into_raw(Box::new(SsSchedule(run.schedule))), "out")
    })
}

/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_is_locally_optimal(
    instance: *const SsInstance,
    schedule: *const SsSchedule,
    nb: SsNeighborhood,
    eps: f64,
    out: *mut bool,
) -> SsStatus {
    guard(|| {
        let (i, s) = (handle(instance, "instance")?, handle(schedule, "schedule")?);
        let ok = lib(algorithms::is_locally_optimal(&i.0, &s.0, neighborhood(nb), eps))?;
        write_out(out, ok, "out")
    })
}

/// Exact optimum. `schedule` may be null when only the value is wanted.
///
/// # Safety
/// `instance` must be live; `makespan` writable; `schedule` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ss_optimal_makespan(
    instance: *const SsInstance,
    budget: u64,
    makespan: *mut f64,
    schedule: *mut *mut SsSchedule,
) -> SsStatus {
    guard(|| {
        let inst = handle(instance, "instance")?;
        let opt = lib(oracle::optimal_makespan_exact(&inst.0, budget))?;
        write_out(makespan, opt.makespan, "makespan")?;
        if !schedule.is_null() {
            schedule.write(Box::into_raw(Box::new(SsSchedule(opt.schedule))));
        }
        Ok(())
    })
}

/// Ratio of the worst local optimum to the optimum, by enumeration.
///
/// # Safety
/// `instance` must be live; `ratio` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_worst_local_optimum(
    instance: *const SsInstance,
    nb: SsNeighborhood,
    budget: u64,
    eps: f64,
    ratio: *mut f64,
) -> SsStatus {
    guard(|| {
        let inst = handle(instance, "instance")?;
        let w = lib(oracle::worst_local_optimum_exact(&inst.0, neighborhood(nb), budget, eps))?;
        write_out(ratio, w.ratio, "ratio")
    })
}

/// Sample a lower-bound construction by name and write its metadata, sample
/// summary and checks as JSON. Free the string with [`ss_string_free`].
///
/// # Safety
/// `name` and `params_json` must be NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_construct(
    name: *const c_char,
    params_json: *const c_char,
    lenient: bool,
    seed: u64,
    eps: f64,
    out: *mut *mut c_char,
) -> SsStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let params: serde_json::Value = lib(serde_json::from_str(str_arg(params_json, "params_json")?).map_err(Error::from))?;
        let mode = if lenient { Mode::Lenient } else { Mode::Strict };
        let c = lib(build_by_name(name, &params, mode))?;
        let sample = lib(c.sample(seed))?;
        let checks = c.validate(&sample, eps);
        let meta = serde_json::json!({ "construction": c.meta(), "sample": sample, "checks": checks });
        write_out(out, into_c_string(json::to_pretty(&meta)), "out")
    })
}
