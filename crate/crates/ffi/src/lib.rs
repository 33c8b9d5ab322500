//! C ABI over `quatfill`.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `qf_*_new`/`qf_*_load` function and released with the matching
//! `qf_*_free`. Fallible functions return a [`QfStatus`]; on failure the
//! message is available from [`qf_last_error`] on the same thread.
//!
//! Tensor data is exchanged as four component planes (`w`, `x`, `y`, `z`) of
//! `f64` in first-index-fastest order.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use quatfill::completion::{SamplingMask, Solver, SolverConfig, SolverReport, TriggerMode};
use quatfill::tensor::MAX_ORDER;
use quatfill::{Error, QuaternionTensor};

/// Result codes returned by fallible functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Decomposition = 4,
    Io = 5,
    Format = 6,
    Panic = 7,
}

/// Solver selection for [`qf_complete`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfMode {
    /// Single nuclear-norm term on mode 0 of an order-2 tensor.
    Matrix = 0,
    /// One nuclear-norm term per mode.
    Tensor = 1,
}

pub struct QfTensor(QuaternionTensor);
pub struct QfMask(SamplingMask);
pub struct QfConfig(SolverConfig);
pub struct QfReport(SolverReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_for(e: &Error) -> QfStatus {
    match e {
        Error::ShapeMismatch(_) => QfStatus::ShapeMismatch,
        Error::InvalidMode { .. } | Error::InvalidArgument(_) => QfStatus::InvalidArgument,
        Error::Decomposition(_) => QfStatus::Decomposition,
        Error::Io(_) => QfStatus::Io,
        Error::UnsupportedFormat(_)
        | Error::UnsupportedDepth(_)
        | Error::Malformed(_)
        | Error::Codec(_) => QfStatus::Format,
    }
}

struct Fail(QfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_for(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QfStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(QfStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status plus last-error message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut *mut T, what: &str) -> Result<&'a mut *mut T, Fail> {
    let out = p.as_mut().ok_or_else(|| null(what))?;
    *out = ptr::null_mut();
    Ok(out)
}

unsafe fn read_shape<'a>(order: usize, shape: *const usize) -> Result<&'a [usize], Fail> {
    if !(2..=MAX_ORDER).contains(&order) {
        return Err(invalid(format!(
            "order must be between 2 and {MAX_ORDER}, got {order}"
        )));
    }
    if shape.is_null() {
        return Err(null("shape"));
    }
    Ok(std::slice::from_raw_parts(shape, order))
}

unsafe fn read_path(path: *const c_char) -> Result<PathBuf, Fail> {
    if path.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(path)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

unsafe fn read_f64s<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// All-zero tensor of the given shape.
#[no_mangle]
pub unsafe extern "C" fn qf_tensor_zeros(
    order: usize,
    shape: *const usize,
    out: *mut *mut QfTensor,
) -> QfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let shape = read_shape(order, shape)?;
        *out = boxed(QfTensor(QuaternionTensor::zeros(shape)?));
        Ok(())
    })
}

/// Tensor copied from four planes of `prod(shape)` values each. A null `w`
/// means a zero real part (pure data); `x`, `y`, `z` are required.
#[no_mangle]
pub unsafe extern "C" fn qf_tensor_from_planes(
    order: usize,
    shape: *const usize,
    w: *const f64,
    x: *const f64,
    y: *const f64,
    z: *const f64,
    out: *mut *mut QfTensor,
) -> QfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let shape = read_shape(order, shape)?;
        let n = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| invalid("shape overflows"))?;
        let w = if w.is_null() {
            vec![0.0; n]
        } else {
            read_f64s(w, n, "w")?.to_vec()
        };
        let planes = [
            w,
            read_f64s(x, n, "x")?.to_vec(),
            read_f64s(y, n, "y")?.to_vec(),
            read_f64s(z, n, "z")?.to_vec(),
        ];
        *out = boxed(QfTensor(QuaternionTensor::from_planes(shape, planes)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qf_tensor_free(t: *mut QfTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Tensor order, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn qf_tensor_order(t: *const QfTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.order())
}

/// Number of quaternion entries, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn qf_tensor_len(t: *const QfTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Writes the shape into `shape`, which must hold `cap >= order` values.
#[no_mangle]
pub unsafe extern "C" fn qf_tensor_shape(
    t: *const QfTensor,
    shape: *mut usize,
    cap: usize,
) -> QfStatus {
    guard(|| {
        let t = deref(t, "tensor")?;
        if shape.is_null() {
            return Err(null("shape"));
        }
        if cap < t.0.order() {
            return Err(invalid(format!(
                "shape buffer holds {cap}, need {}",
                t.0.order()
            )));
        }
        std::slice::from_raw_parts_mut(shape, t.0.order()).copy_from_slice(t.0.shape());
        Ok(())
    })
}

/// Copies the planes out; each non-null buffer must hold `len` values and
/// `len` must equal the entry count. Null buffers are skipped.
#[no_mangle]
pub unsafe extern "C" fn qf_tensor_copy_planes(
    t: *const QfTensor,
    w: *mut f64,
    x: *mut f64,
    y: *mut f64,
    z: *mut f64,
    len: usize,
) -> QfStatus {
    guard(|| {
        let t = deref(t, "tensor")?;
        if len != t.0.len() {
            return Err(Fail(
                QfStatus::ShapeMismatch,
                format!("buffers hold {len} values, tensor has {}", t.0.len()),
            ));
        }
        for (c, dst) in [w, x, y, z].into_iter().enumerate() {
            if !dst.is_null() {
                std::slice::from_raw_parts_mut(dst, len).copy_from_slice(t.0.plane(c));
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qf_tensor_load(path: *const c_char, out: *mut *mut QfTensor) -> QfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let f = File::open(read_path(path)?).map_err(Error::from)?;
        *out = boxed(QfTensor(QuaternionTensor::read_qt1(BufReader::new(f))?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qf_tensor_save(t: *const QfTensor, path: *const c_char) -> QfStatus {
    guard(|| {
        let t = deref(t, "tensor")?;
        let mut w = BufWriter::new(File::create(read_path(path)?).map_err(Error::from)?);
        t.0.write_qt1(&mut w)?;
        w.flush().map_err(Error::from)?;
        Ok(())
    })
}

/// `‖a - b‖_F / ‖b‖_F`.
#[no_mangle]
pub unsafe extern "C" fn qf_tensor_relative_error(
    a: *const QfTensor,
    b: *const QfTensor,
    out: *mut f64,
) -> QfStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = a.0.sub(&b.0)?.frobenius() / b.0.frobenius();
        Ok(())
    })
}

/// Uniform random mask keeping `round(sr * prod(shape))` entries.
#[no_mangle]
pub unsafe extern "C" fn qf_mask_generate(
    order: usize,
    shape: *const usize,
    sr: f64,
    seed: u64,
    out: *mut *mut QfMask,
) -> QfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let shape = read_shape(order, shape)?;
        *out = boxed(QfMask(SamplingMask::generate(shape, sr, seed)?));
        Ok(())
    })
}

/// Mask from one byte per entry (nonzero means observed) in flat order.
#[no_mangle]
pub unsafe extern "C" fn qf_mask_from_flags(
    order: usize,
    shape: *const usize,
    flags: *const u8,
    len: usize,
    out: *mut *mut QfMask,
) -> QfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let shape = read_shape(order, shape)?;
        if flags.is_null() {
            return Err(null("flags"));
        }
        let flags = std::slice::from_raw_parts(flags, len)
            .iter()
            .map(|&b| b != 0)
            .collect();
        *out = boxed(QfMask(SamplingMask::from_flags(shape, flags)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qf_mask_free(m: *mut QfMask) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of observed entries, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn qf_mask_count(m: *const QfMask) -> usize {
    m.as_ref().map_or(0, |m| m.0.count())
}

#[no_mangle]
pub unsafe extern "C" fn qf_mask_load(path: *const c_char, out: *mut *mut QfMask) -> QfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let f = File::open(read_path(path)?).map_err(Error::from)?;
        *out = boxed(QfMask(SamplingMask::read_qmsk1(BufReader::new(f))?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qf_mask_save(m: *const QfMask, path: *const c_char) -> QfStatus {
    guard(|| {
        let m = deref(m, "mask")?;
        let mut w = BufWriter::new(File::create(read_path(path)?).map_err(Error::from)?);
        m.0.write_qmsk1(&mut w)?;
        w.flush().map_err(Error::from)?;
        Ok(())
    })
}

/// Zeroes the unobserved entries of `t` into a new tensor.
#[no_mangle]
pub unsafe extern "C" fn qf_mask_apply(
    m: *const QfMask,
    t: *const QfTensor,
    out: *mut *mut QfTensor,
) -> QfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (m, t) = (deref(m, "mask")?, deref(t, "tensor")?);
        *out = boxed(QfTensor(m.0.apply(&t.0)?));
        Ok(())
    })
}

/// Default configuration for `mode`; tensor defaults exist for order 3 only.
#[no_mangle]
pub unsafe extern "C" fn qf_config_default(
    mode: QfMode,
    order: usize,
    out: *mut *mut QfConfig,
) -> QfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = match mode {
            QfMode::Matrix => SolverConfig::matrix_default(),
            QfMode::Tensor => SolverConfig::default_for_order(order)?,
        };
        *out = boxed(QfConfig(cfg));
        Ok(())
    })
}

/// Configuration with explicit per-mode weights of length `n`; other
/// settings take their defaults.
#[no_mangle]
pub unsafe extern "C" fn qf_config_new(
    n: usize,
    alpha: *const f64,
    beta0: *const f64,
    beta_max: *const f64,
    out: *mut *mut QfConfig,
) -> QfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if n == 0 || n > MAX_ORDER {
            return Err(invalid(format!(
                "mode count must be between 1 and {MAX_ORDER}"
            )));
        }
        let cfg = SolverConfig {
            alpha: read_f64s(alpha, n, "alpha")?.to_vec(),
            beta0: read_f64s(beta0, n, "beta0")?.to_vec(),
            beta_max: read_f64s(beta_max, n, "beta_max")?.to_vec(),
            ..SolverConfig::matrix_default()
        };
        cfg.validate(n)?;
        *out = boxed(QfConfig(cfg));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qf_config_free(c: *mut QfConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Stopping rule and penalty schedule. `relative` nonzero measures the
/// iterate change against the norm of the observed data.
#[no_mangle]
pub unsafe extern "C" fn qf_config_set_schedule(
    c: *mut QfConfig,
    eta0: f64,
    eta_trigger: f64,
    epsilon: f64,
    max_iter: usize,
    relative: i32,
) -> QfStatus {
    guard(|| {
        let c = c.as_mut().ok_or_else(|| null("config"))?;
        let next = SolverConfig {
            eta0,
            eta_trigger,
            epsilon,
            max_iter,
            trigger_mode: if relative != 0 {
                TriggerMode::Relative
            } else {
                TriggerMode::Absolute
            },
            ..c.0.clone()
        };
        next.validate(next.modes())?;
        c.0 = next;
        Ok(())
    })
}

/// Completes `y` (unobserved entries are ignored) on `mask`. `threads` of 0
/// uses the global pool. Either output pointer may be null if unwanted.
#[no_mangle]
pub unsafe extern "C" fn qf_complete(
    y: *const QfTensor,
    mask: *const QfMask,
    cfg: *const QfConfig,
    mode: QfMode,
    threads: usize,
    out: *mut *mut QfTensor,
    report: *mut *mut QfReport,
) -> QfStatus {
    guard(|| {
        let (y, mask, cfg) = (deref(y, "y")?, deref(mask, "mask")?, deref(cfg, "config")?);
        if out.is_null() && report.is_null() {
            return Err(null("out and report"));
        }
        let mut solver = Solver::new(cfg.0.clone());
        if threads > 0 {
            solver = solver.threads(threads);
        }
        let (t, rep) = match mode {
            QfMode::Matrix => {
                if y.0.order() != 2 {
                    return Err(invalid("matrix mode needs an order-2 tensor"));
                }
                let (m, rep) = solver.complete_matrix(&y.0.unfold(0)?, &mask.0)?;
                (QuaternionTensor::from_matrix(&m), rep)
            }
            QfMode::Tensor => solver.complete_tensor(&y.0, &mask.0)?,
        };
        if let Some(o) = out.as_mut() {
            *o = boxed(QfTensor(t));
        }
        if let Some(r) = report.as_mut() {
            *r = boxed(QfReport(rep));
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qf_report_free(r: *mut QfReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub unsafe extern "C" fn qf_report_iterations(r: *const QfReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.iterations)
}

/// 1 if the stopping rule was met before the iteration cap, else 0.
#[no_mangle]
pub unsafe extern "C" fn qf_report_converged(r: *const QfReport) -> i32 {
    r.as_ref().map_or(0, |r| i32::from(r.0.converged))
}

#[no_mangle]
pub unsafe extern "C" fn qf_report_wall_time(r: *const QfReport) -> f64 {
    r.as_ref().map_or(0.0, |r| r.0.wall_time)
}

/// Copies up to `cap` per-iteration changes into `buf` and returns the full
/// trace length; pass a null `buf` to query the length.
#[no_mangle]
pub unsafe extern "C" fn qf_report_deltas(r: *const QfReport, buf: *mut f64, cap: usize) -> usize {
    let Some(r) = r.as_ref() else { return 0 };
    let d = &r.0.delta_history;
    if !buf.is_null() {
        let n = cap.min(d.len());
        std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&d[..n]);
    }
    d.len()
}
