//! C ABI over `rrp-core`: seeded Gaussian noise, the annealing schedule,
//! dense networks (forward pass and Jacobian), and output variance.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns an [`RrpStatus`]; on failure
//! [`rrp_last_error_message`] describes the most recent error on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rrp_core::diagnostics::output_variance;
use rrp_core::noise::anneal_stored_noise_with;
use rrp_core::{AnnealMode, DenseNet, NoiseSchedule, RrpError, SeededRng};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Protocol = 4,
    Io = 5,
    Parse = 6,
    Validation = 7,
    Panic = 8,
}

/// Seeded random stream.
pub struct RrpRng(SeededRng);

/// Linear noise schedule.
pub struct RrpSchedule(NoiseSchedule);

/// Dense tanh network with a linear output layer.
pub struct RrpNet(DenseNet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RrpStatus, msg: impl Into<String>) -> RrpStatus {
    set_error(msg.into());
    status
}

fn from_core(e: RrpError) -> RrpStatus {
    let status = match e {
        RrpError::InvalidArgument(_) => RrpStatus::InvalidArgument,
        RrpError::Protocol(_) => RrpStatus::Protocol,
        RrpError::Validation(_) => RrpStatus::Validation,
        RrpError::Io { .. } => RrpStatus::Io,
        RrpError::Parse(_) => RrpStatus::Parse,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), RrpStatus>) -> RrpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RrpStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(RrpStatus::Panic, "internal panic"),
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], RrpStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(RrpStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], RrpStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(RrpStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, RrpStatus> {
    p.as_ref()
        .ok_or_else(|| fail(RrpStatus::NullPointer, format!("{what} is null")))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, RrpStatus> {
    p.as_mut()
        .ok_or_else(|| fail(RrpStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), RrpStatus> {
    if out.is_null() {
        return Err(fail(RrpStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rrp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

// ---- rng ----

/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn rrp_rng_new(seed: u64, out: *mut *mut RrpRng) -> RrpStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(RrpRng(SeededRng::new(seed)))), "out"))
}

/// # Safety
/// `rng` must come from [`rrp_rng_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rrp_rng_free(rng: *mut RrpRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Draws from `N(0, sigma²)`; `sigma = 0` yields 0 without advancing the stream.
///
/// # Safety
/// `rng` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rrp_sample_gaussian(rng: *mut RrpRng, sigma: f64, out: *mut f64) -> RrpStatus {
    guard(|| {
        let rng = handle_mut(rng, "rng")?;
        let v = rrp_core::sample_gaussian(&mut rng.0, sigma).map_err(from_core)?;
        write_out(out, v, "out")
    })
}

// ---- schedule ----

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rrp_schedule_new(
    sigma_max: f64,
    sigma_min: f64,
    total_steps: u64,
    decay_fraction: f64,
    out: *mut *mut RrpSchedule,
) -> RrpStatus {
    guard(|| {
        let s = NoiseSchedule::new(sigma_max, sigma_min, total_steps, decay_fraction).map_err(from_core)?;
        write_out(out, Box::into_raw(Box::new(RrpSchedule(s))), "out")
    })
}

/// # Safety
/// `schedule` must come from [`rrp_schedule_new`]. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rrp_schedule_free(schedule: *mut RrpSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// `max{0, σ_max − (σ_max − σ_min)·t/T}`.
///
/// # Safety
/// `schedule` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rrp_schedule_sigma_at(schedule: *const RrpSchedule, t: u64, out: *mut f64) -> RrpStatus {
    guard(|| write_out(out, handle(schedule, "schedule")?.0.sigma_at(t), "out"))
}

/// Noise scale for rewards perturbed at interaction time.
///
/// # Safety
/// `schedule` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rrp_schedule_interaction_sigma(
    schedule: *const RrpSchedule,
    t: u64,
    out: *mut f64,
) -> RrpStatus {
    guard(|| write_out(out, handle(schedule, "schedule")?.0.interaction_sigma(t), "out"))
}

/// Anneals noise drawn at the initial scale. `literal` nonzero clips the
/// result at zero; otherwise the sign is kept.
///
/// # Safety
/// `schedule` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rrp_anneal_stored_noise(
    schedule: *const RrpSchedule,
    epsilon: f64,
    t: u64,
    literal: bool,
    out: *mut f64,
) -> RrpStatus {
    guard(|| {
        let mode = if literal {
            AnnealMode::Literal
        } else {
            AnnealMode::SignPreserving
        };
        let v = anneal_stored_noise_with(mode, epsilon, t, &handle(schedule, "schedule")?.0);
        write_out(out, v, "out")
    })
}

#[no_mangle]
pub extern "C" fn rrp_perturb_reward(reward: f64, epsilon: f64) -> f64 {
    rrp_core::perturb_reward(reward, epsilon)
}

// ---- networks ----

/// Randomly initialised network with `n_layers` widths.
///
/// # Safety
/// `sizes` must point to `n_layers` values, `rng` must be live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rrp_net_new(
    sizes: *const usize,
    n_layers: usize,
    rng: *mut RrpRng,
    out: *mut *mut RrpNet,
) -> RrpStatus {
    guard(|| {
        let sizes = slice(sizes, n_layers, "sizes")?;
        let rng = handle_mut(rng, "rng")?;
        let net = DenseNet::new(sizes, &mut rng.0).map_err(from_core)?;
        write_out(out, Box::into_raw(Box::new(RrpNet(net))), "out")
    })
}

/// Network from a flat parameter vector (per layer: row-major weights, then biases).
///
/// # Safety
/// `sizes` and `params` must point to `n_layers` and `n_params` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rrp_net_from_params(
    sizes: *const usize,
    n_layers: usize,
    params: *const f64,
    n_params: usize,
    out: *mut *mut RrpNet,
) -> RrpStatus {
    guard(|| {
        let sizes = slice(sizes, n_layers, "sizes")?;
        let params = slice(params, n_params, "params")?;
        let net = DenseNet::from_params(sizes, params.to_vec()).map_err(from_core)?;
        write_out(out, Box::into_raw(Box::new(RrpNet(net))), "out")
    })
}

/// # Safety
/// `net` must come from an `rrp_net_*` constructor. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rrp_net_free(net: *mut RrpNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Input width, or 0 for a null handle.
///
/// # Safety
/// `net` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn rrp_net_input_dim(net: *const RrpNet) -> usize {
    net.as_ref().map_or(0, |n| n.0.input_dim())
}

/// # Safety
/// `net` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn rrp_net_output_dim(net: *const RrpNet) -> usize {
    net.as_ref().map_or(0, |n| n.0.output_dim())
}

/// # Safety
/// `net` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn rrp_net_num_params(net: *const RrpNet) -> usize {
    net.as_ref().map_or(0, |n| n.0.num_params())
}

/// Copies the flat parameters into `out[0..len]`; `len` must equal the parameter count.
///
/// # Safety
/// `net` must be live and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn rrp_net_params(net: *const RrpNet, out: *mut f64, len: usize) -> RrpStatus {
    guard(|| {
        let net = &handle(net, "net")?.0;
        if len != net.num_params() {
            return Err(fail(
                RrpStatus::BufferTooSmall,
                format!("buffer holds {len} values, network has {}", net.num_params()),
            ));
        }
        slice_mut(out, len, "out")?.copy_from_slice(net.params());
        Ok(())
    })
}

/// Forward pass of one input.
///
/// # Safety
/// `x` must hold `x_len` values and `out` must hold `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn rrp_net_forward(
    net: *const RrpNet,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> RrpStatus {
    guard(|| {
        let net = &handle(net, "net")?.0;
        let y = net.forward(slice(x, x_len, "x")?).map_err(from_core)?;
        if out_len != y.len() {
            return Err(fail(
                RrpStatus::BufferTooSmall,
                format!("output buffer holds {out_len} values, network emits {}", y.len()),
            ));
        }
        slice_mut(out, out_len, "out")?.copy_from_slice(&y);
        Ok(())
    })
}

/// Jacobian of the outputs with respect to the parameters at `x`, written
/// row-major as `output_dim × num_params`.
///
/// # Safety
/// `x` must hold `x_len` values and `out` must hold `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn rrp_net_jacobian(
    net: *const RrpNet,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> RrpStatus {
    guard(|| {
        let net = &handle(net, "net")?.0;
        let need = net.output_dim() * net.num_params();
        if out_len != need {
            return Err(fail(
                RrpStatus::BufferTooSmall,
                format!("jacobian buffer holds {out_len} values, needs {need}"),
            ));
        }
        let jac = net.jacobian(slice(x, x_len, "x")?).map_err(from_core)?;
        let out = slice_mut(out, out_len, "out")?;
        for k in 0..jac.rows() {
            out[k * jac.cols()..(k + 1) * jac.cols()].copy_from_slice(jac.row(k));
        }
        Ok(())
    })
}

/// Trace of the population covariance of `n` outputs of width `m`, stored row-major.
///
/// # Safety
/// `outputs` must hold `n·m` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rrp_output_variance(outputs: *const f64, n: usize, m: usize, out: *mut f64) -> RrpStatus {
    guard(|| {
        let len = n
            .checked_mul(m)
            .ok_or_else(|| fail(RrpStatus::InvalidArgument, "n·m overflows"))?;
        let flat = slice(outputs, len, "outputs")?;
        if m == 0 {
            return Err(fail(RrpStatus::InvalidArgument, "output width must be positive"));
        }
        let rows: Vec<Vec<f64>> = flat.chunks(m).map(<[f64]>::to_vec).collect();
        let report = output_variance(&rows).map_err(from_core)?;
        write_out(out, report.trace, "out")
    })
}
