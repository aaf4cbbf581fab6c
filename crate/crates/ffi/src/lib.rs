//! C ABI for `mminf`.
//!
//! Every function returns an [`MminfStatus`]; on anything but `MMINF_OK` a
//! message is available from [`mminf_last_error_message`] on the same thread.
//! Models are opaque handles created by [`mminf_model_from_str`] and released
//! with [`mminf_model_free`]. Output arrays are caller-owned.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mminf::cli::{run_checks, ModelFile, Tolerances};
use mminf::moments::{MomentTable, Weighting};
use mminf::sim::{estimate_factorial_moments, SimulationConfig};
use mminf::{chain_statics, ChainStatics, EnvironmentModel, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MminfStatus {
    Ok = 0,
    /// A validation check exceeded its tolerance.
    CheckFailed = 1,
    /// Unparseable or invalid model, or bad arguments.
    InvalidInput = 2,
    /// The computation broke down numerically.
    Numeric = 3,
    NullPointer = 4,
    /// The output array is shorter than required.
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MminfFormat {
    Toml = 0,
    Json = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MminfWeighting {
    Embedded = 0,
    Occupancy = 1,
}

impl From<MminfWeighting> for Weighting {
    fn from(w: MminfWeighting) -> Self {
        match w {
            MminfWeighting::Embedded => Weighting::Embedded,
            MminfWeighting::Occupancy => Weighting::Occupancy,
        }
    }
}

/// Simulation settings; fill with [`mminf_sim_config_default`] and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MminfSimConfig {
    pub warmup: f64,
    /// End of each replication, warmup included.
    pub horizon: f64,
    pub sampling_interval: f64,
    pub replications: u32,
    pub seed: u64,
    /// Highest factorial moment estimated, 1 to 6.
    pub max_order: u32,
}

/// Opaque model handle.
pub struct MminfModel {
    model: EnvironmentModel,
    statics: ChainStatics,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(MminfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_input_error() {
            MminfStatus::InvalidInput
        } else {
            MminfStatus::Numeric
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MminfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MminfStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {what}"));
            MminfStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MminfStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn model_ref<'a>(model: *const MminfModel) -> Result<&'a MminfModel, Failure> {
    model.as_ref().ok_or_else(|| null("model"))
}

unsafe fn output<'a>(out: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], Failure> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < needed {
        return Err(Failure(
            MminfStatus::BufferTooSmall,
            format!("output holds {len} values, {needed} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(out, needed))
}

/// Parses and validates a model document. On success `*out` owns a new
/// handle; on failure it is set to NULL.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mminf_model_from_str(
    text: *const c_char,
    format: MminfFormat,
    out: *mut *mut MminfModel,
) -> MminfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|e| {
            Failure(
                MminfStatus::InvalidInput,
                format!("model text is not UTF-8: {e}"),
            )
        })?;
        let file = match format {
            MminfFormat::Toml => ModelFile::from_toml_str(text)?,
            MminfFormat::Json => ModelFile::from_json_str(text)?,
        };
        let model = file.to_model()?;
        let statics = chain_statics(&model)?;
        *out = Box::into_raw(Box::new(MminfModel { model, statics }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `model` must come from [`mminf_model_from_str`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mminf_model_free(model: *mut MminfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mminf_model_state_count(
    model: *const MminfModel,
    out: *mut usize,
) -> MminfStatus {
    guard(|| {
        let m = model_ref(model)?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.model.state_count();
        Ok(())
    })
}

unsafe fn write_moments(
    model: *const MminfModel,
    order: u32,
    weighting: MminfWeighting,
    out: *mut f64,
    len: usize,
    raw: bool,
) -> MminfStatus {
    guard(|| {
        let m = model_ref(model)?;
        let order = order as usize;
        let dest = output(out, len, order + 1)?;
        let table = MomentTable::compute(&m.model, &m.statics, order)?;
        let moments = table.weighted(weighting.into());
        dest.copy_from_slice(if raw {
            &moments.raw
        } else {
            &moments.factorial
        });
        Ok(())
    })
}

/// Writes `E[N(N-1)...(N-n+1)]` for `n = 0..=order` into `out`, which must
/// hold at least `order + 1` values.
///
/// # Safety
/// `model` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mminf_factorial_moments(
    model: *const MminfModel,
    order: u32,
    weighting: MminfWeighting,
    out: *mut f64,
    len: usize,
) -> MminfStatus {
    write_moments(model, order, weighting, out, len, false)
}

/// Writes `E[N^n]` for `n = 0..=order`; see [`mminf_factorial_moments`].
///
/// # Safety
/// `model` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mminf_raw_moments(
    model: *const MminfModel,
    order: u32,
    weighting: MminfWeighting,
    out: *mut f64,
    len: usize,
) -> MminfStatus {
    write_moments(model, order, weighting, out, len, true)
}

/// Runs the `validate` check battery with default tolerances. Returns
/// `MMINF_CHECK_FAILED` if any required check fails; `*failed` (if not
/// NULL) receives the number of failing checks.
///
/// # Safety
/// `model` must be a live handle; `failed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn mminf_validate(
    model: *const MminfModel,
    order: u32,
    failed: *mut u32,
) -> MminfStatus {
    guard(|| {
        let m = model_ref(model)?;
        let table = MomentTable::compute(&m.model, &m.statics, order as usize)?;
        let checks = run_checks(&m.model, &m.statics, &table, &Tolerances::default())?;
        let bad: Vec<&str> = checks
            .iter()
            .filter(|c| c.fails_run())
            .map(|c| c.name.as_str())
            .collect();
        if let Some(f) = failed.as_mut() {
            *f = bad.len() as u32;
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Failure(
                MminfStatus::CheckFailed,
                format!("failed checks: {}", bad.join(", ")),
            ))
        }
    })
}

/// Fills `out` with defaults scaled to the model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mminf_sim_config_default(
    model: *const MminfModel,
    out: *mut MminfSimConfig,
) -> MminfStatus {
    guard(|| {
        let m = model_ref(model)?;
        let c = SimulationConfig::for_model(&m.model, &m.statics);
        *out.as_mut().ok_or_else(|| null("out"))? = MminfSimConfig {
            warmup: c.warmup,
            horizon: c.horizon,
            sampling_interval: c.sampling_interval,
            replications: c.replications as u32,
            seed: c.seed,
            max_order: c.max_order as u32,
        };
        Ok(())
    })
}

/// Simulates and writes factorial-moment estimates for orders
/// `1..=max_order` into `estimates` and their standard errors into
/// `std_errors`; both must hold `max_order` values.
///
/// # Safety
/// `model` and `config` must be valid; both output arrays valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mminf_simulate(
    model: *const MminfModel,
    config: *const MminfSimConfig,
    estimates: *mut f64,
    std_errors: *mut f64,
    len: usize,
) -> MminfStatus {
    guard(|| {
        let m = model_ref(model)?;
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let config = SimulationConfig {
            warmup: c.warmup,
            horizon: c.horizon,
            sampling_interval: c.sampling_interval,
            replications: c.replications as usize,
            seed: c.seed,
            max_order: c.max_order as usize,
        };
        config.check()?;
        let est = output(estimates, len, config.max_order)?;
        let se = output(std_errors, len, config.max_order)?;
        let result = estimate_factorial_moments(&m.model, &config)?;
        for (i, o) in result.orders.iter().enumerate() {
            est[i] = o.estimate;
            se[i] = o.std_error;
        }
        Ok(())
    })
}

/// Message for the last failing call on this thread, or NULL. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn mminf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mminf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
