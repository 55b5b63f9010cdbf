//! C ABI for the hydroquad simulator.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `*_free`. Every fallible call returns an [`HqStatus`]; on a
//! non-zero status, [`hq_last_error_message`] describes the failure for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hydroquad::config::{load_config, parse_config, Format, ScenarioConfig};
use hydroquad::dynamics::{state_derivative_2d_rotors, state_derivative_3d, RotorCommand, State2D, State3D};
use hydroquad::error::Error;
use hydroquad::output::emit_trajectory;
use hydroquad::sim::{run_mission, TrajectoryRecord};
use hydroquad::vehicle::{density_at, rotor_thrust, ROTORS};

/// Number of rotors; length of every per-rotor array.
pub const HQ_ROTORS: usize = 8;
pub const HQ_STATE_2D: usize = 6;
pub const HQ_STATE_3D: usize = 12;

const _: () = assert!(HQ_ROTORS == ROTORS);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    IntegrationError = 4,
    StageTimeout = 5,
    IoError = 6,
    IndexOutOfRange = 7,
    Panic = 8,
}

/// Scenario configuration.
pub struct HqConfig {
    inner: ScenarioConfig,
}

/// Logged mission trajectory.
pub struct HqTrajectory {
    inner: TrajectoryRecord,
}

/// One trajectory row. `stage` is 0 for hover, 1-5 for mission stages and
/// 6 once the mission is complete.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HqSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub theta_deg: f64,
    pub theta_rate: f64,
    pub omega: [f64; HQ_ROTORS],
    pub rho: [f64; HQ_ROTORS],
    pub stage: u8,
    pub cut_mask: u8,
    pub shortfall: bool,
    pub collective: f64,
    pub thrust_demand: f64,
    pub thrust_delivered: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HqStatus {
    match e {
        Error::ConfigParse(_) | Error::Validation(_) | Error::Geometry(_) | Error::IntegratorConfig(_) => {
            HqStatus::ConfigError
        }
        Error::StageTimeout { .. } => HqStatus::StageTimeout,
        Error::Io(_) | Error::Format(_) => HqStatus::IoError,
        Error::NonFiniteDerivative { .. }
        | Error::StepUnderflow { .. }
        | Error::MaxSteps { .. }
        | Error::NoSignChange { .. }
        | Error::AllRotorsCut => HqStatus::IntegrationError,
        _ => HqStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> HqStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> HqStatus {
    set_error(format!("{what} is null"));
    HqStatus::NullPointer
}

fn guard(f: impl FnOnce() -> HqStatus) -> HqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            HqStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, HqStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        HqStatus::InvalidArgument
    })
}

fn boxed_config(res: hydroquad::Result<ScenarioConfig>, out: *mut *mut HqConfig) -> HqStatus {
    match res {
        Ok(cfg) => {
            unsafe { *out = Box::into_raw(Box::new(HqConfig { inner: cfg })) };
            HqStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default scenario. Never null.
#[no_mangle]
pub extern "C" fn hq_config_default() -> *mut HqConfig {
    Box::into_raw(Box::new(HqConfig { inner: ScenarioConfig::default() }))
}

/// Parse a TOML scenario from a NUL-terminated string.
///
/// # Safety
/// `text` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hq_config_parse(text: *const c_char, out: *mut *mut HqConfig) -> HqStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match str_arg(text, "text") {
            Ok(t) => boxed_config(parse_config(t), out),
            Err(s) => s,
        }
    })
}

/// Load a TOML scenario file.
///
/// # Safety
/// `path` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hq_config_load(path: *const c_char, out: *mut *mut HqConfig) -> HqStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match str_arg(path, "path") {
            Ok(p) => boxed_config(load_config(Path::new(p)), out),
            Err(s) => s,
        }
    })
}

/// # Safety
/// `cfg` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hq_config_free(cfg: *mut HqConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Thrust of one rotor at `omega` rad/s in fluid of density `rho`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hq_rotor_thrust(cfg: *const HqConfig, omega: f64, rho: f64, out: *mut f64) -> HqStatus {
    guard(|| {
        let (Some(cfg), false) = (cfg.as_ref(), out.is_null()) else {
            return null("argument");
        };
        match rotor_thrust(omega, rho, &cfg.inner.vehicle) {
            Ok(t) => {
                *out = t;
                HqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Fluid density seen by a rotor at `station` when the centroid is at `z`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hq_density_at(cfg: *const HqConfig, z: f64, station: f64, out: *mut f64) -> HqStatus {
    guard(|| {
        let (Some(cfg), false) = (cfg.as_ref(), out.is_null()) else {
            return null("argument");
        };
        *out = density_at(z, station, &cfg.inner.vehicle).rho;
        HqStatus::Ok
    })
}

/// Planar derivative. `state` is `[x, z, vx, vz, theta, theta_rate]`,
/// `omega` holds `HQ_ROTORS` speeds; `out` receives `HQ_STATE_2D` values.
///
/// # Safety
/// Arrays must have the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn hq_derivative_2d(
    cfg: *const HqConfig,
    state: *const f64,
    omega: *const f64,
    out: *mut f64,
) -> HqStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else { return null("cfg") };
        if state.is_null() || omega.is_null() || out.is_null() {
            return null("array argument");
        }
        let s = State2D::from_slice(std::slice::from_raw_parts(state, HQ_STATE_2D));
        let u = RotorCommand { speeds: std::ptr::read(omega as *const [f64; HQ_ROTORS]) };
        match state_derivative_2d_rotors(&s, &u, &cfg.inner.vehicle, &cfg.inner.geometry) {
            Ok(d) => {
                std::slice::from_raw_parts_mut(out, HQ_STATE_2D).copy_from_slice(&d.to_array());
                HqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Full derivative. `state` is `[X, Y, Z, vx, vy, vz, phi, theta, psi, p, q, r]`.
///
/// # Safety
/// Arrays must have the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn hq_derivative_3d(
    cfg: *const HqConfig,
    state: *const f64,
    omega: *const f64,
    out: *mut f64,
) -> HqStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else { return null("cfg") };
        if state.is_null() || omega.is_null() || out.is_null() {
            return null("array argument");
        }
        let s = State3D::from_slice(std::slice::from_raw_parts(state, HQ_STATE_3D));
        let u = RotorCommand { speeds: std::ptr::read(omega as *const [f64; HQ_ROTORS]) };
        match state_derivative_3d(&s, &u, &cfg.inner.vehicle, &cfg.inner.geometry) {
            Ok(d) => {
                std::slice::from_raw_parts_mut(out, HQ_STATE_3D).copy_from_slice(&d.to_array());
                HqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Run the configured mission. On success or on a run failure `*out`
/// receives the (possibly partial) trajectory; on argument errors it is
/// left untouched.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hq_run_mission(cfg: *const HqConfig, out: *mut *mut HqTrajectory) -> HqStatus {
    guard(|| {
        let (Some(cfg), false) = (cfg.as_ref(), out.is_null()) else {
            return null("argument");
        };
        let (record, status) = match run_mission(&cfg.inner) {
            Ok(o) => (o.record, HqStatus::Ok),
            Err(e) => {
                let s = fail(e.error.clone());
                (e.record, s)
            }
        };
        *out = Box::into_raw(Box::new(HqTrajectory { inner: record }));
        status
    })
}

/// # Safety
/// `traj` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn hq_trajectory_len(traj: *const HqTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hq_trajectory_get(traj: *const HqTrajectory, index: usize, out: *mut HqSample) -> HqStatus {
    guard(|| {
        let (Some(traj), false) = (traj.as_ref(), out.is_null()) else {
            return null("argument");
        };
        let Some(s) = traj.inner.samples.get(index) else {
            set_error(format!("index {index} out of range (len {})", traj.inner.len()));
            return HqStatus::IndexOutOfRange;
        };
        *out = HqSample {
            t: s.t,
            x: s.x,
            y: s.y,
            z: s.z,
            theta_deg: s.theta_deg,
            theta_rate: s.theta_rate,
            omega: s.omega,
            rho: s.rho,
            stage: s.stage,
            cut_mask: s.cut_mask,
            shortfall: s.shortfall,
            collective: s.collective,
            thrust_demand: s.thrust_demand,
            thrust_delivered: s.thrust_delivered,
        };
        HqStatus::Ok
    })
}

/// Write the trajectory as CSV.
///
/// # Safety
/// `traj` must be a live handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn hq_trajectory_write_csv(traj: *const HqTrajectory, path: *const c_char) -> HqStatus {
    guard(|| {
        let Some(traj) = traj.as_ref() else { return null("traj") };
        match str_arg(path, "path") {
            Ok(p) => match emit_trajectory(&traj.inner, Path::new(p), Format::Csv) {
                Ok(()) => HqStatus::Ok,
                Err(e) => fail(e),
            },
            Err(s) => s,
        }
    })
}

/// # Safety
/// `traj` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hq_trajectory_free(traj: *mut HqTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
