//! C ABI over `hybridprobe`.
//!
//! A model is created with [`hp_model_new`], configured, used for scans and
//! released with [`hp_model_free`]. All entry points return an [`HpStatus`];
//! failures leave a message retrievable through [`hp_last_error_message`] on
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hybridprobe::analysis::{efficiency, entropy_scan, Scenario, Window};
use hybridprobe::dynamics::{DecoherenceRates, TimeGrid};
use hybridprobe::estimation::{
    fisher_scan, nuisance_diag, scalar_bound, FisherEntry, FisherMatrix, FisherRecord, InitialState, ScanMode,
    StencilConfig,
};
use hybridprobe::hilbert::{HilbertDims, Subsystem};
use hybridprobe::model::SystemParams;
use hybridprobe::{Error, C64};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Out-of-range parameter, dimension or time grid.
    InvalidArgument = 2,
    /// A Fock cutoff is too small for the requested state.
    Truncation = 3,
    /// Integration, positivity, linear-algebra or consistency failure.
    Numerical = 4,
    /// Internal panic caught at the boundary.
    Panic = 5,
}

/// Time window searched for the optimal time.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HpWindow {
    /// `t <= 2 pi`.
    Short = 0,
    /// `t <= 6 pi`.
    Long = 1,
}

/// Bound compared by an efficiency ratio.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HpScenario {
    SingleG1 = 0,
    SingleG2 = 1,
    NuisanceG1 = 2,
    NuisanceG2 = 3,
    Joint = 4,
}

/// Hamiltonian parameters in units of `omega_m`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HpParams {
    pub omega_c: f64,
    pub omega_q: f64,
    pub omega_m: f64,
    pub g1: f64,
    pub g2: f64,
}

/// Fock cutoffs and the allowed truncation deficit of initial states.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HpDims {
    pub cavity: usize,
    pub mechanics: usize,
    pub truncation_tolerance: f64,
}

/// Master-equation rates: cavity decay, mechanical damping, qubit dephasing
/// and the thermal occupation of the mechanical bath.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HpRates {
    pub kappa: f64,
    pub big_gamma: f64,
    pub gamma: f64,
    pub nbar: f64,
}

/// A Fisher matrix with its bounds; infinite bounds mark singular matrices.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HpFisherEntry {
    /// Row-major `[Q11, Q12, Q21, Q22]`.
    pub qfi: [f64; 4],
    /// `1/Q11, 1/Q22`.
    pub inv_single: [f64; 2],
    /// `(Q^-1)_11, (Q^-1)_22`.
    pub nuisance: [f64; 2],
    /// `Tr[Q^-1]`.
    pub scalar: f64,
    pub singular: bool,
}

/// Global and reduced-state Fisher information at one time.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HpFisherRecord {
    pub t: f64,
    pub global: HpFisherEntry,
    pub qubit: HpFisherEntry,
    pub cavity: HpFisherEntry,
    pub mechanics: HpFisherEntry,
}

/// Subsystem von Neumann entropies (base 2) at one time.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HpEntropyRecord {
    pub t: f64,
    pub qubit: f64,
    pub cavity: f64,
    pub mechanics: f64,
}

/// Efficiency ratio at the optimal time; `best_subsystem` is 0 qubit,
/// 1 cavity, 2 mechanics.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HpEfficiency {
    pub eta: f64,
    pub t_star: f64,
    pub best_subsystem: u32,
    pub excluded: usize,
}

/// Opaque model handle.
pub struct HpModel {
    params: SystemParams,
    dims: HilbertDims,
    stencil: StencilConfig,
    initial: InitialState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> HpStatus {
    match err {
        Error::InvalidDimension(_) | Error::InvalidArgument(_) | Error::Shape { .. } => HpStatus::InvalidArgument,
        Error::Truncation { .. } => HpStatus::Truncation,
        _ => HpStatus::Numerical,
    }
}

/// Runs `f` with panics contained and errors recorded.
fn guard(f: impl FnOnce() -> Result<(), (HpStatus, String)>) -> HpStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            HpStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (HpStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (HpStatus, String) {
    (HpStatus::NullPointer, format!("{name} is null"))
}

/// # Safety
/// `p` must be null or valid for reads of `n` values.
unsafe fn input<'a, T>(p: *const T, n: usize, name: &str) -> Result<&'a [T], (HpStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(p, n))
}

/// # Safety
/// `p` must be null or valid for writes of `n` values.
unsafe fn output<'a, T>(p: *mut T, n: usize, name: &str) -> Result<&'a mut [T], (HpStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts_mut(p, n))
}

fn grid_from(times: &[f64]) -> Result<TimeGrid, (HpStatus, String)> {
    TimeGrid::new(times.to_vec()).map_err(lib_err)
}

fn matrix_from(q: &[f64]) -> Result<FisherMatrix, (HpStatus, String)> {
    if (q[1] - q[2]).abs() > 1e-12 * q.iter().fold(1.0_f64, |m, v| m.max(v.abs())) {
        return Err((HpStatus::InvalidArgument, format!("Fisher matrix is not symmetric: {} vs {}", q[1], q[2])));
    }
    Ok(FisherMatrix::new(q[0], q[1], q[3]))
}

impl From<&FisherEntry> for HpFisherEntry {
    fn from(e: &FisherEntry) -> Self {
        let q = e.qfi;
        HpFisherEntry {
            qfi: [q.get(0, 0), q.get(0, 1), q.get(1, 0), q.get(1, 1)],
            inv_single: e.inv_single,
            nuisance: e.nuisance,
            scalar: e.scalar,
            singular: e.singular,
        }
    }
}

impl From<&FisherRecord> for HpFisherRecord {
    fn from(r: &FisherRecord) -> Self {
        HpFisherRecord {
            t: r.t,
            global: (&r.global).into(),
            qubit: r.subsystem(Subsystem::Qubit).into(),
            cavity: r.subsystem(Subsystem::Cavity).into(),
            mechanics: r.subsystem(Subsystem::Mechanics).into(),
        }
    }
}

fn entry_back(e: &HpFisherEntry) -> FisherEntry {
    FisherEntry {
        qfi: FisherMatrix::new(e.qfi[0], e.qfi[1], e.qfi[3]),
        inv_single: e.inv_single,
        nuisance: e.nuisance,
        scalar: e.scalar,
        singular: e.singular,
    }
}

impl From<&HpFisherRecord> for FisherRecord {
    fn from(r: &HpFisherRecord) -> Self {
        FisherRecord {
            t: r.t,
            global: entry_back(&r.global),
            subsystems: [entry_back(&r.qubit), entry_back(&r.cavity), entry_back(&r.mechanics)],
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hp_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or null if the last call
/// succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Fills `params` with the default Hamiltonian parameters
/// (`omega_c = omega_q = 100`, `omega_m = 1`, `g1 = g2 = 0.1`).
///
/// # Safety
/// `params` must be null or point to writable memory for one `HpParams`.
#[no_mangle]
pub unsafe extern "C" fn hp_params_default(params: *mut HpParams) -> HpStatus {
    guard(|| {
        let out = output(params, 1, "params")?;
        let p = SystemParams::default();
        out[0] = HpParams { omega_c: p.omega_c, omega_q: p.omega_q, omega_m: p.omega_m, g1: p.g1, g2: p.g2 };
        Ok(())
    })
}

/// Creates a model with the default stencil (`Delta = 1e-4`) and the initial
/// state `|g> (x) |2> (x) |2>`. `dims` may be null for cutoffs 25 x 25; the
/// initial state is checked against the cutoffs when it is set or used.
///
/// # Safety
/// `params` must point to a valid `HpParams`, `dims` must be null or point to
/// a valid `HpDims`, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_model_new(
    params: *const HpParams,
    dims: *const HpDims,
    out: *mut *mut HpModel,
) -> HpStatus {
    guard(|| {
        let p = input(params, 1, "params")?[0];
        let slot = output(out, 1, "out")?;
        slot[0] = ptr::null_mut();
        let params = SystemParams { omega_c: p.omega_c, omega_q: p.omega_q, omega_m: p.omega_m, g1: p.g1, g2: p.g2 };
        params.validate().map_err(lib_err)?;
        let dims = if dims.is_null() {
            HilbertDims::default()
        } else {
            let d = *dims;
            HilbertDims::new(d.cavity, d.mechanics).map_err(lib_err)?.with_tolerance(d.truncation_tolerance)
        };
        dims.validate().map_err(lib_err)?;
        let initial = InitialState::default();
        let model = HpModel { params, dims, stencil: StencilConfig::default(), initial };
        slot[0] = Box::into_raw(Box::new(model));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a pointer returned by [`hp_model_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn hp_model_free(model: *mut HpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Sets the initial state to `|g> (x) |alpha> (x) |beta>` (real amplitudes).
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hp_model_set_initial_pure(model: *mut HpModel, alpha: f64, beta: f64) -> HpStatus {
    set_initial(model, InitialState::Pure { alpha, beta })
}

/// Sets the initial state to `|g><g| (x) |alpha><alpha| (x) rho_th(nbar)`.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hp_model_set_initial_thermal(model: *mut HpModel, alpha: f64, nbar: f64) -> HpStatus {
    set_initial(model, InitialState::Thermal { alpha, nbar })
}

unsafe fn set_initial(model: *mut HpModel, initial: InitialState) -> HpStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        initial.ensemble(&m.dims).map_err(lib_err)?;
        m.initial = initial;
        Ok(())
    })
}

/// Sets the finite-difference increments for `g1` and `g2`.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hp_model_set_stencil(model: *mut HpModel, delta_g1: f64, delta_g2: f64) -> HpStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(|| null("model"))?;
        let s = StencilConfig { delta_g1, delta_g2 };
        s.validate().map_err(lib_err)?;
        m.stencil = s;
        Ok(())
    })
}

/// Closed-system Fisher scan: writes `n_times` records to `out`.
///
/// # Safety
/// `model` must be a live handle, `times` readable for `n_times` values and
/// `out` writable for `n_times` records.
#[no_mangle]
pub unsafe extern "C" fn hp_fisher_scan(
    model: *const HpModel,
    times: *const f64,
    n_times: usize,
    out: *mut HpFisherRecord,
) -> HpStatus {
    scan(model, times, n_times, out, ScanMode::Closed)
}

/// Open-system Fisher scan under the master equation with RK4 step `dt`;
/// `rates` may be null for the defaults (kappa = 0.01, Gamma = 1e-5,
/// gamma = 0.01, Nbar = 100).
///
/// # Safety
/// As [`hp_fisher_scan`]; `rates` must be null or point to a valid `HpRates`.
#[no_mangle]
pub unsafe extern "C" fn hp_fisher_scan_open(
    model: *const HpModel,
    rates: *const HpRates,
    dt: f64,
    times: *const f64,
    n_times: usize,
    out: *mut HpFisherRecord,
) -> HpStatus {
    let rates = match rates.as_ref() {
        None => DecoherenceRates::default(),
        Some(r) => DecoherenceRates { kappa: r.kappa, big_gamma: r.big_gamma, gamma: r.gamma, nbar: r.nbar },
    };
    scan(model, times, n_times, out, ScanMode::Open { rates, dt })
}

unsafe fn scan(
    model: *const HpModel,
    times: *const f64,
    n: usize,
    out: *mut HpFisherRecord,
    mode: ScanMode,
) -> HpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let grid = grid_from(input(times, n, "times")?)?;
        let dst = output(out, n, "out")?;
        let records = fisher_scan(&m.params, &m.dims, &m.stencil, &grid, &m.initial, &mode).map_err(lib_err)?;
        for (d, r) in dst.iter_mut().zip(&records) {
            *d = r.into();
        }
        Ok(())
    })
}

/// Subsystem entropies along the closed evolution of a pure initial state.
///
/// # Safety
/// As [`hp_fisher_scan`], with `out` writable for `n_times` entropy records.
#[no_mangle]
pub unsafe extern "C" fn hp_entropy_scan(
    model: *const HpModel,
    times: *const f64,
    n_times: usize,
    out: *mut HpEntropyRecord,
) -> HpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let grid = grid_from(input(times, n_times, "times")?)?;
        let dst = output(out, n_times, "out")?;
        let InitialState::Pure { alpha, beta } = m.initial else {
            return Err((HpStatus::InvalidArgument, "entropy scan needs a pure initial state".into()));
        };
        let recs = entropy_scan(&m.params, &m.dims, C64::from(alpha), C64::from(beta), &grid).map_err(lib_err)?;
        for (d, r) in dst.iter_mut().zip(&recs) {
            *d = HpEntropyRecord { t: r.t, qubit: r.qubit, cavity: r.cavity, mechanics: r.mechanics };
        }
        Ok(())
    })
}

/// Diagonal of `Q^-1` for a row-major symmetric 2x2 matrix; infinities when
/// `det Q <= 1e-300`.
///
/// # Safety
/// `q` must be readable for 4 values and `out` writable for 2.
#[no_mangle]
pub unsafe extern "C" fn hp_nuisance_diag(q: *const f64, out: *mut f64) -> HpStatus {
    guard(|| {
        let q = matrix_from(input(q, 4, "q")?)?;
        output(out, 2, "out")?.copy_from_slice(&nuisance_diag(&q));
        Ok(())
    })
}

/// `Tr[Q^-1]` for a row-major symmetric 2x2 matrix; infinity when singular.
///
/// # Safety
/// `q` must be readable for 4 values and `out` writable for 1.
#[no_mangle]
pub unsafe extern "C" fn hp_scalar_bound(q: *const f64, out: *mut f64) -> HpStatus {
    guard(|| {
        let q = matrix_from(input(q, 4, "q")?)?;
        output(out, 1, "out")?[0] = scalar_bound(&q);
        Ok(())
    })
}

/// Efficiency ratio of the best subsystem over `records` (as produced by a
/// scan of `model`).
///
/// # Safety
/// `model` must be a live handle, `records` readable for `n_records` records
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hp_efficiency(
    model: *const HpModel,
    records: *const HpFisherRecord,
    n_records: usize,
    window: HpWindow,
    scenario: HpScenario,
    out: *mut HpEfficiency,
) -> HpStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let recs: Vec<FisherRecord> = input(records, n_records, "records")?.iter().map(FisherRecord::from).collect();
        let dst = output(out, 1, "out")?;
        let window = match window {
            HpWindow::Short => Window::Short,
            HpWindow::Long => Window::Long,
        };
        let scenario = match scenario {
            HpScenario::SingleG1 => Scenario::SingleG1,
            HpScenario::SingleG2 => Scenario::SingleG2,
            HpScenario::NuisanceG1 => Scenario::NuisanceG1,
            HpScenario::NuisanceG2 => Scenario::NuisanceG2,
            HpScenario::Joint => Scenario::Joint,
        };
        let e = efficiency(&recs, window, scenario, &m.params).map_err(lib_err)?;
        dst[0] = HpEfficiency {
            eta: e.eta,
            t_star: e.t_star,
            best_subsystem: e.best_subsystem as u32,
            excluded: e.excluded,
        };
        Ok(())
    })
}
