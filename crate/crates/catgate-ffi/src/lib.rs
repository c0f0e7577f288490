//! C ABI for the catgate simulator.
//!
//! The surface is handle-based: `catgate_system_*` constructors return an
//! opaque pointer that owns a validated configuration plus its derived
//! quantities; every query takes the handle plus plain C types and writes
//! through caller-supplied pointers. Functions return a status code; the
//! per-thread message behind [`catgate_last_error`] carries the detail of
//! the most recent failure on that thread.
//!
//! Complex arrays cross the boundary as interleaved doubles
//! `[re0, im0, re1, im1, …]`. The generated header lives at
//! `include/catgate.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use catgate::analysis::{
    fidelity_average, truth_table_closed, truth_table_closed_form, truth_table_open,
    EvolutionMode, FidelityConvention, GateScenario, TruthTable,
};
use catgate::config::RunConfig;
use catgate::dynamics::rates_from_t_scale;
use catgate::error::Error;
use catgate::hamiltonians::build_h_full;
use catgate::model::{quality_factors, DerivedQuantities, SystemParams};
use catgate::states::{cat_state, CatParity, CatSpec};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatgateStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
    Utf8Error = 4,
    Panic = 5,
}

fn status_of(error: &Error) -> CatgateStatus {
    match error.exit_code() {
        2 => CatgateStatus::NumericalFailure,
        _ => CatgateStatus::InvalidArgument,
    }
}

/// Gate realization selector for table and fidelity calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatgateMode {
    /// Diagonal closed-form gate unitary.
    ClosedForm = 0,
    /// Schrödinger evolution under the full coupling Hamiltonian.
    Closed = 1,
    /// Master-equation evolution with decoherence.
    Open = 2,
}

/// Opaque simulator handle: a validated configuration with its physical
/// parameters and derived coupling layer.
pub struct CatgateSystem {
    config: RunConfig,
    params: SystemParams,
    derived: DerivedQuantities,
}

/// The derived design numbers, linear GHz and ns.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CatgateDesign {
    pub delta1_ghz: f64,
    pub delta2_ghz: f64,
    pub delta1_tilde_ghz: f64,
    pub delta2_tilde_ghz: f64,
    pub big_delta_ghz: f64,
    pub lambda1_ghz: f64,
    pub lambda2_ghz: f64,
    pub lambda_ghz: f64,
    pub chi_ghz: f64,
    pub eta_ghz: f64,
    pub g2_ghz: f64,
    pub k: u32,
    pub t_gate_ns: f64,
}

/// ABI version; bumped on any breaking change to this header.
#[no_mangle]
pub extern "C" fn catgate_abi_version() -> u32 {
    1
}

/// Message for the most recent failure on this thread. Valid until the
/// next failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn catgate_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn build_system(config: RunConfig) -> Result<CatgateSystem, Error> {
    let (params, _notes) = config.build_system()?;
    let derived = config.derived(&params)?;
    Ok(CatgateSystem {
        config,
        params,
        derived,
    })
}

/// System handle for the built-in reference design. Free with
/// [`catgate_system_free`].
#[no_mangle]
pub extern "C" fn catgate_system_reference() -> *mut CatgateSystem {
    match catch_unwind(|| build_system(RunConfig::reference())) {
        Ok(Ok(system)) => Box::into_raw(Box::new(system)),
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            ptr::null_mut()
        }
        Err(_) => {
            set_last_error("panic while building the reference system");
            ptr::null_mut()
        }
    }
}

/// System handle from a run-config JSON document (same schema as the CLI
/// config files). Returns null on failure; see [`catgate_last_error`].
///
/// # Safety
/// `json` must be a valid NUL-terminated C string.
#[no_mangle]
pub unsafe extern "C" fn catgate_system_from_json(json: *const c_char) -> *mut CatgateSystem {
    if json.is_null() {
        set_last_error("json pointer is null");
        return ptr::null_mut();
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_last_error("json is not valid UTF-8");
            return ptr::null_mut();
        }
    };
    let outcome = catch_unwind(|| -> Result<CatgateSystem, Error> {
        let config = catgate::config::parse_config_str(text)?;
        build_system(config)
    });
    match outcome {
        Ok(Ok(system)) => Box::into_raw(Box::new(system)),
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            ptr::null_mut()
        }
        Err(_) => {
            set_last_error("panic while parsing the configuration");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `system` must be a pointer from a `catgate_system_*` constructor, not
/// yet freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn catgate_system_free(system: *mut CatgateSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// # Safety
/// `system` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn catgate_design(
    system: *const CatgateSystem,
    out: *mut CatgateDesign,
) -> CatgateStatus {
    if system.is_null() || out.is_null() {
        set_last_error("null pointer passed to catgate_design");
        return CatgateStatus::NullPointer;
    }
    let system = &*system;
    let d = &system.derived;
    *out = CatgateDesign {
        delta1_ghz: d.delta1,
        delta2_ghz: d.delta2,
        delta1_tilde_ghz: d.delta1_tilde,
        delta2_tilde_ghz: d.delta2_tilde,
        big_delta_ghz: d.big_delta,
        lambda1_ghz: d.lambda1,
        lambda2_ghz: d.lambda2,
        lambda_ghz: d.lambda_exchange,
        chi_ghz: d.chi,
        eta_ghz: d.eta,
        g2_ghz: system.params.g2,
        k: d.k,
        t_gate_ns: d.t_gate_ns,
    };
    CatgateStatus::Ok
}

/// Cavity quality factors at a photon lifetime κ⁻¹ (μs).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn catgate_quality_factors(
    system: *const CatgateSystem,
    kappa_inv_us: f64,
    q1_out: *mut f64,
    q2_out: *mut f64,
) -> CatgateStatus {
    if system.is_null() || q1_out.is_null() || q2_out.is_null() {
        set_last_error("null pointer passed to catgate_quality_factors");
        return CatgateStatus::NullPointer;
    }
    match quality_factors(&(*system).params, kappa_inv_us) {
        Ok((q1, q2)) => {
            *q1_out = q1;
            *q2_out = q2;
            CatgateStatus::Ok
        }
        Err(e) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Cat-state Fock amplitudes: writes `trunc` interleaved complex values
/// (all imaginary parts zero for this family) into `out_interleaved`,
/// which must hold `2 * trunc` doubles. `odd_parity` 0 selects the even
/// cat, nonzero the odd one.
///
/// # Safety
/// `out_interleaved` must point to at least `2 * trunc` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn catgate_cat_state(
    amplitude: f64,
    odd_parity: i32,
    trunc: usize,
    out_interleaved: *mut f64,
) -> CatgateStatus {
    if out_interleaved.is_null() {
        set_last_error("null output buffer passed to catgate_cat_state");
        return CatgateStatus::NullPointer;
    }
    let parity = if odd_parity != 0 {
        CatParity::Odd
    } else {
        CatParity::Even
    };
    let outcome = catch_unwind(|| -> Result<Vec<f64>, Error> {
        let spec = CatSpec::new(amplitude, parity, trunc)?;
        let state = cat_state(&spec)?;
        let mut flat = Vec::with_capacity(2 * trunc);
        for amp in state.amplitudes() {
            flat.push(amp.re);
            flat.push(amp.im);
        }
        Ok(flat)
    });
    match outcome {
        Ok(Ok(flat)) => {
            ptr::copy_nonoverlapping(flat.as_ptr(), out_interleaved, flat.len());
            CatgateStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("panic in catgate_cat_state");
            CatgateStatus::Panic
        }
    }
}

fn compute_table(
    system: &CatgateSystem,
    mode: CatgateMode,
    t_scale_us: f64,
    kappa_inv_us: f64,
    workers: u32,
) -> Result<TruthTable, Error> {
    let params = &system.params;
    let h = build_h_full(params, &params.space);
    let prop = system
        .config
        .propagation(h.max_phase_rate(), system.derived.t_gate_ns);
    match mode {
        CatgateMode::ClosedForm => truth_table_closed_form(
            &system.derived,
            params.cat_amplitude,
            &params.space,
            system.derived.t_gate_ns,
        ),
        CatgateMode::Closed => truth_table_closed(params, &params.space, &prop, workers as usize),
        CatgateMode::Open => {
            let rates = rates_from_t_scale(t_scale_us)?.with_cavity_lifetime(kappa_inv_us)?;
            truth_table_open(params, &params.space, &rates, &prop, workers as usize)
        }
    }
}

/// Logical truth table: writes 16 interleaved complex entries (32 doubles,
/// row-major) plus the leakage. For `CATGATE_MODE_OPEN` the decoherence
/// cell is `(t_scale_us, kappa_inv_us)`; the other modes ignore those
/// arguments. Closed and open modes propagate the full gate time, which
/// takes seconds and minutes respectively at the default step.
///
/// # Safety
/// `out_interleaved` must hold 32 doubles; `leakage_out` one double.
#[no_mangle]
pub unsafe extern "C" fn catgate_truth_table(
    system: *const CatgateSystem,
    mode: CatgateMode,
    t_scale_us: f64,
    kappa_inv_us: f64,
    workers: u32,
    out_interleaved: *mut f64,
    leakage_out: *mut f64,
) -> CatgateStatus {
    if system.is_null() || out_interleaved.is_null() || leakage_out.is_null() {
        set_last_error("null pointer passed to catgate_truth_table");
        return CatgateStatus::NullPointer;
    }
    let system = &*system;
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        compute_table(system, mode, t_scale_us, kappa_inv_us, workers)
    }));
    match outcome {
        Ok(Ok(table)) => {
            let mut flat = [0.0f64; 32];
            for i in 0..4 {
                for j in 0..4 {
                    let z = table.entries[(i, j)];
                    flat[2 * (4 * i + j)] = z.re;
                    flat[2 * (4 * i + j) + 1] = z.im;
                }
            }
            ptr::copy_nonoverlapping(flat.as_ptr(), out_interleaved, 32);
            *leakage_out = table.leakage;
            CatgateStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("panic in catgate_truth_table");
            CatgateStatus::Panic
        }
    }
}

/// Angle-averaged gate fidelity over a `quadrature_n`² midpoint grid.
/// Mode semantics as in [`catgate_truth_table`]; `workers` 0 uses all
/// cores. Open-system averages run one master equation per grid point —
/// budget minutes per point at the default step.
///
/// # Safety
/// `mean_out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn catgate_fidelity_average(
    system: *const CatgateSystem,
    mode: CatgateMode,
    t_scale_us: f64,
    kappa_inv_us: f64,
    quadrature_n: u32,
    workers: u32,
    mean_out: *mut f64,
) -> CatgateStatus {
    if system.is_null() || mean_out.is_null() {
        set_last_error("null pointer passed to catgate_fidelity_average");
        return CatgateStatus::NullPointer;
    }
    let system = &*system;
    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<f64, Error> {
        let params = system.params.clone();
        let h = build_h_full(&params, &params.space);
        let prop = system
            .config
            .propagation(h.max_phase_rate(), system.derived.t_gate_ns);
        let mode = match mode {
            CatgateMode::ClosedForm => EvolutionMode::ClosedForm,
            CatgateMode::Closed => EvolutionMode::Closed,
            CatgateMode::Open => EvolutionMode::Open(
                rates_from_t_scale(t_scale_us)?.with_cavity_lifetime(kappa_inv_us)?,
            ),
        };
        let scenario = GateScenario {
            params,
            derived: system.derived,
            mode,
            prop,
            convention: FidelityConvention::AmplitudeSqrt,
            workers: workers as usize,
        };
        Ok(fidelity_average(&scenario, quadrature_n as usize)?.mean_fidelity)
    }));
    match outcome {
        Ok(Ok(mean)) => {
            *mean_out = mean;
            CatgateStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("panic in catgate_fidelity_average");
            CatgateStatus::Panic
        }
    }
}
