//! C ABI over `qreset`.
//!
//! Every function returns a [`QresetStatus`]; on failure the message is
//! available from [`qreset_last_error_message`] on the same thread.
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qreset::control::{optimize_pulse, OptimizationResult, OptimizeOptions, PulseSchedule};
use qreset::dynamics::{
    analytic_tmin_class, case_parameters, eta_and_tmin, simulate_purity, thermal_product,
    uniform_grid, BlochAngles, CaseParameters, PurityCurve, UnitConvention, TABLE_I_SETS,
};
use qreset::lie::classify_all_27_with;
use qreset::majorization::{epsilon_reset_check, reshuffle_spectra};
use qreset::model::{resonant_amplitude, SystemSpec};
use qreset::operator::Operator;
use qreset::weyl::{qsl_verify, weyl_coordinates, AncillaLocalState};
use qreset::QresetError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QresetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    MalformedJson = 3,
    NoResonance = 4,
    NoPurification = 5,
    DecompositionFailure = 6,
    SingularAngles = 7,
    BufferTooSmall = 8,
    Runtime = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QresetConvention {
    TableI = 0,
    AngularHbar1 = 1,
}

/// System parameters and operator choices.
pub struct QresetSpec(SystemSpec);

/// Sampled qubit purity.
pub struct QresetCurve(PurityCurve);

/// Outcome of a pulse optimization.
pub struct QresetOptimization(OptimizationResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &QresetError) -> QresetStatus {
    match e {
        QresetError::MalformedJson { .. } => QresetStatus::MalformedJson,
        QresetError::NoResonance(_) => QresetStatus::NoResonance,
        QresetError::NoPurification(_) | QresetError::NoDressedForm(_) => {
            QresetStatus::NoPurification
        }
        QresetError::DecompositionFailure(_) => QresetStatus::DecompositionFailure,
        QresetError::SingularAngleConfiguration(_) => QresetStatus::SingularAngles,
        e if e.is_validation() => QresetStatus::InvalidInput,
        _ => QresetStatus::Runtime,
    }
}

enum Fail {
    Lib(QresetError),
    Null(&'static str),
    Buffer(usize),
}

impl From<QresetError> for Fail {
    fn from(e: QresetError) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QresetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QresetStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QresetStatus::NullPointer
        }
        Ok(Err(Fail::Buffer(need))) => {
            set_error(format!("buffer too small, need {need} elements"));
            QresetStatus::BufferTooSmall
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            QresetStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

fn pauli(k: u32) -> Result<usize, Fail> {
    if (1..=3).contains(&k) {
        Ok(k as usize)
    } else {
        Err(QresetError::InvalidInput(format!("Pauli index must be 1, 2 or 3, got {k}")).into())
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qreset_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn qreset_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Two-level ancilla with σ₁ couplings and control.
///
/// # Safety
/// `out_spec` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn qreset_spec_two_level(
    omega_s: f64,
    omega_b: f64,
    j: f64,
    beta: f64,
    out_spec: *mut *mut QresetSpec,
) -> QresetStatus {
    guard(|| {
        let o = out(out_spec, "out_spec")?;
        let spec = SystemSpec::two_level(omega_s, omega_b, j, beta);
        spec.validate()?;
        *o = Box::into_raw(Box::new(QresetSpec(spec)));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out_spec` writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_spec_from_json(
    json: *const c_char,
    out_spec: *mut *mut QresetSpec,
) -> QresetStatus {
    guard(|| {
        let o = out(out_spec, "out_spec")?;
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| QresetError::InvalidInput("spec is not valid UTF-8".into()))?;
        *o = Box::into_raw(Box::new(QresetSpec(SystemSpec::from_json_str(text)?)));
        Ok(())
    })
}

/// # Safety
/// `spec` must come from a `qreset_spec_*` constructor (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn qreset_spec_free(spec: *mut QresetSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Select Pauli operators O_S, O_B, O_c (indices 1..3).
///
/// # Safety
/// `spec` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qreset_spec_set_case(
    spec: *mut QresetSpec,
    o_s: u32,
    o_b: u32,
    o_c: u32,
) -> QresetStatus {
    guard(|| {
        let s = out(spec, "spec")?;
        let (a, b, c) = (pauli(o_s)?, pauli(o_b)?, pauli(o_c)?);
        s.0 = s.0.clone().with_operators(a, b, c);
        Ok(())
    })
}

/// Select Bloch directions from φ_S, θ_S, φ_B, θ_B, φ_c, θ_c.
///
/// # Safety
/// `spec` must be a live handle and `angles` point to six doubles.
#[no_mangle]
pub unsafe extern "C" fn qreset_spec_set_angles(
    spec: *mut QresetSpec,
    angles: *const f64,
) -> QresetStatus {
    guard(|| {
        let s = out(spec, "spec")?;
        let a = BlochAngles::from_slice(slice(angles, 6, "angles")?)?;
        s.0 = a.apply(&s.0);
        Ok(())
    })
}

/// # Safety
/// `spec` must be a live handle and `out_eps` writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_resonant_amplitude(
    spec: *const QresetSpec,
    out_eps: *mut f64,
) -> QresetStatus {
    guard(|| {
        let s = handle(spec, "spec")?;
        *out(out_eps, "out_eps")? = resonant_amplitude(&s.0)?;
        Ok(())
    })
}

/// π/(2η₋) for the Pauli case selected in `spec`.
///
/// # Safety
/// `spec` must be a live handle and `out_tmin` writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_tmin(spec: *const QresetSpec, out_tmin: *mut f64) -> QresetStatus {
    guard(|| {
        let s = &handle(spec, "spec")?.0;
        let o = out(out_tmin, "out_tmin")?;
        let idx = |sel: &qreset::model::OperatorSelector| {
            sel.pauli_index()
                .ok_or_else(|| QresetError::InvalidInput("reset time needs Pauli operators".into()))
        };
        let (a, b, c) = (idx(&s.o_s)?, idx(&s.o_b)?, idx(&s.o_c)?);
        match case_parameters(a, b, c, s)? {
            CaseParameters::Purifiable(p) => *o = eta_and_tmin(&p)?.t_min,
            CaseParameters::NotPurifiable => {
                return Err(QresetError::NoPurification(format!("s{a}s{b}:s{c}")).into())
            }
        }
        Ok(())
    })
}

/// Reset time of a Pauli case for device set 0, 1 or 2.
///
/// # Safety
/// `out_time` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_device_reset_time(
    o_s: u32,
    o_b: u32,
    o_c: u32,
    set_index: u32,
    convention: QresetConvention,
    out_time: *mut f64,
) -> QresetStatus {
    guard(|| {
        let o = out(out_time, "out_time")?;
        let set = TABLE_I_SETS.get(set_index as usize).ok_or_else(|| {
            QresetError::InvalidInput(format!("device set {set_index} out of range"))
        })?;
        let (conv, scale) = match convention {
            QresetConvention::TableI => (UnitConvention::TableI, 1.0),
            QresetConvention::AngularHbar1 => {
                (UnitConvention::AngularHbar1, 2.0 * std::f64::consts::PI)
            }
        };
        let (a, b, c) = (pauli(o_s)?, pauli(o_b)?, pauli(o_c)?);
        let spec = SystemSpec::two_level(set.f_s * scale, set.f_b * scale, set.f_j * scale, 1.0);
        *o = analytic_tmin_class(a, b, c, &spec, conv)?.time;
        Ok(())
    })
}

/// Rows of (dim L, dim k, dim p, dim a, purifiable) for the 27 Pauli cases
/// in lexicographic order; `buf` needs 135 entries.
///
/// # Safety
/// `spec` must be a live handle and `buf` hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn qreset_classify_all(
    spec: *const QresetSpec,
    buf: *mut u32,
    len: usize,
) -> QresetStatus {
    guard(|| {
        let s = handle(spec, "spec")?;
        if len < 135 {
            return Err(Fail::Buffer(135));
        }
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        let rows = classify_all_27_with(&s.0)?;
        let b = std::slice::from_raw_parts_mut(buf, len);
        for (i, r) in rows.iter().enumerate() {
            b[5 * i..5 * i + 5].copy_from_slice(&[
                r.dim_l as u32,
                r.dim_k as u32,
                r.dim_p as u32,
                r.dim_a as u32,
                r.purifiable as u32,
            ]);
        }
        Ok(())
    })
}

/// Purity under the constant resonant field from the thermal product
/// state, on `n_times` points of [0, t_max].
///
/// # Safety
/// `spec` must be a live handle and `out_curve` writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_simulate_constant(
    spec: *const QresetSpec,
    t_max: f64,
    n_times: usize,
    out_curve: *mut *mut QresetCurve,
) -> QresetStatus {
    guard(|| {
        let s = &handle(spec, "spec")?.0;
        let o = out(out_curve, "out_curve")?;
        if n_times < 2 {
            return Err(QresetError::InvalidInput("need at least two time points".into()).into());
        }
        let pulse = PulseSchedule::constant(t_max, resonant_amplitude(s)?, 1)?;
        let c = simulate_purity(
            s,
            &pulse,
            &thermal_product(s)?,
            &uniform_grid(t_max, n_times),
        )?;
        *o = Box::into_raw(Box::new(QresetCurve(c)));
        Ok(())
    })
}

/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qreset_curve_len(curve: *const QresetCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.values.len())
}

/// Copy times and purities into caller buffers of length `len`.
///
/// # Safety
/// `curve` must be a live handle; `times` and `values` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qreset_curve_copy(
    curve: *const QresetCurve,
    times: *mut f64,
    values: *mut f64,
    len: usize,
) -> QresetStatus {
    guard(|| {
        let c = &handle(curve, "curve")?.0;
        let n = c.values.len();
        if len < n {
            return Err(Fail::Buffer(n));
        }
        if times.is_null() || values.is_null() {
            return Err(Fail::Null("times/values"));
        }
        std::slice::from_raw_parts_mut(times, n).copy_from_slice(&c.times);
        std::slice::from_raw_parts_mut(values, n).copy_from_slice(&c.values);
        Ok(())
    })
}

/// # Safety
/// `curve` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_curve_peak(
    curve: *const QresetCurve,
    out_time: *mut f64,
    out_value: *mut f64,
) -> QresetStatus {
    guard(|| {
        let c = &handle(curve, "curve")?.0;
        *out(out_time, "out_time")? = c.peak_time;
        *out(out_value, "out_value")? = c.peak_value;
        Ok(())
    })
}

/// # Safety
/// `curve` must come from `qreset_simulate_constant` (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn qreset_curve_free(curve: *mut QresetCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Maximum purity of a d_S-level system after any joint unitary with an
/// ancilla, from the two spectra.
///
/// # Safety
/// `s` and `b` hold `n_s` and `n_b` doubles; `out_purity` writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_max_purity(
    s: *const f64,
    n_s: usize,
    b: *const f64,
    n_b: usize,
    out_purity: *mut f64,
) -> QresetStatus {
    guard(|| {
        let (s, b) = (slice(s, n_s, "s")?, slice(b, n_b, "b")?);
        let o = out(out_purity, "out_purity")?;
        for v in [s, b] {
            let total: f64 = v.iter().sum();
            if v.is_empty()
                || v.iter().any(|x| !x.is_finite() || *x < 0.0)
                || (total - 1.0).abs() > 1e-9
            {
                return Err(QresetError::NotDensity(
                    "spectrum must be nonnegative and sum to 1".into(),
                )
                .into());
            }
        }
        let desc = |v: &[f64]| {
            let mut w = v.to_vec();
            w.sort_by(|x, y| y.total_cmp(x));
            w
        };
        *o = reshuffle_spectra(&desc(s), &desc(b)).purity();
        Ok(())
    })
}

/// # Safety
/// `b` holds `n_b` doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_epsilon_check(
    b: *const f64,
    n_b: usize,
    d_s: usize,
    eps: f64,
    out_eligible: *mut bool,
    out_infidelity: *mut f64,
) -> QresetStatus {
    guard(|| {
        let b = slice(b, n_b, "b")?;
        let rho = Operator::from_fn(n_b, n_b, |i, j| {
            Complex64::new(if i == j { b[i] } else { 0.0 }, 0.0)
        });
        let r = epsilon_reset_check(&rho, d_s, eps)?;
        *out(out_eligible, "out_eligible")? = r.eligible;
        *out(out_infidelity, "out_infidelity")? = r.achieved_infidelity;
        Ok(())
    })
}

/// Canonical Weyl coordinates of a 4×4 unitary given row-major as
/// interleaved (re, im) pairs, 32 doubles.
///
/// # Safety
/// `u` holds 32 doubles and `out_c` room for 3.
#[no_mangle]
pub unsafe extern "C" fn qreset_weyl_coordinates(u: *const f64, out_c: *mut f64) -> QresetStatus {
    guard(|| {
        let v = slice(u, 32, "u")?;
        if out_c.is_null() {
            return Err(Fail::Null("out_c"));
        }
        let m = Operator::from_fn(4, 4, |i, j| {
            Complex64::new(v[8 * i + 2 * j], v[8 * i + 2 * j + 1])
        });
        let c = weyl_coordinates(&m)?.canonical();
        std::slice::from_raw_parts_mut(out_c, 3).copy_from_slice(&c);
        Ok(())
    })
}

/// Brute-force minimal c₁+c₂+c₃ reaching the ancilla purity.
///
/// # Safety
/// `out_angle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_qsl_min_total_angle(
    p_e: f64,
    p_g: f64,
    gamma_re: f64,
    gamma_im: f64,
    grid_n: usize,
    out_angle: *mut f64,
) -> QresetStatus {
    guard(|| {
        let o = out(out_angle, "out_angle")?;
        let anc = AncillaLocalState::new(p_e, p_g, Complex64::new(gamma_re, gamma_im))?;
        *o = qsl_verify(&anc, grid_n)?.min_total_angle;
        Ok(())
    })
}

/// Optimize a piecewise-constant field from the resonant guess, starting
/// in the thermal product state.
///
/// # Safety
/// `spec` must be a live handle and `out_result` writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_optimize(
    spec: *const QresetSpec,
    tau: f64,
    n_segments: usize,
    max_iter: usize,
    out_result: *mut *mut QresetOptimization,
) -> QresetStatus {
    guard(|| {
        let s = &handle(spec, "spec")?.0;
        let o = out(out_result, "out_result")?;
        let opts = OptimizeOptions {
            max_iter,
            ..Default::default()
        };
        let r = optimize_pulse(s, &thermal_product(s)?, tau, n_segments, &opts)?;
        *o = Box::into_raw(Box::new(QresetOptimization(r)));
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn qreset_optimization_purities(
    result: *const QresetOptimization,
    out_guess: *mut f64,
    out_final: *mut f64,
) -> QresetStatus {
    guard(|| {
        let r = &handle(result, "result")?.0;
        *out(out_guess, "out_guess")? = r.guess_purity;
        *out(out_final, "out_final")? = r.final_purity;
        Ok(())
    })
}

/// Copy the optimized primary amplitudes into `buf`.
///
/// # Safety
/// `result` must be a live handle and `buf` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qreset_optimization_amplitudes(
    result: *const QresetOptimization,
    buf: *mut f64,
    len: usize,
) -> QresetStatus {
    guard(|| {
        let r = &handle(result, "result")?.0;
        let a = &r.pulse.amplitudes;
        if len < a.len() {
            return Err(Fail::Buffer(a.len()));
        }
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, a.len()).copy_from_slice(a);
        Ok(())
    })
}

/// # Safety
/// `result` must come from `qreset_optimize` (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn qreset_optimization_free(result: *mut QresetOptimization) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
