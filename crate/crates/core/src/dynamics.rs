//! Reset dynamics in the dressed frame: closed-form propagators, the
//! approximate purity evolution, minimum reset times and numerical
//! simulations for arbitrary ancilla dimension.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{fmt12, PulseSchedule, SegmentEngine};
use crate::error::{QresetError, Result};
use crate::model::{
    ancilla_thermal, hamiltonian, operator_of, qubit_thermal, resonant_amplitude,
    resonant_amplitude_for, OperatorSelector, SystemSpec,
};
use crate::operator::{
    c, check_density, commutator, frobenius, hermitian_eig, identity, kron, max_abs_diff,
    partial_trace, pauli, purity_unchecked, re, Operator, Subsystem, C64, I,
};

const TEMPLATE_TOL: f64 = 1e-10;
const ZERO_A_TOL: f64 = 1e-12;

/// Dressed-frame constants of one Pauli case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedCaseParams {
    pub a: C64,
    pub b: C64,
    pub form: u8,
    pub omega_b: f64,
    pub omega: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
}

impl DressedCaseParams {
    pub fn new(a: C64, b: C64, form: u8, omega_b: f64) -> Self {
        let b2 = b.norm_sqr();
        let j2 = a.norm_sqr() + b2;
        let omega = (omega_b * omega_b + 4.0 * b2).sqrt();
        let eta_m2 = j2 + 0.5 * omega_b * (omega_b - omega);
        DressedCaseParams {
            a,
            b,
            form,
            omega_b,
            omega,
            delta_plus: 1.0 + omega_b / omega,
            delta_minus: 1.0 - omega_b / omega,
            eta_plus: (j2 + 0.5 * omega_b * (omega_b + omega)).sqrt(),
            eta_minus: eta_m2.max(0.0).sqrt(),
        }
    }

    /// √(|A|² + |B|²), the coupling at resonance.
    pub fn coupling(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseParameters {
    Purifiable(DressedCaseParams),
    NotPurifiable,
}

impl CaseParameters {
    pub fn params(&self) -> Option<&DressedCaseParams> {
        match self {
            CaseParameters::Purifiable(p) => Some(p),
            CaseParameters::NotPurifiable => None,
        }
    }
}

/// Dressed qubit basis: eigenvectors of H_S(ε), higher level first, each
/// column phased so its last (else first) component is real positive.
pub fn dressed_basis(spec: &SystemSpec, eps: f64) -> Result<Operator> {
    let hs = spec.qubit_hamiltonian(eps);
    let (_, v) = hermitian_eig(&hs)?;
    let mut t = Operator::zeros(2, 2);
    for (col, src) in [(0usize, 1usize), (1, 0)] {
        let mut v0 = v[(0, src)];
        let mut v1 = v[(1, src)];
        let pivot = if v1.norm() > 1e-12 { v1 } else { v0 };
        let ph = pivot.conj() / pivot.norm();
        v0 *= ph;
        v1 *= ph;
        t[(0, col)] = v0;
        t[(1, col)] = v1;
    }
    Ok(t)
}

/// H′ templates of forms 1 to 4.
pub fn form_template(form: u8, a: C64, b: C64, omega_b: f64) -> Operator {
    let z = re(0.0);
    let w = re(omega_b);
    let mut h = Operator::from_row_slice(
        4,
        4,
        &[
            w,
            b,
            z,
            a,
            b.conj(),
            z,
            a,
            z,
            z,
            a,
            z,
            -b,
            a,
            z,
            -b.conj(),
            -w,
        ],
    );
    match form {
        2 => {
            h[(0, 3)] = a.conj();
            h[(2, 1)] = a.conj();
        }
        3 => {
            h[(0, 3)] = a.conj();
            h[(1, 2)] = a.conj();
        }
        4 => {
            h[(1, 2)] = -a;
            h[(2, 1)] = -a;
        }
        _ => {}
    }
    h
}

fn require_pauli_two_level(spec: &SystemSpec) -> Result<()> {
    if spec.ancilla_dim() != 2 {
        return Err(QresetError::WrongAncillaDim {
            expected: "2".into(),
            got: spec.ancilla_dim(),
        });
    }
    for s in [&spec.o_s, &spec.o_b, &spec.o_c] {
        if s.pauli_index().is_none() {
            return Err(QresetError::NoDressedForm(
                "dressed templates need Pauli operator selections".into(),
            ));
        }
    }
    Ok(())
}

/// T†HT in the dressed frame together with the constants read off it.
pub fn dressed_transform(spec: &SystemSpec, eps: f64) -> Result<(Operator, DressedCaseParams)> {
    require_pauli_two_level(spec)?;
    let t = kron(&dressed_basis(spec, eps)?, &identity(2));
    let h = hamiltonian(spec, eps)?;
    let hp = t.adjoint() * h * &t;
    let a = hp[(3, 0)];
    let b = hp[(0, 1)];
    let wb = spec.omega_b();
    for form in 1..=4u8 {
        if max_abs_diff(&form_template(form, a, b, wb), &hp) <= TEMPLATE_TOL {
            return Ok((hp, DressedCaseParams::new(a, b, form, wb)));
        }
    }
    Err(QresetError::NoDressedForm(format!(
        "dressed Hamiltonian for {} matches none of the four templates",
        case_label(spec)
    )))
}

pub fn case_label(spec: &SystemSpec) -> String {
    let l = |s: &OperatorSelector| match s.pauli_index() {
        Some(k) => format!("s{k}"),
        None => {
            let (p, t) = s.angles();
            format!("({p},{t})")
        }
    };
    format!("{}{}:{}", l(&spec.o_s), l(&spec.o_b), l(&spec.o_c))
}

/// Dressed constants of a Pauli case at its resonant field.
pub fn case_parameters(
    o_s: usize,
    o_b: usize,
    o_c: usize,
    spec: &SystemSpec,
) -> Result<CaseParameters> {
    let s = spec.clone().with_operators(o_s, o_b, o_c);
    let eps = resonant_amplitude(&s)?;
    match dressed_transform(&s, eps) {
        Ok((_, p)) if p.a.norm() > ZERO_A_TOL => Ok(CaseParameters::Purifiable(p)),
        Ok(_) | Err(QresetError::NoDressedForm(_)) => Ok(CaseParameters::NotPurifiable),
        Err(e) => Err(e),
    }
}

/// The six entries u₁₁, u₁₂, u₁₃, u₁₄, u₂₂, u₂₃.
pub fn propagator_entries(t: f64, p: &DressedCaseParams) -> [C64; 6] {
    let (a, b) = (p.a, p.b);
    let b2 = b.norm_sqr();
    let (om, wb) = (p.omega, p.omega_b);
    let (dp, dm, ep, em) = (p.delta_plus, p.delta_minus, p.eta_plus, p.eta_minus);
    let (pp, pm) = (ep * t, em * t);
    // sin(ηt)/η stays finite as η → 0.
    let sinc = |eta: f64, x: f64| if eta.abs() < 1e-300 { t } else { x.sin() / eta };
    let (sp, sm) = (sinc(ep, pp), sinc(em, pm));
    let u11 = 0.5
        * (re(dp * pp.cos() + dm * pm.cos())
            - I * ((dp * wb + 2.0 * b2 / om) * sp)
            - I * ((dm * wb - 2.0 * b2 / om) * sm));
    let u12 = b / om * (pp.cos() - pm.cos()) - I * b * 0.5 * (dp * sp + dm * sm);
    let u13 = -I * a * b / om * (sp - sm);
    let u14 = -I * a * 0.5 * (dp * sp + dm * sm);
    let u22 = 0.5
        * (re(dp * pm.cos() + dm * pp.cos()) - I * (2.0 * b2 / om * sp) + I * (2.0 * b2 / om * sm));
    let u23 = -I * a * 0.5 * (dp * sm + dm * sp);
    [u11, u12, u13, u14, u22, u23]
}

/// U(t) = exp(−iH′t) assembled from the closed-form entries.
pub fn closed_form_propagator(t: f64, p: &DressedCaseParams) -> Operator {
    let [u11, u12, u13, u14, u22, u23] = propagator_entries(t, p);
    let cj = |z: C64| z.conj();
    let rows: [[C64; 4]; 4] = match p.form {
        2 => [
            [u11, u12, u13, -u14],
            [-u12, u22, u23, u13],
            [u13, -u23, cj(u22), -cj(u12)],
            [u14, u13, cj(u12), cj(u11)],
        ],
        3 => [
            [u11, u12, u13, -u14],
            [-u12, u22, -u23, u13],
            [u13, u23, cj(u22), -cj(u12)],
            [u14, u13, cj(u12), cj(u11)],
        ],
        4 => [
            [u11, u12, u13, u14],
            [-u12, u22, -u23, u13],
            [u13, -u23, cj(u22), cj(u12)],
            [u14, u13, cj(u12), cj(u11)],
        ],
        _ => [
            [u11, u12, u13, u14],
            [u12, u22, u23, u13],
            [u13, u23, cj(u22), cj(u12)],
            [u14, u13, cj(u12), cj(u11)],
        ],
    };
    Operator::from_fn(4, 4, |i, j| rows[i][j])
}

/// Populations and coherence, ρ = [[p_e, γ], [γ*, p_g]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitInit {
    pub p_g: f64,
    pub p_e: f64,
    pub gamma: C64,
}

impl QubitInit {
    pub fn purity(&self) -> f64 {
        self.p_g * self.p_g + self.p_e * self.p_e + 2.0 * self.gamma.norm_sqr()
    }

    pub fn density(&self) -> Operator {
        Operator::from_row_slice(
            2,
            2,
            &[re(self.p_e), self.gamma, self.gamma.conj(), re(self.p_g)],
        )
    }

    pub fn from_density(rho: &Operator) -> Self {
        QubitInit {
            p_g: rho[(1, 1)].re,
            p_e: rho[(0, 0)].re,
            gamma: rho[(0, 1)],
        }
    }
}

/// Approximate purity evolution for a thermal ancilla.
pub fn approx_purity_eta(t: f64, eta: f64, qubit: &QubitInit, ancilla: &QubitInit) -> Result<f64> {
    if ancilla.gamma.norm() > 1e-12 {
        return Err(QresetError::AncillaNotThermal);
    }
    let c2 = (eta * t).cos().powi(2);
    let s2 = 1.0 - c2;
    let (sg, se) = (qubit.p_g, qubit.p_e);
    let (bg, be) = (ancilla.p_g, ancilla.p_e);
    let first = sg * bg + sg * be * c2 + se * bg * s2;
    let second = se * be + sg * be * s2 + se * bg * c2;
    Ok(first * first + second * second + 2.0 * qubit.gamma.norm_sqr() * c2)
}

/// Approximate purity at time t for the Pauli case of `spec`, with the
/// qubit populations given in the dressed frame.
pub fn approx_purity(t: f64, spec: &SystemSpec, qubit: &QubitInit) -> Result<f64> {
    let p = spec_case_params(spec)?;
    let anc = QubitInit::from_density(&ancilla_thermal(spec)?);
    approx_purity_eta(t, p.eta_minus, qubit, &anc)
}

fn spec_case_params(spec: &SystemSpec) -> Result<DressedCaseParams> {
    let eps = resonant_amplitude(spec)?;
    let (_, p) = dressed_transform(spec, eps)?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaTmin {
    pub eta_exact: f64,
    pub eta_approx: f64,
    /// π/(2η₋).
    pub t_min: f64,
    /// π/(2|A|).
    pub t_min_approx: f64,
}

pub fn eta_and_tmin(p: &DressedCaseParams) -> Result<EtaTmin> {
    let a = p.a.norm();
    if a <= ZERO_A_TOL {
        return Err(QresetError::NoPurification(
            "anti-diagonal amplitude A vanishes".into(),
        ));
    }
    Ok(EtaTmin {
        eta_exact: p.eta_minus,
        eta_approx: a,
        t_min: PI / (2.0 * p.eta_minus),
        t_min_approx: PI / (2.0 * a),
    })
}

/// The three analytic reset times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TminClass {
    /// π/(2J)
    T1,
    /// π/(2J)·ω_B/ω_S
    T2,
    /// π/(2J)·ω_B/√(ω_B²−ω_S²)
    T3,
}

impl TminClass {
    pub fn label(&self) -> &'static str {
        match self {
            TminClass::T1 => "T1",
            TminClass::T2 => "T2",
            TminClass::T3 => "T3",
        }
    }

    pub fn factor(&self, omega_s: f64, omega_b: f64) -> f64 {
        match self {
            TminClass::T1 => 1.0,
            TminClass::T2 => omega_b / omega_s,
            TminClass::T3 => omega_b / (omega_b * omega_b - omega_s * omega_s).sqrt(),
        }
    }
}

/// How the coupling of a spec is read when converting to a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitConvention {
    /// `j` holds the quoted J/(2π); the formulas are evaluated with J ↦ j/(2π).
    TableI,
    /// `j` is the angular coupling with ħ = 1.
    AngularHbar1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledTime {
    pub class: TminClass,
    pub time: f64,
}

pub fn analytic_tmin_class(
    o_s: usize,
    o_b: usize,
    o_c: usize,
    spec: &SystemSpec,
    convention: UnitConvention,
) -> Result<LabeledTime> {
    let p = match case_parameters(o_s, o_b, o_c, spec)? {
        CaseParameters::Purifiable(p) => p,
        CaseParameters::NotPurifiable => {
            return Err(QresetError::NoPurification(format!(
                "case s{o_s}s{o_b}:s{o_c}"
            )))
        }
    };
    let (ws, wb, j) = (spec.omega_s, spec.omega_b(), spec.j);
    let a = p.a.norm();
    let class = [TminClass::T1, TminClass::T2, TminClass::T3]
        .into_iter()
        .min_by(|x, y| {
            let dx = (a - j / x.factor(ws, wb)).abs();
            let dy = (a - j / y.factor(ws, wb)).abs();
            dx.total_cmp(&dy)
        })
        .unwrap();
    let j_eff = match convention {
        UnitConvention::TableI => j / (2.0 * PI),
        UnitConvention::AngularHbar1 => j,
    };
    Ok(LabeledTime {
        class,
        time: PI / (2.0 * j_eff) * class.factor(ws, wb),
    })
}

/// Device parameters quoted as ω/(2π) and J/(2π), in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceSet {
    pub f_s: f64,
    pub f_b: f64,
    pub f_j: f64,
}

pub const TABLE_I_SETS: [DeviceSet; 3] = [
    DeviceSet {
        f_s: 12.8,
        f_b: 16.1,
        f_j: 0.065,
    },
    DeviceSet {
        f_s: 9.8,
        f_b: 16.1,
        f_j: 0.2,
    },
    DeviceSet {
        f_s: 15.8,
        f_b: 16.1,
        f_j: 0.025,
    },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableIRow {
    pub o_s: usize,
    pub o_b: usize,
    pub o_c: usize,
    pub classes: Vec<TminClass>,
    /// Reset time in ns for each device set.
    pub times_ns: Vec<f64>,
}

/// Reset times of every purifiable Pauli case for each device set, in
/// lexicographic (O_S, O_B, O_c) order.
pub fn table_i(sets: &[DeviceSet], convention: UnitConvention) -> Result<Vec<TableIRow>> {
    let mut rows = Vec::new();
    for o_s in 1..=3 {
        for o_b in 1..=3 {
            for o_c in 1..=3 {
                let mut classes = Vec::new();
                let mut times = Vec::new();
                for set in sets {
                    let scale = match convention {
                        UnitConvention::TableI => 1.0,
                        UnitConvention::AngularHbar1 => 2.0 * PI,
                    };
                    let spec = SystemSpec::two_level(
                        set.f_s * scale,
                        set.f_b * scale,
                        set.f_j * scale,
                        1.0,
                    )
                    .with_operators(o_s, o_b, o_c);
                    match analytic_tmin_class(o_s, o_b, o_c, &spec, convention) {
                        Ok(lt) => {
                            classes.push(lt.class);
                            times.push(lt.time);
                        }
                        Err(QresetError::NoPurification(_)) => break,
                        Err(e) => return Err(e),
                    }
                }
                if times.len() == sets.len() {
                    rows.push(TableIRow {
                        o_s,
                        o_b,
                        o_c,
                        classes,
                        times_ns: times,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn table_i_csv(rows: &[TableIRow]) -> String {
    let n = rows.first().map(|r| r.times_ns.len()).unwrap_or(0);
    let mut out = String::from("o_s,o_b,o_c");
    for k in 0..n {
        out.push_str(&format!(",set{}_ns", k + 1));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("s{},s{},s{}", r.o_s, r.o_b, r.o_c));
        for t in &r.times_ns {
            out.push_str(&format!(",{}", fmt12(*t)));
        }
        out.push('\n');
    }
    out
}

/// Qubit purity on a time grid with its maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub peak_time: f64,
    pub peak_value: f64,
    /// Vertex of the parabola through the samples around the maximum.
    pub refined_peak_time: f64,
    pub refined_peak_value: f64,
}

fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let denom = (x[0] - x[1]) * (x[0] - x[2]) * (x[1] - x[2]);
    if denom == 0.0 {
        return None;
    }
    let a = (x[2] * (y[1] - y[0]) + x[1] * (y[0] - y[2]) + x[0] * (y[2] - y[1])) / denom;
    let b =
        (x[2] * x[2] * (y[0] - y[1]) + x[1] * x[1] * (y[2] - y[0]) + x[0] * x[0] * (y[1] - y[2]))
            / denom;
    let cc = (x[1] * x[2] * (x[1] - x[2]) * y[0]
        + x[2] * x[0] * (x[2] - x[0]) * y[1]
        + x[0] * x[1] * (x[0] - x[1]) * y[2])
        / denom;
    if a >= 0.0 {
        return None;
    }
    let xv = -b / (2.0 * a);
    if xv < x[0] || xv > x[2] {
        return None;
    }
    Some((xv, cc - b * b / (4.0 * a)))
}

impl PurityCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Self {
        let mut best = 0;
        for (i, &v) in values.iter().enumerate() {
            if v > values[best] {
                best = i;
            }
        }
        let (rt, rv) = Self::refine_at(&times, &values, best);
        PurityCurve {
            peak_time: times[best],
            peak_value: values[best],
            refined_peak_time: rt,
            refined_peak_value: rv,
            times,
            values,
        }
    }

    fn refine_at(times: &[f64], values: &[f64], i: usize) -> (f64, f64) {
        if i == 0 || i + 1 >= values.len() {
            return (times[i], values[i]);
        }
        parabolic_vertex(
            [times[i - 1], times[i], times[i + 1]],
            [values[i - 1], values[i], values[i + 1]],
        )
        .unwrap_or((times[i], values[i]))
    }

    /// First local maximum reaching `frac` of the total gain max − initial,
    /// refined parabolically. None when the purity never rises.
    pub fn first_significant_peak(&self, frac: f64) -> Option<(f64, f64)> {
        let p0 = self.values[0];
        let gain = self.peak_value - p0;
        if gain <= 1e-9 {
            return None;
        }
        let level = p0 + frac * gain;
        let n = self.values.len();
        for i in 1..n {
            let v = self.values[i];
            let left = v >= self.values[i - 1];
            let right = i + 1 == n || v >= self.values[i + 1];
            if left && right && v >= level {
                return Some(Self::refine_at(&self.times, &self.values, i));
            }
        }
        None
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,purity\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", fmt12(*t), fmt12(*v)));
        }
        out
    }
}

/// n equally spaced points on [0, t_max].
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

/// Exact piecewise propagation of ρ₀ sampled on `times`.
pub fn simulate_purity(
    spec: &SystemSpec,
    pulse: &PulseSchedule,
    rho0: &Operator,
    times: &[f64],
) -> Result<PurityCurve> {
    let d = spec.ancilla_dim();
    if rho0.nrows() != 2 * d {
        return Err(QresetError::DimensionMismatch(format!(
            "initial state is {}x{}, expected {}x{}",
            rho0.nrows(),
            rho0.ncols(),
            2 * d,
            2 * d
        )));
    }
    check_density(rho0)?;
    if times.is_empty() {
        return Err(QresetError::InvalidInput("empty time grid".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times[0] < 0.0 {
        return Err(QresetError::InvalidInput(
            "time grid must be ascending and nonnegative".into(),
        ));
    }
    let t_end = *times.last().unwrap();
    if t_end > pulse.duration * (1.0 + 1e-12) {
        return Err(QresetError::PulseTooShort(format!(
            "grid reaches {t_end} but the pulse ends at {}",
            pulse.duration
        )));
    }
    let eng = SegmentEngine::new(spec, pulse)?;
    let n = pulse.n_segments();
    let mut boundary = vec![identity(2 * d)];
    for k in 0..n {
        let next = eng.step(k, eng.dt) * boundary.last().unwrap();
        boundary.push(next);
    }
    let values = times
        .par_iter()
        .map(|&t| {
            let k = ((t / eng.dt).floor() as usize).min(n - 1);
            let u = eng.step(k, t - k as f64 * eng.dt) * &boundary[k];
            let rho = &u * rho0 * u.adjoint();
            let rs = partial_trace(&rho, (2, d), Subsystem::KeepFirst).expect("dimension checked");
            purity_unchecked(&rs)
        })
        .collect();
    Ok(PurityCurve::new(times.to_vec(), values))
}

/// Thermal qubit (field off) times thermal ancilla.
pub fn thermal_product(spec: &SystemSpec) -> Result<Operator> {
    Ok(kron(&qubit_thermal(spec)?, &ancilla_thermal(spec)?))
}

/// Lab-frame state whose qubit factor is `qubit` in the dressed basis at
/// field `eps`, times the thermal ancilla.
pub fn dressed_product_state(spec: &SystemSpec, eps: f64, qubit: &QubitInit) -> Result<Operator> {
    let t = dressed_basis(spec, eps)?;
    let rs = &t * qubit.density() * t.adjoint();
    Ok(kron(&rs, &ancilla_thermal(spec)?))
}

/// Bloch angles of O_S, O_B and O_c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochAngles {
    pub phi_s: f64,
    pub theta_s: f64,
    pub phi_b: f64,
    pub theta_b: f64,
    pub phi_c: f64,
    pub theta_c: f64,
}

impl BlochAngles {
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 6 {
            return Err(QresetError::InvalidInput(format!(
                "expected six angles, got {}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(QresetError::InvalidInput("non-finite angle".into()));
        }
        Ok(BlochAngles {
            phi_s: v[0],
            theta_s: v[1],
            phi_b: v[2],
            theta_b: v[3],
            phi_c: v[4],
            theta_c: v[5],
        })
    }

    pub fn selectors(&self) -> [OperatorSelector; 3] {
        [
            OperatorSelector::Bloch {
                phi: self.phi_s,
                theta: self.theta_s,
            },
            OperatorSelector::Bloch {
                phi: self.phi_b,
                theta: self.theta_b,
            },
            OperatorSelector::Bloch {
                phi: self.phi_c,
                theta: self.theta_c,
            },
        ]
    }

    pub fn apply(&self, spec: &SystemSpec) -> SystemSpec {
        let [o_s, o_b, o_c] = self.selectors();
        SystemSpec {
            o_s,
            o_b,
            o_c,
            ..spec.clone()
        }
    }
}

/// Constants of the dressed Hamiltonian for arbitrary operator directions.
/// Γ subscripts follow ω±, superscripts the sign inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralAngleParams {
    pub a_c: C64,
    pub a_s: C64,
    pub a_bar: C64,
    pub b_c_plus: f64,
    pub b_c_minus: f64,
    pub b_s_plus: f64,
    pub b_s_minus: f64,
    pub xi: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub gamma_plus_plus: f64,
    pub gamma_plus_minus: f64,
    pub gamma_minus_plus: f64,
    pub gamma_minus_minus: f64,
    /// Γ₊⁺ or Γ₋⁺ vanishes; the B entries are then limits along sin θ_c = 0.
    pub singular: bool,
    /// max |H′_gen − T†HT| when H′_gen could be assembled.
    pub h_prime_residual: Option<f64>,
    pub omega_b: f64,
    pub phi_b: f64,
}

const GENERAL_TOL: f64 = 1e-9;

pub fn abar_general(
    angles: &BlochAngles,
    spec: &SystemSpec,
    eps: f64,
) -> Result<GeneralAngleParams> {
    if spec.ancilla_dim() != 2 {
        return Err(QresetError::WrongAncillaDim {
            expected: "2".into(),
            got: spec.ancilla_dim(),
        });
    }
    let BlochAngles {
        phi_s,
        theta_s,
        phi_b,
        theta_b,
        phi_c,
        theta_c,
    } = *angles;
    let (ws, wb, j) = (spec.omega_s, spec.omega_b(), spec.j);
    let (st, ct) = theta_c.sin_cos();
    let dphi = phi_c - phi_s;
    let wp = 2.0 * eps * ct + ws + wb;
    let wm = 2.0 * eps * ct + ws - wb;
    let e2s2 = 4.0 * eps * eps * st * st;
    let gpp = e2s2 + wp * wp;
    let gpm = e2s2 - wp * wp;
    let gmp = e2s2 + wm * wm;
    let gmm = e2s2 - wm * wm;
    let xi = 4.0 * eps * theta_s.sin() * st * dphi.cos();
    let a_bar = c(
        j * ((wp + wm) / (2.0 * wb) * theta_s.sin() * dphi.cos()
            - 2.0 * eps * theta_s.cos() * st / wb),
        -j * theta_s.sin() * dphi.sin(),
    );
    let a_c = a_bar * theta_b.cos();
    let a_s = a_bar * theta_b.sin();
    let scale = wb * wb;
    let singular = gpp <= 1e-12 * scale || gmp <= 1e-12 * scale;
    let b_pair = |gp: f64, gm: f64, w: f64| -> (f64, f64) {
        if gp <= 1e-12 * scale {
            (
                -j * theta_b.cos() * theta_s.cos(),
                j * theta_b.sin() * theta_s.cos(),
            )
        } else {
            (
                j * theta_b.cos() / gp * (theta_s.cos() * gm - xi * w),
                j * theta_b.sin() / gp * (-theta_s.cos() * gm + xi * w),
            )
        }
    };
    let (b_c_plus, b_s_plus) = b_pair(gpp, gpm, wp);
    let (b_c_minus, b_s_minus) = b_pair(gmp, gmm, wm);
    let mut out = GeneralAngleParams {
        a_c,
        a_s,
        a_bar,
        b_c_plus,
        b_c_minus,
        b_s_plus,
        b_s_minus,
        xi,
        omega_plus: wp,
        omega_minus: wm,
        gamma_plus_plus: gpp,
        gamma_plus_minus: gpm,
        gamma_minus_plus: gmp,
        gamma_minus_minus: gmm,
        singular,
        h_prime_residual: None,
        omega_b: wb,
        phi_b,
    };
    if !singular {
        let hg = general_hamiltonian(&out)?;
        let s = angles.apply(spec);
        let t = kron(&dressed_basis(&s, eps)?, &identity(2));
        let hp = t.adjoint() * hamiltonian(&s, eps)? * &t;
        let r = max_abs_diff(&hg, &hp);
        if r > GENERAL_TOL {
            return Err(QresetError::DecompositionFailure(format!(
                "generalized dressed Hamiltonian deviates by {r:.3e}"
            )));
        }
        out.h_prime_residual = Some(r);
    }
    Ok(out)
}

/// Generalized dressed Hamiltonian H′_gen.
pub fn general_hamiltonian(p: &GeneralAngleParams) -> Result<Operator> {
    if p.singular {
        return Err(QresetError::SingularAngleConfiguration(format!(
            "Γ₊⁺ = {:.3e}, Γ₋⁺ = {:.3e}",
            p.gamma_plus_plus, p.gamma_minus_plus
        )));
    }
    let e = Complex64::from_polar(1.0, p.phi_b);
    let ei = e.conj();
    let (ac, as_) = (p.a_c, p.a_s);
    let wb = p.omega_b;
    let rows = [
        [
            re(wb - p.b_c_plus),
            ei * p.b_s_plus,
            ac.conj(),
            as_.conj() * ei,
        ],
        [e * p.b_s_plus, re(p.b_c_plus), as_.conj() * e, -ac.conj()],
        [ac, as_ * ei, re(-p.b_c_minus), ei * p.b_s_minus],
        [as_ * e, -ac, e * p.b_s_minus, re(-wb + p.b_c_minus)],
    ];
    Ok(Operator::from_fn(4, 4, |i, k| rows[i][k]))
}

/// ‖[O_S, O_c]‖_F / (2√2).
pub fn commutator_measure(o_s: &OperatorSelector, o_c: &OperatorSelector) -> f64 {
    frobenius(&commutator(&operator_of(o_s), &operator_of(o_c))) / (2.0 * SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatBound {
    pub c: f64,
    pub q_dot: f64,
    pub bound: f64,
}

/// Instantaneous heat current tr{ρ̇_S H_S} and its commutator bound.
pub fn commutator_measure_and_heat_bound(
    o_s: &OperatorSelector,
    o_c: &OperatorSelector,
    spec: &SystemSpec,
    eps: f64,
    rho: &Operator,
) -> Result<HeatBound> {
    if spec.ancilla_dim() != 2 {
        return Err(QresetError::WrongAncillaDim {
            expected: "2".into(),
            got: spec.ancilla_dim(),
        });
    }
    if rho.nrows() != 4 {
        return Err(QresetError::DimensionMismatch(
            "expected a 4x4 joint state".into(),
        ));
    }
    let s = SystemSpec {
        o_s: *o_s,
        o_c: *o_c,
        ..spec.clone()
    };
    let h = hamiltonian(&s, eps)?;
    let rho_dot = commutator(&h, rho) * c(0.0, -1.0);
    let rs_dot = partial_trace(&rho_dot, (2, 2), Subsystem::KeepFirst)?;
    let q_dot = (rs_dot * s.qubit_hamiltonian(eps)).trace().re;
    let os = operator_of(o_s);
    let n1 = frobenius(&commutator(&os, &operator_of(o_c)));
    let n2 = frobenius(&commutator(&pauli(3), &os));
    Ok(HeatBound {
        c: n1 / (2.0 * SQRT_2),
        q_dot,
        bound: SQRT_2 * spec.j * (eps.abs() * n1 + 0.5 * spec.omega_s * n2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanAxis {
    PhiS,
    ThetaS,
    PhiB,
    ThetaB,
    PhiC,
    ThetaC,
}

impl ScanAxis {
    pub fn range(&self) -> f64 {
        match self {
            ScanAxis::PhiS | ScanAxis::PhiB | ScanAxis::PhiC => 2.0 * PI,
            _ => PI,
        }
    }

    fn set(&self, a: &mut BlochAngles, x: f64) {
        match self {
            ScanAxis::PhiS => a.phi_s = x,
            ScanAxis::ThetaS => a.theta_s = x,
            ScanAxis::PhiB => a.phi_b = x,
            ScanAxis::ThetaB => a.theta_b = x,
            ScanAxis::PhiC => a.phi_c = x,
            ScanAxis::ThetaC => a.theta_c = x,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "phi_s" => ScanAxis::PhiS,
            "theta_s" => ScanAxis::ThetaS,
            "phi_b" => ScanAxis::PhiB,
            "theta_b" => ScanAxis::ThetaB,
            "phi_c" => ScanAxis::PhiC,
            "theta_c" => ScanAxis::ThetaC,
            _ => {
                return Err(QresetError::InvalidInput(format!(
                    "unknown scan axis `{s}`"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleScanRow {
    pub angle: f64,
    pub abs_abar: f64,
    pub inv_tmin: f64,
    pub c: f64,
}

/// Window, in units of π/(2J), searched for the first purity peak.
pub const TMIN_WINDOW: f64 = 12.0;
const TMIN_DT: f64 = 0.05;
const PEAK_FRACTION: f64 = 0.9;

/// Time of the first significant purity peak under a constant resonant
/// field, starting from the thermal product state.
pub fn numeric_tmin(spec: &SystemSpec) -> Result<Option<f64>> {
    let eps = resonant_amplitude(spec)?;
    let t_max = TMIN_WINDOW * PI / (2.0 * spec.j);
    let n = ((t_max / TMIN_DT).ceil() as usize).max(64) + 1;
    let pulse = PulseSchedule::constant(t_max, eps, 1)?;
    let curve = simulate_purity(
        spec,
        &pulse,
        &thermal_product(spec)?,
        &uniform_grid(t_max, n),
    )?;
    Ok(curve.first_significant_peak(PEAK_FRACTION).map(|(t, _)| t))
}

/// Sweep one angle over its range on `grid_n` points (ends included).
pub fn angle_scan(
    axis: ScanAxis,
    fixed: &BlochAngles,
    spec: &SystemSpec,
    grid_n: usize,
) -> Result<Vec<AngleScanRow>> {
    if grid_n < 16 {
        return Err(QresetError::InvalidInput(format!(
            "grid_n must be at least 16, got {grid_n}"
        )));
    }
    if spec.j <= 0.0 {
        return Err(QresetError::InvalidCoupling(spec.j));
    }
    let xs = uniform_grid(axis.range(), grid_n);
    xs.par_iter()
        .map(|&x| {
            let mut a = *fixed;
            axis.set(&mut a, x);
            let s = a.apply(spec);
            let eps = resonant_amplitude_for(s.omega_s, s.omega_b(), &s.o_c)?;
            let g = abar_general(&a, &s, eps)?;
            let inv = numeric_tmin(&s)?.map(|t| if t > 0.0 { 1.0 / t } else { 0.0 });
            Ok(AngleScanRow {
                angle: x,
                abs_abar: g.a_bar.norm(),
                inv_tmin: inv.unwrap_or(0.0),
                c: commutator_measure(&s.o_s, &s.o_c),
            })
        })
        .collect()
}

pub fn angle_scan_csv(rows: &[AngleScanRow]) -> String {
    let mut out = String::from("angle,abs_abar,inv_tmin,c\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt12(r.angle),
            fmt12(r.abs_abar),
            fmt12(r.inv_tmin),
            fmt12(r.c)
        ));
    }
    out
}

/// First index attaining the maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LociComparison {
    pub theta_s: f64,
    pub abar_max: f64,
    pub c_max: f64,
    /// Grid points (θ_c, φ_c − φ_S) where |Ā|/J attains its maximum.
    pub abar_locus: Vec<(f64, f64)>,
    pub c_locus: Vec<(f64, f64)>,
    pub coincide: bool,
}

const LOCUS_TOL: f64 = 1e-9;

/// Maxima loci of |Ā|/J and C over (θ_c, φ_c − φ_S) with θ_B = π/2.
pub fn abar_c_loci(theta_s: f64, spec: &SystemSpec, grid_n: usize) -> Result<LociComparison> {
    if grid_n < 16 {
        return Err(QresetError::InvalidInput(format!(
            "grid_n must be at least 16, got {grid_n}"
        )));
    }
    if spec.j <= 0.0 {
        return Err(QresetError::InvalidCoupling(spec.j));
    }
    let thetas = uniform_grid(PI, grid_n);
    let deltas = uniform_grid(2.0 * PI, grid_n);
    let rows: Vec<Vec<(f64, f64, f64, f64)>> = thetas
        .par_iter()
        .map(|&tc| {
            let sel = OperatorSelector::Bloch {
                phi: 0.0,
                theta: tc,
            };
            let eps = resonant_amplitude_for(spec.omega_s, spec.omega_b(), &sel)?;
            deltas
                .iter()
                .map(|&dl| {
                    let a = BlochAngles {
                        phi_s: 0.0,
                        theta_s,
                        phi_b: 0.0,
                        theta_b: PI / 2.0,
                        phi_c: dl,
                        theta_c: tc,
                    };
                    let s = a.apply(spec);
                    let g = abar_general(&a, &s, eps)?;
                    Ok((
                        tc,
                        dl,
                        g.a_bar.norm() / spec.j,
                        commutator_measure(&s.o_s, &s.o_c),
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<(f64, f64, f64, f64)> = rows.into_iter().flatten().collect();
    let abar_max = flat.iter().fold(0.0f64, |m, r| m.max(r.2));
    let c_max = flat.iter().fold(0.0f64, |m, r| m.max(r.3));
    let abar_locus: Vec<(f64, f64)> = flat
        .iter()
        .filter(|r| r.2 >= abar_max - LOCUS_TOL)
        .map(|r| (r.0, r.1))
        .collect();
    let c_locus: Vec<(f64, f64)> = flat
        .iter()
        .filter(|r| r.3 >= c_max - LOCUS_TOL)
        .map(|r| (r.0, r.1))
        .collect();
    let coincide = abar_locus == c_locus;
    Ok(LociComparison {
        theta_s,
        abar_max,
        c_max,
        abar_locus,
        c_locus,
        coincide,
    })
}
