//! System specifications, operator selectors, thermal states and Hamiltonians.

use serde::{Deserialize, Serialize};

use crate::error::{QresetError, Result};
use crate::operator::{check_hermitian, identity, kron, pauli, re, spectral_map, trace, Operator};

/// A qubit operator given either by Pauli index or by Bloch angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SelectorRepr", into = "SelectorRepr")]
pub enum OperatorSelector {
    Pauli(u8),
    Bloch { phi: f64, theta: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectorRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pauli: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

impl TryFrom<SelectorRepr> for OperatorSelector {
    type Error = String;

    fn try_from(r: SelectorRepr) -> std::result::Result<Self, String> {
        match (r.pauli, r.phi, r.theta) {
            (Some(k), None, None) => {
                let sel = OperatorSelector::Pauli(k);
                sel.validate().map_err(|e| e.to_string())?;
                Ok(sel)
            }
            (None, Some(phi), Some(theta)) => {
                let sel = OperatorSelector::Bloch { phi, theta };
                sel.validate().map_err(|e| e.to_string())?;
                Ok(sel)
            }
            _ => Err("selector needs either `pauli` or both `phi` and `theta`".into()),
        }
    }
}

impl From<OperatorSelector> for SelectorRepr {
    fn from(s: OperatorSelector) -> Self {
        match s {
            OperatorSelector::Pauli(k) => SelectorRepr {
                pauli: Some(k),
                phi: None,
                theta: None,
            },
            OperatorSelector::Bloch { phi, theta } => SelectorRepr {
                pauli: None,
                phi: Some(phi),
                theta: Some(theta),
            },
        }
    }
}

impl OperatorSelector {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OperatorSelector::Pauli(k) if (1..=3).contains(&k) => Ok(()),
            OperatorSelector::Pauli(k) => Err(QresetError::InvalidInput(format!(
                "pauli index {k} not in 1..=3"
            ))),
            OperatorSelector::Bloch { phi, theta } => {
                if !(phi.is_finite() && theta.is_finite()) {
                    return Err(QresetError::InvalidInput("non-finite Bloch angle".into()));
                }
                Ok(())
            }
        }
    }

    /// Bloch angles (φ, θ) of the selector.
    pub fn angles(&self) -> (f64, f64) {
        use std::f64::consts::FRAC_PI_2;
        match *self {
            OperatorSelector::Pauli(1) => (0.0, FRAC_PI_2),
            OperatorSelector::Pauli(2) => (FRAC_PI_2, FRAC_PI_2),
            OperatorSelector::Pauli(_) => (0.0, 0.0),
            OperatorSelector::Bloch { phi, theta } => (phi, theta),
        }
    }

    /// Unit Bloch vector n with O = n·σ.
    pub fn bloch_vector(&self) -> [f64; 3] {
        match *self {
            OperatorSelector::Pauli(1) => [1.0, 0.0, 0.0],
            OperatorSelector::Pauli(2) => [0.0, 1.0, 0.0],
            OperatorSelector::Pauli(_) => [0.0, 0.0, 1.0],
            OperatorSelector::Bloch { phi, theta } => [
                phi.cos() * theta.sin(),
                phi.sin() * theta.sin(),
                theta.cos(),
            ],
        }
    }

    pub fn pauli_index(&self) -> Option<usize> {
        match *self {
            OperatorSelector::Pauli(k) => Some(k as usize),
            _ => None,
        }
    }
}

/// O(φ, θ) = cos φ sin θ σ₁ + sin φ sin θ σ₂ + cos θ σ₃.
pub fn operator_of(sel: &OperatorSelector) -> Operator {
    if let OperatorSelector::Pauli(k) = *sel {
        return pauli(k as usize);
    }
    let n = sel.bloch_vector();
    pauli(1) * re(n[0]) + pauli(2) * re(n[1]) + pauli(3) * re(n[2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub omega_s: f64,
    /// Ancilla level energies, ground level first.
    pub ancilla_levels: Vec<f64>,
    pub j: f64,
    pub beta: f64,
    pub o_s: OperatorSelector,
    pub o_b: OperatorSelector,
    pub o_c: OperatorSelector,
}

impl SystemSpec {
    pub fn two_level(omega_s: f64, omega_b: f64, j: f64, beta: f64) -> Self {
        SystemSpec {
            omega_s,
            ancilla_levels: vec![-omega_b / 2.0, omega_b / 2.0],
            j,
            beta,
            o_s: OperatorSelector::Pauli(1),
            o_b: OperatorSelector::Pauli(1),
            o_c: OperatorSelector::Pauli(1),
        }
    }

    /// Qudit ancilla from successive gaps; level 1 sits at zero energy.
    pub fn qudit(omega_s: f64, gaps: &[f64], j: f64, beta: f64) -> Self {
        let mut levels = vec![0.0];
        for g in gaps {
            let last = *levels.last().unwrap();
            levels.push(last + g);
        }
        let shift = gaps.first().copied().unwrap_or(0.0);
        for l in levels.iter_mut() {
            *l -= shift;
        }
        SystemSpec {
            ancilla_levels: levels,
            ..SystemSpec::two_level(omega_s, 1.0, j, beta)
        }
    }

    pub fn with_operators(mut self, o_s: usize, o_b: usize, o_c: usize) -> Self {
        self.o_s = OperatorSelector::Pauli(o_s as u8);
        self.o_b = OperatorSelector::Pauli(o_b as u8);
        self.o_c = OperatorSelector::Pauli(o_c as u8);
        self
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: SystemSpec =
            serde_json::from_str(text).map_err(|e| QresetError::MalformedJson {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(QresetError::InvalidInput(m));
        if !(self.omega_s > 0.0 && self.omega_s.is_finite()) {
            return bad(format!("omega_s must be positive, got {}", self.omega_s));
        }
        if !(self.j >= 0.0 && self.j.is_finite()) {
            return bad(format!("j must be non-negative, got {}", self.j));
        }
        if self.beta < 0.0 {
            return Err(QresetError::NegativeBeta(self.beta));
        }
        if !self.beta.is_finite() {
            return bad("beta must be finite".into());
        }
        if self.ancilla_levels.len() < 2 {
            return bad("ancilla needs at least two levels".into());
        }
        for w in self.ancilla_levels.windows(2) {
            if !w[1].is_finite() || !w[0].is_finite() || w[1] <= w[0] {
                return bad("ancilla_levels must be strictly ascending".into());
            }
        }
        self.o_s.validate()?;
        self.o_b.validate()?;
        self.o_c.validate()
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_levels.len()
    }

    /// Gap between the two lowest ancilla levels.
    pub fn omega_b(&self) -> f64 {
        self.ancilla_levels[1] - self.ancilla_levels[0]
    }

    /// Ancilla Hamiltonian in the descending basis {|d−1⟩, …, |0⟩}.
    pub fn ancilla_hamiltonian(&self) -> Operator {
        let d = self.ancilla_dim();
        if d == 2 {
            return pauli(3) * re(self.omega_b() / 2.0);
        }
        Operator::from_fn(d, d, |i, k| {
            if i == k {
                re(self.ancilla_levels[d - 1 - i])
            } else {
                re(0.0)
            }
        })
    }

    pub fn qubit_hamiltonian(&self, eps: f64) -> Operator {
        pauli(3) * re(self.omega_s / 2.0) + operator_of(&self.o_c) * re(eps)
    }
}

/// exp(−βH)/Z.
pub fn thermal_state(h: &Operator, beta: f64) -> Result<Operator> {
    if beta < 0.0 {
        return Err(QresetError::NegativeBeta(beta));
    }
    check_hermitian(h)?;
    let lo = crate::operator::hermitian_eig(h)?.0[0];
    let un = spectral_map(h, |l| re((-beta * (l - lo)).exp()))?;
    let z = trace(&un);
    Ok(un / z)
}

pub fn qubit_thermal(spec: &SystemSpec) -> Result<Operator> {
    thermal_state(&(pauli(3) * re(spec.omega_s / 2.0)), spec.beta)
}

pub fn ancilla_thermal(spec: &SystemSpec) -> Result<Operator> {
    thermal_state(&spec.ancilla_hamiltonian(), spec.beta)
}

/// Truncated lowering operator in the descending basis.
pub fn lowering(d: usize) -> Operator {
    let mut a = Operator::zeros(d, d);
    for i in 0..d - 1 {
        a[(i + 1, i)] = re(((d - 1 - i) as f64).sqrt());
    }
    a
}

/// Drift part of the joint Hamiltonian (field off), any ancilla dimension.
pub fn drift(spec: &SystemSpec) -> Result<Operator> {
    spec.validate()?;
    let d = spec.ancilla_dim();
    let hs = pauli(3) * re(spec.omega_s / 2.0);
    let coupling = if d == 2 {
        kron(&operator_of(&spec.o_s), &operator_of(&spec.o_b))
    } else {
        let a = lowering(d);
        kron(&operator_of(&spec.o_s), &(&a + a.adjoint()))
    };
    Ok(kron(&hs, &identity(d))
        + kron(&identity(2), &spec.ancilla_hamiltonian())
        + coupling * re(spec.j))
}

/// Field operator O_c ⊗ 𝟙 multiplying ε.
pub fn control_operator(spec: &SystemSpec, sel: &OperatorSelector) -> Operator {
    kron(&operator_of(sel), &identity(spec.ancilla_dim()))
}

pub fn build_hamiltonian(spec: &SystemSpec, eps: f64) -> Result<Operator> {
    if spec.ancilla_dim() != 2 {
        return Err(QresetError::WrongAncillaDim {
            expected: "2".into(),
            got: spec.ancilla_dim(),
        });
    }
    Ok(drift(spec)? + control_operator(spec, &spec.o_c) * re(eps))
}

pub fn build_qudit_hamiltonian(spec: &SystemSpec, eps: f64) -> Result<Operator> {
    if spec.ancilla_dim() < 3 {
        return Err(QresetError::WrongAncillaDim {
            expected: ">= 3".into(),
            got: spec.ancilla_dim(),
        });
    }
    Ok(drift(spec)? + control_operator(spec, &spec.o_c) * re(eps))
}

/// Joint Hamiltonian for either ancilla kind.
pub fn hamiltonian(spec: &SystemSpec, eps: f64) -> Result<Operator> {
    Ok(drift(spec)? + control_operator(spec, &spec.o_c) * re(eps))
}

/// Splitting of the dressed qubit levels at field amplitude `eps`.
pub fn dressed_splitting(omega_s: f64, sel: &OperatorSelector, eps: f64) -> f64 {
    let n = sel.bloch_vector();
    let z = omega_s / 2.0 + eps * n[2];
    let t2 = eps * eps * (n[0] * n[0] + n[1] * n[1]);
    2.0 * (z * z + t2).sqrt()
}

/// Smallest ε ≥ 0 at which the dressed qubit splitting equals the ancilla 0↔1 gap.
pub fn resonant_amplitude(spec: &SystemSpec) -> Result<f64> {
    resonant_amplitude_for(spec.omega_s, spec.omega_b(), &spec.o_c)
}

pub fn resonant_amplitude_for(omega_s: f64, omega_b: f64, sel: &OperatorSelector) -> Result<f64> {
    let f = |e: f64| dressed_splitting(omega_s, sel, e) - omega_b;
    let scale = omega_b.abs().max(omega_s.abs());
    if f(0.0).abs() <= 1e-12 * scale {
        return Ok(0.0);
    }
    let upper = (omega_b + omega_s) / 2.0 + 1.0;
    let steps = 4096;
    let h = upper / steps as f64;
    let mut lo = 0.0;
    let mut flo = f(0.0);
    for k in 1..=steps {
        let x = k as f64 * h;
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() != flo.signum() {
            let mut a = lo;
            let mut b = x;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm.signum() == flo.signum() {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-15 * scale.max(1.0) {
                    break;
                }
            }
            let root = 0.5 * (a + b);
            if f(root).abs() > 1e-10 * scale.max(1.0) {
                break;
            }
            return Ok(root);
        }
        lo = x;
        flo = fx;
    }
    Err(QresetError::NoResonance(format!(
        "splitting never reaches {omega_b} for omega_s = {omega_s}"
    )))
}
