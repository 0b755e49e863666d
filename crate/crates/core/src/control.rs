//! Piecewise-constant control fields and end-time purity maximization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QresetError, Result};
use crate::model::{control_operator, drift, resonant_amplitude, OperatorSelector, SystemSpec};
use crate::operator::{
    check_density, hermitian_eig, identity, kron, partial_trace, purity_unchecked, re, Operator,
    Subsystem, C64,
};

/// Extra field channel sharing the segment grid of the primary one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondChannel {
    pub operator: OperatorSelector,
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSchedule {
    pub duration: f64,
    pub amplitudes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<SecondChannel>,
}

impl PulseSchedule {
    pub fn new(duration: f64, amplitudes: Vec<f64>) -> Result<Self> {
        let p = PulseSchedule {
            duration,
            amplitudes,
            eps_max: None,
            second: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn constant(duration: f64, eps: f64, n_segments: usize) -> Result<Self> {
        Self::new(duration, vec![eps; n_segments])
    }

    pub fn with_bound(mut self, eps_max: f64) -> Result<Self> {
        self.eps_max = Some(eps_max);
        self.validate()?;
        Ok(self)
    }

    pub fn with_second_channel(
        mut self,
        operator: OperatorSelector,
        amplitudes: Vec<f64>,
    ) -> Result<Self> {
        self.second = Some(SecondChannel {
            operator,
            amplitudes,
        });
        self.validate()?;
        Ok(self)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let p: PulseSchedule = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(QresetError::InvalidInput(format!(
                "pulse duration must be positive, got {}",
                self.duration
            )));
        }
        if self.amplitudes.is_empty() {
            return Err(QresetError::InvalidInput(
                "pulse needs at least one segment".into(),
            ));
        }
        if let Some(s) = &self.second {
            s.operator.validate()?;
            if s.amplitudes.len() != self.amplitudes.len() {
                return Err(QresetError::DimensionMismatch(format!(
                    "second channel has {} segments, primary has {}",
                    s.amplitudes.len(),
                    self.amplitudes.len()
                )));
            }
        }
        if let Some(m) = self.eps_max {
            if m.is_nan() || m < 0.0 {
                return Err(QresetError::InvalidInput(format!(
                    "amplitude bound {m} is negative"
                )));
            }
            let worst = self
                .all_amplitudes()
                .iter()
                .fold(0.0f64, |a, x| a.max(x.abs()));
            if worst > m * (1.0 + 1e-12) {
                return Err(QresetError::InvalidInput(format!(
                    "amplitude {worst} exceeds bound {m}"
                )));
            }
        }
        if self.all_amplitudes().iter().any(|x| !x.is_finite()) {
            return Err(QresetError::InvalidInput("non-finite amplitude".into()));
        }
        Ok(())
    }

    pub fn n_segments(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn segment_length(&self) -> f64 {
        self.duration / self.n_segments() as f64
    }

    pub fn n_channels(&self) -> usize {
        1 + self.second.is_some() as usize
    }

    /// Primary amplitudes followed by those of the second channel.
    pub fn all_amplitudes(&self) -> Vec<f64> {
        let mut v = self.amplitudes.clone();
        if let Some(s) = &self.second {
            v.extend_from_slice(&s.amplitudes);
        }
        v
    }

    fn set_all_amplitudes(&mut self, v: &[f64]) {
        let n = self.n_segments();
        self.amplitudes.copy_from_slice(&v[..n]);
        if let Some(s) = &mut self.second {
            s.amplitudes.copy_from_slice(&v[n..2 * n]);
        }
    }

    /// Rows (segment start time, primary amplitude[, second amplitude]).
    pub fn to_csv(&self) -> String {
        let dt = self.segment_length();
        let mut out = String::from(if self.second.is_some() {
            "t,eps,eps2\n"
        } else {
            "t,eps\n"
        });
        for k in 0..self.n_segments() {
            out.push_str(&format!(
                "{},{}",
                fmt12(k as f64 * dt),
                fmt12(self.amplitudes[k])
            ));
            if let Some(s) = &self.second {
                out.push_str(&format!(",{}", fmt12(s.amplitudes[k])));
            }
            out.push('\n');
        }
        out
    }
}

/// Twelve significant digits, '.' separator.
pub fn fmt12(x: f64) -> String {
    let v: f64 = format!("{:.11e}", x).parse().unwrap();
    format!("{}", v)
}

/// Eigendecompositions of every segment Hamiltonian.
pub(crate) struct SegmentEngine {
    pub dt: f64,
    pub vals: Vec<Vec<f64>>,
    pub vecs: Vec<Operator>,
    pub controls: Vec<Operator>,
}

impl SegmentEngine {
    pub fn new(spec: &SystemSpec, pulse: &PulseSchedule) -> Result<Self> {
        pulse.validate()?;
        let h0 = drift(spec)?;
        let mut controls = vec![control_operator(spec, &spec.o_c)];
        if let Some(s) = &pulse.second {
            controls.push(control_operator(spec, &s.operator));
        }
        let mut vals = Vec::with_capacity(pulse.n_segments());
        let mut vecs = Vec::with_capacity(pulse.n_segments());
        for k in 0..pulse.n_segments() {
            let mut h = &h0 + &controls[0] * re(pulse.amplitudes[k]);
            if let Some(s) = &pulse.second {
                h += &controls[1] * re(s.amplitudes[k]);
            }
            let (l, v) = hermitian_eig(&h)?;
            vals.push(l);
            vecs.push(v);
        }
        Ok(SegmentEngine {
            dt: pulse.segment_length(),
            vals,
            vecs,
            controls,
        })
    }

    pub fn step(&self, k: usize, t: f64) -> Operator {
        crate::operator::from_spectrum(&self.vals[k], &self.vecs[k], |l| {
            Complex64::new(0.0, -l * t).exp()
        })
    }

    /// dU_k/dε for channel `ch`, via divided differences in the eigenbasis.
    fn step_derivative(&self, k: usize, ch: usize) -> Operator {
        let v = &self.vecs[k];
        let l = &self.vals[k];
        let hc = v.adjoint() * &self.controls[ch] * v;
        let n = l.len();
        let dt = self.dt;
        let m = Operator::from_fn(n, n, |a, b| {
            let x = 0.5 * (l[a] - l[b]) * dt;
            let sinc = if x.abs() < 1e-8 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            };
            let phase = Complex64::new(0.0, -0.5 * (l[a] + l[b]) * dt).exp();
            hc[(a, b)] * phase * C64::new(0.0, -dt * sinc)
        });
        v * m * v.adjoint()
    }
}

fn qubit_purity_of(rho: &Operator, d: usize) -> f64 {
    let rs = partial_trace(rho, (2, d), Subsystem::KeepFirst).expect("joint state dimension");
    purity_unchecked(&rs)
}

fn check_joint(spec: &SystemSpec, rho0: &Operator) -> Result<usize> {
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
    Ok(d)
}

/// 𝒫_S(τ) at the end of the pulse.
pub fn final_purity(spec: &SystemSpec, rho0: &Operator, pulse: &PulseSchedule) -> Result<f64> {
    let d = check_joint(spec, rho0)?;
    let eng = SegmentEngine::new(spec, pulse)?;
    let mut rho = rho0.clone();
    for k in 0..pulse.n_segments() {
        let u = eng.step(k, eng.dt);
        rho = &u * rho * u.adjoint();
    }
    Ok(qubit_purity_of(&rho, d))
}

/// Exact gradient of 𝒫_S(τ) with respect to every amplitude, primary channel first.
pub fn pulse_gradient(
    spec: &SystemSpec,
    rho0: &Operator,
    pulse: &PulseSchedule,
) -> Result<Vec<f64>> {
    grad_and_value(spec, rho0, pulse).map(|(g, _)| g)
}

fn grad_and_value(
    spec: &SystemSpec,
    rho0: &Operator,
    pulse: &PulseSchedule,
) -> Result<(Vec<f64>, f64)> {
    let d = check_joint(spec, rho0)?;
    let eng = SegmentEngine::new(spec, pulse)?;
    let n = pulse.n_segments();
    let steps: Vec<Operator> = (0..n).map(|k| eng.step(k, eng.dt)).collect();
    let mut states = Vec::with_capacity(n + 1);
    states.push(rho0.clone());
    for u in &steps {
        let r = u * states.last().unwrap() * u.adjoint();
        states.push(r);
    }
    let rho_t = &states[n];
    let rs = partial_trace(rho_t, (2, d), Subsystem::KeepFirst)?;
    let value = purity_unchecked(&rs);
    let mut lambda = kron(&rs, &identity(d));
    let nch = pulse.n_channels();
    let mut grad = vec![0.0; n * nch];
    for k in (0..n).rev() {
        let right = &states[k] * steps[k].adjoint();
        for ch in 0..nch {
            let du = eng.step_derivative(k, ch);
            let g = (&lambda * du * &right).trace();
            grad[ch * n + k] = 4.0 * g.re;
        }
        lambda = steps[k].adjoint() * lambda * &steps[k];
    }
    Ok((grad, value))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    #[serde(default)]
    pub eps_max: Option<f64>,
    #[serde(default)]
    pub second_channel: Option<OperatorSelector>,
    /// Overrides the constant resonant guess for the primary channel.
    #[serde(default)]
    pub guess: Option<Vec<f64>>,
    pub initial_step: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            max_iter: 200,
            grad_tol: 1e-8,
            eps_max: None,
            second_channel: None,
            guess: None,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub pulse: PulseSchedule,
    pub guess_purity: f64,
    pub final_purity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub purity_history: Vec<f64>,
    /// Set when the bound forced the guess away from resonance.
    pub bound_warning: bool,
}

impl OptimizationResult {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

pub const DEFAULT_SEGMENTS: usize = 200;

fn clamp(v: &mut [f64], bound: Option<f64>) {
    if let Some(m) = bound {
        for x in v.iter_mut() {
            *x = x.clamp(-m, m);
        }
    }
}

/// Projected gradient: components pushing past an active bound are dropped.
fn projected(g: &[f64], x: &[f64], bound: Option<f64>) -> Vec<f64> {
    match bound {
        None => g.to_vec(),
        Some(m) => g
            .iter()
            .zip(x)
            .map(|(&gi, &xi)| {
                if (xi >= m && gi > 0.0) || (xi <= -m && gi < 0.0) {
                    0.0
                } else {
                    gi
                }
            })
            .collect(),
    }
}

/// Gradient ascent with backtracking on 𝒫_S(τ) over piecewise-constant fields.
pub fn optimize_pulse(
    spec: &SystemSpec,
    rho0: &Operator,
    tau: f64,
    n_segments: usize,
    opts: &OptimizeOptions,
) -> Result<OptimizationResult> {
    check_joint(spec, rho0)?;
    if n_segments == 0 {
        return Err(QresetError::InvalidInput(
            "need at least one segment".into(),
        ));
    }
    let mut primary = match &opts.guess {
        Some(g) if g.len() == n_segments => g.clone(),
        Some(g) => {
            return Err(QresetError::DimensionMismatch(format!(
                "guess has {} segments, expected {n_segments}",
                g.len()
            )))
        }
        None => vec![resonant_amplitude(spec)?; n_segments],
    };
    let mut bound_warning = false;
    if let Some(m) = opts.eps_max {
        if primary.iter().any(|x| x.abs() > m) {
            bound_warning = true;
            clamp(&mut primary, Some(m));
        }
    }
    let mut pulse = PulseSchedule::new(tau, primary)?;
    if let Some(sel) = &opts.second_channel {
        pulse = pulse.with_second_channel(*sel, vec![0.0; n_segments])?;
    }
    pulse.eps_max = opts.eps_max;
    pulse.validate()?;

    let (mut grad, mut value) = grad_and_value(spec, rho0, &pulse)?;
    let guess_purity = value;
    let mut history = vec![value];
    let mut step = opts.initial_step;
    let mut converged = false;
    let mut iterations = 0;
    let mut x = pulse.all_amplitudes();
    while iterations < opts.max_iter {
        let g = projected(&grad, &x, opts.eps_max);
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if gmax < opts.grad_tol {
            converged = true;
            break;
        }
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            clamp(&mut trial, opts.eps_max);
            let mut tp = pulse.clone();
            tp.set_all_amplitudes(&trial);
            let (tg, tv) = grad_and_value(spec, rho0, &tp)?;
            if tv >= value + 1e-4 * step * g2 {
                accepted = Some((trial, tp, tg, tv));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((trial, tp, tg, tv)) => {
                x = trial;
                pulse = tp;
                grad = tg;
                value = tv;
                history.push(value);
                step *= 2.0;
            }
            None => {
                converged = gmax < opts.grad_tol.sqrt();
                break;
            }
        }
    }
    Ok(OptimizationResult {
        pulse,
        guess_purity,
        final_purity: value,
        iterations,
        converged,
        purity_history: history,
        bound_warning,
    })
}
