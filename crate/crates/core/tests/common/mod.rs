#![allow(dead_code)]

use qreset::operator::{c, kron, pauli, re, Operator, C64};
use rand::Rng;

pub fn random_su2(rng: &mut impl Rng) -> Operator {
    let q: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [a, b, cc, d] = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
    Operator::from_row_slice(2, 2, &[c(a, b), c(cc, d), c(-cc, d), c(a, -b)])
}

pub fn random_local(rng: &mut impl Rng) -> Operator {
    kron(&random_su2(rng), &random_su2(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> Operator {
    let m = Operator::from_fn(n, n, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&m + m.adjoint()) * re(0.5)
}

pub fn random_density(rng: &mut impl Rng, n: usize) -> Operator {
    let m = Operator::from_fn(n, n, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let r = &m * m.adjoint();
    let t: C64 = r.diagonal().iter().sum();
    r / t
}

/// Qubit density with Bloch vector of length `r` in a random direction.
pub fn random_qubit_with_radius(rng: &mut impl Rng, r: f64) -> Operator {
    let mut v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x *= r / n;
    }
    (qreset::operator::identity(2)
        + pauli(1) * re(v[0])
        + pauli(2) * re(v[1])
        + pauli(3) * re(v[2]))
        * re(0.5)
}

/// Scaling-and-squaring Taylor series for exp(−iHt), independent of any eigensolver.
pub fn expm_series(h: &Operator, t: f64) -> Operator {
    let n = h.nrows();
    let a = h * c(0.0, -t);
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let a = a / re(2f64.powi(s));
    let mut term = Operator::identity(n, n);
    let mut out = Operator::identity(n, n);
    for k in 1..=24 {
        term = &term * &a / re(k as f64);
        out += &term;
    }
    for _ in 0..s {
        out = &out * &out;
    }
    out
}
