//! Dense complex matrices, spectral functions and partial traces.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QresetError, Result};

pub type C64 = Complex64;
pub type Operator = DMatrix<C64>;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const DENSITY_TOL: f64 = 1e-8;
pub const EQUALITY_TOL: f64 = 1e-9;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> Operator {
    Operator::identity(n, n)
}

/// Pauli matrix `k` in {1, 2, 3}; `0` gives the identity.
pub fn pauli(k: usize) -> Operator {
    let z = re(0.0);
    let o = re(1.0);
    match k {
        0 => Operator::from_row_slice(2, 2, &[o, z, z, o]),
        1 => Operator::from_row_slice(2, 2, &[z, o, o, z]),
        2 => Operator::from_row_slice(2, 2, &[z, -I, I, z]),
        3 => Operator::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("pauli index {k} out of range"),
    }
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

/// Hilbert-Schmidt inner product tr(a† b).
pub fn hs_inner(a: &Operator, b: &Operator) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius(a: &Operator) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &Operator) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &Operator, b: &Operator) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn trace(a: &Operator) -> C64 {
    a.diagonal().iter().sum()
}

fn require_square(m: &Operator, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(QresetError::DimensionMismatch(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn hermiticity_defect(m: &Operator) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn check_hermitian(m: &Operator) -> Result<()> {
    require_square(m, "operator")?;
    let d = hermiticity_defect(m);
    if d > HERMITICITY_TOL {
        return Err(QresetError::NotHermitian(d));
    }
    Ok(())
}

pub fn unitarity_defect(u: &Operator) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

/// Checks Hermiticity, unit trace and positive semidefiniteness.
pub fn check_density(rho: &Operator) -> Result<()> {
    require_square(rho, "density matrix")?;
    let d = hermiticity_defect(rho);
    if d > DENSITY_TOL {
        return Err(QresetError::NotDensity(format!(
            "Hermiticity defect {d:.3e}"
        )));
    }
    let tr = trace(rho);
    if (tr - re(1.0)).norm() > DENSITY_TOL {
        return Err(QresetError::NotDensity(format!("trace {tr}")));
    }
    let (vals, _) = hermitian_eig_unchecked(rho);
    if let Some(&lo) = vals.first() {
        if lo < -DENSITY_TOL {
            return Err(QresetError::NotDensity(format!("eigenvalue {lo:.3e}")));
        }
    }
    Ok(())
}

fn sorted_eig(sym: &Operator) -> (Vec<f64>, Operator) {
    let eig = sym.clone().symmetric_eigen();
    let n = sym.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = Operator::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

fn eig_defect(h: &Operator, vals: &[f64], v: &Operator) -> f64 {
    let mut hv = h * v;
    for j in 0..vals.len() {
        for i in 0..vals.len() {
            hv[(i, j)] -= v[(i, j)] * vals[j];
        }
    }
    max_abs(&hv).max(unitarity_defect(v))
}

/// D·F with F the unitary DFT matrix and D fixed incommensurate phases.
fn mixing_unitary(n: usize, k: usize) -> Operator {
    let norm = 1.0 / (n as f64).sqrt();
    Operator::from_fn(n, n, |a, b| {
        let phase = 2.0 * std::f64::consts::PI * (a * b) as f64 / n as f64
            + (k * (a + 1)) as f64 * std::f64::consts::SQRT_2;
        C64::from_polar(norm, phase)
    })
}

const EIG_TOL: f64 = 1e-11;

/// The complex Householder step of the underlying solver loses the column
/// norm when the leading subdiagonal entry is exactly zero, so results are
/// verified and, on failure, recomputed in a mixed basis.
fn hermitian_eig_unchecked(m: &Operator) -> (Vec<f64>, Operator) {
    let sym = (m + m.adjoint()) * re(0.5);
    let tol = EIG_TOL * max_abs(&sym).max(1.0) * sym.nrows() as f64;
    let (vals, vecs) = sorted_eig(&sym);
    if eig_defect(&sym, &vals, &vecs) <= tol {
        return (vals, vecs);
    }
    let mut best = (eig_defect(&sym, &vals, &vecs), vals, vecs);
    for k in 1..=4 {
        let w = mixing_unitary(sym.nrows(), k);
        let (vals, v) = sorted_eig(&(w.adjoint() * &sym * &w));
        let v = &w * v;
        let d = eig_defect(&sym, &vals, &v);
        if d <= tol {
            return (vals, v);
        }
        if d < best.0 {
            best = (d, vals, v);
        }
    }
    (best.1, best.2)
}

/// Ascending eigenvalues and the matching unitary eigenvector matrix.
pub fn hermitian_eig(m: &Operator) -> Result<(Vec<f64>, Operator)> {
    check_hermitian(m)?;
    Ok(hermitian_eig_unchecked(m))
}

/// `V diag(f(λ)) V†` for Hermitian `m`.
pub fn spectral_map(m: &Operator, f: impl Fn(f64) -> C64) -> Result<Operator> {
    let (vals, v) = hermitian_eig(m)?;
    Ok(from_spectrum(&vals, &v, f))
}

pub fn from_spectrum(vals: &[f64], v: &Operator, f: impl Fn(f64) -> C64) -> Operator {
    let n = vals.len();
    let mut scaled = v.clone();
    for j in 0..n {
        let fj = f(vals[j]);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * v.adjoint()
}

/// exp(−iHt).
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    spectral_map(h, |l| (-I * l * t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// Trace out the second factor, keep the first.
    KeepFirst,
    /// Trace out the first factor, keep the second.
    KeepSecond,
}

pub fn partial_trace(m: &Operator, dims: (usize, usize), keep: Subsystem) -> Result<Operator> {
    let (ds, db) = dims;
    if m.nrows() != ds * db || m.ncols() != ds * db {
        return Err(QresetError::DimensionMismatch(format!(
            "operator is {}x{}, dims give {}",
            m.nrows(),
            m.ncols(),
            ds * db
        )));
    }
    Ok(match keep {
        Subsystem::KeepFirst => Operator::from_fn(ds, ds, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::KeepSecond => Operator::from_fn(db, db, |i, j| {
            (0..ds).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    })
}

/// tr ρ² of a density matrix.
pub fn purity(rho: &Operator) -> Result<f64> {
    check_density(rho)?;
    Ok(purity_unchecked(rho))
}

pub(crate) fn purity_unchecked(rho: &Operator) -> f64 {
    hs_inner(rho, rho).re
}

pub fn conjugate_by(u: &Operator, rho: &Operator) -> Operator {
    u * rho * u.adjoint()
}
