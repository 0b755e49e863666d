//! Dynamical Lie algebras inside su(4) and their local / non-local split.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QresetError, Result};
use crate::model::{control_operator, drift, SystemSpec};
use crate::operator::{
    commutator, frobenius, identity, kron, max_abs_diff, pauli, re, trace, Operator, I,
};

pub const CLOSURE_TOL: f64 = 1e-9;

/// Orthonormal (under Re tr X†Y) basis of a real subspace of anti-Hermitian matrices.
#[derive(Debug, Clone, Default)]
pub struct AlgebraBasis {
    pub elements: Vec<Operator>,
}

fn real_inner(a: &Operator, b: &Operator) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

impl AlgebraBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Orthogonal residual of `x`, normalized, if its norm exceeds `tol·scale`.
    fn residual(&self, x: &Operator, tol: f64, scale: f64) -> Option<Operator> {
        let mut r = x.clone();
        for _ in 0..2 {
            for b in &self.elements {
                let p = real_inner(b, &r);
                r -= b * re(p);
            }
        }
        let n = frobenius(&r);
        if n > tol * scale && n > 0.0 {
            Some(r / re(n))
        } else {
            None
        }
    }

    /// Adds the residual of `x` when it exceeds `tol` relative to the norm of `x`.
    pub fn push(&mut self, x: &Operator, tol: f64) -> bool {
        let s = frobenius(x);
        self.push_scaled(x, tol, s)
    }

    /// Adds the residual of `x` when it exceeds `tol·scale`.
    pub fn push_scaled(&mut self, x: &Operator, tol: f64, scale: f64) -> bool {
        match self.residual(x, tol, scale) {
            Some(r) => {
                self.elements.push(r);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, x: &Operator, tol: f64) -> bool {
        self.residual(x, tol, frobenius(x)).is_none()
    }

    /// Membership with the residual measured against `scale` instead of ‖x‖.
    pub fn contains_scaled(&self, x: &Operator, tol: f64, scale: f64) -> bool {
        self.residual(x, tol, scale).is_none()
    }

    pub fn project(&self, x: &Operator) -> Operator {
        let mut out = Operator::zeros(x.nrows(), x.ncols());
        for b in &self.elements {
            out += b * re(real_inner(b, x));
        }
        out
    }

    /// Same span as `other` (each basis lies in the other's span).
    pub fn same_span(&self, other: &AlgebraBasis, tol: f64) -> bool {
        self.dim() == other.dim()
            && other.elements.iter().all(|x| self.contains(x, tol))
            && self.elements.iter().all(|x| other.contains(x, tol))
    }

    pub fn from_elements(xs: &[Operator], tol: f64) -> Self {
        let mut b = AlgebraBasis::default();
        for x in xs {
            b.push(x, tol);
        }
        b
    }
}

fn traceless(x: &Operator) -> Operator {
    let n = x.nrows();
    x - identity(n) * (trace(x) / re(n as f64))
}

pub fn lie_closure(generators: &[Operator], tol: f64) -> Result<AlgebraBasis> {
    let mut basis = AlgebraBasis::default();
    for g in generators {
        let d = max_abs_diff(&g.adjoint(), &(-g));
        let scale = frobenius(g).max(1.0);
        if d > 1e-10 * scale {
            return Err(QresetError::NotAntiHermitian(d));
        }
        basis.push(&traceless(g), tol);
    }
    close(basis, tol)
}

fn close(mut basis: AlgebraBasis, tol: f64) -> Result<AlgebraBasis> {
    let mut frontier = 0;
    while frontier < basis.dim() {
        let end = basis.dim();
        for i in frontier..end {
            for j in 0..i {
                let c = commutator(&basis.elements[i], &basis.elements[j]);
                basis.push_scaled(&c, tol, 1.0);
            }
        }
        frontier = end;
        if basis.dim() > 63 {
            return Err(QresetError::DecompositionFailure(
                "closure exceeded su(8)".into(),
            ));
        }
    }
    Ok(basis)
}

/// span{iσⱼ⊗𝟙, i𝟙⊗σⱼ}.
pub fn local_basis() -> AlgebraBasis {
    let mut xs = Vec::new();
    for j in 1..=3 {
        xs.push(kron(&pauli(j), &identity(2)) * I);
        xs.push(kron(&identity(2), &pauli(j)) * I);
    }
    AlgebraBasis::from_elements(&xs, CLOSURE_TOL)
}

/// span{iσⱼ⊗σₗ}.
pub fn nonlocal_basis() -> AlgebraBasis {
    let mut xs = Vec::new();
    for j in 1..=3 {
        for l in 1..=3 {
            xs.push(kron(&pauli(j), &pauli(l)) * I);
        }
    }
    AlgebraBasis::from_elements(&xs, CLOSURE_TOL)
}

#[derive(Debug, Clone)]
pub struct CartanSplit {
    pub k: AlgebraBasis,
    pub p: AlgebraBasis,
}

/// Splits `l` into local and non-local parts. Elements with components in
/// both subspaces are replaced by their two projections and the result is
/// re-closed until stable.
pub fn cartan_split(l: &AlgebraBasis) -> Result<CartanSplit> {
    if l.elements.iter().any(|x| x.nrows() != 4) {
        return Err(QresetError::DimensionMismatch(
            "cartan_split expects 4x4 elements".into(),
        ));
    }
    let kb = local_basis();
    let pb = nonlocal_basis();
    let mut current = l.clone();
    for _ in 0..16 {
        let mut k = AlgebraBasis::default();
        let mut p = AlgebraBasis::default();
        for x in &current.elements {
            k.push_scaled(&kb.project(x), CLOSURE_TOL, 1.0);
            p.push_scaled(&pb.project(x), CLOSURE_TOL, 1.0);
        }
        let mut joined = k.clone();
        for x in &p.elements {
            joined.push_scaled(x, CLOSURE_TOL, 1.0);
        }
        let closed = close(joined, CLOSURE_TOL)?;
        if closed.dim() == k.dim() + p.dim() {
            verify_cartan(&k, &p)?;
            return Ok(CartanSplit { k, p });
        }
        current = closed;
    }
    Err(QresetError::DecompositionFailure(
        "re-basis did not stabilize".into(),
    ))
}

fn verify_cartan(k: &AlgebraBasis, p: &AlgebraBasis) -> Result<()> {
    let tol = 1e-8;
    for a in &k.elements {
        for b in &k.elements {
            if !k.contains_scaled(&commutator(a, b), tol, 1.0) {
                return Err(QresetError::DecompositionFailure("[k,k] not in k".into()));
            }
        }
        for b in &p.elements {
            if !p.contains_scaled(&commutator(a, b), tol, 1.0) {
                return Err(QresetError::DecompositionFailure("[k,p] not in p".into()));
            }
        }
    }
    for a in &p.elements {
        for b in &p.elements {
            if !k.contains_scaled(&commutator(a, b), tol, 1.0) {
                return Err(QresetError::DecompositionFailure("[p,p] not in k".into()));
            }
        }
    }
    Ok(())
}

fn flatten(x: &Operator) -> Vec<f64> {
    x.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Real null space of the linear map v ↦ Σ vᵢ·images[i].
fn null_space(images: &[Operator], tol: f64) -> Vec<Vec<f64>> {
    let m = images.len();
    if m == 0 {
        return Vec::new();
    }
    let rows = flatten(&images[0]).len();
    let mut a = DMatrix::<f64>::zeros(rows, m);
    for (j, x) in images.iter().enumerate() {
        for (i, v) in flatten(x).into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    // Null space of A equals the eigenvectors of AᵀA with vanishing eigenvalue.
    let ata = a.transpose() * &a;
    let eig = ata.symmetric_eigen();
    let scale = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1.0);
    (0..m)
        .filter(|&k| eig.eigenvalues[k].abs() <= tol * scale)
        .map(|k| eig.eigenvectors.column(k).iter().cloned().collect())
        .collect()
}

fn combine(basis: &AlgebraBasis, w: &[f64]) -> Operator {
    let mut out = Operator::zeros(basis.elements[0].nrows(), basis.elements[0].ncols());
    for (b, &c) in basis.elements.iter().zip(w) {
        out += b * re(c);
    }
    out
}

/// Centralizer of `set` inside span(p).
fn centralizer_in(p: &AlgebraBasis, set: &[Operator]) -> AlgebraBasis {
    if p.dim() == 0 {
        return AlgebraBasis::default();
    }
    let images: Vec<Operator> = p
        .elements
        .iter()
        .map(|y| {
            let blocks: Vec<Operator> = set.iter().map(|x| commutator(x, y)).collect();
            stack(&blocks)
        })
        .collect();
    let ns = null_space(&images, 1e-14);
    AlgebraBasis::from_elements(
        &ns.iter().map(|w| combine(p, w)).collect::<Vec<_>>(),
        CLOSURE_TOL,
    )
}

fn stack(blocks: &[Operator]) -> Operator {
    let n = blocks[0].nrows();
    let mut out = Operator::zeros(n * blocks.len(), n);
    for (k, b) in blocks.iter().enumerate() {
        out.view_mut((k * n, 0), (n, n)).copy_from(b);
    }
    out
}

/// Maximal abelian subalgebra of span(p), via the centralizer of a generic
/// element, then checked for commutativity and maximality.
pub fn cartan_subalgebra(p: &AlgebraBasis) -> AlgebraBasis {
    if p.dim() == 0 {
        return AlgebraBasis::default();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = AlgebraBasis::default();
    for _ in 0..8 {
        let w: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = combine(p, &w);
        let a = centralizer_in(p, &[x]);
        let abelian = a.elements.iter().all(|u| {
            a.elements
                .iter()
                .all(|v| frobenius(&commutator(u, v)) <= 1e-9)
        });
        if !abelian {
            continue;
        }
        let cent = centralizer_in(p, &a.elements);
        if cent.dim() == a.dim() {
            return a;
        }
        if a.dim() > best.dim() {
            best = a;
        }
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct CartanReport {
    pub o_s: usize,
    pub o_b: usize,
    pub o_c: usize,
    pub dim_l: usize,
    pub dim_k: usize,
    pub dim_p: usize,
    pub dim_a: usize,
    pub purifiable: bool,
    #[serde(skip)]
    pub k_basis: AlgebraBasis,
    #[serde(skip)]
    pub p_basis: AlgebraBasis,
    #[serde(skip)]
    pub a_basis: AlgebraBasis,
}

/// Generators i·H(ε=0) and i·(O_c⊗𝟙).
pub fn generators(spec: &SystemSpec) -> Result<Vec<Operator>> {
    Ok(vec![
        drift(spec)? * I,
        control_operator(spec, &spec.o_c) * I,
    ])
}

pub fn cartan_report(spec: &SystemSpec) -> Result<CartanReport> {
    let l = lie_closure(&generators(spec)?, CLOSURE_TOL)?;
    let split = cartan_split(&l)?;
    let a = cartan_subalgebra(&split.p);
    let idx = |s: &crate::model::OperatorSelector| s.pauli_index().unwrap_or(0);
    Ok(CartanReport {
        o_s: idx(&spec.o_s),
        o_b: idx(&spec.o_b),
        o_c: idx(&spec.o_c),
        dim_l: split.k.dim() + split.p.dim(),
        dim_k: split.k.dim(),
        dim_p: split.p.dim(),
        dim_a: a.dim(),
        purifiable: a.dim() == 2,
        k_basis: split.k,
        p_basis: split.p,
        a_basis: a,
    })
}

/// Parameters used as the generic stand-in for symbolic classification.
pub fn classification_spec() -> SystemSpec {
    SystemSpec::two_level(1.0, 3.0, 0.1, 1.0)
}

/// All 27 Pauli choices of (O_S, O_B, O_c), in lexicographic order.
pub fn classify_all_27() -> Result<Vec<CartanReport>> {
    classify_all_27_with(&classification_spec())
}

pub fn classify_all_27_with(base: &SystemSpec) -> Result<Vec<CartanReport>> {
    let cases: Vec<(usize, usize, usize)> = (1..=3)
        .flat_map(|s| (1..=3).flat_map(move |b| (1..=3).map(move |c| (s, b, c))))
        .collect();
    cases
        .par_iter()
        .map(|&(s, b, c)| cartan_report(&base.clone().with_operators(s, b, c)))
        .collect()
}
