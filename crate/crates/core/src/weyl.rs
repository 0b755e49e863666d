//! Non-local coordinates of two-qubit unitaries, the unitality criterion and
//! the time-optimal reset bound on the coordinate cube.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, Matrix4};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QresetError, Result};
use crate::operator::{
    c, identity, kron, partial_trace, pauli, re, trace, unitarity_defect, Operator, Subsystem, C64,
    I,
};

/// Canonical non-local coordinates; `raw` keeps the unreduced triple when known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylCoordinates {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<[f64; 3]>,
}

impl WeylCoordinates {
    pub fn new(raw: [f64; 3]) -> Self {
        let [c1, c2, c3] = canonicalize(raw);
        WeylCoordinates {
            c1,
            c2,
            c3,
            raw: Some(raw),
        }
    }

    pub fn canonical(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    /// The unreduced triple when available, else the canonical one.
    pub fn triple(&self) -> [f64; 3] {
        self.raw.unwrap_or(self.canonical())
    }

    pub fn total_angle(&self) -> f64 {
        self.triple().iter().sum()
    }
}

/// Representative with π/2 ≥ c₁ ≥ c₂ ≥ c₃ ≥ 0. Each coordinate is taken
/// modulo π and folded by sign, which identifies a gate with its mirror image.
pub fn canonicalize(c: [f64; 3]) -> [f64; 3] {
    let mut f = c.map(|x| {
        let r = x.rem_euclid(PI);
        r.min(PI - r).max(0.0)
    });
    f.sort_by(|a, b| b.total_cmp(a));
    f
}

/// A(c) = exp{(i/2) Σ cₖ σₖ⊗σₖ}.
pub fn canonical_gate(c: [f64; 3]) -> Operator {
    let mut u = identity(4);
    for (k, &ck) in c.iter().enumerate() {
        let ss = kron(&pauli(k + 1), &pauli(k + 1));
        let f = identity(4) * re((ck / 2.0).cos()) + ss * (I * (ck / 2.0).sin());
        u *= f;
    }
    u
}

fn magic_basis() -> Operator {
    let h = re(FRAC_1_SQRT_2);
    let z = re(0.0);
    let ih = I * FRAC_1_SQRT_2;
    Operator::from_row_slice(
        4,
        4,
        &[h, z, z, ih, z, ih, h, z, z, ih, -h, z, h, z, z, -ih],
    )
}

fn det4(u: &Operator) -> C64 {
    u.clone().determinant()
}

/// U/det(U)^{1/4} and Q†UQ Transposed product in the magic basis.
fn magic_gram(u: &Operator) -> Operator {
    let d = det4(u);
    let un = u / d.powf(0.25);
    let q = magic_basis();
    let up = q.adjoint() * un * &q;
    up.transpose() * up
}

/// Makhlin invariants (G₁, G₂) of a two-qubit unitary.
pub fn local_invariants(u: &Operator) -> (C64, f64) {
    let m = magic_gram(u);
    let t = trace(&m);
    let t2 = trace(&(&m * &m));
    ((t * t) / 16.0, ((t * t - t2) / 4.0).re)
}

/// Eigenvalues of a complex symmetric unitary matrix, whose real and
/// imaginary parts are commuting real symmetric matrices.
fn symmetric_unitary_eigenvalues(m: &Operator) -> Result<[C64; 4]> {
    let re_m = Matrix4::from_fn(|i, j| m[(i, j)].re);
    let im_m = Matrix4::from_fn(|i, j| m[(i, j)].im);
    let mut best = (f64::INFINITY, [re(0.0); 4]);
    for k in 0..24 {
        let r = 0.37 + 0.731 * k as f64;
        let s = re_m + im_m * r;
        let eig = s.symmetric_eigen();
        let p = eig.eigenvectors;
        let pc = DMatrix::from_fn(4, 4, |i, j| re(p[(i, j)]));
        let d = pc.transpose() * m * &pc;
        let mut off = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    off = off.max(d[(i, j)].norm());
                }
            }
        }
        let vals = [d[(0, 0)], d[(1, 1)], d[(2, 2)], d[(3, 3)]];
        if off < 1e-11 {
            return Ok(vals);
        }
        if off < best.0 {
            best = (off, vals);
        }
    }
    if best.0 < 1e-8 {
        return Ok(best.1);
    }
    Err(QresetError::DecompositionFailure(format!(
        "magic-basis spectrum not resolved (off-diagonal {:.3e})",
        best.0
    )))
}

pub fn weyl_coordinates(u: &Operator) -> Result<WeylCoordinates> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(QresetError::DimensionMismatch(
            "expected a 4x4 unitary".into(),
        ));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-8 {
        return Err(QresetError::NotUnitary(defect));
    }
    let m = magic_gram(u);
    let vals = symmetric_unitary_eigenvalues(&m)?;
    let th: Vec<f64> = vals.iter().map(|z| z.arg()).collect();
    let raw = [
        (th[0] + th[2]) / 2.0,
        (th[1] + th[2]) / 2.0,
        (th[0] + th[1]) / 2.0,
    ];
    let w = WeylCoordinates {
        raw: None,
        ..WeylCoordinates::new(raw)
    };
    let (g1, g2) = local_invariants(u);
    let (h1, h2) = local_invariants(&canonical_gate(w.canonical()));
    let close =
        ((g1 - h1).norm() < 1e-6 || (g1 - h1.conj()).norm() < 1e-6) && (g2 - h2).abs() < 1e-6;
    if !close {
        return Err(QresetError::DecompositionFailure(
            "local invariants of the reconstruction do not match".into(),
        ));
    }
    Ok(w)
}

/// Local ancilla state after a local operation: ρ′ = [[p_e′, γ′], [γ′*, p_g′]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AncillaLocalState {
    pub p_e: f64,
    pub p_g: f64,
    pub gamma_re: f64,
    pub gamma_im: f64,
}

const ANCILLA_TOL: f64 = 1e-8;

impl AncillaLocalState {
    pub fn new(p_e: f64, p_g: f64, gamma: C64) -> Result<Self> {
        let bad = |m: String| Err(QresetError::NotDensity(m));
        if p_e < -ANCILLA_TOL || p_g < -ANCILLA_TOL {
            return bad("negative population".into());
        }
        if (p_e + p_g - 1.0).abs() > ANCILLA_TOL {
            return bad(format!("populations sum to {}", p_e + p_g));
        }
        if gamma.norm_sqr() > p_e * p_g + ANCILLA_TOL {
            return bad("coherence exceeds positivity bound".into());
        }
        Ok(AncillaLocalState {
            p_e,
            p_g,
            gamma_re: gamma.re,
            gamma_im: gamma.im,
        })
    }

    /// As `new`, also requiring the purity to equal `purity_b0`.
    pub fn with_purity(p_e: f64, p_g: f64, gamma: C64, purity_b0: f64) -> Result<Self> {
        let s = Self::new(p_e, p_g, gamma)?;
        let dev = (s.purity() - purity_b0).abs();
        if dev > ANCILLA_TOL {
            return Err(QresetError::NotDensity(format!(
                "purity {} differs from {} by {dev:.3e}",
                s.purity(),
                purity_b0
            )));
        }
        Ok(s)
    }

    pub fn thermal(omega_b: f64, beta: f64) -> Self {
        let pe = 1.0 / (1.0 + (beta * omega_b).exp());
        AncillaLocalState {
            p_e: pe,
            p_g: 1.0 - pe,
            gamma_re: 0.0,
            gamma_im: 0.0,
        }
    }

    pub fn gamma(&self) -> C64 {
        c(self.gamma_re, self.gamma_im)
    }

    pub fn purity(&self) -> f64 {
        self.p_g * self.p_g + self.p_e * self.p_e + 2.0 * self.gamma().norm_sqr()
    }

    pub fn density(&self) -> Operator {
        Operator::from_row_slice(
            2,
            2,
            &[
                re(self.p_e),
                self.gamma(),
                self.gamma().conj(),
                re(self.p_g),
            ],
        )
    }
}

/// Coefficients (x, y, z) of tr_B{A(𝟙⊗ρ′)A†} = 𝟙 + xσ₁ + yσ₂ + zσ₃.
pub fn unital_coefficients(c: [f64; 3], anc: &AncillaLocalState) -> [f64; 3] {
    let s = c.map(f64::sin);
    [
        2.0 * anc.gamma_re * s[1] * s[2],
        -2.0 * anc.gamma_im * s[0] * s[2],
        -(anc.p_g - anc.p_e) * s[0] * s[1],
    ]
}

pub fn unital_image(c: [f64; 3], anc: &AncillaLocalState) -> Operator {
    let k = unital_coefficients(c, anc);
    identity(2) + pauli(1) * re(k[0]) + pauli(2) * re(k[1]) + pauli(3) * re(k[2])
}

/// Direct evaluation of tr_B{A(𝟙⊗ρ′)A†}.
pub fn unital_image_direct(c: [f64; 3], anc: &AncillaLocalState) -> Operator {
    let a = canonical_gate(c);
    let joint = &a * kron(&identity(2), &anc.density()) * a.adjoint();
    partial_trace(&joint, (2, 2), Subsystem::KeepFirst).expect("4x4 input")
}

pub fn is_unital(c: [f64; 3], anc: &AncillaLocalState) -> bool {
    unital_coefficients(c, anc).iter().all(|x| x.abs() <= 1e-12)
}

/// Qubit purity after A(c) acting on a maximally mixed qubit and ρ′.
pub fn purity_at_coords(c: [f64; 3], anc: &AncillaLocalState) -> f64 {
    let s2 = c.map(|x| x.sin().powi(2));
    purity_from_sin2(s2, anc)
}

fn purity_from_sin2(s2: [f64; 3], anc: &AncillaLocalState) -> f64 {
    0.5 + (anc.p_g * anc.p_g + anc.p_e * anc.p_e - 0.5) * s2[0] * s2[1]
        + 2.0 * anc.gamma_re.powi(2) * s2[1] * s2[2]
        + 2.0 * anc.gamma_im.powi(2) * s2[0] * s2[2]
}

pub fn tori_min_time(c: [f64; 3], j: f64) -> Result<f64> {
    if !(j > 0.0 && j.is_finite()) {
        return Err(QresetError::InvalidCoupling(j));
    }
    Ok(c.iter().sum::<f64>() / (2.0 * j))
}

/// Residuals of the three stationarity conditions of the purity on the cube.
pub fn stationarity_residuals(c: [f64; 3], anc: &AncillaLocalState) -> [f64; 3] {
    let pb2 = anc.purity() / 2.0 - 0.25;
    let r = anc.gamma_re.powi(2);
    let i = anc.gamma_im.powi(2);
    let s2 = c.map(|x| x.sin().powi(2));
    let d = c.map(|x| (2.0 * x).sin());
    [
        d[0] * ((pb2 - r - i) * s2[1] + i * s2[2]),
        d[1] * ((pb2 - r - i) * s2[0] + r * s2[2]),
        d[2] * (r * s2[1] + i * s2[0]),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct QslPoint {
    pub c: [f64; 3],
    pub purity: f64,
    pub total_angle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QslResult {
    pub min_total_angle: f64,
    pub target_purity: f64,
    pub optimizers: Vec<WeylCoordinates>,
    pub max_stationarity_residual: f64,
    /// Every point reaching the target, sorted by total angle.
    pub achieving: Vec<QslPoint>,
}

const QSL_TOL: f64 = 1e-9;
const QSL_SHRINK_TOL: f64 = 1e-14;

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
        if b - a < 1e-13 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Coordinate-wise golden-section ascent of the purity, then the smallest
/// value of each coordinate that keeps the target.
fn refine(mut c: [f64; 3], anc: &AncillaLocalState, target: f64, h: f64) -> [f64; 3] {
    for _ in 0..4 {
        for k in 0..3 {
            let lo = (c[k] - h).max(0.0);
            let hi = (c[k] + h).min(PI);
            let at = |x: f64| {
                let mut y = c;
                y[k] = x;
                purity_at_coords(y, anc)
            };
            let x = golden_max(at, lo, hi);
            if at(x) > at(c[k]) {
                c[k] = x;
            }
        }
    }
    for k in 0..3 {
        let ok = |x: f64| {
            let mut y = c;
            y[k] = x;
            purity_at_coords(y, anc) >= target
        };
        if !ok(c[k]) {
            continue;
        }
        if ok(0.0) {
            c[k] = 0.0;
            continue;
        }
        let (mut lo, mut hi) = (0.0, c[k]);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if ok(m) {
                hi = m;
            } else {
                lo = m;
            }
        }
        c[k] = hi;
    }
    c
}

type Slab = (Vec<[usize; 3]>, Vec<[usize; 3]>);

/// Brute-force minimum of c₁+c₂+c₃ over points with purity ≥ 𝒫_B − 1e−9.
pub fn qsl_verify(anc: &AncillaLocalState, grid_n: usize) -> Result<QslResult> {
    if grid_n < 64 {
        return Err(QresetError::InvalidInput(format!(
            "grid_n must be >= 64, got {grid_n}"
        )));
    }
    let target = anc.purity() - QSL_TOL;
    let h = PI / (grid_n - 1) as f64;
    let axis: Vec<f64> = (0..grid_n).map(|i| i as f64 * h).collect();
    let sin2: Vec<f64> = axis.iter().map(|x| x.sin().powi(2)).collect();
    let near = anc.purity() - 8.0 * h * h;

    let slabs: Vec<Slab> = (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let mut hit = Vec::new();
            let mut cand = Vec::new();
            for j in 0..grid_n {
                for k in 0..grid_n {
                    let p = purity_from_sin2([sin2[i], sin2[j], sin2[k]], anc);
                    if p >= target {
                        hit.push([i, j, k]);
                    } else if p >= near {
                        cand.push([i, j, k]);
                    }
                }
            }
            (hit, cand)
        })
        .collect();

    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut candidates: Vec<[usize; 3]> = Vec::new();
    for (hit, cand) in slabs {
        points.extend(hit.iter().map(|ix| ix.map(|q| axis[q])));
        candidates.extend(cand);
    }
    if points.is_empty() {
        candidates.sort_by(|a, b| {
            let ta: usize = a.iter().sum();
            let tb: usize = b.iter().sum();
            ta.cmp(&tb).then(a.cmp(b))
        });
        for ix in candidates.iter().take(512) {
            points.push(ix.map(|q| axis[q]));
        }
    }
    let mut refined: Vec<QslPoint> = points
        .par_iter()
        .map(|&c0| refine(c0, anc, target + QSL_TOL - QSL_SHRINK_TOL, h))
        .filter(|&c| purity_at_coords(c, anc) >= target)
        .map(|c| QslPoint {
            c,
            purity: purity_at_coords(c, anc),
            total_angle: c.iter().sum(),
        })
        .collect();
    refined.sort_by(|a, b| {
        a.total_angle
            .total_cmp(&b.total_angle)
            .then(a.c[0].total_cmp(&b.c[0]))
            .then(a.c[1].total_cmp(&b.c[1]))
            .then(a.c[2].total_cmp(&b.c[2]))
    });
    let Some(best) = refined.first() else {
        return Err(QresetError::DecompositionFailure(
            "no point reaches the target purity".into(),
        ));
    };
    let min_total = best.total_angle;
    let mut optimizers: Vec<WeylCoordinates> = Vec::new();
    for p in refined
        .iter()
        .take_while(|p| p.total_angle <= min_total + 1e-6)
    {
        if optimizers
            .iter()
            .all(|o| (0..3).any(|k| (o.triple()[k] - p.c[k]).abs() > 1e-6))
        {
            optimizers.push(WeylCoordinates::new(p.c));
        }
    }
    let max_res = optimizers
        .iter()
        .flat_map(|o| stationarity_residuals(o.triple(), anc))
        .fold(0.0_f64, |m, r| m.max(r.abs()));
    Ok(QslResult {
        min_total_angle: min_total,
        target_purity: anc.purity(),
        optimizers,
        max_stationarity_residual: max_res,
        achieving: refined,
    })
}
