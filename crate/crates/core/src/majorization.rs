//! Majorization bounds on the purity reachable by a joint unitary.

use rayon::prelude::*;
use serde::Serialize;

use crate::control::fmt12;
use crate::error::{QresetError, Result};
use crate::model::{ancilla_thermal, qubit_thermal, SystemSpec};
use crate::operator::{check_density, hermitian_eig, Operator};

const SUM_TOL: f64 = 1e-12;
const BRUTE_FORCE_MAX_DIM: usize = 12;

fn descending(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// True when every descending prefix sum of `a` dominates that of `b`.
pub fn majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(QresetError::DimensionMismatch(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > SUM_TOL {
        return Err(QresetError::SumMismatch(sa, sb));
    }
    let (da, db) = (descending(a), descending(b));
    let (mut pa, mut pb) = (0.0, 0.0);
    for (x, y) in da.iter().zip(&db) {
        pa += x;
        pb += y;
        if pa < pb - SUM_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Eigenvalues of a density matrix, descending, with round-off negatives
/// clipped to zero. Diagonal inputs are read directly.
pub fn spectrum(rho: &Operator) -> Result<Vec<f64>> {
    check_density(rho)?;
    let n = rho.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || rho[(i, j)].norm() == 0.0));
    let vals: Vec<f64> = if diagonal {
        (0..n).map(|i| rho[(i, i)].re).collect()
    } else {
        hermitian_eig(rho)?.0
    };
    Ok(descending(&vals).into_iter().map(|x| x.max(0.0)).collect())
}

/// Joint spectrum before and after the optimal reshuffle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPartition {
    pub d_s: usize,
    pub d_b: usize,
    /// λ[i·d_B + j] = s_i·b_j with both spectra descending.
    pub lambda: Vec<f64>,
    /// λ′[k] = λ[permutation[k]]; group i is λ′[i·d_B .. (i+1)·d_B].
    pub lambda_prime: Vec<f64>,
    pub permutation: Vec<usize>,
    pub s_prime: Vec<f64>,
}

impl SpectrumPartition {
    pub fn purity(&self) -> f64 {
        self.s_prime.iter().map(|x| x * x).sum()
    }

    /// Permutation matrix P with P e_{permutation[k]} = e_k in the joint
    /// eigenbasis.
    pub fn permutation_matrix(&self) -> Operator {
        let n = self.permutation.len();
        let mut p = Operator::zeros(n, n);
        for (k, &src) in self.permutation.iter().enumerate() {
            p[(k, src)] = num_complex::Complex64::new(1.0, 0.0);
        }
        p
    }
}

pub fn reshuffle_spectra(s: &[f64], b: &[f64]) -> SpectrumPartition {
    let (d_s, d_b) = (s.len(), b.len());
    let lambda: Vec<f64> = s
        .iter()
        .flat_map(|si| b.iter().map(move |bj| si * bj))
        .collect();
    let mut permutation: Vec<usize> = (0..lambda.len()).collect();
    permutation.sort_by(|&x, &y| lambda[y].total_cmp(&lambda[x]));
    let lambda_prime: Vec<f64> = permutation.iter().map(|&k| lambda[k]).collect();
    let s_prime = lambda_prime
        .chunks(d_b.max(1))
        .map(|g| g.iter().sum())
        .collect();
    SpectrumPartition {
        d_s,
        d_b,
        lambda,
        lambda_prime,
        permutation,
        s_prime,
    }
}

pub fn optimal_reshuffle(rho_s: &Operator, rho_b: &Operator) -> Result<SpectrumPartition> {
    Ok(reshuffle_spectra(&spectrum(rho_s)?, &spectrum(rho_b)?))
}

pub fn max_qubit_purity(rho_s: &Operator, rho_b: &Operator) -> Result<f64> {
    Ok(optimal_reshuffle(rho_s, rho_b)?.purity())
}

/// All ways of splitting `n` indices into groups of size `k`, ignoring
/// the order of groups.
pub fn groupings(n: usize, k: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(rest: Vec<usize>, k: usize, acc: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if rest.is_empty() {
            out.push(acc.clone());
            return;
        }
        let first = rest[0];
        let others = &rest[1..];
        let m = others.len();
        let mut idx: Vec<usize> = (0..k - 1).collect();
        loop {
            let mut group = vec![first];
            group.extend(idx.iter().map(|&i| others[i]));
            let remaining: Vec<usize> = (0..m)
                .filter(|i| !idx.contains(i))
                .map(|i| others[i])
                .collect();
            acc.push(group);
            rec(remaining, k, acc, out);
            acc.pop();
            // next combination of k − 1 out of m
            let mut p = k - 1;
            loop {
                if p == 0 {
                    return;
                }
                p -= 1;
                if idx[p] < m - (k - 1) + p {
                    idx[p] += 1;
                    for q in p + 1..k - 1 {
                        idx[q] = idx[q - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
    let mut out = Vec::new();
    if k == 0 || !n.is_multiple_of(k) {
        return out;
    }
    rec((0..n).collect(), k, &mut Vec::new(), &mut out);
    out
}

/// Best purity over every grouping of the joint spectrum, found by
/// exhaustive enumeration.
pub fn brute_force_max_purity(s: &[f64], b: &[f64]) -> Result<f64> {
    let n = s.len() * b.len();
    if n > BRUTE_FORCE_MAX_DIM {
        return Err(QresetError::InvalidInput(format!(
            "exhaustive search limited to {BRUTE_FORCE_MAX_DIM} joint levels, got {n}"
        )));
    }
    let lambda: Vec<f64> = s
        .iter()
        .flat_map(|si| b.iter().map(move |bj| si * bj))
        .collect();
    Ok(groupings(n, b.len())
        .par_iter()
        .map(|g| {
            g.iter()
                .map(|grp| grp.iter().map(|&i| lambda[i]).sum::<f64>().powi(2))
                .sum::<f64>()
        })
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonCheck {
    pub eligible: bool,
    /// 1 − purity for a maximally mixed d_S-level system.
    pub achieved_infidelity: f64,
    pub required_small: usize,
    pub small_count: usize,
    pub threshold: f64,
}

pub fn required_small_eigenvalues(d_s: usize, d_b: usize) -> usize {
    (d_b * (d_s - 1)).div_ceil(d_s)
}

pub fn epsilon_reset_check(rho_b: &Operator, d_s: usize, eps: f64) -> Result<EpsilonCheck> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(QresetError::InvalidEpsilon(eps));
    }
    if d_s < 2 {
        return Err(QresetError::InvalidInput(format!(
            "d_S must be at least 2, got {d_s}"
        )));
    }
    let b = spectrum(rho_b)?;
    let d_b = b.len();
    let threshold = eps / (2.0 * d_b as f64 * (d_s - 1) as f64);
    let small_count = b.iter().filter(|&&x| x < threshold).count();
    let required_small = required_small_eigenvalues(d_s, d_b);
    let s = vec![1.0 / d_s as f64; d_s];
    let achieved_infidelity = 1.0 - reshuffle_spectra(&s, &b).purity();
    Ok(EpsilonCheck {
        eligible: small_count >= required_small,
        achieved_infidelity,
        required_small,
        small_count,
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub d_b: usize,
    pub beta: f64,
    pub max_purity: f64,
}

/// Maximum purity for thermal qubit and equidistant thermal qudit ancillas.
pub fn dimension_sweep(omega_s: f64, gap: f64, beta: f64, dims: &[usize]) -> Result<Vec<SweepRow>> {
    dims.iter()
        .map(|&d| {
            if d < 2 {
                return Err(QresetError::InvalidInput(format!(
                    "ancilla dimension must be at least 2, got {d}"
                )));
            }
            let spec = SystemSpec::qudit(omega_s, &vec![gap; d - 1], 0.0, beta);
            spec.validate()?;
            let p = max_qubit_purity(&qubit_thermal(&spec)?, &ancilla_thermal(&spec)?)?;
            Ok(SweepRow {
                d_b: d,
                beta,
                max_purity: p,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("d_b,beta,max_purity\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.d_b,
            fmt12(r.beta),
            fmt12(r.max_purity)
        ));
    }
    out
}
