//! Kato's perturbation series for a simple eigenvalue of a symmetric matrix.
//!
//! With base eigenvalues `a_1 ≥ … ≥ a_p`, target index `m` and a symmetric
//! perturbation `Δ` expressed in the base eigenbasis,
//!
//! ```text
//! λ_m(A + Δ) − a_m = Δ_mm + Σ_{k≥2} λ^{(k)},
//! λ^{(k)} = −(1/k) Σ_{v_1+…+v_k = k−1} tr(Δ Ã^{v_1} ⋯ Δ Ã^{v_k}),
//! ```
//!
//! where `Ã^v = diag_{j≠m}((a_m − a_j)^{−v})` for `v ≥ 1` and `Ã^0 = −e_m e_mᵀ`.

use std::f64::consts::E;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::gap_at;
use crate::linalg::{sample_covariance, SpdMatrix, SymMatrix};
use crate::rng::RngStream;
use crate::samplers::draw_mvn;

pub const MAX_ORDER: usize = 6;

/// Base spectrum, perturbation in the base eigenbasis and target index (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct KatoContext {
    values: Vec<f64>,
    delta: SymMatrix,
    m: usize,
}

impl KatoContext {
    pub fn new(values: Vec<f64>, delta: SymMatrix, m: usize) -> Result<Self> {
        let p = values.len();
        if delta.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, found: delta.dim() });
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("values", "base eigenvalues must be nonincreasing"));
        }
        let gap = gap_at(&values, m)?;
        if !(gap > 0.0) {
            return Err(Error::ZeroEigengap { m, gap, threshold: 0.0 });
        }
        Ok(KatoContext { values, delta, m })
    }

    /// Rotates a raw perturbation of `base` into the eigenbasis of `base`.
    pub fn from_matrices(base: &SymMatrix, perturbation: &SymMatrix, m: usize) -> Result<Self> {
        let eig = base.eig()?;
        let delta = perturbation.rotate(&eig.vectors)?;
        Self::new(eig.values, delta, m)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn delta(&self) -> &SymMatrix {
        &self.delta
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Diagonal of `Ã^v`.
    fn resolvent_power(&self, v: usize) -> Vec<f64> {
        let k = self.m - 1;
        let am = self.values[k];
        (0..self.values.len())
            .map(|j| match (v, j == k) {
                (0, true) => -1.0,
                (0, false) => 0.0,
                (_, true) => 0.0,
                (_, false) => (am - self.values[j]).powi(-(v as i32)),
            })
            .collect()
    }

    /// `‖Ã‖ = 1 / min_{j≠m} |a_m − a_j|`.
    pub fn resolvent_norm(&self) -> f64 {
        self.resolvent_power(1).iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }

    /// `tr(Δ Ã^{v_1} ⋯ Δ Ã^{v_k})` for a composition containing at least one zero.
    ///
    /// The trace is rotated so the product ends in `Ã^0 = −e_m e_mᵀ`, leaving
    /// `−e_mᵀ Δ Ã^{v_{l+1}} Δ ⋯ Ã^{v_{l−1}} Δ e_m`, evaluated with row vectors.
    fn composition_trace(&self, parts: &[usize], powers: &[Vec<f64>]) -> f64 {
        let zero = parts.iter().position(|&v| v == 0).expect("composition of k-1 into k parts has a zero");
        let k = parts.len();
        let p = self.values.len();
        let m = self.m - 1;
        let mut row = self.delta.row(m).to_vec();
        let mut next = vec![0.0; p];
        for step in 1..k {
            let v = parts[(zero + step) % k];
            for (x, d) in row.iter_mut().zip(&powers[v]) {
                *x *= d;
            }
            for (j, out) in next.iter_mut().enumerate() {
                *out = (0..p).map(|i| row[i] * self.delta.get(i, j)).sum();
            }
            std::mem::swap(&mut row, &mut next);
        }
        -row[m]
    }
}

/// All compositions of `total` into `parts` nonnegative integers, in lexicographic order.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            go(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        go(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// `λ_m′ = Δ_mm`.
pub fn kato_first_order(ctx: &KatoContext) -> f64 {
    ctx.delta.get(ctx.m - 1, ctx.m - 1)
}

/// The order-`k` term `λ^{(k)}`, `2 ≤ k ≤ MAX_ORDER`, by exact enumeration.
pub fn kato_term(ctx: &KatoContext, k: usize) -> Result<f64> {
    if k > MAX_ORDER {
        return Err(Error::OrderTooHigh { order: k, max: MAX_ORDER });
    }
    if k < 2 {
        return Err(Error::invalid("k", "higher-order terms start at k = 2"));
    }
    let powers: Vec<Vec<f64>> = (0..k).map(|v| ctx.resolvent_power(v)).collect();
    let sum: f64 = compositions(k - 1, k).iter().map(|c| ctx.composition_trace(c, &powers)).sum();
    Ok(-sum / k as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialSum {
    pub order: usize,
    /// `λ_m′ + Σ_{k=2..K} λ^{(k)}`.
    pub value: f64,
    /// Individual terms, `terms[0]` being the first-order term.
    pub terms: Vec<f64>,
    /// `λ_m(A + Δ) − a_m` from a direct eigendecomposition.
    pub exact: f64,
    /// `3e · ‖Δ‖ · ‖Ã‖`; the series is summable when this is below 1.
    pub summability: f64,
    pub summable: bool,
}

pub fn kato_partial_sum(ctx: &KatoContext, order: usize) -> Result<PartialSum> {
    if order == 0 {
        return Err(Error::invalid("K", "order must be at least 1"));
    }
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh { order, max: MAX_ORDER });
    }
    let mut terms = vec![kato_first_order(ctx)];
    for k in 2..=order {
        terms.push(kato_term(ctx, k)?);
    }
    let value = terms.iter().sum();
    let perturbed = SymMatrix::from_diag(&ctx.values).add(&ctx.delta)?;
    let exact = perturbed.eig()?.values[ctx.m - 1] - ctx.values[ctx.m - 1];
    let summability = 3.0 * E * ctx.delta.spectral_norm()? * ctx.resolvent_norm();
    Ok(PartialSum { order, value, terms, exact, summability, summable: summability < 1.0 })
}

/// Symmetric matrix with i.i.d. `N(0, 1)` upper-triangular entries, rescaled
/// to spectral norm `epsilon`.
pub fn random_perturbation<R: Rng + ?Sized>(p: usize, epsilon: f64, rng: &mut R) -> Result<SymMatrix> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon", "must be finite and nonnegative"));
    }
    let mut data = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let x: f64 = rng.sample(StandardNormal);
            data[i * p + j] = x;
            data[j * p + i] = x;
        }
    }
    let m = SymMatrix::new(p, data)?;
    let norm = m.spectral_norm()?;
    Ok(m.scaled(epsilon / norm))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasProbe {
    /// Monte Carlo mean of `√n · λ_1^{(2)}(A, Δ)`.
    pub mean_sqrt_n_second_order: f64,
    /// Monte Carlo mean of `√n / (a_1 − a_p) · Σ_{j≥2} Δ_{1j}²`.
    pub lower_bound: f64,
    /// Per-replication values of `√n · λ_1^{(2)}`.
    pub values: Vec<f64>,
}

/// Second-order bias of the top sample eigenvalue under a diagonal truth.
///
/// Each replication draws `n` samples from `N(0, Σ*)`, sets `A` to the
/// sorted truth spectrum and `Δ = U*ᵀ(Σ* − Σ̂)U*` and records
/// `√n · λ_1^{(2)}(A, Δ)`. Replication `r` uses `stream.child(r)`.
pub fn second_order_bias_probe(sigma_star: &SpdMatrix, n: usize, reps: usize, stream: RngStream) -> Result<BiasProbe> {
    let p = sigma_star.dim();
    if p < 2 {
        return Err(Error::invalid("p", "need at least two dimensions"));
    }
    if (0..p).any(|i| (0..p).any(|j| i != j && sigma_star.get(i, j) != 0.0)) {
        return Err(Error::invalid("sigma_star", "must be diagonal"));
    }
    if reps == 0 {
        return Err(Error::invalid("reps", "must be positive"));
    }
    // Permutation U* that sorts the diagonal in nonincreasing order.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| sigma_star.get(b, b).partial_cmp(&sigma_star.get(a, a)).expect("finite"));
    let mut perm = vec![0.0; p * p];
    for (col, &row) in order.iter().enumerate() {
        perm[row * p + col] = 1.0;
    }
    let values: Vec<f64> = order.iter().map(|&i| sigma_star.get(i, i)).collect();
    let gap_floor = values[0] - values[p - 1];
    let sqrt_n = (n as f64).sqrt();

    let per_rep = |r: usize| -> Result<(f64, f64)> {
        let mut rng = stream.child(r as u64).rng();
        let (stat, bound) = one_probe(sigma_star, &perm, &values, n, &mut rng)?;
        Ok((sqrt_n * stat, sqrt_n * bound / gap_floor))
    };
    use rayon::prelude::*;
    let results = (0..reps).into_par_iter().map(per_rep).collect::<Result<Vec<_>>>()?;
    let mean = results.iter().map(|r| r.0).sum::<f64>() / reps as f64;
    let lower = results.iter().map(|r| r.1).sum::<f64>() / reps as f64;
    Ok(BiasProbe { mean_sqrt_n_second_order: mean, lower_bound: lower, values: results.into_iter().map(|r| r.0).collect() })
}

fn one_probe<R: Rng + ?Sized>(
    sigma_star: &SpdMatrix,
    perm: &[f64],
    values: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let data = draw_mvn(sigma_star, n, rng)?;
    let sigma_hat = sample_covariance(&data, false);
    let delta = sigma_star.sub(&sigma_hat)?.rotate(perm)?;
    let off: f64 = (1..values.len()).map(|j| delta.get(0, j).powi(2)).sum();
    let ctx = KatoContext::new(values.to_vec(), delta, 1)?;
    Ok((kato_term(&ctx, 2)?, off))
}
