use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::measures::{complement, projected_unit_columns, sigma_q, union, wrip_constant};
use super::{binomial, Budget};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pursuit::check_indices;
use crate::scalar::{Real, Scalar};

/// Singular-value quantities `a₁(v₁)`, `a₂(v₁)`, `a₃(v₁)` governing whether
/// the first steps of `submp` stay inside the true support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem3 {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

/// * `a₁ = δ_k(Φ_Ω; v₁ + 1)`
/// * `a₂ = min_{Δ ⊆ Σ∖Ω, |Δ| = v₁} [min_i σ²_{k+v₁+1}(Φ_{Ω∪Δ∪{i}}) / max_j σ²₁(Φ_{Ω∪Δ∪{j}})]`
///   with `i, j ∉ Ω ∪ Δ`
/// * `a₃ = min_{Δ ⊆ Σ∖Ω, |Δ| = v₁+1} σ²_{k+v₁+1}(Φ_{Ω∪Δ}) / max_i ‖φ_i‖²`
pub fn theorem3_quantities<T: Scalar>(phi: &DMatrix<T>, omega: &[usize], v1: usize, budget: Budget) -> Result<Theorem3> {
    let n = phi.ncols();
    check_indices(omega, n)?;
    let k = omega.len();
    let rest = complement(n, omega);
    if k == 0 || rest.len() < v1 + 1 {
        return Err(Error::InvalidDimension(format!(
            "need 1 ≤ |Ω| and v₁ + 1 ≤ n − |Ω|, got |Ω| = {k}, v₁ = {v1}, n = {n}"
        )));
    }
    let wide = binomial(rest.len(), v1 + 1);
    let narrow = binomial(rest.len(), v1).saturating_mul((rest.len() - v1) as u128);
    budget.check(n, wide.saturating_mul(2).saturating_add(narrow))?;

    let a1 = wrip_constant(phi, omega, v1 + 1, budget)?.delta;
    let q = k + v1 + 1;

    let mut a2 = f64::INFINITY;
    for delta in rest.iter().copied().combinations(v1) {
        let base = union(omega, &delta);
        let (mut num, mut den) = (f64::INFINITY, 0.0f64);
        for &i in rest.iter().filter(|i| !delta.contains(i)) {
            let cols = union(&base, &[i]);
            let s = linalg::singular_values(&phi.select_columns(&cols));
            let top = s[0].as_f64();
            let low = if q <= s.len() { s[q - 1].as_f64() } else { 0.0 };
            num = num.min(low * low);
            den = den.max(top * top);
        }
        a2 = a2.min(if den > 0.0 { num / den } else { 0.0 });
    }

    let max_col = linalg::column_norms(phi).iter().fold(0.0f64, |acc, v| acc.max(v.as_f64()));
    let mut low3 = f64::INFINITY;
    for delta in rest.iter().copied().combinations(v1 + 1) {
        let s = sigma_q(&phi.select_columns(&union(omega, &delta)), q);
        low3 = low3.min(s * s);
    }
    let a3 = if max_col > 0.0 { low3 / (max_col * max_col) } else { 0.0 };
    Ok(Theorem3 { a1, a2, a3 })
}

/// OSMP recovery conditions for a fixed `(Φ, Ω)`, noise level `η` and
/// subspace dimension `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem4 {
    /// `√(r/k)·α − √(1 − β²) − 2η > 0`.
    pub cond36: bool,
    /// `min σ²_{r+1}(Φ̇_{(Ω∪{i})∖Γ}) > 4η(1 − η)` over `|Γ| = k − r`.
    pub cond37: bool,
    pub alpha: f64,
    pub beta: f64,
    /// The minimum in `cond37`.
    pub min_sigma_sq: f64,
    /// No `Γ ⊂ Ω` with `|Γ| < k − r` exists (`k = r`); `alpha` and `beta`
    /// are reported as 1 and `cond36` holds.
    pub vacuous: bool,
}

/// `(σ_{|S|}(Φ̇_S), min_i σ_{|S|+1}(Φ̇_{S∪{i}}))` with `S = Ω ∖ Γ`, `i ∉ Ω`,
/// and `Φ̇` the unit columns projected away from `R(Φ_Γ)`.
fn projected_sigmas<T: Scalar>(phi: &DMatrix<T>, omega: &[usize], gamma: &[usize], outside: &[usize]) -> (f64, f64) {
    let s: Vec<usize> = omega.iter().copied().filter(|i| !gamma.contains(i)).collect();
    let cols: Vec<usize> = s.iter().chain(outside).copied().collect();
    let dot = projected_unit_columns(phi, gamma, &cols);
    let ns = s.len();
    let own = sigma_q(&dot.columns(0, ns).into_owned(), ns);
    let mut with_one = f64::INFINITY;
    let mut block = DMatrix::<T>::zeros(dot.nrows(), ns + 1);
    block.columns_mut(0, ns).copy_from(&dot.columns(0, ns));
    for p in 0..outside.len() {
        block.column_mut(ns).copy_from(&dot.column(ns + p));
        with_one = with_one.min(sigma_q(&block, ns + 1));
    }
    (own, with_one)
}

pub fn osmp_theorem4_check<T: Scalar>(
    phi: &DMatrix<T>,
    omega: &[usize],
    eta: f64,
    r: usize,
    budget: Budget,
) -> Result<Theorem4> {
    let n = phi.ncols();
    check_indices(omega, n)?;
    let k = omega.len();
    if r == 0 || r > k {
        return Err(Error::InvalidDimension(format!("need 1 ≤ r ≤ |Ω| = {k}, got r = {r}")));
    }
    if !(0.0..=0.5).contains(&eta) {
        return Err(Error::Domain(format!("eta must lie in [0, 0.5], got {eta}")));
    }
    let outside = complement(n, omega);
    if outside.is_empty() {
        return Err(Error::InvalidDimension("Ω covers every column".into()));
    }
    let family: u128 = (0..k - r).map(|g| binomial(k, g)).fold(0u128, |a, c| a.saturating_add(c));
    let last = binomial(k, k - r);
    let per = outside.len() as u128 + 1;
    budget.check(n, family.saturating_add(last).saturating_mul(per))?;

    let (mut alpha, mut beta) = (f64::INFINITY, f64::INFINITY);
    for g in 0..k - r {
        for gamma in omega.iter().copied().combinations(g) {
            let (a, b) = projected_sigmas(phi, omega, &gamma, &outside);
            alpha = alpha.min(a);
            beta = beta.min(b);
        }
    }
    let vacuous = k == r;
    let cond36 = if vacuous {
        alpha = 1.0;
        beta = 1.0;
        true
    } else {
        (r as f64 / k as f64).sqrt() * alpha - (1.0 - beta * beta).max(0.0).sqrt() - 2.0 * eta > 0.0
    };

    let mut min_sigma_sq = f64::INFINITY;
    for gamma in omega.iter().copied().combinations(k - r) {
        let (_, b) = projected_sigmas(phi, omega, &gamma, &outside);
        min_sigma_sq = min_sigma_sq.min(b * b);
    }
    Ok(Theorem4 {
        cond36,
        cond37: min_sigma_sq > 4.0 * eta * (1.0 - eta),
        alpha,
        beta,
        min_sigma_sq,
        vacuous,
    })
}

/// Second-stage TSMP conditions given a pool that contains the support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem7 {
    /// `min_{a∈Ω} ‖X₀^{a}‖₂ > 2·noise_ratio`.
    pub eq44: bool,
    /// `noise_ratio < κ ≤ min_row_norm − noise_ratio`, when `κ` is given.
    pub eq45: Option<bool>,
    /// `‖W*‖₂,∞ / σ_min(Φ_{Ω_c})`, where `‖W*‖₂,∞` is the largest row norm
    /// of `W`.
    pub noise_ratio: f64,
    pub min_row_norm: f64,
    pub sigma_min_pool: f64,
}

pub fn tsmp_theorem7_check<T: Scalar>(
    phi: &DMatrix<T>,
    omega: &[usize],
    omega_c: &[usize],
    x0: &DMatrix<T>,
    w: &DMatrix<T>,
    kappa: Option<f64>,
) -> Result<Theorem7> {
    let (m, n) = phi.shape();
    check_indices(omega, n)?;
    check_indices(omega_c, n)?;
    if x0.nrows() != n || w.nrows() != m || x0.ncols() != w.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "x0 is {}×{}, w is {}×{}, phi is {m}×{n}",
            x0.nrows(),
            x0.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    if let Some(&miss) = omega.iter().find(|i| !omega_c.contains(i)) {
        return Err(Error::ContainmentViolation(format!("index {miss} of Ω is missing from Ω_c")));
    }
    let pool = phi.select_columns(omega_c);
    let sigma = sigma_q(&pool, omega_c.len());
    let noise = linalg::max_row_norm(w).as_f64();
    let noise_ratio = if noise == 0.0 { 0.0 } else { noise / sigma };
    let min_row_norm = omega.iter().map(|&a| x0.row(a).norm().as_f64()).fold(f64::INFINITY, f64::min);
    Ok(Theorem7 {
        eq44: min_row_norm > 2.0 * noise_ratio,
        eq45: kappa.map(|kap| noise_ratio < kap && kap <= min_row_norm - noise_ratio),
        noise_ratio,
        min_row_norm,
        sigma_min_pool: sigma,
    })
}
