use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{binomial, Budget};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pursuit::check_indices;
use crate::scalar::{Real, Scalar};
use crate::subspace::range_basis_default;

/// Column subsets whose smallest singular value is at or below
/// `KRANK_REL_TOL · σ₁(A)` count as dependent.
pub const KRANK_REL_TOL: f64 = 1e-10;

/// `σ_q(a)` (1-based, descending) as `f64`; zero past the last value.
pub(crate) fn sigma_q<T: Scalar>(a: &DMatrix<T>, q: usize) -> f64 {
    let s = linalg::singular_values(a);
    if q == 0 || q > s.len() {
        return 0.0;
    }
    s[q - 1].as_f64()
}

pub(crate) fn complement(n: usize, exclude: &[usize]) -> Vec<usize> {
    let mut mask = vec![false; n];
    for &i in exclude {
        mask[i] = true;
    }
    (0..n).filter(|&i| !mask[i]).collect()
}

pub(crate) fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Kruskal rank: the largest `q` such that every `q` columns are linearly
/// independent.
pub fn krank<T: Scalar>(a: &DMatrix<T>, budget: Budget) -> Result<usize> {
    let (m, n) = a.shape();
    let s1 = linalg::spectral_norm(a).as_f64();
    if n == 0 || m == 0 || s1 == 0.0 {
        return Ok(0);
    }
    let tol = KRANK_REL_TOL * s1;
    let qmax = m.min(n);
    let required: u128 = (1..=qmax).map(|q| binomial(n, q)).fold(0u128, |acc, c| acc.saturating_add(c));
    budget.check(n, required)?;
    if a.column_iter().any(|c| c.norm().as_f64() <= tol) {
        return Ok(0);
    }
    for q in 2..=qmax {
        for cols in (0..n).combinations(q) {
            if sigma_q(&a.select_columns(&cols), q) <= tol {
                return Ok(q - 1);
            }
        }
    }
    Ok(qmax)
}

/// Largest absolute inner product between distinct normalised columns.
pub fn mutual_coherence<T: Scalar>(a: &DMatrix<T>) -> Result<f64> {
    if let Some(i) = a.column_iter().position(|c| c.norm().as_f64() == 0.0) {
        return Err(Error::ZeroColumn(i));
    }
    let all: Vec<usize> = (0..a.ncols()).collect();
    lcp(a, &all, &[])
}

/// Mutual coherence of the columns indexed by `Δ \ Γ` after projecting
/// onto `R(A_Γ)^⊥` and renormalising. Columns that vanish under the
/// projection contribute nothing.
pub fn lcp<T: Scalar>(a: &DMatrix<T>, delta: &[usize], gamma: &[usize]) -> Result<f64> {
    let n = a.ncols();
    check_indices(delta, n)?;
    check_indices(gamma, n)?;
    let d: Vec<usize> = delta.iter().copied().filter(|i| !gamma.contains(i)).collect();
    if d.len() < 2 {
        return Err(Error::InsufficientPairs);
    }
    let p = projected_unit_columns(a, gamma, &d);
    let gram = p.adjoint() * &p;
    let mut best = 0.0f64;
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            best = best.max(gram[(i, j)].modulus().as_f64());
        }
    }
    Ok(best.min(1.0))
}

/// Columns `cols` of `a` projected onto `R(A_Γ)^⊥` and scaled to unit norm,
/// with vanishing columns set to zero.
pub(crate) fn projected_unit_columns<T: Scalar>(a: &DMatrix<T>, gamma: &[usize], cols: &[usize]) -> DMatrix<T> {
    let mut p = a.select_columns(cols);
    let norms = linalg::column_norms(&p);
    if !gamma.is_empty() {
        let q = range_basis_default(&a.select_columns(gamma));
        p = linalg::deflate(&q, &p);
    }
    let tiny = T::RealField::tiny();
    for (mut col, &orig) in p.column_iter_mut().zip(&norms) {
        let nrm = col.norm();
        if nrm <= tiny * orig || nrm <= num_traits::Zero::zero() {
            col.fill(T::zero());
        } else {
            col.unscale_mut(nrm);
        }
    }
    p
}

/// Weak restricted isometry data for `(A, J, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wrip {
    /// `δ_{|J|}(A_J; b) = (1 − κ)/(1 + κ)`.
    pub delta: f64,
    /// `min σ²_{|J|+b}(A_K) / max σ²_1(A_K)` over `K ⊇ J`, `|K| = |J| + b`.
    pub kappa: f64,
    /// Normaliser attaining `delta`: the midpoint of the squared
    /// singular-value range.
    pub c: f64,
    pub subsets: u128,
}

/// WRIP constant of `A` at `J` with `b` extra columns, by enumerating every
/// superset `K`.
pub fn wrip_constant<T: Scalar>(a: &DMatrix<T>, j: &[usize], b: usize, budget: Budget) -> Result<Wrip> {
    let (_, n) = a.shape();
    check_indices(j, n)?;
    let size = j.len() + b;
    if size == 0 || size > n {
        return Err(Error::InvalidDimension(format!("|J| + b = {size} must lie in 1..={n}")));
    }
    let rest = complement(n, j);
    let subsets = binomial(rest.len(), b);
    budget.check(n, subsets)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for extra in rest.iter().copied().combinations(b) {
        let k = union(j, &extra);
        let s = linalg::singular_values(&a.select_columns(&k));
        let top = s[0].as_f64();
        let bottom = if size <= s.len() { s[size - 1].as_f64() } else { 0.0 };
        hi = hi.max(top * top);
        lo = lo.min(bottom * bottom);
    }
    let kappa = if hi > 0.0 { lo / hi } else { 0.0 };
    Ok(Wrip {
        delta: (1.0 - kappa) / (1.0 + kappa),
        kappa,
        c: 0.5 * (lo + hi),
        subsets,
    })
}

/// RIP constant `δ_s(A)`: the WRIP constant with `J = ∅`, `b = s`.
pub fn rip_constant<T: Scalar>(a: &DMatrix<T>, s: usize, budget: Budget) -> Result<Wrip> {
    wrip_constant(a, &[], s, budget)
}

/// `krank(X*) == rank(X)`.
pub fn row_nondegenerate<T: Scalar>(x: &DMatrix<T>, budget: Budget) -> Result<bool> {
    let kr = krank(&x.adjoint(), budget)?;
    let rank = linalg::numerical_rank(x, T::RealField::lit(KRANK_REL_TOL));
    Ok(kr == rank)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Uniqueness {
    pub krank: usize,
    /// `krank(Φ) > 2k − rank(X₀)`: every row `k`-sparse solution is unique.
    pub l0_ok: bool,
    /// `krank(Φ) ≥ k + 1`: unique for almost every `X₀`.
    pub k1_ok: bool,
}

pub fn uniqueness_oracles<T: Scalar>(phi: &DMatrix<T>, k: usize, rank_x: usize, budget: Budget) -> Result<Uniqueness> {
    let kr = krank(phi, budget)?;
    Ok(Uniqueness {
        krank: kr,
        l0_ok: (kr as i64) > 2 * k as i64 - rank_x as i64,
        k1_ok: kr > k,
    })
}

/// `[1 − μ̄, 1 + μ̄]` for the column-normalised `a`, where `μ̄` is the
/// largest off-diagonal absolute row sum of the Gram matrix. Every squared
/// singular value of the normalised matrix lies in this interval.
pub fn gershgorin_interval<T: Scalar>(a: &DMatrix<T>) -> (f64, f64) {
    let u = linalg::normalize_columns(a);
    let g = u.adjoint() * &u;
    let q = g.ncols();
    let mu = (0..q)
        .map(|i| (0..q).filter(|&j| j != i).map(|j| g[(i, j)].modulus().as_f64()).sum::<f64>())
        .fold(0.0, f64::max);
    (1.0 - mu, 1.0 + mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matmodel::{gen_gaussian_phi, Seed};
    use nalgebra::dmatrix;

    #[test]
    fn krank_examples() {
        let b = Budget::default();
        assert_eq!(krank(&DMatrix::<f64>::identity(3, 3), b).unwrap(), 3);
        assert_eq!(krank(&dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 1.0], b).unwrap(), 2);
        assert_eq!(krank(&dmatrix![1.0, 0.0, 2.0; 0.0, 0.0, 1.0], b).unwrap(), 0);
        assert_eq!(krank(&dmatrix![1.0, 2.0, 0.0; 1.0, 2.0, 1.0], b).unwrap(), 1);
    }

    #[test]
    fn krank_gaussian_is_full() {
        let phi = gen_gaussian_phi::<f64>(6, 10, 1.0, Seed::new(1, 2)).unwrap();
        assert_eq!(krank(&phi, Budget::default()).unwrap(), 6);
    }

    #[test]
    fn krank_budget_guard() {
        let phi = DMatrix::<f64>::identity(25, 25);
        assert!(matches!(krank(&phi, Budget::default()), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn coherence_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(mutual_coherence(&DMatrix::<f64>::identity(3, 3)).unwrap(), 0.0);
        let a = dmatrix![1.0, s; 0.0, s];
        assert!((mutual_coherence(&a).unwrap() - s).abs() < 1e-15);
        let dup = dmatrix![1.0, 2.0; 3.0, 6.0];
        assert!((mutual_coherence(&dup).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(mutual_coherence(&dmatrix![1.0, 0.0; 0.0, 0.0]), Err(Error::ZeroColumn(1))));
    }

    #[test]
    fn lcp_projection() {
        let a = DMatrix::<f64>::identity(3, 3);
        assert_eq!(lcp(&a, &[1, 2], &[0]).unwrap(), 0.0);
        let b = dmatrix![1.0, 1.0, 1.0; 0.0, 1.0, 1.0; 0.0, 0.0, 1.0];
        // projected away from e₁, columns 1 and 2 become e₂ and e₂ + e₃
        let v = lcp(&b, &[1, 2], &[0]).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(matches!(lcp(&b, &[1, 2], &[1]), Err(Error::InsufficientPairs)));
    }

    #[test]
    fn wrip_examples() {
        let b = Budget::default();
        let q = DMatrix::<f64>::identity(5, 5);
        assert!(wrip_constant(&q, &[0, 3], 2, b).unwrap().delta.abs() < 1e-15);
        let a = dmatrix![1.0, 1.0; 0.0, 1.0];
        let w = wrip_constant(&a, &[0, 1], 0, b).unwrap();
        let s = linalg::singular_values(&a);
        let kappa: f64 = (s[1] * s[1]) / (s[0] * s[0]);
        assert!((w.delta - (1.0 - kappa) / (1.0 + kappa)).abs() < 1e-14);
        assert_eq!(w.subsets, 1);
    }

    #[test]
    fn row_nondegenerate_examples() {
        let b = Budget::default();
        let x = dmatrix![1.0, 2.0; 1.0, 2.0; 0.0, 1.0];
        assert!(!row_nondegenerate(&x, b).unwrap());
        assert!(row_nondegenerate(&dmatrix![0.3, -1.0, 2.0], b).unwrap());
        let g = gen_gaussian_phi::<f64>(5, 3, 1.0, Seed::new(4, 4)).unwrap();
        assert!(row_nondegenerate(&g, b).unwrap());
    }

    #[test]
    fn uniqueness_edges() {
        let b = Budget::default();
        // krank(I₆) = 6: k = 4, rank 1 needs krank > 7
        let u = uniqueness_oracles(&DMatrix::<f64>::identity(6, 6), 4, 1, b).unwrap();
        assert!(!u.l0_ok);
        assert!(u.k1_ok);
        // krank = 5 = 2k − r + 1 with k = 3, r = 2
        let u = uniqueness_oracles(&DMatrix::<f64>::identity(5, 5), 3, 2, b).unwrap();
        assert!(u.l0_ok);
        let u = uniqueness_oracles(&DMatrix::<f64>::identity(4, 4), 3, 2, b).unwrap();
        assert!(!u.l0_ok);
    }

    #[test]
    fn gershgorin_identity() {
        let (lo, hi) = gershgorin_interval(&DMatrix::<f64>::identity(3, 3));
        assert_eq!((lo, hi), (1.0, 1.0));
    }
}
