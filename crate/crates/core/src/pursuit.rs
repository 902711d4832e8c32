//! Greedy subspace pursuit: the `submp` selection kernel, OSMP, the two-stage
//! TSMP variants with their ESMS pruning steps, and the QR-based TSMP path.
//!
//! All argmax steps break ties towards the lowest column index.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, OrthoBasis};
use crate::matmodel::RecoveryProblem;
use crate::scalar::{Real, RealOf, Scalar};
use crate::subspace::{estimate_signal_subspace, RankPolicy, SubspaceBasis};

/// Knobs shared by every pursuit solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PursuitParams {
    pub rank_policy: RankPolicy,
    /// A candidate `φ_l` is skipped when `‖P⊥φ_l‖ ≤ zero_col_tol · ‖φ_l‖`.
    pub zero_col_tol: f64,
    /// Singular values of the projected signal subspace at or below this
    /// count as zero (the subspace has collapsed into `R(Φ_Γ)`).
    pub subspace_tol: f64,
    /// Scores within this relative distance of the running best are ties,
    /// which go to the lowest index.
    pub tie_tol: f64,
}

impl Default for PursuitParams {
    fn default() -> Self {
        Self::for_scalar::<f64>()
    }
}

impl PursuitParams {
    /// Defaults scaled to the precision of `T`.
    pub fn for_scalar<T: Scalar>() -> Self {
        let tiny = RealOf::<T>::tiny().as_f64();
        Self {
            rank_policy: RankPolicy::default(),
            zero_col_tol: tiny,
            subspace_tol: tiny * 100.0,
            tie_tol: tiny * 100.0,
        }
    }

    pub fn with_rank_policy(mut self, policy: RankPolicy) -> Self {
        self.rank_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.rank_policy.validate()?;
        if [self.zero_col_tol, self.subspace_tol].iter().any(|&v| v.is_nan() || v <= 0.0) || self.tie_tol.is_nan() || self.tie_tol < 0.0 {
            return Err(Error::Config("pursuit tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Output of every solver.
#[derive(Debug, Clone)]
pub struct RecoveryResult<T: Scalar> {
    pub algo: String,
    /// Estimated support, sorted ascending.
    pub omega_hat: Vec<usize>,
    /// TSMP candidate pool in selection order.
    pub omega_c: Option<Vec<usize>>,
    /// Row-sparse estimate; rows outside `omega_hat` are zero.
    pub x_hat: DMatrix<T>,
    /// Row-norm scores aligned with `omega_c` when present, else `omega_hat`.
    pub zeta: Vec<RealOf<T>>,
    pub runtime_ms: f64,
    /// A least-squares step hit a rank-deficient column set.
    pub rank_deficient: bool,
    /// Threshold pruning kept no index.
    pub empty_support: bool,
}

impl<T: Scalar> RecoveryResult<T> {
    pub(crate) fn from_support(algo: &str, phi: &DMatrix<T>, y: &DMatrix<T>, mut omega_hat: Vec<usize>, start: Instant) -> Self {
        omega_hat.sort_unstable();
        let (x_hat, rank_deficient) = refit(phi, y, &omega_hat);
        let zeta = omega_hat.iter().map(|&i| x_hat.row(i).norm()).collect();
        Self {
            algo: algo.to_string(),
            omega_hat,
            omega_c: None,
            x_hat,
            zeta,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            rank_deficient,
            empty_support: false,
        }
    }
}

/// Minimum-Frobenius-norm minimiser of `‖Y − Φ_J X‖_F`.
pub fn least_squares_rows<T: Scalar>(phi_j: &DMatrix<T>, y: &DMatrix<T>) -> Result<DMatrix<T>> {
    if phi_j.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "phi_j has {} rows, y has {}",
            phi_j.nrows(),
            y.nrows()
        )));
    }
    Ok(linalg::min_norm_solve(phi_j, y).0)
}

/// `X̂` with `X̂^Q = Φ_Q† Y` and zeros elsewhere. The flag reports a
/// rank-deficient `Φ_Q`.
pub fn refit<T: Scalar>(phi: &DMatrix<T>, y: &DMatrix<T>, support: &[usize]) -> (DMatrix<T>, bool) {
    let mut x = DMatrix::zeros(phi.ncols(), y.ncols());
    if support.is_empty() {
        return (x, false);
    }
    let (coef, rank) = linalg::min_norm_solve(&phi.select_columns(support), y);
    scatter_rows(&mut x, support, &coef);
    (x, rank < support.len())
}

fn scatter_rows<T: Scalar>(x: &mut DMatrix<T>, rows: &[usize], block: &DMatrix<T>) {
    for (i, &r) in rows.iter().enumerate() {
        x.row_mut(r).copy_from(&block.row(i));
    }
}

pub(crate) fn check_indices(gamma: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &g in gamma {
        if g >= n {
            return Err(Error::InvalidDimension(format!("index {g} out of range for n = {n}")));
        }
        if std::mem::replace(&mut seen[g], true) {
            return Err(Error::InvalidDimension(format!("duplicate index {g}")));
        }
    }
    Ok(())
}

/// Lowest-index argmax over `Some` scores; a later score must beat the
/// running best by more than `tie_tol · max(1, best)` to replace it.
pub(crate) fn argmax<R: Real>(scores: &[Option<R>], tie_tol: f64) -> Option<usize> {
    let tol = R::lit(tie_tol);
    let one = R::lit(1.0);
    let mut best: Option<(usize, R)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(v) = *s {
            match best {
                Some((_, b)) if v <= b + tol * if b > one { b } else { one } => {}
                _ => best = Some((i, v)),
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Orthonormal basis of `R(P⊥ Ŝ)` with collapsed directions removed.
fn projected_signal_basis<T: Scalar>(q_gamma: &DMatrix<T>, s_hat: &DMatrix<T>, tol: RealOf<T>) -> DMatrix<T> {
    linalg::range_basis(&linalg::deflate(q_gamma, s_hat), tol)
}

/// Incremental state of the `submp` kernel: an orthonormal basis of
/// `R(Φ_Γ)` and the residual columns `P⊥_{R(Φ_Γ)} Φ`.
struct SubmpState<T: Scalar> {
    basis: OrthoBasis<T>,
    resid: DMatrix<T>,
    col_norms: Vec<RealOf<T>>,
    taken: Vec<bool>,
}

impl<T: Scalar> SubmpState<T> {
    fn new(phi: &DMatrix<T>, gamma0: &[usize]) -> Self {
        let (m, n) = phi.shape();
        let mut state = Self {
            basis: OrthoBasis::new(m),
            resid: phi.clone(),
            col_norms: linalg::column_norms(phi),
            taken: vec![false; n],
        };
        for &g in gamma0 {
            state.take(phi, g);
        }
        state
    }

    fn take(&mut self, phi: &DMatrix<T>, idx: usize) {
        self.taken[idx] = true;
        let col: DVector<T> = phi.column(idx).into_owned();
        if let Some(q) = self.basis.push(&col, RealOf::<T>::eps()) {
            // resid ← (I − qq*) resid
            let coeffs = q.adjoint() * &self.resid;
            self.resid -= &q * coeffs;
        }
    }

    /// The submp ratio for every untaken, admissible column.
    fn scores(&self, s_hat: &DMatrix<T>, params: &PursuitParams) -> Vec<Option<RealOf<T>>> {
        let zero_tol = RealOf::<T>::lit(params.zero_col_tol);
        let u = projected_signal_basis(&self.basis.matrix(), s_hat, RealOf::<T>::lit(params.subspace_tol));
        let aligned = u.adjoint() * &self.resid;
        (0..self.resid.ncols())
            .map(|b| {
                if self.taken[b] {
                    return None;
                }
                let den = self.resid.column(b).norm();
                if den <= zero_tol * self.col_norms[b] || den <= num_traits::Zero::zero() {
                    return None;
                }
                let num = if u.ncols() == 0 {
                    num_traits::Zero::zero()
                } else {
                    aligned.column(b).norm()
                };
                Some(num / den)
            })
            .collect()
    }
}

/// Selects `s` more columns of `phi` after `gamma0`, each maximising
/// `‖P_{R(P⊥Ŝ)} φ_l‖ / ‖P⊥φ_l‖` where `P⊥` projects away from the columns
/// already chosen. Returns only the newly selected indices, in order.
pub fn submp<T: Scalar>(
    s_hat: &SubspaceBasis<T>,
    phi: &DMatrix<T>,
    gamma0: &[usize],
    s: usize,
    params: &PursuitParams,
) -> Result<Vec<usize>> {
    let (m, n) = phi.shape();
    if s_hat.ambient_dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "signal subspace lives in dimension {}, phi has {m} rows",
            s_hat.ambient_dim()
        )));
    }
    if s == 0 {
        return Err(Error::InvalidDimension("submp needs s ≥ 1".into()));
    }
    check_indices(gamma0, n)?;
    if gamma0.len() + s > n {
        return Err(Error::ExhaustedCandidates {
            requested: s,
            available: n - gamma0.len(),
        });
    }
    let mut state = SubmpState::new(phi, gamma0);
    let mut picked = Vec::with_capacity(s);
    for _ in 0..s {
        let scores = state.scores(s_hat.basis(), params);
        let Some(a) = argmax(&scores, params.tie_tol) else {
            return Err(Error::ExhaustedCandidates {
                requested: s,
                available: picked.len(),
            });
        };
        state.take(phi, a);
        picked.push(a);
    }
    Ok(picked)
}

pub(crate) fn signal_subspace<T: Scalar>(problem: &RecoveryProblem<T>, params: &PursuitParams) -> Result<SubspaceBasis<T>> {
    params.validate()?;
    estimate_signal_subspace(&problem.y, params.rank_policy)
}

/// OSMP: `k` steps of `submp` from an empty set, then a least-squares fit.
pub fn osmp<T: Scalar>(problem: &RecoveryProblem<T>, k: usize, params: &PursuitParams) -> Result<RecoveryResult<T>> {
    let start = Instant::now();
    let (m, n) = problem.phi.shape();
    if k == 0 || k > n || k >= m {
        return Err(Error::InvalidDimension(format!("OSMP needs 1 ≤ k ≤ min(m − 1, n), got k = {k}")));
    }
    let s_hat = signal_subspace(problem, params)?;
    let omega = submp(&s_hat, &problem.phi, &[], k, params)?;
    Ok(RecoveryResult::from_support("osmp", &problem.phi, &problem.y, omega, start))
}

/// Result of an ESMS pruning step.
#[derive(Debug, Clone)]
pub struct Esms<T: Scalar> {
    /// Kept indices, sorted.
    pub support: Vec<usize>,
    pub x_hat: DMatrix<T>,
    /// `‖X̄^{l}‖₂` for each `l ∈ J`, in the order of `J`.
    pub zeta: Vec<RealOf<T>>,
    pub rank_deficient: bool,
}

fn pool_scores<T: Scalar>(phi: &DMatrix<T>, y: &DMatrix<T>, j: &[usize]) -> Result<(Vec<RealOf<T>>, bool)> {
    if phi.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch("phi and y row counts differ".into()));
    }
    check_indices(j, phi.ncols())?;
    let (xbar, rank) = linalg::min_norm_solve(&phi.select_columns(j), y);
    Ok((linalg::row_norms(&xbar), rank < j.len()))
}

/// ESMS₁: keep the `k` pool indices with the largest least-squares row norms.
pub fn esms1<T: Scalar>(phi: &DMatrix<T>, y: &DMatrix<T>, j: &[usize], k: usize) -> Result<Esms<T>> {
    if k > j.len() {
        return Err(Error::InvalidDimension(format!("k = {k} exceeds pool size {}", j.len())));
    }
    let (zeta, pool_deficient) = pool_scores(phi, y, j)?;
    let support = top_k(j, &zeta, k);
    let (x_hat, deficient) = refit(phi, y, &support);
    Ok(Esms {
        support,
        x_hat,
        zeta,
        rank_deficient: pool_deficient || deficient,
    })
}

/// ESMS₂: keep the pool indices whose row norm exceeds `kappa`.
pub fn esms2<T: Scalar>(phi: &DMatrix<T>, y: &DMatrix<T>, j: &[usize], kappa: f64) -> Result<Esms<T>> {
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let (zeta, pool_deficient) = pool_scores(phi, y, j)?;
    let kap = RealOf::<T>::lit(kappa);
    let mut support: Vec<usize> = j.iter().zip(&zeta).filter(|(_, &z)| z > kap).map(|(&i, _)| i).collect();
    support.sort_unstable();
    let (x_hat, deficient) = refit(phi, y, &support);
    Ok(Esms {
        support,
        x_hat,
        zeta,
        rank_deficient: pool_deficient || deficient,
    })
}

/// Indices of the `k` largest scores (ties → lowest index), sorted.
pub(crate) fn top_k<R: Real>(idx: &[usize], score: &[R], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by(|&a, &b| {
        score[b]
            .partial_cmp(&score[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(idx[a].cmp(&idx[b]))
    });
    let mut out: Vec<usize> = order[..k].iter().map(|&p| idx[p]).collect();
    out.sort_unstable();
    out
}

fn pool_size<T: Scalar>(problem: &RecoveryProblem<T>) -> Result<usize> {
    let (m, n) = problem.phi.shape();
    if m < 2 {
        return Err(Error::InvalidDimension("TSMP needs m ≥ 2".into()));
    }
    if n < m - 1 {
        return Err(Error::ExhaustedCandidates {
            requested: m - 1,
            available: n,
        });
    }
    Ok(m - 1)
}

fn tsmp_result<T: Scalar>(algo: &str, pool: Vec<usize>, esms: Esms<T>, start: Instant) -> RecoveryResult<T> {
    RecoveryResult {
        algo: algo.to_string(),
        empty_support: esms.support.is_empty(),
        omega_hat: esms.support,
        omega_c: Some(pool),
        x_hat: esms.x_hat,
        zeta: esms.zeta,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        rank_deficient: esms.rank_deficient,
    }
}

/// TSMP₁ (`k` known): an `m − 1` candidate pool from `submp`, pruned by ESMS₁.
pub fn tsmp1<T: Scalar>(problem: &RecoveryProblem<T>, k: usize, params: &PursuitParams) -> Result<RecoveryResult<T>> {
    let start = Instant::now();
    let pool_len = pool_size(problem)?;
    if k == 0 || k > pool_len {
        return Err(Error::InvalidDimension(format!("TSMP needs 1 ≤ k ≤ m − 1, got k = {k}")));
    }
    let s_hat = signal_subspace(problem, params)?;
    let pool = submp(&s_hat, &problem.phi, &[], pool_len, params)?;
    let esms = esms1(&problem.phi, &problem.y, &pool, k)?;
    Ok(tsmp_result("tsmp", pool, esms, start))
}

/// TSMP₂ (`k` unknown): the same pool, pruned by the threshold `kappa`.
pub fn tsmp2<T: Scalar>(problem: &RecoveryProblem<T>, kappa: f64, params: &PursuitParams) -> Result<RecoveryResult<T>> {
    let start = Instant::now();
    let pool_len = pool_size(problem)?;
    let s_hat = signal_subspace(problem, params)?;
    let pool = submp(&s_hat, &problem.phi, &[], pool_len, params)?;
    let esms = esms2(&problem.phi, &problem.y, &pool, kappa)?;
    Ok(tsmp_result("tsmp2", pool, esms, start))
}

/// TSMP₂ with `κ` placed in the largest gap of the pool scores.
pub fn tsmp2_gap<T: Scalar>(problem: &RecoveryProblem<T>, params: &PursuitParams) -> Result<RecoveryResult<T>> {
    let start = Instant::now();
    let pool_len = pool_size(problem)?;
    let s_hat = signal_subspace(problem, params)?;
    let pool = submp(&s_hat, &problem.phi, &[], pool_len, params)?;
    let (zeta, _) = pool_scores(&problem.phi, &problem.y, &pool)?;
    let kappa = kappa_largest_gap(&zeta)
        .ok_or_else(|| Error::Domain("pool scores have no positive gap to threshold".into()))?;
    let esms = esms2(&problem.phi, &problem.y, &pool, kappa)?;
    Ok(tsmp_result("tsmp2_gap", pool, esms, start))
}

/// Threshold halfway across the largest gap between consecutive sorted
/// scores. `None` with fewer than two scores.
pub fn kappa_largest_gap<R: Real>(zeta: &[R]) -> Option<f64> {
    let mut z: Vec<f64> = zeta.iter().map(|v| v.as_f64()).collect();
    if z.len() < 2 {
        return None;
    }
    z.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let (i, _) = z
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i, w[0] - w[1]))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let kappa = 0.5 * (z[i] + z[i + 1]);
    (kappa > 0.0).then_some(kappa)
}

/// Estimated noise level of the pool rows, `E‖(Φ_J† W)^{i}‖₂` averaged over
/// `i`, for `W` with i.i.d. entries of per-component standard deviation
/// `sigma_w`. Uses the root-mean-square approximation of each row norm.
pub fn kappa_noise_level<T: Scalar>(phi_j: &DMatrix<T>, sigma_w: f64, l: usize) -> f64 {
    if phi_j.ncols() == 0 {
        return 0.0;
    }
    let (pinv, _) = linalg::min_norm_solve(phi_j, &DMatrix::identity(phi_j.nrows(), phi_j.nrows()));
    let comps = T::FIELD.components() as f64;
    let mean_row: f64 = linalg::row_norms(&pinv).iter().map(|v| v.as_f64()).sum::<f64>() / pinv.nrows() as f64;
    sigma_w * (comps * l as f64).sqrt() * mean_row
}

/// Solves `(R*R) X = B` by two triangular solves; `None` when `R` is
/// numerically singular.
fn normal_solve<T: Scalar>(r: &DMatrix<T>, b: &DMatrix<T>) -> Option<DMatrix<T>> {
    let n = r.ncols();
    let rmax = (0..n).map(|i| r[(i, i)].modulus()).fold(RealOf::<T>::lit(0.0), |a, v| if v > a { v } else { a });
    let cut = rmax * RealOf::<T>::eps() * RealOf::<T>::lit((r.nrows().max(n) * 10) as f64);
    if (0..n).any(|i| r[(i, i)].modulus() <= cut) {
        return None;
    }
    let z = r.ad_solve_upper_triangular(b)?;
    r.solve_upper_triangular(&z)
}

/// `Φ_J† Y` through the QR factor of `Φ_J`, falling back to the SVD
/// pseudoinverse when `R` is singular.
fn qr_rows<T: Scalar>(phi: &DMatrix<T>, y: &DMatrix<T>, j: &[usize]) -> (DMatrix<T>, bool) {
    if j.is_empty() {
        return (DMatrix::zeros(0, y.ncols()), false);
    }
    let sub = phi.select_columns(j);
    if sub.nrows() >= sub.ncols() {
        let r = sub.clone().qr().r();
        if let Some(x) = normal_solve(&r, &(sub.adjoint() * y)) {
            return (x, false);
        }
    }
    let (x, rank) = linalg::min_norm_solve(&sub, y);
    (x, rank < j.len())
}

/// TSMP₁ carried out with explicit QR factorisations: the residual
/// projector `A = I − Q₂Q₂*` is rebuilt from the QR of the selected
/// normalised columns, the projected subspace basis comes from the QR of
/// `A U_y`, and both least-squares stages use `(R*R)⁻¹Φ*Y`.
pub fn tsmp1_qr<T: Scalar>(problem: &RecoveryProblem<T>, k: usize, params: &PursuitParams) -> Result<RecoveryResult<T>> {
    let start = Instant::now();
    let pool_len = pool_size(problem)?;
    if k == 0 || k > pool_len {
        return Err(Error::InvalidDimension(format!("TSMP needs 1 ≤ k ≤ m − 1, got k = {k}")));
    }
    let u_y = signal_subspace(problem, params)?.into_inner();
    let phi = &problem.phi;
    let (m, n) = phi.shape();
    let phi_bar = linalg::normalize_columns(phi);
    let zero_tol = RealOf::<T>::lit(params.zero_col_tol);
    let sub_tol = RealOf::<T>::lit(params.subspace_tol);

    let mut a = DMatrix::<T>::identity(m, m);
    let mut gamma: Vec<usize> = Vec::with_capacity(pool_len);
    let mut taken = vec![false; n];
    for _ in 0..pool_len {
        let au = &a * &u_y;
        let q1 = if au.ncols() == 0 {
            au
        } else {
            let qr = au.qr();
            let (q, r) = (qr.q(), qr.r());
            // drop directions of A·U_y that have collapsed to zero
            let dec = linalg::svd(&r);
            let d = dec.s.iter().filter(|&&v| v > sub_tol).count();
            q * dec.u.columns(0, d)
        };
        let t = &a * &phi_bar;
        let aligned = q1.adjoint() * &t;
        let scores: Vec<Option<RealOf<T>>> = (0..n)
            .map(|b| {
                if taken[b] {
                    return None;
                }
                let den = t.column(b).norm();
                if den <= zero_tol || den <= num_traits::Zero::zero() {
                    return None;
                }
                let num = if q1.ncols() == 0 {
                    num_traits::Zero::zero()
                } else {
                    aligned.column(b).norm()
                };
                Some(num / den)
            })
            .collect();
        let Some(sel) = argmax(&scores, params.tie_tol) else {
            return Err(Error::ExhaustedCandidates {
                requested: pool_len,
                available: gamma.len(),
            });
        };
        taken[sel] = true;
        gamma.push(sel);
        let q2 = phi_bar.select_columns(&gamma).qr().q();
        a = DMatrix::identity(m, m) - &q2 * q2.adjoint();
    }

    let (xbar, pool_deficient) = qr_rows(phi, &problem.y, &gamma);
    let zeta = linalg::row_norms(&xbar);
    let omega_hat = top_k(&gamma, &zeta, k);
    let (coef, deficient) = qr_rows(phi, &problem.y, &omega_hat);
    let mut x_hat = DMatrix::zeros(n, problem.y.ncols());
    scatter_rows(&mut x_hat, &omega_hat, &coef);
    Ok(RecoveryResult {
        algo: "tsmp_qr".into(),
        omega_hat,
        omega_c: Some(gamma),
        x_hat,
        zeta,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        rank_deficient: pool_deficient || deficient,
        empty_support: false,
    })
}
