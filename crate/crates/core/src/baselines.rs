//! Reference solvers used for comparison: MUSIC, SA-MUSIC followed by
//! OSMP-style partial support, and simultaneous OMP.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, OrthoBasis};
use crate::matmodel::RecoveryProblem;
use crate::pursuit::{self, submp, PursuitParams, RecoveryResult};
use crate::scalar::{Real, RealOf, Scalar};

/// `‖P_U φ_i‖₂ / ‖φ_i‖₂` for every column, with `U` orthonormal. Zero
/// columns score zero.
pub fn music_scores<T: Scalar>(u: &DMatrix<T>, phi: &DMatrix<T>) -> Vec<RealOf<T>> {
    let norms = linalg::column_norms(phi);
    let aligned = u.adjoint() * phi;
    (0..phi.ncols())
        .map(|i| {
            if norms[i] <= num_traits::Zero::zero() || u.ncols() == 0 {
                num_traits::Zero::zero()
            } else {
                aligned.column(i).norm() / norms[i]
            }
        })
        .collect()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidDimension(format!("need 1 ≤ k ≤ n = {n}, got k = {k}")));
    }
    Ok(())
}

/// MUSIC: the `k` columns best aligned with the estimated signal subspace.
pub fn music<T: Scalar>(problem: &RecoveryProblem<T>, k: usize, params: &PursuitParams) -> Result<RecoveryResult<T>> {
    let start = Instant::now();
    let n = problem.n();
    check_k(k, n)?;
    let s_hat = pursuit::signal_subspace(problem, params)?;
    let scores = music_scores(s_hat.basis(), &problem.phi);
    let all: Vec<usize> = (0..n).collect();
    let omega = pursuit::top_k(&all, &scores, k);
    Ok(RecoveryResult::from_support("music", &problem.phi, &problem.y, omega, start))
}

/// SA-MUSIC with a greedy partial support: `k − r` indices from `submp`,
/// then the remaining `r` by MUSIC scores against `R(Φ_Γ) + Ŝ`.
pub fn sa_music_osmp<T: Scalar>(problem: &RecoveryProblem<T>, k: usize, params: &PursuitParams) -> Result<RecoveryResult<T>> {
    let start = Instant::now();
    let n = problem.n();
    check_k(k, n)?;
    let s_hat = pursuit::signal_subspace(problem, params)?;
    let r = s_hat.dim();
    if r > k {
        return Err(Error::InvalidDimension(format!("signal subspace dimension {r} exceeds k = {k}")));
    }
    let gamma = if k > r {
        submp(&s_hat, &problem.phi, &[], k - r, params)?
    } else {
        Vec::new()
    };
    let mut stacked = problem.phi.select_columns(&gamma);
    let g = stacked.ncols();
    stacked = stacked.resize_horizontally(g + r, T::zero());
    stacked.columns_mut(g, r).copy_from(s_hat.basis());
    let aug = crate::subspace::range_basis_default(&stacked);

    let scores = music_scores(&aug, &problem.phi);
    let rest: Vec<usize> = (0..n).filter(|i| !gamma.contains(i)).collect();
    let rest_scores: Vec<RealOf<T>> = rest.iter().map(|&i| scores[i]).collect();
    let mut omega = gamma;
    omega.extend(pursuit::top_k(&rest, &rest_scores, r));
    Ok(RecoveryResult::from_support("sa_music", &problem.phi, &problem.y, omega, start))
}

/// Simultaneous OMP: repeatedly picks the column with the largest
/// normalised correlation `‖φ_i* R‖₂ / ‖φ_i‖₂` against the residual
/// `R = Y − Φ_Γ Φ_Γ† Y`.
pub fn somp<T: Scalar>(problem: &RecoveryProblem<T>, k: usize, params: &PursuitParams) -> Result<RecoveryResult<T>> {
    let start = Instant::now();
    let (m, n) = problem.phi.shape();
    if k == 0 || k > m.min(n) {
        return Err(Error::InvalidDimension(format!("SOMP needs 1 ≤ k ≤ min(m, n), got k = {k}")));
    }
    params.validate()?;
    let phi = &problem.phi;
    let norms = linalg::column_norms(phi);
    let mut basis = OrthoBasis::<T>::new(m);
    let mut resid = problem.y.clone();
    let mut taken = vec![false; n];
    let mut omega = Vec::with_capacity(k);
    for _ in 0..k {
        let corr = phi.adjoint() * &resid;
        let scores: Vec<Option<RealOf<T>>> = (0..n)
            .map(|i| (!taken[i] && norms[i] > num_traits::Zero::zero()).then(|| corr.row(i).norm() / norms[i]))
            .collect();
        let Some(sel) = pursuit::argmax(&scores, params.tie_tol) else {
            return Err(Error::ExhaustedCandidates {
                requested: k,
                available: omega.len(),
            });
        };
        taken[sel] = true;
        omega.push(sel);
        let col: DVector<T> = phi.column(sel).into_owned();
        if let Some(q) = basis.push(&col, RealOf::<T>::eps()) {
            let coeffs = q.adjoint() * &resid;
            resid -= &q * coeffs;
        }
    }
    Ok(RecoveryResult::from_support("somp", phi, &problem.y, omega, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matmodel::{gen_gaussian_phi, gen_signal, Seed, SignalSpec};

    fn identity_problem() -> RecoveryProblem<f64> {
        let phi = DMatrix::<f64>::identity(4, 4);
        let mut x0 = DMatrix::zeros(4, 2);
        x0[(0, 0)] = 1.0;
        x0[(2, 1)] = -2.0;
        x0[(0, 1)] = 0.5;
        RecoveryProblem::new(phi.clone(), &phi * &x0).unwrap().with_truth(x0).unwrap()
    }

    fn full_rank_instance(k: usize, seed: u64) -> RecoveryProblem<f64> {
        let spec = SignalSpec::new(32, k, k, k).unwrap();
        let s = Seed::new(seed, 0);
        let phi = gen_gaussian_phi::<f64>(16, 32, 1.0, s.derive(0)).unwrap();
        let (x0, _) = gen_signal::<f64>(spec, s.derive(1)).unwrap();
        RecoveryProblem::new(phi.clone(), &phi * &x0).unwrap().with_truth(x0).unwrap()
    }

    #[test]
    fn music_on_identity() {
        let p = identity_problem();
        let res = music(&p, 2, &PursuitParams::default()).unwrap();
        assert_eq!(res.omega_hat, vec![0, 2]);
        assert!((&res.x_hat - &p.truth.as_ref().unwrap().x0).norm() < 1e-12);
    }

    #[test]
    fn music_scores_on_support_are_one() {
        let p = full_rank_instance(6, 3);
        let s = crate::subspace::estimate_signal_subspace(&p.y, Default::default()).unwrap();
        let sc = music_scores(s.basis(), &p.phi);
        let omega = &p.truth.as_ref().unwrap().omega;
        for (i, &v) in sc.iter().enumerate() {
            if omega.contains(&i) {
                assert!((v - 1.0).abs() < 1e-10);
            } else {
                assert!(v < 1.0 - 1e-6);
            }
        }
    }

    #[test]
    fn sa_music_equals_music_when_r_is_k() {
        for seed in 0..10 {
            let p = full_rank_instance(5, seed);
            let params = PursuitParams::default();
            let a = music(&p, 5, &params).unwrap();
            let b = sa_music_osmp(&p, 5, &params).unwrap();
            assert_eq!(a.omega_hat, b.omega_hat);
        }
    }

    #[test]
    fn full_row_rank_recovery() {
        for seed in 0..20 {
            let p = full_rank_instance(6, 100 + seed);
            let params = PursuitParams::default();
            let omega = &p.truth.as_ref().unwrap().omega;
            assert_eq!(&music(&p, 6, &params).unwrap().omega_hat, omega);
            assert_eq!(&sa_music_osmp(&p, 6, &params).unwrap().omega_hat, omega);
        }
    }

    #[test]
    fn sa_music_rank_defective() {
        let spec = SignalSpec::new(32, 2, 4, 2).unwrap();
        let s = Seed::new(9, 1);
        let phi = gen_gaussian_phi::<f64>(16, 32, 1.0, s.derive(0)).unwrap();
        let (x0, omega) = gen_signal::<f64>(spec, s.derive(1)).unwrap();
        let p = RecoveryProblem::new(phi.clone(), &phi * &x0).unwrap();
        let res = sa_music_osmp(&p, 4, &PursuitParams::default()).unwrap();
        assert_eq!(res.omega_hat.len(), 4);
        assert_eq!(res.omega_hat, omega);
    }

    #[test]
    fn somp_identity_picks_largest() {
        let phi = DMatrix::<f64>::identity(5, 5);
        let y = DMatrix::from_column_slice(5, 1, &[0.1, -3.0, 0.5, 2.0, 0.0]);
        let p = RecoveryProblem::new(phi, y).unwrap();
        let res = somp(&p, 2, &PursuitParams::default()).unwrap();
        assert_eq!(res.omega_hat, vec![1, 3]);
    }

    #[test]
    fn somp_column_scale_invariant() {
        let p = full_rank_instance(3, 42);
        let scaled = linalg::normalize_columns(&p.phi);
        let q = RecoveryProblem::new(scaled, p.y.clone()).unwrap();
        let params = PursuitParams::default();
        assert_eq!(somp(&p, 3, &params).unwrap().omega_hat, somp(&q, 3, &params).unwrap().omega_hat);
    }

    #[test]
    fn rejects_bad_k() {
        let p = identity_problem();
        let params = PursuitParams::default();
        assert!(music(&p, 0, &params).is_err());
        assert!(somp(&p, 5, &params).is_err());
        assert!(sa_music_osmp(&p, 1, &params).is_err());
    }
}
