use jspursuit::baselines::{music, music_scores, sa_music_osmp};
use jspursuit::diagnostics::{
    eval_bound_functions, krank, lambda, lcp, mutual_coherence, sample_bounds, BoundInputs, Budget,
};
use jspursuit::linalg;
use jspursuit::matmodel::{add_noise, gen_gaussian_phi, gen_signal, gen_spherical_phi};
use jspursuit::pursuit::{osmp, submp, tsmp1, tsmp1_qr};
use jspursuit::subspace::{compute_rho, estimate_signal_subspace};
use jspursuit::{Complex64, PursuitParams, RankPolicy, RealMatrix, RecoveryProblem, Seed, SignalSpec, SubspaceBasis};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn noiseless(m: usize, n: usize, l: usize, k: usize, r: usize, seed: u64) -> RecoveryProblem<f64> {
    let phi = gen_gaussian_phi::<f64>(m, n, 1.0, Seed::new(seed, 0)).unwrap();
    let (x0, _) = gen_signal::<f64>(SignalSpec::new(n, l, k, r).unwrap(), Seed::new(seed, 1)).unwrap();
    let y = &phi * &x0;
    RecoveryProblem::new(phi, y).unwrap().with_truth(x0).unwrap()
}

/// Orthonormal basis of the span of `a` by modified Gram–Schmidt with
/// column pivoting; directions below `tol` relative to the largest column
/// are dropped.
fn mgs_basis(a: &RealMatrix, tol: f64) -> RealMatrix {
    let mut cols: Vec<DVector<f64>> = a.column_iter().map(|c| c.into_owned()).collect();
    let scale = cols.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while !cols.is_empty() {
        let (idx, nrm) = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if nrm <= tol * scale {
            break;
        }
        let q = cols.swap_remove(idx) / nrm;
        for c in cols.iter_mut() {
            let coef = q.dot(c);
            c.axpy(-coef, &q, 1.0);
        }
        basis.push(q);
    }
    if basis.is_empty() {
        RealMatrix::zeros(a.nrows(), 0)
    } else {
        RealMatrix::from_columns(&basis)
    }
}

fn projector(q: &RealMatrix) -> RealMatrix {
    q * q.transpose()
}

/// Greedy selection evaluated with dense projectors, using
/// `P_{R(P⊥Ŝ)} = P_{R([Φ_Γ, Ŝ])} − P_{R(Φ_Γ)}`.
fn submp_oracle(s_hat: &RealMatrix, phi: &RealMatrix, steps: usize) -> Vec<usize> {
    let m = phi.nrows();
    let mut chosen: Vec<usize> = Vec::new();
    for _ in 0..steps {
        let p_gamma = projector(&mgs_basis(&phi.select_columns(&chosen), 1e-10));
        let joint = RealMatrix::from_columns(
            &chosen.iter().map(|&i| phi.column(i).into_owned()).chain(s_hat.column_iter().map(|c| c.into_owned())).collect::<Vec<_>>(),
        );
        let p_sig = projector(&mgs_basis(&joint, 1e-10)) - &p_gamma;
        let perp = RealMatrix::identity(m, m) - &p_gamma;
        let mut best: Option<(usize, f64)> = None;
        for i in (0..phi.ncols()).filter(|i| !chosen.contains(i)) {
            let v = &perp * phi.column(i);
            if v.norm() <= 1e-9 * phi.column(i).norm() {
                continue;
            }
            let score = (&p_sig * &v).norm() / v.norm();
            if best.is_none_or(|(_, s)| score > s + 1e-10 * s.max(1.0)) {
                best = Some((i, score));
            }
        }
        chosen.push(best.expect("some admissible column").0);
    }
    chosen
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn projector_algebra(m in 2usize..12, d in 1usize..6, seed in any::<u64>()) {
        let d = d.min(m);
        let a = gen_gaussian_phi::<f64>(m, d, 1.0, Seed::new(seed, 0)).unwrap();
        let p = SubspaceBasis::span_of(&a).projector();
        let perp = DMatrix::<f64>::identity(m, m) - &p;
        prop_assert!((&p * &p - &p).norm() < 1e-10);
        prop_assert!((&p + &perp - DMatrix::<f64>::identity(m, m)).norm() < 1e-10);
        prop_assert!((&perp * &p).norm() < 1e-10);
    }

    #[test]
    fn eckart_young_residual(m in 3usize..10, l in 2usize..8, d in 1usize..4, seed in any::<u64>()) {
        let y = gen_gaussian_phi::<f64>(m, l, 1.0, Seed::new(seed, 5)).unwrap();
        let d = d.min(m.min(l));
        let b = estimate_signal_subspace(&y, RankPolicy::Fixed(d)).unwrap();
        let resid = (&y - b.projector() * &y).norm();
        let s = linalg::singular_values(&y);
        let tail: f64 = s[d..].iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((resid - tail).abs() < 1e-8);
    }

    #[test]
    fn rho_is_basis_invariant(m in 4usize..10, d in 1usize..4, seed in any::<u64>()) {
        let d = d.min(m - 1);
        let a = gen_gaussian_phi::<f64>(m, d, 1.0, Seed::new(seed, 1)).unwrap();
        let b = gen_gaussian_phi::<f64>(m, d + 1, 1.0, Seed::new(seed, 2)).unwrap();
        let (sa, sb) = (SubspaceBasis::span_of(&a), SubspaceBasis::span_of(&b));
        let rho = compute_rho(&sa, &sb).unwrap();
        let rot = |q: &RealMatrix, s: u64| {
            let g = gen_gaussian_phi::<f64>(q.ncols(), q.ncols(), 1.0, Seed::new(seed, s)).unwrap();
            SubspaceBasis::from_orthonormal(q * g.qr().q()).unwrap()
        };
        prop_assert!((compute_rho(&rot(sa.basis(), 3), &sb).unwrap() - rho).abs() < 1e-10);
        prop_assert!((compute_rho(&sa, &rot(sb.basis(), 4)).unwrap() - rho).abs() < 1e-10);
    }

    #[test]
    fn submp_matches_dense_oracle(m in 4usize..9, n in 6usize..17, r in 1usize..4, seed in any::<u64>()) {
        let r = r.min(m - 1);
        let k = (r + 1).min(n - 1);
        let p = noiseless(m, n, r, k, r, seed);
        let params = PursuitParams::default();
        let s_hat = estimate_signal_subspace(&p.y, params.rank_policy).unwrap();
        let steps = (m - 1).min(n);
        let got = submp(&s_hat, &p.phi, &[], steps, &params).unwrap();
        prop_assert_eq!(&got, &submp_oracle(s_hat.basis(), &p.phi, steps));
        let mut uniq = got.clone();
        uniq.sort_unstable();
        uniq.dedup();
        prop_assert_eq!(uniq.len(), got.len());
    }

    #[test]
    fn submp_skips_initial_set(m in 5usize..10, n in 10usize..20, seed in any::<u64>()) {
        let p = noiseless(m, n, 2, 3, 2, seed);
        let params = PursuitParams::default();
        let s_hat = estimate_signal_subspace(&p.y, params.rank_policy).unwrap();
        let gamma0 = [0usize, n - 1];
        let got = submp(&s_hat, &p.phi, &gamma0, m - 3, &params).unwrap();
        prop_assert!(got.iter().all(|i| !gamma0.contains(i)));
    }

    #[test]
    fn submp_column_scale_invariant(seed in any::<u64>(), col in 0usize..24, scale in 0.01f64..100.0) {
        let p = noiseless(10, 24, 3, 5, 2, seed);
        let params = PursuitParams::default();
        let s_hat = estimate_signal_subspace(&p.y, params.rank_policy).unwrap();
        let base = submp(&s_hat, &p.phi, &[], 8, &params).unwrap();
        let mut scaled = p.phi.clone();
        scaled.column_mut(col).scale_mut(scale);
        prop_assert_eq!(submp(&s_hat, &scaled, &[], 8, &params).unwrap(), base);
    }

    #[test]
    fn full_row_rank_recovery(k in 1usize..8, extra in 1usize..5, seed in any::<u64>()) {
        let m = k + extra;
        let p = noiseless(m, 3 * m, k, k, k, seed);
        let omega = p.truth.as_ref().unwrap().omega.clone();
        let params = PursuitParams::default();
        prop_assert_eq!(osmp(&p, k, &params).unwrap().omega_hat, omega.clone());
        prop_assert_eq!(tsmp1(&p, k, &params).unwrap().omega_hat, omega.clone());
        prop_assert_eq!(music(&p, k, &params).unwrap().omega_hat, omega);
    }

    #[test]
    fn qr_path_agrees(seed in any::<u64>(), k in 2usize..7) {
        let p = noiseless(14, 40, 3, k, 3.min(k), seed);
        let params = PursuitParams::default();
        let a = tsmp1(&p, k, &params).unwrap();
        let b = tsmp1_qr(&p, k, &params).unwrap();
        prop_assert_eq!(&a.omega_c, &b.omega_c);
        prop_assert_eq!(&a.omega_hat, &b.omega_hat);
        prop_assert!((&a.x_hat - &b.x_hat).norm() <= 1e-8 * a.x_hat.norm());
    }

    #[test]
    fn music_scores_on_exact_subspace(k in 1usize..6, seed in any::<u64>()) {
        let p = noiseless(k + 3, 30, k, k, k, seed);
        let omega = &p.truth.as_ref().unwrap().omega;
        let u = estimate_signal_subspace(&p.y, RankPolicy::Fixed(k)).unwrap();
        let scores = music_scores(u.basis(), &p.phi);
        for (i, s) in scores.iter().enumerate() {
            if omega.contains(&i) {
                prop_assert!((s - 1.0).abs() < 1e-10);
            } else {
                prop_assert!(*s < 1.0);
            }
        }
    }

    #[test]
    fn sa_music_is_music_at_full_rank(k in 1usize..6, seed in any::<u64>()) {
        let p = noiseless(12, 30, k, k, k, seed);
        let params = PursuitParams::default();
        prop_assert_eq!(
            sa_music_osmp(&p, k, &params).unwrap().omega_hat,
            music(&p, k, &params).unwrap().omega_hat
        );
    }

    #[test]
    fn krank_below_rank(m in 1usize..6, n in 1usize..8, dup in any::<bool>(), seed in any::<u64>()) {
        let mut a = gen_gaussian_phi::<f64>(m, n, 1.0, Seed::new(seed, 0)).unwrap();
        if dup && n > 1 {
            let c = a.column(0).into_owned();
            a.set_column(n - 1, &(c * 2.0));
        }
        let kr = krank(&a, Budget::default()).unwrap();
        let rank = linalg::numerical_rank(&a, 1e-10);
        prop_assert!(kr <= rank && rank <= m.min(n));
    }

    #[test]
    fn lcp_without_projection_is_coherence(m in 2usize..8, n in 2usize..10, seed in any::<u64>()) {
        let a = gen_gaussian_phi::<Complex64>(m, n, 1.0, Seed::new(seed, 9)).unwrap();
        let all: Vec<usize> = (0..n).collect();
        prop_assert_eq!(lcp(&a, &all, &[]).unwrap(), mutual_coherence(&a).unwrap());
    }

    #[test]
    fn spherical_columns_and_signal_support(m in 1usize..10, n in 2usize..30, seed in any::<u64>()) {
        let phi = gen_spherical_phi::<Complex64>(m, n, Seed::new(seed, 0)).unwrap();
        for c in phi.column_iter() {
            prop_assert!((c.norm() - 1.0).abs() < 1e-12);
        }
        let k = n / 2;
        let (x0, omega) = gen_signal::<f64>(SignalSpec::new(n, 3, k.max(1), 1).unwrap(), Seed::new(seed, 1)).unwrap();
        prop_assert_eq!(omega.len(), k.max(1));
        let zero_rows = x0.row_iter().filter(|r| r.iter().all(|v| *v == 0.0)).count();
        prop_assert_eq!(zero_rows, n - k.max(1));
    }
}

#[test]
fn noise_calibration_average() {
    for snr in [0.0, 10.0, 25.0] {
        let mut acc = 0.0;
        let trials = 120;
        for t in 0..trials {
            let y = gen_gaussian_phi::<Complex64>(8, 3, 1.0, Seed::new(t, 0)).unwrap();
            let (_, w) = add_noise(&y, snr, Seed::new(t, 1)).unwrap();
            acc += 10.0 * (y.norm_squared() / w.norm_squared()).log10();
        }
        let mean = acc / trials as f64;
        assert!((mean - snr).abs() < 1.0, "snr {snr}: measured {mean}");
    }
}

#[test]
fn lambda_strictly_increasing() {
    let grid: Vec<f64> = (1..=1000).map(|i| 0.25 * i as f64 / 1001.0).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| lambda(x).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn osmp_bound_monotone() {
    for eta in [0.0f64, 0.05, 0.1] {
        for eps in [0.2, 0.05, 0.01, 1e-4] {
            // f₁ touches 1 at k = r/(4η²), where z vanishes; scan below that point
            let kmax = if eta > 0.0 { ((1.0 / (4.0 * eta * eta)).ceil() as usize).min(40) } else { 40 };
            let ms: Vec<f64> = (1..kmax)
                .map(|k| sample_bounds(&BoundInputs::new(k, 500, 1, eta, eps)).unwrap().osmp_m)
                .collect();
            assert!(ms.windows(2).all(|w| w[0] <= w[1]), "eta {eta} eps {eps}");
        }
        let by_eps: Vec<f64> = [0.5, 0.1, 0.01, 1e-3, 1e-6]
            .iter()
            .map(|&e| sample_bounds(&BoundInputs::new(10, 500, 2, eta, e)).unwrap().osmp_m)
            .collect();
        assert!(by_eps.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn f_is_min_of_parts() {
    for k in 1..20 {
        for r in 1..=k {
            let f = eval_bound_functions(0.1, k, r).unwrap();
            assert_eq!(f.f, f.f1.min(f.f2));
        }
    }
}
