use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Parameters of the sample-complexity bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub k: usize,
    pub n: usize,
    pub r: usize,
    /// Upper bound on ρ(Ŝ), in `[0, 0.5]`.
    pub eta: f64,
    pub epsilon: f64,
    /// TSMP pool excess, `t > k`.
    pub t: Option<usize>,
    /// Noise standard deviation.
    pub sigma: Option<f64>,
    /// ESMS₂ threshold used in `c(κ, σ, X₀, Ω_c)`.
    pub kappa: Option<f64>,
    /// `σ_{|Ω_c|}(Φ_{Ω_c})`.
    pub sigma_min_pool: Option<f64>,
    /// `|Ω_c|`.
    pub pool_size: Option<usize>,
}

impl BoundInputs {
    pub fn new(k: usize, n: usize, r: usize, eta: f64, epsilon: f64) -> Self {
        Self {
            k,
            n,
            r,
            eta,
            epsilon,
            t: None,
            sigma: None,
            kappa: None,
            sigma_min_pool: None,
            pool_size: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.r == 0 || self.r > self.k || self.k >= self.n {
            return Err(Error::Domain(format!(
                "need 1 ≤ r ≤ k < n, got k = {}, r = {}, n = {}",
                self.k, self.r, self.n
            )));
        }
        check_eta(self.eta)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if let Some(t) = self.t {
            if t <= self.k {
                return Err(Error::Domain(format!("t must exceed k = {}, got {t}", self.k)));
            }
        }
        for (name, v) in [("sigma", self.sigma), ("kappa", self.kappa), ("sigma_min_pool", self.sigma_min_pool)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Domain(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&eta) {
        return Err(Error::Domain(format!("eta must lie in [0, 0.5], got {eta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundFns {
    pub f1: f64,
    pub f2: f64,
    pub f: f64,
}

/// `f₁`, `f₂` and `f = min(f₁, f₂)` at `(η, k, r)`.
pub fn eval_bound_functions(eta: f64, k: usize, r: usize) -> Result<BoundFns> {
    check_eta(eta)?;
    if k == 0 || r == 0 {
        return Err(Error::Domain("k and r must be positive".into()));
    }
    let (kf, rf) = (k as f64, r as f64);
    let inner = (kf + rf) / kf - 4.0 * eta * eta;
    if inner < 0.0 {
        return Err(Error::Domain(format!("(k + r)/k − 4η² is negative at η = {eta}")));
    }
    let f1 = ((kf / (kf + rf)) * (2.0 * eta * (rf / kf).sqrt() + inner.sqrt())).powi(2);
    let q = kf / rf;
    let f2 = 1.0 / ((q * eta * eta + 2.0).sqrt() - q.sqrt() * eta).powi(2);
    Ok(BoundFns { f1, f2, f: f1.min(f2) })
}

/// `λ(x) = (x + √(x² + 4x)) / (1 − 2√x)` on `0 < x < 1/4`.
pub fn lambda(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 0.25) {
        return Err(Error::Domain(format!("lambda needs 0 < x < 1/4, got {x}")));
    }
    Ok((x + (x * x + 4.0 * x).sqrt()) / (1.0 - 2.0 * x.sqrt()))
}

/// Inverse of [`lambda`] by bisection on `(0, 1/4)`. The bracket is
/// shrunk until its width is below `1e−12` in absolute terms and relative
/// to the root.
pub fn lambda_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("lambda inverse needs y > 0, got {y}")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.25f64);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lambda(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * lo.min(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `Σ_{i=t−k+1}^{t} C(t, i) εⁱ`, summed from log-space terms.
pub fn tsmp_fail_prob(t: usize, k: usize, epsilon: f64) -> Result<f64> {
    if k == 0 || t < k {
        return Err(Error::Domain(format!("need 1 ≤ k ≤ t, got k = {k}, t = {t}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let le = epsilon.ln();
    Ok((t - k + 1..=t)
        .map(|i| (ln_binomial(t as u64, i as u64) + i as f64 * le).exp())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBounds {
    pub f1: f64,
    pub f2: f64,
    pub f: f64,
    /// `min{(1 − f)/k, (1 − 4η(1 − η))/r}`.
    pub z: f64,
    pub lambda_inv_z: f64,
    /// Measurements after which OSMP succeeds with probability above `1 − ε`
    /// for columns uniform on the sphere.
    pub osmp_m: f64,
    pub tsmp_m: Option<f64>,
    pub tsmp_fail_prob: Option<f64>,
    /// OSMP measurement bound for i.i.d. Gaussian `Φ`.
    pub gauss_m: f64,
    /// OSMP measurement bound for a random partial DFT.
    pub dft_m: f64,
    pub c_value: Option<f64>,
}

pub fn sample_bounds(inputs: &BoundInputs) -> Result<SampleBounds> {
    inputs.validate()?;
    let BoundInputs { k, n, r, eta, epsilon, .. } = *inputs;
    let (kf, nf) = (k as f64, n as f64);
    let fns = eval_bound_functions(eta, k, r)?;
    let g = 4.0 * eta * (1.0 - eta);
    let z = ((1.0 - fns.f) / kf).min((1.0 - g) / r as f64);
    if z.is_nan() || z <= 0.0 {
        return Err(Error::Domain(format!("z = {z} is not positive")));
    }
    let lambda_inv_z = lambda_inv(z)?;
    let factor = (1.0 / lambda_inv_z).max(4.0);
    let osmp_m = kf + factor * (4.0 * kf * kf * nf / epsilon).ln();
    let tsmp_m = inputs.t.map(|t| kf + t as f64 + factor * (4.0 * kf * nf / epsilon).ln());
    let tsmp_fail_prob = inputs.t.map(|t| tsmp_fail_prob(t, k, epsilon)).transpose()?;

    let tau_g = fns.f1.max(g);
    let theta = (1.0 - tau_g) / (1.0 + tau_g);
    let gauss_m = 2.0 / ((1.0 + theta).sqrt() - 1.0).powi(2) * (kf + 2.0 * (2.0 * (nf - kf) / epsilon).ln());

    let tau_d = ((1.0 - fns.f1) / (1.0 + fns.f1)).min((1.0 - g) / (1.0 + g));
    let dft_m = 2.0 * (3.0 + tau_d) * (kf + 1.0) / (3.0 * tau_d * tau_d)
        * (2.0 * (kf + 1.0) * (nf - kf) / epsilon).ln();

    let c_value = match (inputs.kappa, inputs.sigma, inputs.sigma_min_pool, inputs.pool_size) {
        (Some(s), Some(sig), Some(smin), Some(j)) => Some(s * smin / (2.0 * sig) - (j as f64).sqrt() - 1.0),
        _ => None,
    };
    Ok(SampleBounds {
        f1: fns.f1,
        f2: fns.f2,
        f: fns.f,
        z,
        lambda_inv_z,
        osmp_m,
        tsmp_m,
        tsmp_fail_prob,
        gauss_m,
        dft_m,
        c_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_reductions() {
        for (k, r) in [(1, 1), (5, 2), (20, 3), (7, 7)] {
            let f = eval_bound_functions(0.0, k, r).unwrap();
            assert!((f.f1 - k as f64 / (k + r) as f64).abs() < 1e-15);
            assert!((f.f2 - 0.5).abs() < 1e-15);
        }
        let b = sample_bounds(&BoundInputs::new(10, 200, 3, 0.0, 0.01)).unwrap();
        assert!((b.z - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_and_dft_noiseless_tau() {
        // with η = 0 both corollaries use θ = τ = r/(2k + r)
        let (k, r, n, eps) = (8usize, 2usize, 300usize, 0.05);
        let b = sample_bounds(&BoundInputs::new(k, n, r, 0.0, eps)).unwrap();
        let tau = r as f64 / (2 * k + r) as f64;
        let gm = 2.0 / ((1.0 + tau).sqrt() - 1.0).powi(2) * (k as f64 + 2.0 * (2.0 * (n - k) as f64 / eps).ln());
        assert!((b.gauss_m - gm).abs() < 1e-9 * gm);
        let dm = 2.0 * (3.0 + tau) * (k as f64 + 1.0) / (3.0 * tau * tau)
            * (2.0 * (k as f64 + 1.0) * (n - k) as f64 / eps).ln();
        assert!((b.dft_m - dm).abs() < 1e-9 * dm);
    }

    #[test]
    fn lambda_round_trip() {
        for y in [0.01, 0.1, 1.0] {
            let x = lambda_inv(y).unwrap();
            assert!(x > 0.0 && x < 0.25);
            assert!((lambda(x).unwrap() - y).abs() < 1e-9);
        }
        let x = lambda_inv(1.0 / 40.0).unwrap();
        assert!(x > 0.0 && x < 0.25);
    }

    #[test]
    fn lambda_domain() {
        assert!(lambda(0.0).is_err());
        assert!(lambda(0.25).is_err());
        assert!(lambda_inv(0.0).is_err());
        assert!(eval_bound_functions(0.6, 3, 1).is_err());
    }

    #[test]
    fn fail_prob_edges() {
        // t = k sums every term of the binomial expansion but the first
        assert!((tsmp_fail_prob(4, 4, 0.1).unwrap() - (1.1f64.powi(4) - 1.0)).abs() < 1e-14);
        assert!((tsmp_fail_prob(6, 1, 0.2).unwrap() - 0.2f64.powi(6)).abs() < 1e-18);
    }

    #[test]
    fn c_value_formula() {
        let mut inp = BoundInputs::new(3, 50, 1, 0.0, 0.1);
        inp.kappa = Some(0.5);
        inp.sigma = Some(0.01);
        inp.sigma_min_pool = Some(0.8);
        inp.pool_size = Some(9);
        let b = sample_bounds(&inp).unwrap();
        assert!((b.c_value.unwrap() - (0.5 * 0.8 / 0.02 - 3.0 - 1.0)).abs() < 1e-12);
    }
}
