//! Signal-subspace estimation, orthogonal projections and the subspace
//! distance ρ used as the noise-magnitude measure.

use nalgebra::{ComplexField, DMatrix, RealField};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Real, RealOf, Scalar};

/// Default relative tolerance for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Orthonormal basis of an estimated subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis<T: Scalar> {
    basis: DMatrix<T>,
}

impl<T: Scalar> SubspaceBasis<T> {
    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<T>) -> Result<Self> {
        let d = basis.ncols();
        if d > basis.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} orthonormal columns in dimension {}",
                d,
                basis.nrows()
            )));
        }
        let gram = basis.adjoint() * &basis;
        let err = (gram - DMatrix::<T>::identity(d, d)).norm();
        let tol = RealOf::<T>::tiny().sqrt();
        if err > tol {
            return Err(Error::Domain(format!(
                "basis columns are not orthonormal (‖B*B − I‖ = {})",
                err.as_f64()
            )));
        }
        Ok(Self { basis })
    }

    /// Orthonormal basis of the column span of `a`.
    pub fn span_of(a: &DMatrix<T>) -> Self {
        Self {
            basis: range_basis_default(a),
        }
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `P_S = BB*`.
    pub fn projector(&self) -> DMatrix<T> {
        &self.basis * self.basis.adjoint()
    }
}

/// How many left singular vectors of `Y` span the signal subspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankPolicy {
    /// Exactly `r` dimensions.
    Fixed(usize),
    /// All singular values above `rel_tol · σ₁`.
    Auto(f64),
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy::Auto(DEFAULT_RANK_TOL)
    }
}

impl RankPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RankPolicy::Fixed(0) => Err(Error::Config("fixed rank must be at least 1".into())),
            RankPolicy::Auto(t) if !(t > 0.0 && t < 1.0) => {
                Err(Error::Config(format!("relative rank tolerance {t} outside (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

/// Orthonormal basis of `R(a)` using the usual `max(m, n) · ε · σ₁` cut.
pub fn range_basis_default<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    let (m, n) = a.shape();
    let tol = RealOf::<T>::eps() * RealOf::<T>::lit(m.max(n).max(1) as f64);
    linalg::range_basis_rel(a, tol)
}

/// Top-`d` left singular vectors of `y`, with `d` chosen by `policy`.
pub fn estimate_signal_subspace<T: Scalar>(y: &DMatrix<T>, policy: RankPolicy) -> Result<SubspaceBasis<T>> {
    policy.validate()?;
    let dec = linalg::svd(y);
    let s1 = match dec.s.first() {
        Some(&s1) if s1 > num_traits::Zero::zero() => s1,
        _ => return Err(Error::ZeroMatrix),
    };
    let rank_at = |rel: f64| {
        let cut = s1 * RealOf::<T>::lit(rel);
        dec.s.iter().filter(|&&v| v > cut).count()
    };
    let d = match policy {
        RankPolicy::Fixed(r) => {
            let available = rank_at(DEFAULT_RANK_TOL);
            if r > available {
                return Err(Error::RankDeficit { requested: r, available });
            }
            r
        }
        RankPolicy::Auto(rel) => rank_at(rel),
    };
    Ok(SubspaceBasis {
        basis: dec.u.columns(0, d).into_owned(),
    })
}

/// `(I − QQ*) v` where `Q` is an orthonormal basis of `R(basis_of)`.
pub fn proj_complement_apply<T: Scalar>(basis_of: &DMatrix<T>, v: &DMatrix<T>) -> Result<DMatrix<T>> {
    if basis_of.nrows() != v.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, v has {}",
            basis_of.nrows(),
            v.nrows()
        )));
    }
    let q = range_basis_default(basis_of);
    Ok(linalg::deflate(&q, v))
}

/// ρ(Ŝ): distance from `s_hat` to the closest equal-dimensional subspace of
/// `signal_space`, i.e. the sine of the largest principal angle
/// `‖(I − VV*)U‖₂`, which equals `√(1 − σ_min(V*U)²)` without the cancellation.
pub fn compute_rho<T: Scalar>(s_hat: &SubspaceBasis<T>, signal_space: &SubspaceBasis<T>) -> Result<RealOf<T>> {
    if s_hat.ambient_dim() != signal_space.ambient_dim() {
        return Err(Error::DimensionMismatch("subspaces live in different ambient spaces".into()));
    }
    if s_hat.dim() > signal_space.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dim(Ŝ) = {} exceeds dim(signal space) = {}",
            s_hat.dim(),
            signal_space.dim()
        )));
    }
    let zero = <RealOf<T> as num_traits::Zero>::zero();
    let one = <RealOf<T> as num_traits::One>::one();
    if s_hat.dim() == 0 {
        return Ok(zero);
    }
    let resid = linalg::deflate(&signal_space.basis, &s_hat.basis);
    Ok(linalg::spectral_norm(&resid).min(one))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn e(m: usize, i: usize) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(m, 1);
        v[(i, 0)] = 1.0;
        v
    }

    #[test]
    fn unit_vector_spans_itself() {
        let s = estimate_signal_subspace(&e(4, 0), RankPolicy::default()).unwrap();
        assert_eq!(s.dim(), 1);
        assert_abs_diff_eq!(s.basis()[(0, 0)].abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn auto_rank_drops_tiny_singular_value() {
        let y = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1e-9]));
        let s = estimate_signal_subspace(&y, RankPolicy::Auto(1e-6)).unwrap();
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn fixed_rank_beyond_rank_errors() {
        let y = e(4, 1);
        assert!(matches!(
            estimate_signal_subspace(&y, RankPolicy::Fixed(2)),
            Err(Error::RankDeficit { requested: 2, available: 1 })
        ));
        assert!(matches!(
            estimate_signal_subspace(&DMatrix::<f64>::zeros(3, 2), RankPolicy::default()),
            Err(Error::ZeroMatrix)
        ));
    }

    #[test]
    fn complement_projection_basics() {
        let p = proj_complement_apply(&e(3, 0), &e(3, 0)).unwrap();
        assert_abs_diff_eq!(p.norm(), 0.0, epsilon = 1e-15);
        let p = proj_complement_apply(&e(3, 0), &e(3, 1)).unwrap();
        assert_abs_diff_eq!(p, e(3, 1), epsilon = 1e-15);
    }

    #[test]
    fn rho_edge_cases() {
        let sig = SubspaceBasis::span_of(&e(3, 0));
        let inside = SubspaceBasis::span_of(&e(3, 0));
        let ortho = SubspaceBasis::span_of(&e(3, 1));
        assert_abs_diff_eq!(compute_rho(&inside, &sig).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(compute_rho(&ortho, &sig).unwrap(), 1.0, epsilon = 1e-12);

        let th = 30f64.to_radians();
        let tilted = SubspaceBasis::span_of(&(e(3, 0) * th.cos() + e(3, 1) * th.sin()));
        assert_abs_diff_eq!(compute_rho(&tilted, &sig).unwrap(), 0.5, epsilon = 1e-12);

        let big = SubspaceBasis::span_of(&DMatrix::<f64>::identity(3, 2));
        assert!(matches!(compute_rho(&big, &sig), Err(Error::DimensionMismatch(_))));
    }
}
