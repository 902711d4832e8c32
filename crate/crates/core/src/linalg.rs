//! Dense linear-algebra helpers on nalgebra matrices. Decompositions run
//! through faer.

use nalgebra::{DMatrix, DVector, RealField};

use crate::scalar::{Real, RealOf, Scalar};

/// Thin SVD with singular values in descending order.
pub struct Svd<T: Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<RealOf<T>>,
    pub v_t: DMatrix<T>,
}

pub fn svd<T: Scalar>(a: &DMatrix<T>) -> Svd<T> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Svd {
            u: DMatrix::zeros(m, 0),
            s: Vec::new(),
            v_t: DMatrix::zeros(0, n),
        };
    }
    match to_faer(a).thin_svd() {
        Ok(dec) => {
            let (u, v, d) = (dec.U(), dec.V(), dec.S().column_vector());
            let q = d.nrows();
            Svd {
                u: DMatrix::from_fn(m, q, |i, j| u[(i, j)]),
                s: (0..q).map(|i| nalgebra::ComplexField::real(d[i])).collect(),
                v_t: DMatrix::from_fn(q, n, |i, j| nalgebra::ComplexField::conjugate(v[(j, i)])),
            }
        }
        Err(_) => {
            let dec = a.clone().svd(true, true);
            Svd {
                u: dec.u.expect("u requested"),
                s: dec.singular_values.iter().copied().collect(),
                v_t: dec.v_t.expect("v_t requested"),
            }
        }
    }
}

/// Singular values in descending order.
pub fn singular_values<T: Scalar>(a: &DMatrix<T>) -> Vec<RealOf<T>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    to_faer(a)
        .singular_values()
        .unwrap_or_else(|_| a.clone().svd(false, false).singular_values.iter().copied().collect())
}

fn to_faer<T: Scalar>(a: &DMatrix<T>) -> faer::Mat<T> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// `σ_min(m,n)(a)`, zero for an empty matrix.
pub fn smallest_singular_value<T: Scalar>(a: &DMatrix<T>) -> RealOf<T> {
    singular_values(a)
        .last()
        .copied()
        .unwrap_or_else(<RealOf<T> as num_traits::Zero>::zero)
}

/// Largest singular value (spectral norm).
pub fn spectral_norm<T: Scalar>(a: &DMatrix<T>) -> RealOf<T> {
    singular_values(a)
        .first()
        .copied()
        .unwrap_or_else(<RealOf<T> as num_traits::Zero>::zero)
}

/// Number of singular values strictly above `rel_tol * σ₁`.
pub fn numerical_rank<T: Scalar>(a: &DMatrix<T>, rel_tol: RealOf<T>) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&s1) if s1 > num_traits::Zero::zero() => {
            let cut = s1 * rel_tol;
            s.iter().filter(|&&v| v > cut).count()
        }
        _ => 0,
    }
}

/// Orthonormal basis of `R(a)` keeping left singular vectors with `σ > abs_tol`.
pub fn range_basis<T: Scalar>(a: &DMatrix<T>, abs_tol: RealOf<T>) -> DMatrix<T> {
    let dec = svd(a);
    let d = dec.s.iter().filter(|&&v| v > abs_tol).count();
    dec.u.columns(0, d).into_owned()
}

/// Orthonormal basis of `R(a)` with a tolerance relative to `σ₁(a)`.
pub fn range_basis_rel<T: Scalar>(a: &DMatrix<T>, rel_tol: RealOf<T>) -> DMatrix<T> {
    let dec = svd(a);
    let Some(&s1) = dec.s.first() else {
        return DMatrix::zeros(a.nrows(), 0);
    };
    let cut = s1 * rel_tol;
    let d = dec.s.iter().filter(|&&v| v > cut).count();
    dec.u.columns(0, d).into_owned()
}

pub fn column_norms<T: Scalar>(a: &DMatrix<T>) -> Vec<RealOf<T>> {
    a.column_iter().map(|c| c.norm()).collect()
}

pub fn row_norms<T: Scalar>(a: &DMatrix<T>) -> Vec<RealOf<T>> {
    a.row_iter().map(|r| r.norm()).collect()
}

/// Maximum row ℓ₂ norm, i.e. the mixed `‖A*‖₂,∞` norm of the transpose.
pub fn max_row_norm<T: Scalar>(a: &DMatrix<T>) -> RealOf<T> {
    row_norms(a)
        .into_iter()
        .fold(num_traits::Zero::zero(), |acc: RealOf<T>, v| acc.max(v))
}

/// Scales every nonzero column to unit ℓ₂ norm; zero columns stay zero.
pub fn normalize_columns<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    let mut out = a.clone();
    for mut col in out.column_iter_mut() {
        let nrm = col.norm();
        if nrm > num_traits::Zero::zero() {
            col.unscale_mut(nrm);
        }
    }
    out
}

/// Minimum-norm least-squares solution of `a x = b`.
///
/// Returns the solution and the numerical rank of `a` used by the solve
/// (singular values below `max(m, n) · ε · σ₁` are discarded).
pub fn min_norm_solve<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> (DMatrix<T>, usize) {
    let (m, n) = a.shape();
    if n == 0 || m == 0 {
        return (DMatrix::zeros(n, b.ncols()), 0);
    }
    let dec = svd(a);
    let s1 = dec.s[0];
    let eps = RealOf::<T>::eps();
    let cut = s1 * eps * RealOf::<T>::lit(m.max(n) as f64);
    let rank = dec.s.iter().filter(|&&v| v > cut).count();
    let u_r = dec.u.columns(0, rank);
    let mut coeff = u_r.adjoint() * b;
    for (i, mut row) in coeff.row_iter_mut().enumerate() {
        row.unscale_mut(dec.s[i]);
    }
    let x = dec.v_t.rows(0, rank).adjoint() * coeff;
    (x, rank)
}

/// Incrementally grown orthonormal basis (Gram–Schmidt with one round of
/// re-orthogonalisation).
#[derive(Debug, Clone)]
pub struct OrthoBasis<T: Scalar> {
    dim: usize,
    cols: Vec<DVector<T>>,
}

impl<T: Scalar> OrthoBasis<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            cols: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    /// Removes the component of `v` lying in the span of the basis.
    pub fn project_out(&self, v: &mut DVector<T>) {
        for _ in 0..2 {
            for q in &self.cols {
                let c = q.dotc(v);
                v.axpy(-c, q, T::one());
            }
        }
    }

    /// Adds `v` to the basis if its residual exceeds `rel_tol · ‖v‖`.
    /// Returns the new unit vector when one was added.
    pub fn push(&mut self, v: &DVector<T>, rel_tol: RealOf<T>) -> Option<DVector<T>> {
        let scale = v.norm();
        if scale <= num_traits::Zero::zero() {
            return None;
        }
        let mut w = v.clone();
        self.project_out(&mut w);
        let nrm = w.norm();
        if nrm <= rel_tol * scale {
            return None;
        }
        w.unscale_mut(nrm);
        self.cols.push(w.clone());
        Some(w)
    }

    pub fn matrix(&self) -> DMatrix<T> {
        if self.cols.is_empty() {
            return DMatrix::zeros(self.dim, 0);
        }
        DMatrix::from_columns(&self.cols)
    }
}

/// `(I − QQ*) a` for an orthonormal `q`.
pub fn deflate<T: Scalar>(q: &DMatrix<T>, a: &DMatrix<T>) -> DMatrix<T> {
    if q.ncols() == 0 {
        return a.clone();
    }
    a - q * (q.adjoint() * a)
}

/// Checks every entry is finite.
pub fn all_finite<T: Scalar>(a: &DMatrix<T>) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// `|⟨a, b⟩|` for two unit vectors.
pub fn abs_inner<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> RealOf<T> {
    a.dotc(b).modulus()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn min_norm_solve_matches_exact_inverse() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 1.0, 1.0]);
        let x0 = DMatrix::from_row_slice(2, 1, &[3.0, -1.0]);
        let b = &a * &x0;
        let (x, rank) = min_norm_solve(&a, &b);
        assert_eq!(rank, 2);
        assert_abs_diff_eq!(x, x0, epsilon = 1e-12);
    }

    #[test]
    fn min_norm_solve_rank_deficient_is_minimum_norm() {
        // Two identical columns: the minimum-norm solution splits the weight.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 1, &[2.0, 0.0]);
        let (x, rank) = min_norm_solve(&a, &b);
        assert_eq!(rank, 1);
        assert_abs_diff_eq!(x[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[(1, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ortho_basis_rejects_dependent_vectors() {
        let mut b = OrthoBasis::<f64>::new(3);
        assert!(b.push(&DVector::from_vec(vec![1.0, 1.0, 0.0]), 1e-12).is_some());
        assert!(b.push(&DVector::from_vec(vec![2.0, 2.0, 0.0]), 1e-12).is_none());
        assert!(b.push(&DVector::from_vec(vec![0.0, 1.0, 0.0]), 1e-12).is_some());
        let q = b.matrix();
        assert_abs_diff_eq!(q.adjoint() * &q, DMatrix::identity(2, 2), epsilon = 1e-14);
    }

    #[test]
    fn range_basis_drops_small_directions() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1e-9]));
        assert_eq!(range_basis_rel(&a, 1e-6).ncols(), 2);
        assert_eq!(numerical_rank(&a, 1e-6), 2);
        assert_eq!(numerical_rank(&a, 1e-12), 3);
    }
}
