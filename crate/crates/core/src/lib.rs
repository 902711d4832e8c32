//! Joint sparse recovery from multiple measurement vectors.
//!
//! Given `Y = ΦX₀ + W` with a row-sparse `X₀`, the solvers in [`pursuit`]
//! recover the support of `X₀` by greedy subspace matching pursuit:
//! OSMP selects `k` columns directly, TSMP selects an `m − 1` candidate pool
//! and prunes it by least-squares row norms. [`baselines`] holds MUSIC,
//! SA-MUSIC+OSMP and SOMP for comparison, [`diagnostics`] the
//! recoverability measures and sample-complexity bounds, and [`harness`]
//! the Monte Carlo driver.
//!
//! All numerical code is generic over [`Scalar`] (`f32`, `f64`, and their
//! complex versions); the aliases below cover the common cases.

pub mod baselines;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod matmodel;
pub mod pursuit;
pub mod scalar;
pub mod subspace;

pub use error::{Error, Result};
pub use matmodel::{RecoveryProblem, Seed, SignalSpec, Truth};
pub use pursuit::{PursuitParams, RecoveryResult};
pub use scalar::{Field, Real, RealOf, Scalar};
pub use subspace::{RankPolicy, SubspaceBasis};

pub use num_complex::{Complex32, Complex64};

/// Dense matrix over any supported scalar.
pub type Matrix<T> = nalgebra::DMatrix<T>;
/// Real double-precision matrix.
pub type RealMatrix = Matrix<f64>;
/// Complex double-precision matrix.
pub type ComplexMatrix = Matrix<Complex64>;
/// Real single-precision matrix.
pub type RealMatrix32 = Matrix<f32>;

pub type RealProblem = RecoveryProblem<f64>;
pub type ComplexProblem = RecoveryProblem<Complex64>;
pub type RealResult = RecoveryResult<f64>;
pub type ComplexResult = RecoveryResult<Complex64>;
