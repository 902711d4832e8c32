//! Scalar abstraction shared by every solver.
//!
//! Everything numerical is written against [`Scalar`], which covers `f32`,
//! `f64` and their complex counterparts. Real-valued quantities (norms,
//! singular values, scores) live in the associated `RealField`.

use nalgebra::{ComplexField, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::{Deserialize, Serialize};

/// Scalar field of a matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[default]
    Real,
    Complex,
}

impl Field {
    /// Number of independent Gaussian components per entry.
    pub fn components(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

impl std::str::FromStr for Field {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(format!("unknown field `{other}` (expected real|complex)")),
        }
    }
}

/// Real scalar type: `f32` or `f64`.
pub trait Real: RealField + Copy + ToPrimitive + FromPrimitive {
    /// Smallest tolerance that is still meaningful at this precision. Used for
    /// the "is this column numerically zero" style checks.
    fn tiny() -> Self;

    /// Machine epsilon.
    fn eps() -> Self;

    /// Converts an `f64` literal. Panics only for unrepresentable values,
    /// which never happens for `f32`/`f64`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn tiny() -> Self {
        1e-12
    }
    fn eps() -> Self {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn tiny() -> Self {
        1e-5
    }
    fn eps() -> Self {
        f32::EPSILON
    }
}

/// Matrix entry type: real or complex over a [`Real`] base.
pub trait Scalar: ComplexField<RealField: Real> + faer::traits::ComplexField<Real = RealOf<Self>> + Copy {
    const FIELD: Field;

    /// Builds an entry from real and imaginary parts. Real scalars drop `im`.
    fn from_parts(re: Self::RealField, im: Self::RealField) -> Self;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
}

impl Scalar for f32 {
    const FIELD: Field = Field::Real;
    fn from_parts(re: f32, _im: f32) -> Self {
        re
    }
}

impl<R: Real> Scalar for Complex<R>
where
    Complex<R>: ComplexField<RealField = R> + faer::traits::ComplexField<Real = R>,
{
    const FIELD: Field = Field::Complex;
    fn from_parts(re: R, im: R) -> Self {
        Complex::new(re, im)
    }
}

/// Shorthand for the real type underlying a scalar.
pub type RealOf<T> = <T as ComplexField>::RealField;
