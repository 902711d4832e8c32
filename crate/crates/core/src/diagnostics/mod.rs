//! Recoverability measures, theorem-condition checks and sample-complexity
//! bounds.
//!
//! Every combinatorial quantity is computed by exhaustive enumeration under
//! an explicit [`Budget`]; going over budget is a [`Error::SizeGuard`], never
//! an approximation.

mod bounds;
mod measures;
mod theorems;

pub use bounds::{
    eval_bound_functions, lambda, lambda_inv, sample_bounds, tsmp_fail_prob, BoundFns, BoundInputs, SampleBounds,
};
pub use measures::{
    gershgorin_interval, krank, lcp, mutual_coherence, rip_constant, row_nondegenerate, uniqueness_oracles,
    wrip_constant, Uniqueness, Wrip, KRANK_REL_TOL,
};
pub use theorems::{
    osmp_theorem4_check, theorem3_quantities, tsmp_theorem7_check, Theorem3, Theorem4, Theorem7,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Limits for brute-force enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest column count accepted by any enumeration.
    pub max_n: usize,
    /// Largest number of column subsets a single call may visit.
    pub max_subsets: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_n: 24,
            max_subsets: 4_000_000,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Self {
            max_n: usize::MAX,
            max_subsets: u128::MAX,
        }
    }

    pub(crate) fn check(&self, n: usize, required: u128) -> Result<()> {
        if n > self.max_n {
            return Err(Error::SizeGuard {
                required: n as u128,
                budget: self.max_n as u128,
            });
        }
        if required > self.max_subsets {
            return Err(Error::SizeGuard {
                required,
                budget: self.max_subsets,
            });
        }
        Ok(())
    }
}

/// `C(n, k)` in `u128`, saturating on overflow.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Which optional measures [`measure_report`] should compute.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MeasureRequest {
    pub lcp: Option<(Vec<usize>, Vec<usize>)>,
    pub wrip: Option<(Vec<usize>, usize)>,
    /// `(Ω, v₁)` for the a₁, a₂, a₃ quantities.
    pub theorem3: Option<(Vec<usize>, usize)>,
    pub budget: Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub krank: Option<usize>,
    pub coherence: f64,
    pub lcp: Option<f64>,
    pub wrip: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    /// False when a requested brute-force measure was skipped for budget.
    pub exhaustive: bool,
}

/// Collects the requested measures. Budget overruns leave the field empty
/// and clear `exhaustive`; any other error is returned.
pub fn measure_report<T: Scalar>(a: &DMatrix<T>, req: &MeasureRequest) -> Result<MeasureReport> {
    let mut exhaustive = true;
    let mut guarded = |r: Result<f64>| -> Result<Option<f64>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::SizeGuard { .. }) => {
                exhaustive = false;
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let krank = guarded(krank(a, req.budget).map(|v| v as f64))?.map(|v| v as usize);
    let lcp = match &req.lcp {
        Some((d, g)) => Some(lcp(a, d, g)?),
        None => None,
    };
    let wrip = match &req.wrip {
        Some((j, b)) => guarded(wrip_constant(a, j, *b, req.budget).map(|w| w.delta))?,
        None => None,
    };
    let (mut a1, mut a2, mut a3) = (None, None, None);
    if let Some((omega, v1)) = &req.theorem3 {
        match theorem3_quantities(a, omega, *v1, req.budget) {
            Ok(t) => {
                a1 = Some(t.a1);
                a2 = Some(t.a2);
                a3 = Some(t.a3);
            }
            Err(Error::SizeGuard { .. }) => exhaustive = false,
            Err(e) => return Err(e),
        }
    }
    Ok(MeasureReport {
        krank,
        coherence: mutual_coherence(a)?,
        lcp,
        wrip,
        a1,
        a2,
        a3,
        exhaustive,
    })
}
