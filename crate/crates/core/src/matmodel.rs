//! Problem types, seeded generators for sensing matrices and row-sparse
//! signals, and SNR-calibrated noise.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Field, Real, RealOf, Scalar};

/// Seed for the counter-based generator: `master` selects the key,
/// `stream` selects an independent ChaCha stream (usually a trial index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    /// Child seed for an independent sub-draw (matrix, signal, noise, ...).
    pub fn derive(self, tag: u64) -> Self {
        Self {
            master: self.master,
            stream: splitmix64(self.stream ^ splitmix64(tag.wrapping_add(1))),
        }
    }

    /// Seed whose stream hashes `coords` in order, e.g. `(k, l, trial)`.
    pub fn mixed(master: u64, coords: &[u64]) -> Self {
        let stream = coords.iter().fold(0u64, |acc, &c| splitmix64(acc ^ splitmix64(c)));
        Self { master, stream }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// Parameters of the `V₁ΛV₂*` row-sparse signal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub n: usize,
    pub l: usize,
    pub k: usize,
    pub r: usize,
}

impl SignalSpec {
    pub fn new(n: usize, l: usize, k: usize, r: usize) -> Result<Self> {
        let spec = Self { n, l, k, r };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.l == 0 || self.k == 0 || self.r == 0 {
            return Err(Error::InvalidSpec(format!("all of n, l, k, r must be positive: {self:?}")));
        }
        if self.k > self.n {
            return Err(Error::InvalidSpec(format!("k = {} exceeds n = {}", self.k, self.n)));
        }
        if self.r > self.k.min(self.l) {
            return Err(Error::InvalidSpec(format!(
                "r = {} exceeds min(k, l) = {}",
                self.r,
                self.k.min(self.l)
            )));
        }
        Ok(())
    }
}

/// Ground truth attached to a synthetic problem.
#[derive(Debug, Clone)]
pub struct Truth<T: Scalar> {
    pub x0: DMatrix<T>,
    /// Sorted support of `x0`.
    pub omega: Vec<usize>,
}

/// `Y = ΦX₀ + W` together with whatever is known about it.
#[derive(Debug, Clone)]
pub struct RecoveryProblem<T: Scalar> {
    pub phi: DMatrix<T>,
    pub y: DMatrix<T>,
    pub truth: Option<Truth<T>>,
    pub k: Option<usize>,
}

/// Indices of the nonzero rows of `x`.
pub fn support<T: Scalar>(x: &DMatrix<T>) -> Vec<usize> {
    x.row_iter()
        .enumerate()
        .filter(|(_, row)| row.iter().any(|v| !v.is_zero()))
        .map(|(i, _)| i)
        .collect()
}

impl<T: Scalar> RecoveryProblem<T> {
    pub fn new(phi: DMatrix<T>, y: DMatrix<T>) -> Result<Self> {
        check_matrix(&phi)?;
        check_matrix(&y)?;
        if phi.nrows() != y.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "phi has {} rows, y has {}",
                phi.nrows(),
                y.nrows()
            )));
        }
        Ok(Self {
            phi,
            y,
            truth: None,
            k: None,
        })
    }

    pub fn with_truth(mut self, x0: DMatrix<T>) -> Result<Self> {
        check_matrix(&x0)?;
        if x0.nrows() != self.phi.ncols() || x0.ncols() != self.y.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "x0 is {}x{}, expected {}x{}",
                x0.nrows(),
                x0.ncols(),
                self.phi.ncols(),
                self.y.ncols()
            )));
        }
        let omega = support(&x0);
        if let Some(k) = self.k {
            if k != omega.len() {
                return Err(Error::InvalidSpec(format!("k = {k} but x0 has {} nonzero rows", omega.len())));
            }
        }
        self.truth = Some(Truth { x0, omega });
        Ok(self)
    }

    pub fn with_k(mut self, k: usize) -> Result<Self> {
        if let Some(t) = &self.truth {
            if t.omega.len() != k {
                return Err(Error::InvalidSpec(format!("k = {k} but x0 has {} nonzero rows", t.omega.len())));
            }
        }
        self.k = Some(k);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.phi.nrows()
    }

    pub fn n(&self) -> usize {
        self.phi.ncols()
    }

    pub fn l(&self) -> usize {
        self.y.ncols()
    }
}

fn check_matrix<T: Scalar>(a: &DMatrix<T>) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidDimension(format!("{}x{} matrix", a.nrows(), a.ncols())));
    }
    if !linalg::all_finite(a) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!("{m}x{n}")));
    }
    Ok(())
}

/// One entry with every real component drawn from `N(0, σ²)`.
pub fn gaussian_entry<T: Scalar, G: Rng + ?Sized>(rng: &mut G, sigma: f64) -> T {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = match T::FIELD {
        Field::Real => 0.0,
        Field::Complex => rng.sample(StandardNormal),
    };
    T::from_parts(RealOf::<T>::lit(sigma * re), RealOf::<T>::lit(sigma * im))
}

fn gaussian_matrix<T: Scalar, G: Rng + ?Sized>(rng: &mut G, m: usize, n: usize, sigma: f64) -> DMatrix<T> {
    // column-major fill so the draw order is independent of nalgebra internals
    let data: Vec<T> = (0..m * n).map(|_| gaussian_entry(rng, sigma)).collect();
    DMatrix::from_vec(m, n, data)
}

/// i.i.d. Gaussian sensing matrix (ICN(0, σ²) in the complex case).
pub fn gen_gaussian_phi<T: Scalar>(m: usize, n: usize, sigma: f64, seed: Seed) -> Result<DMatrix<T>> {
    check_dims(m, n)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(gaussian_matrix(&mut seed.rng(), m, n, sigma))
}

/// Columns drawn independently and uniformly from the unit sphere.
pub fn gen_spherical_phi<T: Scalar>(m: usize, n: usize, seed: Seed) -> Result<DMatrix<T>> {
    check_dims(m, n)?;
    let mut rng = seed.rng();
    let mut phi = gaussian_matrix::<T, _>(&mut rng, m, n, 1.0);
    for mut col in phi.column_iter_mut() {
        // a zero Gaussian column has probability zero; redraw anyway
        while col.norm() == num_traits::Zero::zero() {
            for v in col.iter_mut() {
                *v = gaussian_entry(&mut rng, 1.0);
            }
        }
        let nrm = col.norm();
        col.unscale_mut(nrm);
    }
    Ok(phi)
}

/// Rows `rows` of the `n × n` DFT matrix, scaled by `1/√m`.
pub fn partial_dft_rows<R: Real>(rows: &[usize], n: usize) -> Result<DMatrix<Complex<R>>>
where
    Complex<R>: Scalar<RealField = R>,
{
    let m = rows.len();
    check_dims(m, n)?;
    if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
        return Err(Error::InvalidDimension(format!("DFT row {bad} out of range for n = {n}")));
    }
    let scale = 1.0 / (m as f64).sqrt();
    Ok(DMatrix::from_fn(m, n, |j, t| {
        // reduce the exponent mod n before the trig call
        let e = (rows[j] as u128 * t as u128 % n as u128) as f64;
        let ang = -2.0 * std::f64::consts::PI * e / n as f64;
        Complex::new(R::lit(scale * ang.cos()), R::lit(scale * ang.sin()))
    }))
}

/// Partial DFT matrix with `m` distinct rows chosen uniformly at random.
pub fn gen_partial_dft<R: Real>(m: usize, n: usize, seed: Seed) -> Result<DMatrix<Complex<R>>>
where
    Complex<R>: Scalar<RealField = R>,
{
    check_dims(m, n)?;
    if m > n {
        return Err(Error::InvalidDimension(format!("m = {m} exceeds n = {n} for partial DFT")));
    }
    let rows = index::sample(&mut seed.rng(), n, m).into_vec();
    partial_dft_rows(&rows, n)
}

/// `r` orthonormal columns from a `rows × r` Gaussian draw (Haar-distributed
/// after the phase correction on `R`'s diagonal).
fn random_orthonormal<T: Scalar, G: Rng + ?Sized>(rng: &mut G, rows: usize, r: usize) -> DMatrix<T> {
    let g = gaussian_matrix::<T, _>(rng, rows, r, 1.0);
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = rr[(j, j)];
        let md = d.modulus();
        if md > num_traits::Zero::zero() {
            let phase = d.unscale(md);
            col *= phase;
        }
    }
    q
}

/// Row-sparse `X₀` with uniformly random support and `X₀^Ω = V₁ΛV₂*`.
///
/// `V₁ (k×r)`, `Λ (r×r)` and `V₂ (l×r)` each take orthonormal columns from an
/// independent Gaussian matrix, so `rank(X₀) = r` and all nonzero singular
/// values of `X₀` equal one.
pub fn gen_signal<T: Scalar>(spec: SignalSpec, seed: Seed) -> Result<(DMatrix<T>, Vec<usize>)> {
    spec.validate()?;
    let SignalSpec { n, l, k, r } = spec;
    let mut rng = seed.rng();
    let mut omega = index::sample(&mut rng, n, k).into_vec();
    omega.sort_unstable();
    let v1 = random_orthonormal::<T, _>(&mut rng, k, r);
    let lambda = random_orthonormal::<T, _>(&mut rng, r, r);
    let v2 = random_orthonormal::<T, _>(&mut rng, l, r);
    let block = v1 * lambda * v2.adjoint();
    let mut x0 = DMatrix::zeros(n, l);
    for (i, &row) in omega.iter().enumerate() {
        x0.row_mut(row).copy_from(&block.row(i));
    }
    Ok((x0, omega))
}

/// Adds white Gaussian noise whose per-entry power matches `snr_db` against
/// the realized energy of `y_clean`. `snr_db = +∞` yields `W = 0`.
pub fn add_noise<T: Scalar>(y_clean: &DMatrix<T>, snr_db: f64, seed: Seed) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let (m, l) = y_clean.shape();
    check_dims(m, l)?;
    if snr_db.is_nan() {
        return Err(Error::Domain("snr_db is NaN".into()));
    }
    if snr_db == f64::INFINITY {
        return Ok((y_clean.clone(), DMatrix::zeros(m, l)));
    }
    let energy = y_clean.norm_squared().as_f64();
    if energy == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    let entry_power = energy / ((m * l) as f64 * 10f64.powf(snr_db / 10.0));
    let sigma_w = (entry_power / T::FIELD.components() as f64).sqrt();
    let w = gaussian_matrix::<T, _>(&mut seed.rng(), m, l, sigma_w);
    Ok((y_clean + &w, w))
}
