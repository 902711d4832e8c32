//! Monte Carlo experiment driver: paired random instances, success-rate and
//! error sweeps over `k`, `k₀.₉₅` scans over `l`, and the CSV schema shared
//! with the plotting tools.
//!
//! Every trial draws its instance from `Seed::mixed(seed, [k, l, trial])`,
//! so all algorithms in a sweep see the same matrices and the result of a
//! cell does not depend on which other cells or algorithms were run.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::baselines::{music, sa_music_osmp, somp};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matmodel::{self, add_noise, gen_signal, RecoveryProblem, Seed, SignalSpec};
use crate::pursuit::{osmp, tsmp1, tsmp1_qr, tsmp2_gap, PursuitParams, RecoveryResult};
use crate::scalar::{Field, Real, Scalar};
use crate::subspace::{RankPolicy, DEFAULT_RANK_TOL};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "JSPURSUIT_THREADS";

/// Exact CSV header written by [`write_csv`].
pub const CSV_HEADER: [&str; 13] = [
    "algo",
    "m",
    "n",
    "l",
    "r",
    "k",
    "snr_db",
    "trials",
    "successes",
    "success_rate",
    "mean_l2_err",
    "mean_runtime_ms",
    "seed",
];
/// Extra column appended in verbose mode.
pub const CSV_VERBOSE_COLUMN: &str = "mean_fro_err";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixModel {
    #[default]
    Gaussian,
    Spherical,
    PartialDft,
}

impl fmt::Display for MatrixModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixModel::Gaussian => "gaussian",
            MatrixModel::Spherical => "spherical",
            MatrixModel::PartialDft => "partial_dft",
        })
    }
}

impl FromStr for MatrixModel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "spherical" => Ok(Self::Spherical),
            "partial_dft" | "dft" => Ok(Self::PartialDft),
            other => Err(format!("unknown matrix model `{other}` (expected gaussian|spherical|partial_dft)")),
        }
    }
}

/// Parses an SNR in dB; `inf`, `infinity` and `noiseless` mean no noise.
pub fn parse_snr(s: &str) -> std::result::Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "noiseless" => Ok(f64::INFINITY),
        other => match other.parse::<f64>() {
            Ok(v) if !v.is_nan() => Ok(v),
            _ => Err(format!("invalid SNR `{s}`")),
        },
    }
}

fn format_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}

mod snr_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&format_f64(*v))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => parse_snr(&t).map_err(serde::de::Error::custom),
        }
    }
}

fn default_snr() -> f64 {
    f64::INFINITY
}
fn default_trials() -> usize {
    500
}
fn default_algos() -> Vec<String> {
    ["tsmp", "osmp", "sa_music"].map(String::from).to_vec()
}
fn default_true() -> bool {
    true
}

/// Parameter grid of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub r: usize,
    pub k_grid: Vec<usize>,
    #[serde(with = "snr_serde", default = "default_snr")]
    pub snr_db: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_algos")]
    pub algos: Vec<String>,
    #[serde(default)]
    pub field: Field,
    #[serde(default)]
    pub matrix_model: MatrixModel,
    /// When false the runtime column is written as zero, which makes the
    /// CSV a pure function of the configuration.
    #[serde(default = "default_true")]
    pub record_runtime: bool,
}

impl ExperimentConfig {
    /// Rank-defective success-rate sweep: `(m, n, l, r) = (64, 512, 3, 3)`,
    /// `k = 10, 15, …, 50`, noiseless.
    pub fn fig1() -> Self {
        Self {
            m: 64,
            n: 512,
            l: 3,
            r: 3,
            k_grid: (10..=50).step_by(5).collect(),
            snr_db: f64::INFINITY,
            trials: default_trials(),
            seed: 0,
            algos: default_algos(),
            field: Field::Real,
            matrix_model: MatrixModel::Gaussian,
            record_runtime: true,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad experiment config: {e}")))
    }

    fn check_shape(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.l == 0 {
            return Err(Error::Config("m, n and l must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_db.is_nan() {
            return Err(Error::Config("snr_db is NaN".into()));
        }
        if self.matrix_model == MatrixModel::PartialDft && self.field == Field::Real {
            return Err(Error::Config("partial_dft matrices need field = complex".into()));
        }
        if self.matrix_model == MatrixModel::PartialDft && self.m > self.n {
            return Err(Error::Config("partial_dft needs m ≤ n".into()));
        }
        if self.algos.is_empty() {
            return Err(Error::Config("no algorithms requested".into()));
        }
        Ok(())
    }

    /// Checks ranges and that every algorithm is in `known`.
    pub fn validate(&self, known: &[String]) -> Result<()> {
        self.check_shape()?;
        if self.k_grid.is_empty() {
            return Err(Error::Config("k_grid is empty".into()));
        }
        let kmin = *self.k_grid.iter().min().unwrap_or(&0);
        if kmin == 0 || self.k_grid.iter().any(|&k| k > self.n) {
            return Err(Error::Config("every k must lie in 1..=n".into()));
        }
        if self.r == 0 || self.r > kmin.min(self.l) {
            return Err(Error::Config(format!(
                "r = {} must satisfy 1 ≤ r ≤ min(min k, l) = {}",
                self.r,
                kmin.min(self.l)
            )));
        }
        for a in &self.algos {
            if !known.contains(a) {
                return Err(Error::UnknownAlgorithm(a.clone()));
            }
        }
        Ok(())
    }

    fn point(&self, k: usize, r: usize) -> TrialPoint {
        TrialPoint {
            m: self.m,
            n: self.n,
            l: self.l,
            r,
            k,
            snr_db: self.snr_db,
            seed: self.seed,
            model: self.matrix_model,
        }
    }
}

/// One cell of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialPoint {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub r: usize,
    pub k: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub model: MatrixModel,
}

impl TrialPoint {
    /// Subspace rank policy used by the solvers: the exact `rank(Y)` when
    /// noiseless, else the known `r`.
    pub fn rank_policy(&self) -> RankPolicy {
        if self.snr_db == f64::INFINITY {
            RankPolicy::Auto(DEFAULT_RANK_TOL)
        } else {
            RankPolicy::Fixed(self.r)
        }
    }

    pub fn seed_for(&self, trial: usize) -> Seed {
        Seed::mixed(self.seed, &[self.k as u64, self.l as u64, trial as u64])
    }
}

/// Scalars the harness can generate instances for.
pub trait HarnessScalar: Scalar {
    fn gen_phi(model: MatrixModel, m: usize, n: usize, seed: Seed) -> Result<DMatrix<Self>>;
}

impl HarnessScalar for f64 {
    fn gen_phi(model: MatrixModel, m: usize, n: usize, seed: Seed) -> Result<DMatrix<Self>> {
        match model {
            MatrixModel::Gaussian => matmodel::gen_gaussian_phi(m, n, 1.0, seed),
            MatrixModel::Spherical => matmodel::gen_spherical_phi(m, n, seed),
            MatrixModel::PartialDft => Err(Error::Config("partial_dft matrices are complex".into())),
        }
    }
}

impl HarnessScalar for Complex64 {
    fn gen_phi(model: MatrixModel, m: usize, n: usize, seed: Seed) -> Result<DMatrix<Self>> {
        match model {
            MatrixModel::Gaussian => matmodel::gen_gaussian_phi(m, n, 1.0, seed),
            MatrixModel::Spherical => matmodel::gen_spherical_phi(m, n, seed),
            MatrixModel::PartialDft => matmodel::gen_partial_dft::<f64>(m, n, seed),
        }
    }
}

/// The random instance of `point` for `trial`, with ground truth attached.
pub fn gen_instance<T: HarnessScalar>(point: &TrialPoint, trial: usize) -> Result<RecoveryProblem<T>> {
    let seed = point.seed_for(trial);
    let phi = T::gen_phi(point.model, point.m, point.n, seed.derive(0))?;
    let spec = SignalSpec::new(point.n, point.l, point.k, point.r)?;
    let (x0, _) = gen_signal::<T>(spec, seed.derive(1))?;
    let (y, _) = add_noise(&(&phi * &x0), point.snr_db, seed.derive(2))?;
    RecoveryProblem::new(phi, y)?.with_truth(x0)?.with_k(point.k)
}

/// Whether a solver reports a support (and a refit estimate) or only a
/// signal estimate whose support must be read off its row norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Support,
    Signal,
}

/// Plug-in point for recovery algorithms.
pub trait Solver<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn output(&self) -> OutputKind {
        OutputKind::Support
    }

    fn solve(&self, problem: &RecoveryProblem<T>, k: usize, params: &PursuitParams) -> Result<RecoveryResult<T>>;
}

type SolveFn<T> = fn(&RecoveryProblem<T>, usize, &PursuitParams) -> Result<RecoveryResult<T>>;

struct Builtin<T: Scalar> {
    name: &'static str,
    f: SolveFn<T>,
}

impl<T: Scalar> Solver<T> for Builtin<T> {
    fn name(&self) -> &str {
        self.name
    }

    fn solve(&self, problem: &RecoveryProblem<T>, k: usize, params: &PursuitParams) -> Result<RecoveryResult<T>> {
        (self.f)(problem, k, params)
    }
}

/// Named solvers available to a sweep.
pub struct Registry<T: Scalar> {
    solvers: BTreeMap<String, Arc<dyn Solver<T>>>,
}

impl<T: Scalar> Default for Registry<T> {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl<T: Scalar> Registry<T> {
    pub fn empty() -> Self {
        Self {
            solvers: BTreeMap::new(),
        }
    }

    /// `tsmp`, `tsmp_qr`, `tsmp2_gap`, `osmp`, `sa_music`, `music`, `somp`.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        let builtins: [(&'static str, SolveFn<T>); 7] = [
            ("tsmp", tsmp1::<T>),
            ("tsmp_qr", tsmp1_qr::<T>),
            ("tsmp2_gap", |p, _, params| tsmp2_gap(p, params)),
            ("osmp", osmp::<T>),
            ("sa_music", sa_music_osmp::<T>),
            ("music", music::<T>),
            ("somp", somp::<T>),
        ];
        for (name, f) in builtins {
            reg.register(Arc::new(Builtin { name, f }));
        }
        reg
    }

    /// Adds `solver`, replacing any solver of the same name.
    pub fn register(&mut self, solver: Arc<dyn Solver<T>>) {
        self.solvers.insert(solver.name().to_string(), solver);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Solver<T>>> {
        self.solvers
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))
    }

    pub fn names(&self) -> Vec<String> {
        self.solvers.keys().cloned().collect()
    }
}

/// Names of the built-in solvers.
pub fn builtin_names() -> Vec<String> {
    Registry::<f64>::with_builtins().names()
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// `Ω̂ == Ω`.
    pub success: bool,
    /// `‖X₀ − X̂‖₂`.
    pub l2_err: f64,
    pub fro_err: f64,
    pub runtime_ms: f64,
    /// Solver error message; the trial then counts as a failure with
    /// `X̂ = 0`.
    pub error: Option<String>,
}

/// Runs `solver` on trial `trial` of `point`. Only instance generation can
/// fail; solver errors are folded into the outcome.
pub fn run_trial<T: HarnessScalar>(point: &TrialPoint, solver: &dyn Solver<T>, trial: usize) -> Result<TrialOutcome> {
    let problem = gen_instance::<T>(point, trial)?;
    let truth = problem.truth.as_ref().expect("generated with truth");
    let params = PursuitParams::for_scalar::<T>().with_rank_policy(point.rank_policy());
    let start = Instant::now();
    let solved = solver.solve(&problem, point.k, &params);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let (support, x_hat, error) = match solved {
        Ok(res) => {
            let support = match solver.output() {
                OutputKind::Support => res.omega_hat,
                OutputKind::Signal => {
                    let norms = linalg::row_norms(&res.x_hat);
                    let all: Vec<usize> = (0..norms.len()).collect();
                    crate::pursuit::top_k(&all, &norms, point.k.min(norms.len()))
                }
            };
            (support, res.x_hat, None)
        }
        Err(e) => (Vec::new(), DMatrix::zeros(point.n, point.l), Some(e.to_string())),
    };
    let diff = &truth.x0 - &x_hat;
    Ok(TrialOutcome {
        success: error.is_none() && support == truth.omega,
        l2_err: linalg::spectral_norm(&diff).as_f64(),
        fro_err: diff.norm().as_f64(),
        runtime_ms,
        error,
    })
}

/// One aggregated `(algo, k)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algo: String,
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub r: usize,
    pub k: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_l2_err: f64,
    pub mean_runtime_ms: f64,
    pub seed: u64,
    pub mean_fro_err: Option<f64>,
    /// Trials in which the solver returned an error.
    #[serde(skip)]
    pub errors: usize,
}

/// Thread pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")))?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

/// Runs every trial of one cell and aggregates in trial order.
pub fn run_cell<T: HarnessScalar>(
    point: &TrialPoint,
    solver: &dyn Solver<T>,
    trials: usize,
    record_runtime: bool,
    pool: &rayon::ThreadPool,
) -> Result<SweepRow> {
    let outcomes: Vec<TrialOutcome> =
        pool.install(|| (0..trials).into_par_iter().map(|t| run_trial(point, solver, t)).collect::<Result<_>>())?;
    let nt = trials as f64;
    let successes = outcomes.iter().filter(|o| o.success).count();
    let mean = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / nt;
    Ok(SweepRow {
        algo: solver.name().to_string(),
        m: point.m,
        n: point.n,
        l: point.l,
        r: point.r,
        k: point.k,
        snr_db: point.snr_db,
        trials,
        successes,
        success_rate: successes as f64 / nt,
        mean_l2_err: mean(|o| o.l2_err),
        mean_runtime_ms: if record_runtime { mean(|o| o.runtime_ms) } else { 0.0 },
        seed: point.seed,
        mean_fro_err: Some(mean(|o| o.fro_err)),
        errors: outcomes.iter().filter(|o| o.error.is_some()).count(),
    })
}

/// One row per `(algo, k)`, algorithms in configuration order and `k`
/// ascending.
pub fn sweep<T: HarnessScalar>(config: &ExperimentConfig, registry: &Registry<T>) -> Result<Vec<SweepRow>> {
    config.validate(&registry.names())?;
    let pool = thread_pool()?;
    let mut ks = config.k_grid.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut rows = Vec::with_capacity(ks.len() * config.algos.len());
    for algo in &config.algos {
        let solver = registry.get(algo)?;
        for &k in &ks {
            rows.push(run_cell(&config.point(k, config.r), solver.as_ref(), config.trials, config.record_runtime, &pool)?);
        }
    }
    Ok(rows)
}

/// [`sweep`] with the built-in solvers, dispatching on `config.field`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    match config.field {
        Field::Real => sweep::<f64>(config, &Registry::with_builtins()),
        Field::Complex => sweep::<Complex64>(config, &Registry::with_builtins()),
    }
}

/// Controls for the `k₀.₉₅` scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K95Options {
    pub l_grid: Vec<usize>,
    pub threshold: f64,
    /// Consecutive sub-threshold `k` values that end the scan.
    pub stop_after: usize,
    pub full_scan: bool,
}

impl K95Options {
    pub fn new(l_grid: Vec<usize>) -> Self {
        Self {
            l_grid,
            threshold: 0.95,
            stop_after: 3,
            full_scan: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K95Point {
    pub algo: String,
    pub l: usize,
    /// Largest scanned `k` whose success rate exceeds the threshold; zero
    /// when none does.
    pub k95: usize,
    /// `(m + l − 1)/2`.
    pub l0_bound: f64,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

/// For each algorithm of `base` and each `l`, scans `k = 1, 2, …, m − 1`
/// with `r = min(l, k)` and reports the largest `k` with success rate above
/// the threshold. `base.k_grid` and `base.l` are ignored.
pub fn k95<T: HarnessScalar>(base: &ExperimentConfig, opts: &K95Options, registry: &Registry<T>) -> Result<Vec<K95Point>> {
    base.check_shape()?;
    if opts.l_grid.is_empty() || opts.l_grid.contains(&0) {
        return Err(Error::Config("l_grid must be non-empty with positive entries".into()));
    }
    if !(opts.threshold > 0.0 && opts.threshold < 1.0) || opts.stop_after == 0 {
        return Err(Error::Config("threshold must lie in (0, 1) and stop_after ≥ 1".into()));
    }
    let known = registry.names();
    if let Some(a) = base.algos.iter().find(|a| !known.contains(a)) {
        return Err(Error::UnknownAlgorithm(a.clone()));
    }
    let pool = thread_pool()?;
    let kmax = (base.m - 1).min(base.n);
    let mut out = Vec::new();
    for algo in &base.algos {
        let solver = registry.get(algo)?;
        for &l in &opts.l_grid {
            let cfg = ExperimentConfig { l, ..base.clone() };
            let (mut best, mut misses, mut rows) = (0, 0, Vec::new());
            for k in 1..=kmax {
                let row = run_cell(&cfg.point(k, l.min(k)), solver.as_ref(), cfg.trials, cfg.record_runtime, &pool)?;
                if row.success_rate > opts.threshold {
                    best = k;
                    misses = 0;
                } else {
                    misses += 1;
                }
                rows.push(row);
                if !opts.full_scan && misses >= opts.stop_after {
                    break;
                }
            }
            out.push(K95Point {
                algo: algo.clone(),
                l,
                k95: best,
                l0_bound: (base.m + l - 1) as f64 / 2.0,
                rows,
            });
        }
    }
    Ok(out)
}

/// [`k95`] with the built-in solvers, dispatching on `base.field`.
pub fn run_k95(base: &ExperimentConfig, opts: &K95Options) -> Result<Vec<K95Point>> {
    match base.field {
        Field::Real => k95::<f64>(base, opts, &Registry::with_builtins()),
        Field::Complex => k95::<Complex64>(base, opts, &Registry::with_builtins()),
    }
}

/// Three standard deviations of the difference of two binomial rates
/// estimated from `trials` draws each, using the pooled rate.
pub fn pooled_three_sigma(p1: f64, p2: f64, trials: usize) -> f64 {
    let p = 0.5 * (p1 + p2);
    3.0 * (p * (1.0 - p) * 2.0 / trials as f64).sqrt()
}

pub fn write_csv_to<W: Write>(out: W, rows: &[SweepRow], verbose: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if verbose {
        header.push(CSV_VERBOSE_COLUMN);
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![
            r.algo.clone(),
            r.m.to_string(),
            r.n.to_string(),
            r.l.to_string(),
            r.r.to_string(),
            r.k.to_string(),
            format_f64(r.snr_db),
            r.trials.to_string(),
            r.successes.to_string(),
            format_f64(r.success_rate),
            format_f64(r.mean_l2_err),
            format_f64(r.mean_runtime_ms),
            r.seed.to_string(),
        ];
        if verbose {
            rec.push(r.mean_fro_err.map(format_f64).unwrap_or_default());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(rows: &[SweepRow], path: impl AsRef<Path>, verbose: bool) -> Result<()> {
    write_csv_to(std::fs::File::create(path)?, rows, verbose)
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

/// Parses a CSV written by [`write_csv_to`], with or without the verbose
/// column.
pub fn read_csv_from<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rd = csv::ReaderBuilder::new().from_reader(input);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let verbose = header.len() == CSV_HEADER.len() + 1 && header.last().map(String::as_str) == Some(CSV_VERBOSE_COLUMN);
    if header[..CSV_HEADER.len().min(header.len())] != CSV_HEADER[..] || (header.len() != CSV_HEADER.len() && !verbose) {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        fn num<V: FromStr>(s: &str) -> Result<V> {
            s.parse().map_err(|_| Error::Parse(format!("bad CSV value `{s}`")))
        }
        let snr = parse_snr(field(6)).map_err(Error::Parse)?;
        rows.push(SweepRow {
            algo: field(0).to_string(),
            m: num(field(1))?,
            n: num(field(2))?,
            l: num(field(3))?,
            r: num(field(4))?,
            k: num(field(5))?,
            snr_db: snr,
            trials: num(field(7))?,
            successes: num(field(8))?,
            success_rate: num(field(9))?,
            mean_l2_err: num(field(10))?,
            mean_runtime_ms: num(field(11))?,
            seed: num(field(12))?,
            mean_fro_err: if verbose { Some(num(field(13))?) } else { None },
            errors: 0,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    read_csv_from(std::fs::File::open(path)?)
}
