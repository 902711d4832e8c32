use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jspursuit::diagnostics::{measure_report, sample_bounds, BoundInputs, Budget, MeasureRequest};
use jspursuit::harness::{
    self, gen_instance, parse_snr, ExperimentConfig, HarnessScalar, K95Options, MatrixModel, Registry, TrialPoint,
};
use jspursuit::io::{self, ProblemManifest};
use jspursuit::pursuit::tsmp2;
use jspursuit::{Complex64, Error, Field, PursuitParams, RankPolicy, Result};

/// Joint sparse recovery by subspace matching pursuit.
#[derive(Parser)]
#[command(name = "jspursuit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a random instance and write it as Matrix Market files.
    Gen(GenArgs),
    /// Run one solver on a stored instance.
    Solve(SolveArgs),
    /// Success-rate and error sweep over k, written as CSV.
    Sweep(SweepArgs),
    /// Largest k with success rate above 0.95, for each l.
    K95(K95Args),
    /// Recoverability measures of a matrix, as JSON.
    Diagnose(DiagnoseArgs),
    /// Sample-complexity bounds, as JSON.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    l: usize,
    #[arg(long)]
    k: usize,
    /// Rank of the row-sparse signal; defaults to min(k, l).
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value = "inf", value_parser = parse_snr)]
    snr_db: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "real")]
    field: Field,
    #[arg(long, default_value = "gaussian")]
    model: MatrixModel,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem manifest written by `gen`.
    #[arg(long)]
    problem: PathBuf,
    /// tsmp, tsmp_qr, tsmp2, tsmp2_gap, osmp, sa_music, music or somp.
    #[arg(long, default_value = "tsmp")]
    algo: String,
    /// Sparsity; falls back to the manifest.
    #[arg(long)]
    k: Option<usize>,
    /// Pruning threshold for tsmp2.
    #[arg(long)]
    kappa: Option<f64>,
    /// Fixed signal-subspace dimension; otherwise the numerical rank of Y.
    #[arg(long)]
    rank: Option<usize>,
    /// Result manifest; the estimate goes next to it as `<stem>_x_hat.mtx`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// JSON experiment configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a named preset (fig1).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, value_parser = parse_snr)]
    snr_db: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    #[arg(long)]
    field: Option<Field>,
    #[arg(long)]
    model: Option<MatrixModel>,
    /// Write zero in the runtime column so the CSV depends only on the
    /// configuration.
    #[arg(long)]
    no_runtime: bool,
    /// Append the mean Frobenius error column.
    #[arg(long)]
    verbose: bool,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
}

#[derive(Args)]
struct K95Args {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    l_grid: Vec<usize>,
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    /// Scan every k up to m − 1 instead of stopping after three misses.
    #[arg(long)]
    full_scan: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Matrix in Matrix Market array format.
    #[arg(long)]
    matrix: PathBuf,
    /// Δ for the local coherence; requires --lcp-gamma or defaults it to ∅.
    #[arg(long, value_delimiter = ',')]
    lcp_delta: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    lcp_gamma: Option<Vec<usize>>,
    /// J for the weak restricted isometry constant.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    wrip_j: Option<Vec<usize>>,
    #[arg(long)]
    wrip_b: Option<usize>,
    /// Support for the a₁, a₂, a₃ quantities.
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<usize>>,
    #[arg(long)]
    v1: Option<usize>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    max_subsets: Option<u128>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    sigma_min_pool: Option<f64>,
    #[arg(long)]
    pool_size: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::K95(a) => k95(a),
        Cmd::Diagnose(a) => diagnose(a),
        Cmd::Bounds(a) => bounds(a),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}

fn print_json<S: serde::Serialize>(value: &S) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn gen(a: GenArgs) -> Result<()> {
    let point = TrialPoint {
        m: a.m,
        n: a.n,
        l: a.l,
        r: a.r.unwrap_or(a.k.min(a.l)),
        k: a.k,
        snr_db: a.snr_db,
        seed: a.seed,
        model: a.model,
    };
    let manifest = match a.field {
        Field::Real => io::save_problem(&gen_instance::<f64>(&point, 0)?, &a.out)?,
        Field::Complex => io::save_problem(&gen_instance::<Complex64>(&point, 0)?, &a.out)?,
    };
    println!("{}", manifest.display());
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let manifest = ProblemManifest::read(&a.problem)?;
    let base = a.problem.parent().unwrap_or(Path::new(".")).to_path_buf();
    match manifest.field(&base)? {
        Field::Real => solve_as::<f64>(&a, &manifest, &base),
        Field::Complex => solve_as::<Complex64>(&a, &manifest, &base),
    }
}

fn solve_as<T: HarnessScalar>(a: &SolveArgs, manifest: &ProblemManifest, base: &Path) -> Result<()> {
    let (problem, omega) = manifest.load::<T>(base)?;
    let mut params = PursuitParams::for_scalar::<T>();
    if let Some(r) = a.rank {
        params = params.with_rank_policy(RankPolicy::Fixed(r));
    }
    let res = if a.algo == "tsmp2" {
        let kappa = a.kappa.ok_or_else(|| Error::Config("tsmp2 needs --kappa".into()))?;
        tsmp2(&problem, kappa, &params)?
    } else {
        let solver = Registry::<T>::with_builtins().get(&a.algo)?;
        let k = a
            .k
            .or(problem.k)
            .ok_or_else(|| Error::Config("sparsity unknown: pass --k".into()))?;
        solver.solve(&problem, k, &params)?
    };
    let success = omega.map(|o| o == res.omega_hat);
    match &a.out {
        Some(json) => {
            let stem = json.file_stem().and_then(|s| s.to_str()).unwrap_or("result");
            let x_hat = json.with_file_name(format!("{stem}_x_hat.mtx"));
            let m = io::write_result(&res, json, &x_hat)?;
            print_json(&serde_json::json!({ "omega_hat": m.omega_hat, "success": success, "out": json }))
        }
        None => print_json(&serde_json::json!({
            "algo": res.algo,
            "omega_hat": res.omega_hat,
            "omega_c": res.omega_c,
            "runtime_ms": res.runtime_ms,
            "success": success,
        })),
    }
}

fn base_config(g: &GridArgs, k_grid: Option<Vec<usize>>) -> Result<ExperimentConfig> {
    let mut cfg = if let Some(path) = &g.config {
        ExperimentConfig::from_json_file(path)?
    } else if let Some(p) = &g.preset {
        match p.as_str() {
            "fig1" => ExperimentConfig::fig1(),
            other => return Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    } else {
        let need = |v: Option<usize>, name: &str| v.ok_or_else(|| Error::Config(format!("--{name} is required without --config")));
        let l = need(g.l, "l")?;
        ExperimentConfig {
            m: need(g.m, "m")?,
            n: need(g.n, "n")?,
            l,
            r: g.r.unwrap_or(l),
            k_grid: Vec::new(),
            ..ExperimentConfig::fig1()
        }
    };
    macro_rules! set {
        ($($f:ident <- $v:expr),*) => { $(if let Some(v) = $v { cfg.$f = v; })* };
    }
    set!(m <- g.m, n <- g.n, l <- g.l, r <- g.r, snr_db <- g.snr_db, trials <- g.trials, seed <- g.seed,
         algos <- g.algos.clone(), field <- g.field, matrix_model <- g.model, k_grid <- k_grid);
    if g.no_runtime {
        cfg.record_runtime = false;
    }
    Ok(cfg)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let cfg = base_config(&a.grid, a.k_grid)?;
    let rows = harness::run_sweep(&cfg)?;
    harness::write_csv(&rows, &a.grid.out, a.grid.verbose)?;
    for r in rows.iter().filter(|r| r.errors > 0) {
        eprintln!("warning: {} at k = {}: {} of {} trials raised errors", r.algo, r.k, r.errors, r.trials);
    }
    Ok(())
}

fn k95(a: K95Args) -> Result<()> {
    let mut cfg = base_config(&a.grid, None)?;
    if cfg.k_grid.is_empty() {
        cfg.k_grid = vec![1];
    }
    let opts = K95Options {
        threshold: a.threshold,
        full_scan: a.full_scan,
        ..K95Options::new(a.l_grid)
    };
    let points = harness::run_k95(&cfg, &opts)?;
    let rows: Vec<_> = points.iter().flat_map(|p| p.rows.iter().cloned()).collect();
    harness::write_csv(&rows, &a.grid.out, a.grid.verbose)?;
    print_json(&points)
}

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let mut budget = Budget::default();
    if let Some(v) = a.max_n {
        budget.max_n = v;
    }
    if let Some(v) = a.max_subsets {
        budget.max_subsets = v;
    }
    let req = MeasureRequest {
        lcp: a.lcp_delta.map(|d| (d, a.lcp_gamma.unwrap_or_default())),
        wrip: match (a.wrip_j, a.wrip_b) {
            (j, Some(b)) => Some((j.unwrap_or_default(), b)),
            (Some(_), None) => return Err(Error::Config("--wrip-j needs --wrip-b".into())),
            (None, None) => None,
        },
        theorem3: match (a.omega, a.v1) {
            (Some(o), Some(v)) => Some((o, v)),
            (None, None) => None,
            _ => return Err(Error::Config("--omega and --v1 go together".into())),
        },
        budget,
    };
    let report = match io::mtx_field(&a.matrix)? {
        Field::Real => measure_report(&io::read_mtx::<f64>(&a.matrix)?, &req)?,
        Field::Complex => measure_report(&io::read_mtx::<Complex64>(&a.matrix)?, &req)?,
    };
    print_json(&report)
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let inputs = BoundInputs {
        t: a.t,
        sigma: a.sigma,
        kappa: a.kappa,
        sigma_min_pool: a.sigma_min_pool,
        pool_size: a.pool_size,
        ..BoundInputs::new(a.k, a.n, a.r, a.eta, a.epsilon)
    };
    print_json(&sample_bounds(&inputs)?)
}
