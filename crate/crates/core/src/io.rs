//! Matrix Market (dense array) files and the JSON manifests that tie a
//! problem or a solver result to them.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matmodel::RecoveryProblem;
use crate::pursuit::RecoveryResult;
use crate::scalar::{Field, Real, RealOf, Scalar};

const BANNER: &str = "%%MatrixMarket";

/// Writes `a` in dense array format, column-major.
pub fn write_mtx_to<T: Scalar, W: Write>(mut out: W, a: &DMatrix<T>) -> Result<()> {
    writeln!(out, "{BANNER} matrix array {} general", T::FIELD)?;
    writeln!(out, "{} {}", a.nrows(), a.ncols())?;
    for v in a.iter() {
        let re = v.real().as_f64();
        match T::FIELD {
            Field::Real => writeln!(out, "{re:e}")?,
            Field::Complex => writeln!(out, "{re:e} {:e}", v.imaginary().as_f64())?,
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_mtx<T: Scalar>(path: impl AsRef<Path>, a: &DMatrix<T>) -> Result<()> {
    write_mtx_to(BufWriter::new(File::create(path)?), a)
}

/// Field declared in the banner of a Matrix Market stream.
fn parse_banner(line: &str) -> Result<Field> {
    let tok: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tok.len() != 5 || !tok[0].eq_ignore_ascii_case(BANNER) || tok[1] != "matrix" {
        return Err(Error::Parse(format!("not a Matrix Market banner: {line:?}")));
    }
    if tok[2] != "array" {
        return Err(Error::Parse(format!("only dense array format is supported, found {}", tok[2])));
    }
    if tok[4] != "general" {
        return Err(Error::Parse(format!("only general symmetry is supported, found {}", tok[4])));
    }
    match tok[3].as_str() {
        "real" | "integer" | "double" => Ok(Field::Real),
        "complex" => Ok(Field::Complex),
        other => Err(Error::Parse(format!("unsupported field {other}"))),
    }
}

/// Field of the matrix stored at `path`, read from its banner.
pub fn mtx_field(path: impl AsRef<Path>) -> Result<Field> {
    let mut line = String::new();
    BufReader::new(File::open(path)?).read_line(&mut line)?;
    parse_banner(line.trim_end())
}

/// Reads a dense array file. Real files load into complex scalars with zero
/// imaginary part; complex files into real scalars are rejected.
pub fn read_mtx_from<T: Scalar, R: Read>(input: R) -> Result<DMatrix<T>> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;
    let mut lines = text.lines();
    let field = parse_banner(lines.next().unwrap_or_default().trim_end())?;
    if field == Field::Complex && T::FIELD == Field::Real {
        return Err(Error::Parse("complex matrix cannot be read as real".into()));
    }
    let mut tokens = lines
        .filter(|l| !l.trim_start().starts_with('%'))
        .flat_map(str::split_whitespace);
    let mut dim = || -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse("missing size line".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))
    };
    let (m, n) = (dim()?, dim()?);
    let per = field.components();
    let vals: Vec<f64> = tokens
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad entry {t:?}: {e}"))))
        .collect::<Result<_>>()?;
    if vals.len() != m * n * per {
        return Err(Error::Parse(format!("expected {} values for {m}×{n}, found {}", m * n * per, vals.len())));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(DMatrix::from_iterator(
        m,
        n,
        vals.chunks(per).map(|c| {
            let im = if per == 2 { c[1] } else { 0.0 };
            T::from_parts(RealOf::<T>::lit(c[0]), RealOf::<T>::lit(im))
        }),
    ))
}

pub fn read_mtx<T: Scalar>(path: impl AsRef<Path>) -> Result<DMatrix<T>> {
    let path = path.as_ref();
    read_mtx_from(File::open(path).map_err(|e| with_path(e, path))?)
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// JSON description of a problem on disk. Relative paths are resolved
/// against the directory holding the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemManifest {
    pub phi: PathBuf,
    pub y: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ProblemManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| with_path(e, path))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    /// Field of the sensing matrix file.
    pub fn field(&self, base: &Path) -> Result<Field> {
        mtx_field(resolve(base, &self.phi))
    }

    /// Loads the referenced matrices. The support comes from `x0` when
    /// present, otherwise from `omega`; both must agree when given.
    pub fn load<T: Scalar>(&self, base: &Path) -> Result<(RecoveryProblem<T>, Option<Vec<usize>>)> {
        let phi = read_mtx(resolve(base, &self.phi))?;
        let y = read_mtx(resolve(base, &self.y))?;
        let mut problem = RecoveryProblem::new(phi, y)?;
        if let Some(x0) = &self.x0 {
            problem = problem.with_truth(read_mtx(resolve(base, x0))?)?;
        }
        if let Some(k) = self.k {
            problem = problem.with_k(k)?;
        }
        let mut omega = self.omega.clone();
        if let Some(o) = omega.as_mut() {
            o.sort_unstable();
            if o.iter().any(|&i| i >= problem.n()) {
                return Err(Error::InvalidSpec("omega index out of range".into()));
            }
            if let Some(t) = &problem.truth {
                if &t.omega != o {
                    return Err(Error::InvalidSpec("omega disagrees with the support of x0".into()));
                }
            }
        }
        let omega = omega.or_else(|| problem.truth.as_ref().map(|t| t.omega.clone()));
        Ok((problem, omega))
    }
}

/// Writes `phi.mtx`, `y.mtx` and (with truth) `x0.mtx` into `dir` plus a
/// `problem.json` manifest; returns the manifest path.
pub fn save_problem<T: Scalar>(problem: &RecoveryProblem<T>, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_mtx(dir.join("phi.mtx"), &problem.phi)?;
    write_mtx(dir.join("y.mtx"), &problem.y)?;
    let mut manifest = ProblemManifest {
        phi: "phi.mtx".into(),
        y: "y.mtx".into(),
        x0: None,
        omega: None,
        k: problem.k,
    };
    if let Some(t) = &problem.truth {
        write_mtx(dir.join("x0.mtx"), &t.x0)?;
        manifest.x0 = Some("x0.mtx".into());
        manifest.omega = Some(t.omega.clone());
    }
    let path = dir.join("problem.json");
    manifest.write(&path)?;
    Ok(path)
}

/// JSON form of a [`RecoveryResult`]; the estimate lives in a sibling
/// `.mtx` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub algo: String,
    pub omega_hat: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<Vec<usize>>,
    pub zeta: Vec<f64>,
    pub runtime_ms: f64,
    pub x_hat: PathBuf,
    #[serde(default)]
    pub rank_deficient: bool,
    #[serde(default)]
    pub empty_support: bool,
}

/// Writes `res.x_hat` to `x_hat_path` and the manifest to `json_path`. The
/// manifest stores `x_hat_path` relative to the manifest when possible.
pub fn write_result<T: Scalar>(res: &RecoveryResult<T>, json_path: &Path, x_hat_path: &Path) -> Result<ResultManifest> {
    write_mtx(x_hat_path, &res.x_hat)?;
    let rel = match (json_path.parent(), x_hat_path.parent()) {
        (Some(a), Some(b)) if a == b => PathBuf::from(x_hat_path.file_name().unwrap_or_default()),
        _ => x_hat_path.to_path_buf(),
    };
    let manifest = ResultManifest {
        algo: res.algo.clone(),
        omega_hat: res.omega_hat.clone(),
        omega_c: res.omega_c.clone(),
        zeta: res.zeta.iter().map(|v| v.as_f64()).collect(),
        runtime_ms: res.runtime_ms,
        x_hat: rel,
        rank_deficient: res.rank_deficient,
        empty_support: res.empty_support,
    };
    let mut out = BufWriter::new(File::create(json_path)?);
    serde_json::to_writer_pretty(&mut out, &manifest)?;
    writeln!(out)?;
    out.flush()?;
    Ok(manifest)
}
