use std::path::{Path, PathBuf};

use l1sketch::{deserialize, estimate_median, serialize, Execution, L1DiffSketch, MasterSeed};

use crate::error::{CliError, CliResult};
use crate::vector::VectorFile;

/// Parses up to 64 hex digits as a big-endian 256-bit seed.
pub fn parse_seed(text: &str) -> CliResult<MasterSeed> {
    let digits = text.strip_prefix("0x").unwrap_or(text);
    if digits.is_empty() || digits.len() > 64 {
        return Err(CliError::Parameter(format!("seed must be 1 to 64 hex digits, got {}", digits.len())));
    }
    let padded = format!("{digits:0>64}");
    let bytes = hex::decode(padded).map_err(|e| CliError::Parameter(format!("seed is not hex: {e}")))?;
    Ok(MasterSeed(bytes.try_into().unwrap()))
}

/// Output path of repetition `rep`: `path` itself for a single repetition,
/// otherwise `path.rep`.
pub fn rep_path(path: &Path, rep: u64, reps: u64) -> PathBuf {
    if reps == 1 {
        return path.to_path_buf();
    }
    let mut s = path.as_os_str().to_owned();
    s.push(format!(".{rep}"));
    PathBuf::from(s)
}

pub struct SketchArgs<'a> {
    pub input: &'a Path,
    pub n: u64,
    pub max_mag: u64,
    pub eps: f64,
    pub seed: MasterSeed,
    pub reps: u64,
    pub output: &'a Path,
}

/// Writes one sketch file per repetition and returns their paths.
pub fn sketch(args: &SketchArgs) -> CliResult<Vec<PathBuf>> {
    if args.reps == 0 {
        return Err(CliError::Parameter("--reps must be at least 1".into()));
    }
    // parameters are checked before the input is read
    L1DiffSketch::new(args.eps, args.n, args.max_mag, MasterSeed([0; 32]))?;
    let x = VectorFile::read(args.input)?.to_dense(args.n, args.max_mag)?;
    let mut written = Vec::new();
    for rep in 0..args.reps {
        let mut sk = L1DiffSketch::new(args.eps, args.n, args.max_mag, args.seed.repetition(rep))?;
        sk.ingest_dense_with(&x, Execution::default())?;
        let path = rep_path(args.output, rep, args.reps);
        std::fs::write(&path, serialize(&sk))
            .map_err(|e| CliError::Parameter(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

pub fn load_sketch(path: &Path) -> CliResult<L1DiffSketch> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    deserialize(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Median estimate over sketch files given as consecutive `(x, y)` pairs.
pub fn estimate(paths: &[PathBuf]) -> CliResult<f64> {
    if paths.is_empty() || paths.len() % 2 != 0 {
        return Err(CliError::Parameter(format!(
            "expected sketch files in pairs, got {}",
            paths.len()
        )));
    }
    let sketches = paths.iter().map(|p| load_sketch(p)).collect::<CliResult<Vec<_>>>()?;
    let pairs: Vec<(L1DiffSketch, L1DiffSketch)> = sketches
        .chunks(2)
        .map(|c| (c[0].clone(), c[1].clone()))
        .collect();
    for (a, b) in &pairs {
        a.check_compatible(b)?;
    }
    Ok(estimate_median(&pairs, Execution::default())?)
}

/// `Σ |x_i - y_i|`. Without `n` both files must imply the same dimension.
pub fn exact(x: &Path, y: &Path, n: Option<u64>) -> CliResult<u64> {
    let (fx, fy) = (VectorFile::read(x)?, VectorFile::read(y)?);
    let n = match n {
        Some(n) => n,
        None if fx.implied_len() == fy.implied_len() => fx.implied_len(),
        None => {
            return Err(CliError::Parameter(format!(
                "dimension mismatch: {} has {} coordinates, {} has {}",
                x.display(),
                fx.implied_len(),
                y.display(),
                fy.implied_len()
            )))
        }
    };
    let to_dense = |f: &VectorFile| {
        f.to_dense(n, i64::MAX as u64).map_err(|e| match e {
            CliError::Input(msg) => CliError::Parameter(format!("dimension mismatch: {msg}")),
            other => other,
        })
    };
    let (dx, dy) = (to_dense(&fx)?, to_dense(&fy)?);
    Ok(dx.iter().zip(&dy).map(|(a, b)| (a - b).unsigned_abs()).sum())
}
