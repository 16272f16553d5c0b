//! Problem bundles: a directory with `A.mtx`, `b.txt` and optionally
//! `x_star.txt` (one value per line).

use super::market::{read_matrix_market, write_matrix_market};
use super::{ProblemError, ProblemInstance, CONSISTENCY_TOLERANCE};
use crate::matrix::norm2;
use std::fmt::Write as _;
use std::path::Path;

fn io_err(path: &Path, source: std::io::Error) -> ProblemError {
    ProblemError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_vector(path: &Path, v: &[f64]) -> Result<(), ProblemError> {
    let mut out = String::with_capacity(24 * v.len());
    for x in v {
        let _ = writeln!(out, "{x:e}");
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

fn read_vector(path: &Path) -> Result<Vec<f64>, ProblemError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| ProblemError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_bundle(dir: impl AsRef<Path>, problem: &ProblemInstance) -> Result<(), ProblemError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_matrix_market(dir.join("A.mtx"), &problem.a)?;
    write_vector(&dir.join("b.txt"), &problem.b)?;
    if let Some(xs) = &problem.x_star {
        write_vector(&dir.join("x_star.txt"), xs)?;
    }
    Ok(())
}

/// Loads a bundle. The instance counts as consistent when `x_star.txt` is
/// present and reproduces `b` to the consistency tolerance.
pub fn read_bundle(
    dir: impl AsRef<Path>,
    transpose: bool,
) -> Result<ProblemInstance, ProblemError> {
    let dir = dir.as_ref();
    let a = read_matrix_market(dir.join("A.mtx"), transpose)?;
    let b = read_vector(&dir.join("b.txt"))?;
    let xs_path = dir.join("x_star.txt");
    let x_star = if xs_path.exists() {
        Some(read_vector(&xs_path)?)
    } else {
        None
    };
    let consistent = match &x_star {
        Some(xs) if xs.len() == a.cols() && b.len() == a.rows() => {
            let ax = a.matvec(xs)?;
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            norm2(&r) <= CONSISTENCY_TOLERANCE * norm2(&b)
        }
        _ => false,
    };
    let label = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bundle".into());
    ProblemInstance::new(a, b, x_star, label, dir.display().to_string(), consistent)
}
