//! CSV and JSON outputs of an experiment.
//!
//! * `summary.csv`: one [`BenchRow`] per line, columns `label, method,
//!   beta, sketch_d, runs, converged_runs, mean_it, mean_total_s,
//!   mean_prep_s, mean_solve_s, speedup`. Empty cells mean "not
//!   applicable".
//! * `curves/<label>.csv` for repeat 0 and `curves/<label>.rep<r>.csv` for
//!   later repeats: `k, rse, normal_residual, block_size, elapsed_s`, one
//!   line per iterate including `k = 0`.
//! * `manifest.json`: the configuration echo plus seeds and outcome of
//!   every run.

use super::config::ExperimentConfig;
use super::run::{BenchRow, ExperimentOutcome, RunRecord, SweepPoint};
use super::BenchError;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Columns that hold wall-clock measurements or quantities derived from
/// them.
pub const TIMING_COLUMNS: [&str; 5] = [
    "elapsed_s",
    "mean_total_s",
    "mean_prep_s",
    "mean_solve_s",
    "speedup",
];

#[derive(Serialize)]
struct CurveRow {
    k: usize,
    rse: Option<f64>,
    normal_residual: f64,
    block_size: usize,
    elapsed_s: f64,
}

#[derive(Serialize)]
struct ManifestRun<'a> {
    label: &'a str,
    repeat: usize,
    seed: u64,
    sketch_seed: Option<u64>,
    sketch_d: Option<usize>,
    iterations: usize,
    stop_reason: String,
    converged: bool,
    final_rse: Option<f64>,
    gradient_fallback: bool,
    curve: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    name: &'a str,
    crate_version: &'a str,
    config: &'a ExperimentConfig,
    runs: Vec<ManifestRun<'a>>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// File-name-safe form of a method label.
pub fn sanitize_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn curve_name(run: &RunRecord) -> String {
    let base = sanitize_label(&run.label);
    if run.repeat == 0 {
        format!("{base}.csv")
    } else {
        format!("{base}.rep{}.csv", run.repeat)
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, BenchError> {
    let file = std::fs::File::create(path).map_err(io(path))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_summary_csv(path: &Path, rows: &[BenchRow]) -> Result<(), BenchError> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io(path))?;
    Ok(())
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<BenchRow>, BenchError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(io(path))?;
    let mut r = csv::Reader::from_reader(file);
    Ok(r.deserialize().collect::<Result<Vec<BenchRow>, _>>()?)
}

pub fn write_curve_csv(path: &Path, run: &RunRecord) -> Result<(), BenchError> {
    let mut w = csv_writer(path)?;
    for rec in &run.report.records {
        w.serialize(CurveRow {
            k: rec.k,
            rse: rec.rse,
            normal_residual: rec.normal_residual,
            block_size: rec.block_size,
            elapsed_s: rec.elapsed_s,
        })?;
    }
    w.flush().map_err(io(path))?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, points: &[SweepPoint]) -> Result<(), BenchError> {
    let mut w = csv_writer(path)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush().map_err(io(path))?;
    Ok(())
}

/// Writes summary, curves and manifest under `dir`. Returns the paths
/// written.
pub fn emit_outputs(outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(dir.join("curves")).map_err(io(dir))?;
    let mut written = Vec::new();

    let summary = dir.join("summary.csv");
    write_summary_csv(&summary, &outcome.rows)?;
    written.push(summary);

    let mut manifest_runs = Vec::with_capacity(outcome.runs.len());
    for run in &outcome.runs {
        let name = curve_name(run);
        let path = dir.join("curves").join(&name);
        write_curve_csv(&path, run)?;
        written.push(path);
        manifest_runs.push(ManifestRun {
            label: &run.label,
            repeat: run.repeat,
            seed: run.seed,
            sketch_seed: run.sketch.map(|s| s.0),
            sketch_d: run.sketch.map(|s| s.1),
            iterations: run.report.iterations,
            stop_reason: run.report.stop_reason.to_string(),
            converged: run.report.converged(),
            final_rse: run.report.final_rse(),
            gradient_fallback: run.report.gradient_fallback,
            curve: format!("curves/{name}"),
        });
    }

    let manifest = Manifest {
        name: &outcome.config.name,
        crate_version: env!("CARGO_PKG_VERSION"),
        config: &outcome.config,
        runs: manifest_runs,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").map_err(io(&path))?;
    written.push(path);
    Ok(written)
}

/// Drops the named columns from CSV text, keeping everything else byte for
/// byte as re-serialized by the csv writer.
pub fn strip_columns(text: &str, drop: &[&str]) -> Result<String, BenchError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let keep: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !drop.contains(h))
        .map(|(i, _)| i)
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(keep.iter().map(|&i| &headers[i]))?;
    for rec in r.records() {
        let rec = rec?;
        w.write_record(keep.iter().map(|&i| &rec[i]))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_become_file_names() {
        assert_eq!(
            sanitize_label("CS-mADBCD(d=4n,beta=0.20)"),
            "CS-mADBCD_d_4n_beta_0.20_"
        );
    }

    #[test]
    fn strip_drops_only_named_columns() {
        let text = "k,rse,elapsed_s\n0,1.0,0.5\n1,0.5,0.7\n";
        assert_eq!(
            strip_columns(text, &TIMING_COLUMNS).unwrap(),
            "k,rse\n0,1.0\n1,0.5\n"
        );
    }
}
