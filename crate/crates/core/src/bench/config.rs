//! Experiment configuration, read from TOML.
//!
//! ```toml
//! name = "table1"
//! seed = 42
//! repeats = 10
//! serial_timing = true
//!
//! [problem]
//! kind = "gaussian"
//! m = 3500
//! n = 350
//!
//! [stop]
//! rse = 1e-6
//! max_iterations = 10000
//!
//! [[methods]]
//! method = "fbcd"
//!
//! [[methods]]
//! method = "madbcd"
//! beta = 0.1
//!
//! [[methods]]
//! method = "madbcd"
//! beta = 0.2
//! sketch_factor = 4.0
//! ```

use super::BenchError;
use crate::matrix::{DenseMatrix, Matrix};
use crate::problems::{
    gen_gaussian_dense, gen_sparse_gaussian, gen_tomography, make_consistent_problem, read_bundle,
    read_matrix_market, Phantom, ProblemInstance, TomoGeometry,
};
use crate::solver::{Method, MethodParams, StoppingRule, DEFAULT_MRBGS_FRACTION};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;

fn default_name() -> String {
    "experiment".into()
}

fn default_repeats() -> usize {
    10
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemSpec,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Master seed; repeat `r` uses `derive_seed(seed, r)`.
    #[serde(default)]
    pub seed: u64,
    /// Run cells one at a time so timings never overlap.
    #[serde(default = "default_true")]
    pub serial_timing: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, BenchError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, BenchError> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.repeats == 0 {
            return Err(BenchError::Config("repeats must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(BenchError::Config("method list is empty".into()));
        }
        for m in &self.methods {
            m.params().validate()?;
            if let Some(f) = m.sketch_factor {
                if !(f > 0.0 && f.is_finite()) {
                    return Err(BenchError::Config(format!(
                        "sketch factor {f} must be positive"
                    )));
                }
            }
        }
        self.stop.rule().validate()?;
        Ok(())
    }
}

/// Where the coefficient matrix comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemSpec {
    /// Dense standard normal `m × n`, fresh per repeat, `b = A x⋆`.
    Gaussian { m: usize, n: usize },
    /// Sparse normal with the given density, fresh per repeat.
    Sparse { m: usize, n: usize, density: f64 },
    /// `n × n` identity with a random `x⋆`.
    Identity { n: usize },
    /// Parallel-beam tomography on an `grid × grid` image. Phantom is
    /// `shepp-logan`, `blocks` or `ellipses` (random per repeat).
    Tomography {
        grid: usize,
        angles: usize,
        detectors: usize,
        #[serde(default = "default_phantom")]
        phantom: String,
    },
    /// A Matrix Market file; `b = A x⋆` with random `x⋆` per repeat.
    Market {
        path: PathBuf,
        #[serde(default)]
        transpose: bool,
    },
    /// A bundle directory with `A.mtx`, `b.txt`, optional `x_star.txt`.
    Bundle {
        path: PathBuf,
        #[serde(default)]
        transpose: bool,
    },
}

fn default_phantom() -> String {
    "ellipses".into()
}

fn parse_dims(s: &str) -> Result<(usize, usize), BenchError> {
    let (m, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| BenchError::Config(format!("expected MxN, got '{s}'")))?;
    let p = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| BenchError::Config(format!("'{t}': {e}")))
    };
    Ok((p(m)?, p(n)?))
}

impl FromStr for ProblemSpec {
    type Err = BenchError;

    /// `gaussian:MxN`, `sparse:MxN:density`, `identity:N`,
    /// `tomo:N[:angles:detectors[:phantom]]`, `mtx:path[:t]`,
    /// `bundle:path[:t]`, or a bare path (`.mtx` file or bundle directory).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|e| BenchError::Config(format!("'{t}' in '{s}': {e}")))
        };
        let transposed = |rest: &[&str]| -> Result<(PathBuf, bool), BenchError> {
            match rest {
                [p] => Ok((PathBuf::from(p), false)),
                [p, "t"] | [p, "T"] => Ok((PathBuf::from(p), true)),
                _ => Err(BenchError::Config(format!("bad path spec '{s}'"))),
            }
        };
        match parts[0] {
            "gaussian" if parts.len() == 2 => {
                let (m, n) = parse_dims(parts[1])?;
                Ok(ProblemSpec::Gaussian { m, n })
            }
            "sparse" if parts.len() == 3 => {
                let (m, n) = parse_dims(parts[1])?;
                let density = parts[2]
                    .parse::<f64>()
                    .map_err(|e| BenchError::Config(format!("density '{}': {e}", parts[2])))?;
                Ok(ProblemSpec::Sparse { m, n, density })
            }
            "identity" if parts.len() == 2 => Ok(ProblemSpec::Identity { n: num(parts[1])? }),
            "tomo" if (2..=5).contains(&parts.len()) && parts.len() != 3 => {
                let grid = num(parts[1])?;
                let (angles, detectors) = if parts.len() >= 4 {
                    (num(parts[2])?, num(parts[3])?)
                } else {
                    (2 * grid, (3 * grid) / 2)
                };
                let phantom = parts.get(4).copied().unwrap_or("ellipses").to_string();
                Ok(ProblemSpec::Tomography {
                    grid,
                    angles,
                    detectors,
                    phantom,
                })
            }
            "mtx" if parts.len() >= 2 => {
                let (path, transpose) = transposed(&parts[1..])?;
                Ok(ProblemSpec::Market { path, transpose })
            }
            "bundle" if parts.len() >= 2 => {
                let (path, transpose) = transposed(&parts[1..])?;
                Ok(ProblemSpec::Bundle { path, transpose })
            }
            _ => {
                let path = PathBuf::from(s);
                if path.is_dir() {
                    Ok(ProblemSpec::Bundle {
                        path,
                        transpose: false,
                    })
                } else if path.extension().is_some_and(|e| e == "mtx") {
                    Ok(ProblemSpec::Market {
                        path,
                        transpose: false,
                    })
                } else {
                    Err(BenchError::Config(format!(
                        "unrecognized problem spec '{s}'"
                    )))
                }
            }
        }
    }
}

impl ProblemSpec {
    /// Whether each repeat draws a fresh random instance.
    pub fn is_random(&self) -> bool {
        !matches!(self, ProblemSpec::Bundle { .. })
    }

    /// Builds the instance for one repeat seed.
    pub fn realize(&self, seed: u64) -> Result<ProblemInstance, BenchError> {
        let mut p = match self {
            ProblemSpec::Gaussian { m, n } => {
                let mut p = make_consistent_problem(gen_gaussian_dense(*m, *n, seed)?, seed)?;
                p.label = format!("gaussian-{m}x{n}");
                p
            }
            ProblemSpec::Sparse { m, n, density } => {
                let mut p =
                    make_consistent_problem(gen_sparse_gaussian(*m, *n, *density, seed)?, seed)?;
                p.label = format!("sparse-{m}x{n}-{density}");
                p
            }
            ProblemSpec::Identity { n } => {
                let a: Matrix = DenseMatrix::identity(*n)?.into();
                let mut p = make_consistent_problem(a, seed)?;
                p.label = format!("identity-{n}");
                p
            }
            ProblemSpec::Tomography {
                grid,
                angles,
                detectors,
                phantom,
            } => {
                let ph = match phantom.as_str() {
                    "shepp-logan" => Phantom::SheppLogan,
                    "blocks" => Phantom::Blocks,
                    "ellipses" => Phantom::RandomEllipses { seed },
                    other => return Err(BenchError::Config(format!("unknown phantom '{other}'"))),
                };
                let geom = TomoGeometry::parallel(*grid, *angles, *detectors);
                gen_tomography(&geom, ph)?.problem
            }
            ProblemSpec::Market { path, transpose } => {
                let a = read_matrix_market(path, *transpose)
                    .map_err(crate::problems::ProblemError::from)?;
                let mut p = make_consistent_problem(a, seed)?;
                p.label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "market".into());
                if *transpose {
                    p.label.push_str("-T");
                }
                p
            }
            ProblemSpec::Bundle { path, transpose } => read_bundle(path, *transpose)?,
        };
        if self.is_random() {
            p.provenance = format!("{}; seed {seed}", p.provenance);
        }
        Ok(p)
    }
}

/// One method column of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub method: Method,
    #[serde(default)]
    pub beta: f64,
    /// MRBGS threshold fraction.
    #[serde(default)]
    pub fraction: Option<f64>,
    /// Count-sketch rows as a multiple of `n`; turns the run into the
    /// sketched variant.
    #[serde(default)]
    pub sketch_factor: Option<f64>,
    #[serde(default)]
    pub label: Option<String>,
}

impl MethodSpec {
    pub fn new(method: Method, beta: f64) -> Self {
        Self {
            method,
            beta,
            fraction: None,
            sketch_factor: None,
            label: None,
        }
    }

    pub fn sketched(beta: f64, factor: f64) -> Self {
        Self {
            sketch_factor: Some(factor),
            ..Self::new(Method::Madbcd, beta)
        }
    }

    pub fn params(&self) -> MethodParams {
        MethodParams {
            method: self.method,
            beta: self.beta,
            mrbgs_fraction: self.fraction.unwrap_or(DEFAULT_MRBGS_FRACTION),
        }
    }

    /// Sketch rows for an `n`-column problem.
    pub fn sketch_rows(&self, n: usize) -> Option<usize> {
        self.sketch_factor
            .map(|f| ((f * n as f64).round() as usize).max(1))
    }

    pub fn display_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match (self.method, self.sketch_factor) {
            (Method::Madbcd, Some(f)) => format!("CS-mADBCD(d={f}n,beta={:.2})", self.beta),
            (Method::Madbcd, None) => format!("mADBCD(beta={:.2})", self.beta),
            (Method::Mrbgs, _) => match self.fraction {
                Some(f) => format!("MRBGS(fraction={f})"),
                None => "MRBGS".into(),
            },
            (m, _) => m.name().into(),
        }
    }
}

/// Stopping limits as written in a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    #[serde(default)]
    pub rse: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub time_budget: Option<f64>,
    #[serde(default)]
    pub gradient: Option<f64>,
}

impl Default for StopSpec {
    fn default() -> Self {
        let d = StoppingRule::default();
        Self {
            rse: d.rse_threshold,
            max_iterations: d.max_iterations,
            time_budget: d.time_budget,
            gradient: d.gradient_threshold,
        }
    }
}

impl StopSpec {
    pub fn rule(&self) -> StoppingRule {
        StoppingRule {
            rse_threshold: self.rse,
            max_iterations: self.max_iterations,
            time_budget: self.time_budget,
            gradient_threshold: self.gradient,
        }
    }
}
