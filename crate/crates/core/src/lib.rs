//! Block coordinate descent solvers for overdetermined linear least-squares
//! problems `min ||b - A x||`.
//!
//! The main method is the adaptive deterministic block coordinate descent
//! with heavy-ball momentum (mADBCD): each step selects the columns whose
//! normal-equation residual entries beat the mean square, moves along that
//! block with an exact line search and adds `β (x^(k) - x^(k-1))`. Greedy
//! CD, FBCD and MRBGS are provided as baselines, a count sketch turns very
//! tall problems into short ones, and [`oracle`] holds independent
//! reference solvers and the rate constants used to audit runs.
//!
//! ```
//! use madbcd::problems::{gen_gaussian_dense, make_consistent_problem};
//! use madbcd::solver::{run_solver, MethodParams, StoppingRule};
//!
//! let a = gen_gaussian_dense(200, 20, 1).unwrap();
//! let problem = make_consistent_problem(a, 2).unwrap();
//! let report = run_solver(&problem, &MethodParams::madbcd(0.1), &StoppingRule::default()).unwrap();
//! assert!(report.converged());
//! ```

pub mod bench;
pub mod block;
pub mod matrix;
pub mod oracle;
pub mod problems;
pub mod rng;
pub mod sketch;
pub mod solver;

pub use block::BlockIndexSet;
pub use matrix::{DenseMatrix, Matrix, MatrixError, SparseMatrixCsc};
pub use problems::ProblemInstance;
pub use sketch::CountSketch;
pub use solver::{ConvergenceReport, Method, MethodParams, StoppingRule};
