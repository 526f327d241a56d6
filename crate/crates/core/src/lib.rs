//! Infeasible interior-point arc-search for convex programs
//!
//! ```text
//! min f(x)   s.t.   A_E x = b_E,   A_I x ≥ b_I
//! ```
//!
//! with `f` given as an expression over `x1 … xn`. Each iteration moves along
//! an ellipse that matches the first and second derivatives of the central
//! path, picking the centering parameter and the step together.
//!
//! ```
//! use arcsearch::{default_start, solve, SolverConfig, Status, BENCHMARKS};
//!
//! let ex1 = &BENCHMARKS[0];
//! let program = ex1.program::<f64>();
//! let start = default_start(&program, Some(&ex1.start::<f64>()));
//! let report = solve(&program, &SolverConfig::default(), start).unwrap();
//! assert_eq!(report.status, Status::Converged);
//! assert!((report.objective + 13.0).abs() < 1e-3);
//! ```
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix `f64`.

// `!(a > b)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arc;
pub mod autodiff;
pub mod benchmarks;
pub mod kkt;
pub mod linalg;
pub mod problem;
pub mod scalar;
pub mod solver;
pub mod verification;

pub use benchmarks::{Benchmark, BENCHMARKS};
pub use kkt::{Iterate, KktError, NewtonDirections, Point};
pub use linalg::Matrix;
pub use problem::{fold_bounds, parse_expression, ConvexProgram, Expr, ParseError, ProgramError};
pub use scalar::Scalar;
pub use solver::{
    default_start, solve, SolveError, SolverConfig, SolverReport, Status, StepRecord, TraceRow, Warning,
};

pub type Program = ConvexProgram<f64>;
pub type Config = SolverConfig<f64>;
pub type Report = SolverReport<f64>;
pub type Vector = Point<f64>;
