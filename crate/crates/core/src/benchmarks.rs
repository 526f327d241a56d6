//! The eight small test problems used throughout the test suite and the CLI
//! examples, with their published solutions.

use crate::linalg::Matrix;
use crate::problem::{fold_bounds, parse_expression, ConvexProgram};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: &'static str,
    pub objective: &'static str,
    pub vars: &'static [&'static str],
    /// Inequality rows `a x >= b` before bounds are folded in.
    pub rows: &'static [(&'static [f64], f64)],
    pub lower: &'static [f64],
    pub upper: &'static [f64],
    pub start: &'static [f64],
    pub expected_x: &'static [f64],
    pub expected_objective: f64,
    pub reported_iterations: usize,
}

const SUM_LE_10: &[(&[f64], f64)] = &[(&[-1.0, -1.0], -10.0)];
const X2: &[&str] = &["x1", "x2"];
const START2: &[f64] = &[5.0, 5.0];
const UPPER2: &[f64] = &[10.0, 10.0];

pub const BENCHMARKS: [Benchmark; 8] = [
    Benchmark {
        name: "ex1",
        objective: "-(5*log(x1) - x1 + 7) - (7*log(x2) - x2 + 8)",
        vars: X2,
        rows: SUM_LE_10,
        lower: &[1.0, 1.0],
        upper: UPPER2,
        start: START2,
        expected_x: &[1.0, 1.0],
        expected_objective: -13.0,
        reported_iterations: 68,
    },
    Benchmark {
        name: "ex2",
        objective: "5*exp(x1) + 7 + 7*exp(x2) + 8",
        vars: X2,
        rows: SUM_LE_10,
        lower: &[2.0, 1.0],
        upper: UPPER2,
        start: START2,
        expected_x: &[2.0, 1.0],
        expected_objective: 70.9733,
        reported_iterations: 66,
    },
    Benchmark {
        name: "ex3",
        objective: "5*x1^3 + 7 + 7/x2 + 8",
        vars: X2,
        rows: SUM_LE_10,
        lower: &[1.0, 2.0],
        upper: UPPER2,
        start: START2,
        expected_x: &[1.0, 2.0],
        expected_objective: 23.5,
        reported_iterations: 69,
    },
    Benchmark {
        name: "ex4",
        objective: "5*x1*log(x1) + 7 + 7*x2*log(x2) + 8",
        vars: X2,
        rows: SUM_LE_10,
        lower: &[2.0, 2.0],
        upper: UPPER2,
        start: START2,
        expected_x: &[2.0, 2.0],
        expected_objective: 31.6355,
        reported_iterations: 69,
    },
    Benchmark {
        name: "ex5",
        objective: "(5*x1)^2 / (7*x2)",
        vars: X2,
        rows: SUM_LE_10,
        lower: &[1.0, 3.0],
        upper: UPPER2,
        start: START2,
        expected_x: &[4.9271, 5.0595],
        expected_objective: 17.1360,
        reported_iterations: 57,
    },
    Benchmark {
        name: "ex6",
        objective: "log(5*exp(x1) + 7*exp(x2))",
        vars: X2,
        rows: SUM_LE_10,
        lower: &[3.0, 1.0],
        upper: UPPER2,
        start: START2,
        expected_x: &[4.9924, 4.9924],
        expected_objective: 7.4773,
        reported_iterations: 56,
    },
    Benchmark {
        name: "ex7",
        objective: "(x1*x2)^(1/2)",
        vars: X2,
        rows: SUM_LE_10,
        lower: &[2.0, 3.0],
        upper: UPPER2,
        start: START2,
        expected_x: &[2.0006, 7.9767],
        expected_objective: 3.9948,
        reported_iterations: 59,
    },
    Benchmark {
        name: "ex8",
        objective: "-log(x1*x3 - x2*x2)",
        vars: &["x1", "x2", "x3"],
        rows: &[(&[-1.0, -1.0, 0.0], -10.0), (&[0.0, -1.0, -1.0], -10.0)],
        lower: &[5.0, 1.0, 5.0],
        upper: &[10.0, 3.0, 10.0],
        start: &[6.0, 2.0, 6.0],
        expected_x: &[5.0, 3.0, 5.0],
        expected_objective: -2.7726,
        reported_iterations: 44,
    },
];

impl Benchmark {
    /// Builds the program with bounds folded into the inequality block.
    pub fn program<T: Scalar>(&self) -> ConvexProgram<T> {
        let n = self.vars.len();
        let names: Vec<String> = self.vars.iter().map(|s| s.to_string()).collect();
        let f = parse_expression::<T, _>(self.objective, &names).expect("benchmark objective parses");
        let rows: Vec<Vec<T>> = self.rows.iter().map(|(a, _)| a.iter().map(|&v| lit(v)).collect()).collect();
        let rhs: Vec<T> = self.rows.iter().map(|&(_, b)| lit(b)).collect();
        let a = Matrix::from_rows(&rows, n).expect("benchmark rows are rectangular");
        let lower: Vec<T> = self.lower.iter().map(|&v| lit(v)).collect();
        let upper: Vec<T> = self.upper.iter().map(|&v| lit(v)).collect();
        let (a_in, b_in) = fold_bounds(&a, &rhs, &lower, &upper).expect("benchmark bounds are valid");
        ConvexProgram::new(n, f, Matrix::zeros(0, n), vec![], a_in, b_in)
            .expect("benchmark program is well formed")
            .with_names(names)
    }

    pub fn start<T: Scalar>(&self) -> Vec<T> {
        self.start.iter().map(|&v| lit(v)).collect()
    }
}

pub fn by_name(name: &str) -> Option<&'static Benchmark> {
    BENCHMARKS.iter().find(|b| b.name == name)
}
