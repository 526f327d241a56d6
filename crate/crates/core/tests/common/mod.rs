#![allow(dead_code)]

use arcsearch::kkt::{assemble_newton_matrix, solve_directions, Iterate, NewtonDirections};
use arcsearch::{default_start, fold_bounds, solve, Config, ConvexProgram, Expr, Matrix, Point, Report};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// `xᵀ Q x` as an expression tree.
pub fn quadratic_form(q: &[Vec<f64>]) -> Expr<f64> {
    let n = q.len();
    let mut terms: Vec<Expr<f64>> = Vec::new();
    for (i, row) in q.iter().enumerate() {
        for j in i..n {
            let coef = if i == j { row[i] } else { row[j] + q[j][i] };
            let t = Expr::Mul(
                Box::new(Expr::Const(coef)),
                Box::new(Expr::Mul(Box::new(Expr::Var(i)), Box::new(Expr::Var(j)))),
            );
            terms.push(t);
        }
    }
    terms
        .into_iter()
        .reduce(|a, b| Expr::Add(Box::new(a), Box::new(b)))
        .unwrap()
}

/// Strictly convex `Q = MᵀM + δI`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let m: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            q[i][j] = (0..n).map(|k| m[k][i] * m[k][j]).sum::<f64>();
        }
        q[i][i] += 0.1;
    }
    q
}

pub struct RandomQp {
    pub program: ConvexProgram<f64>,
    pub start: Vec<f64>,
}

/// Homogeneous strictly convex QP `min xᵀQx` over a box that keeps the
/// origin out of at least one coordinate, optionally with a coupling row.
/// Without a linear term the solver's `Hx` residual is the true gradient.
pub fn random_box_qp(rng: &mut ChaCha8Rng, max_n: usize, coupling: bool) -> RandomQp {
    let n = rng.gen_range(1..=max_n);
    let q = random_spd(rng, n);
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 0..n {
        let width = rng.gen_range(1.0..5.0);
        let lo = if i == 0 || rng.gen_bool(0.5) {
            if rng.gen_bool(0.5) {
                rng.gen_range(0.5..2.0)
            } else {
                -rng.gen_range(0.5..2.0) - width
            }
        } else {
            rng.gen_range(-3.0..0.0)
        };
        lower.push(lo);
        upper.push(lo + width);
    }
    let (rows, rhs) = if coupling && n >= 2 && 2 * n < 12 {
        // sum of x stays within reach of the box centre
        let centre: f64 = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).sum();
        (vec![vec![-1.0; n]], vec![-(centre + 1.0)])
    } else {
        (vec![], vec![])
    };
    let a = if rows.is_empty() {
        Matrix::zeros(0, n)
    } else {
        Matrix::from_rows(&rows, n).unwrap()
    };
    let (a_in, b_in) = fold_bounds(&a, &rhs, &lower, &upper).unwrap();
    let program = ConvexProgram::new(n, quadratic_form(&q), Matrix::zeros(0, n), vec![], a_in, b_in).unwrap();
    let start = lower.iter().zip(&upper).map(|(l, u)| rng.gen_range(*l..*u)).collect();
    RandomQp { program, start }
}

pub fn run(program: &ConvexProgram<f64>, start: &[f64]) -> Report {
    solve(program, &Config::default(), default_start(program, Some(start))).expect("solver starts")
}

/// Random strictly positive iterate and the Newton directions there.
pub fn random_iterate_with_directions(rng: &mut ChaCha8Rng) -> (ConvexProgram<f64>, Iterate<f64>, NewtonDirections<f64>) {
    let qp = random_box_qp(rng, 5, true);
    let program = qp.program;
    let (n, m, p) = (program.n(), program.m(), program.p());
    let pos = |rng: &mut ChaCha8Rng| rng.gen_range(0.05..5.0);
    let z: Vec<f64> = (0..p).map(|_| pos(rng)).collect();
    let point = Point {
        x: qp.start,
        y: (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        w: z.clone(),
        s: (0..p).map(|_| pos(rng)).collect(),
        z,
    };
    assert_eq!(point.x.len(), n);
    let it = Iterate::evaluate(&program, point, 1.0).unwrap();
    let mat = assemble_newton_matrix(&it.hessian, program.a_eq(), program.a_in(), &it.point.s, &it.point.z);
    let dirs = solve_directions(&mat, &it).unwrap();
    (program, it, dirs)
}

/// Largest relative deviation of `‖r^k‖ / ‖r^0‖` from `ν_k` for one residual
/// block. Rows where `ν` was floored after a full step are checked against
/// zero instead (`‖r^k‖ ≤ tol_zero ‖r^0‖`).
pub fn proportionality_error(norms: &[f64], nus: &[f64], tol_zero: f64) -> Option<f64> {
    let r0 = norms[0];
    if r0 == 0.0 {
        return None;
    }
    let mut worst = 0.0f64;
    for (&r, &nu) in norms.iter().zip(nus).skip(1) {
        let err = if nu <= f64::MIN_POSITIVE {
            if r <= tol_zero * r0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            ((r / r0) - nu).abs() / nu
        };
        worst = worst.max(err);
    }
    Some(worst)
}

pub fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
