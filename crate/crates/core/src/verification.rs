//! Brute-force oracles for tests.
//!
//! Both routines are deliberately naive and share no code with the solver:
//! the KKT enumeration uses the true gradient and nalgebra's LU, and the
//! step-limit scan walks a uniform grid.

use nalgebra::{DMatrix, DVector};

use crate::autodiff::{evaluate, gradient, hessian, EvalError};
use crate::problem::ConvexProgram;

/// Largest number of inequality rows accepted by [`enumerate_kkt`].
pub const MAX_ENUMERATED_ROWS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct KktCandidate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Inequality multipliers, zero on inactive rows.
    pub w: Vec<f64>,
    pub objective: f64,
    pub active: Vec<usize>,
}

/// Every KKT point of a quadratic program found by trying each subset of
/// inequality rows as the active set.
///
/// With `Q = ∇²f` and `c = ∇f(0)`, each subset `S` gives the linear system
///
/// ```text
/// Q x + A_Eᵀ y − A_Sᵀ w_S = −c
/// A_E x = b_E,   A_S x = b_S
/// ```
///
/// Subsets whose system is singular are skipped. A solution is kept when it
/// is primal feasible and `w_S ≥ −tol`. Duplicates are merged.
pub fn enumerate_kkt(program: &ConvexProgram<f64>, tol: f64) -> Result<Vec<KktCandidate>, EvalError> {
    let (n, m, p) = (program.n(), program.m(), program.p());
    assert!(p <= MAX_ENUMERATED_ROWS, "enumeration limited to {MAX_ENUMERATED_ROWS} rows");
    let origin = vec![0.0; n];
    let q = hessian(program.objective(), &origin)?;
    let c = gradient(program.objective(), &origin)?;
    let (a_eq, a_in) = (program.a_eq(), program.a_in());

    let mut found: Vec<KktCandidate> = Vec::new();
    for mask in 0u32..(1u32 << p) {
        let active: Vec<usize> = (0..p).filter(|i| mask & (1 << i) != 0).collect();
        let k = active.len();
        let dim = n + m + k;
        let mut lhs = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                lhs[(i, j)] = q[(i, j)];
            }
            rhs[i] = -c[i];
        }
        for r in 0..m {
            for j in 0..n {
                lhs[(j, n + r)] = a_eq[(r, j)];
                lhs[(n + r, j)] = a_eq[(r, j)];
            }
            rhs[n + r] = program.b_eq()[r];
        }
        for (t, &row) in active.iter().enumerate() {
            for j in 0..n {
                lhs[(j, n + m + t)] = -a_in[(row, j)];
                lhs[(n + m + t, j)] = a_in[(row, j)];
            }
            rhs[n + m + t] = program.b_in()[row];
        }
        let Some(sol) = lhs.lu().solve(&rhs) else { continue };
        if sol.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let x: Vec<f64> = sol.rows(0, n).iter().copied().collect();
        let y: Vec<f64> = sol.rows(n, m).iter().copied().collect();
        let mut w = vec![0.0; p];
        for (t, &row) in active.iter().enumerate() {
            w[row] = sol[n + m + t];
        }
        if w.iter().any(|&wi| wi < -tol) {
            continue;
        }
        let ax = a_in.mul_vec(&x);
        let scale = |b: f64| tol * (1.0 + b.abs());
        if ax.iter().zip(program.b_in()).any(|(&a, &b)| a < b - scale(b)) {
            continue;
        }
        let ex = a_eq.mul_vec(&x);
        if ex.iter().zip(program.b_eq()).any(|(&a, &b)| (a - b).abs() > scale(b)) {
            continue;
        }
        if found
            .iter()
            .any(|f| f.x.iter().zip(&x).all(|(a, b)| (a - b).abs() <= tol * (1.0 + b.abs())))
        {
            continue;
        }
        let objective = evaluate(program.objective(), &x)?;
        found.push(KktCandidate {
            x,
            y,
            w,
            objective,
            active,
        });
    }
    Ok(found)
}

/// Largest grid angle `α = j·step ≤ π/2` such that
/// `current − rate sin α' + second (1 − cos α') ≥ floor` at every grid point
/// `α' ≤ α`. Returns 0 when the start is already below the floor.
pub fn scan_alpha(current: f64, rate: f64, second: f64, floor: f64, step: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if current < floor {
        return 0.0;
    }
    let cells = (half_pi / step).floor() as usize;
    let g = |a: f64| current - rate * a.sin() + second * (1.0 - a.cos()) - floor;
    let mut last = 0.0;
    for j in 1..=cells {
        let a = j as f64 * step;
        if g(a) < 0.0 {
            return last;
        }
        last = a;
    }
    if g(half_pi) >= 0.0 {
        half_pi
    } else {
        last
    }
}
