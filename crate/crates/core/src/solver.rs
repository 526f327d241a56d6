//! The infeasible arc-search iteration.
//!
//! Each iteration evaluates `H` at the current `x`, solves the Newton system
//! for `v̇`, `p` and `q` with one factorization, picks `(σ, α)` and moves
//! along the arc. It stops when the norm of `(r_C, r_E, r_I, w − z, Zs)`
//! drops below `epsilon`.

use std::fmt;

use thiserror::Error;

use crate::arc::{select_step, update_nu, SelectionBranch};
use crate::autodiff::{evaluate, is_positive_semidefinite, EvalError};
use crate::kkt::{
    assemble_newton_matrix, kkt_norm, solve_directions, true_stationarity_norm, Iterate, KktError,
    Point,
};
use crate::linalg::{dot, min_entry, norm2, norm_inf, sub};
use crate::problem::ConvexProgram;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Stopping tolerance on the KKT norm.
    pub epsilon: T,
    /// Centrality: `s_i z_i ≥ θ μ`.
    pub theta: T,
    /// Positivity floor fraction `ρ` in `φ = min(ρ min s, ν)`.
    pub rho: T,
    pub sigma_min: T,
    pub sigma_max: T,
    /// Bisection stops once the σ-interval is this short.
    pub eps_bisection: T,
    /// Backtracking factor on `α`.
    pub backtrack: T,
    /// Smallest `α` tried before declaring a stall.
    pub alpha_floor: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            epsilon: lit(1e-6),
            theta: lit(1e-2),
            rho: lit(0.5),
            sigma_min: T::zero(),
            sigma_max: T::one(),
            eps_bisection: lit(1e-2),
            backtrack: lit(0.8),
            alpha_floor: lit(1e-8),
            max_iter: 500,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<(), SolveError> {
        let zero = T::zero();
        let one = T::one();
        let bad = |what: &'static str| Err(SolveError::InvalidConfig(what));
        if !(self.epsilon > zero) {
            return bad("epsilon must be positive");
        }
        if !(self.theta > zero && self.theta < one) {
            return bad("theta must lie in (0, 1)");
        }
        if !(self.rho > zero && self.rho < one) {
            return bad("rho must lie in (0, 1)");
        }
        if !(self.sigma_min >= zero && self.sigma_min < self.sigma_max && self.sigma_max <= one) {
            return bad("need 0 <= sigma_min < sigma_max <= 1");
        }
        if !(self.eps_bisection > zero && self.eps_bisection < one) {
            return bad("bisection tolerance must lie in (0, 1)");
        }
        if !(self.backtrack > zero && self.backtrack < one) {
            return bad("backtracking factor must lie in (0, 1)");
        }
        if !(self.alpha_floor > zero) {
            return bad("alpha floor must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIter,
    SingularKkt,
    StepFailure,
    /// The objective could not be evaluated at an accepted arc point.
    EvaluationFailure,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "Converged",
            Status::MaxIter => "MaxIter",
            Status::SingularKkt => "SingularKKT",
            Status::StepFailure => "StepFailure",
            Status::EvaluationFailure => "EvaluationFailure",
        })
    }
}

/// Problems detected before the first iteration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("start point: {0}")]
    InvalidStart(String),
    #[error("objective not defined at the start point: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Kkt(KktError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// `H` failed the positive-semidefinite test at this iteration.
    NonConvexHessian { iteration: usize },
    /// `ν` reached zero after a full step and was replaced by a tiny floor.
    ResidualsVanished { iteration: usize },
}

/// One row per iterate; row 0 is the start point. `sigma` and `alpha` are
/// the values that produced the row's iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    pub k: usize,
    pub mu: T,
    pub sigma: Option<T>,
    pub alpha: Option<T>,
    pub norm_rc: T,
    pub norm_re: T,
    pub norm_ri: T,
    pub nu: T,
    pub kkt_norm: T,
    pub true_stat_norm: T,
    pub min_sz_over_mu: T,
    pub min_s: T,
    pub min_z: T,
    /// `‖w − z‖ / max(‖z‖, 1)`.
    pub wz_gap: T,
    /// Componentwise approximate-KKT test: residual blocks and `μ` each
    /// below `epsilon`, `(w, s, z) > 0`.
    pub approx_kkt: bool,
}

/// Per-step record of the quantities behind each accepted move.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub k: usize,
    pub sigma: T,
    pub alpha: T,
    pub alpha_tilde: T,
    pub phi: T,
    pub psi: T,
    pub a_u: T,
    pub b_u: T,
    pub backtracks: usize,
    pub branch: SelectionBranch,
    pub mu_before: T,
    pub mu_after: T,
    /// `s̈ᵀz̈` at the chosen σ, `p_sᵀp_z`, `q_sᵀq_z`.
    pub cross_products: [T; 3],
    /// Scale for the cross products: `‖s̈‖‖z̈‖`, `‖p_s‖‖p_z‖`, `‖q_s‖‖q_z‖`.
    pub cross_scales: [T; 3],
    /// `max |(ẇ − ż) − (w − z)|`.
    pub fourth_block_error: T,
    /// Newton solve residuals for `v̇`, `p`, `q`.
    pub solve_residuals: [T; 3],
}

#[derive(Debug, Clone)]
pub struct SolverReport<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub iterations: usize,
    /// `‖A_E x − b_E‖`.
    pub infeasibility: T,
    pub status: Status,
    pub kkt_norm: T,
    pub final_point: Point<T>,
    pub trace: Vec<TraceRow<T>>,
    pub steps: Vec<StepRecord<T>>,
    pub warnings: Vec<Warning>,
    /// Message for non-converged runs.
    pub failure: Option<String>,
}

/// `y = 0`, `w = z = 100e`, `s = 0.01e`, and `x = x0` (zero when absent).
pub fn default_start<T: Scalar>(program: &ConvexProgram<T>, x0: Option<&[T]>) -> Point<T> {
    let (n, m, p) = (program.n(), program.m(), program.p());
    Point {
        x: x0.map(<[T]>::to_vec).unwrap_or_else(|| vec![T::zero(); n]),
        y: vec![T::zero(); m],
        w: vec![lit(100.0); p],
        s: vec![lit(0.01); p],
        z: vec![lit(100.0); p],
    }
}

fn trace_row<T: Scalar>(
    program: &ConvexProgram<T>,
    it: &Iterate<T>,
    k: usize,
    step: Option<(T, T)>,
    eps: T,
) -> TraceRow<T> {
    let (norm_rc, norm_re, norm_ri) = it.residuals.norms();
    let v = &it.point;
    let min_s = min_entry(&v.s);
    let min_z = min_entry(&v.z);
    let min_w = min_entry(&v.w);
    let approx_kkt = norm_inf(&it.residuals.r_c) <= eps
        && norm_inf(&it.residuals.r_e) <= eps
        && norm_inf(&it.residuals.r_i) <= eps
        && it.mu <= eps
        && min_s > T::zero()
        && min_z > T::zero()
        && min_w > T::zero();
    TraceRow {
        k,
        mu: it.mu,
        sigma: step.map(|s| s.0),
        alpha: step.map(|s| s.1),
        norm_rc,
        norm_re,
        norm_ri,
        nu: it.nu,
        kkt_norm: kkt_norm(it),
        true_stat_norm: true_stationarity_norm(program, it),
        min_sz_over_mu: it.centrality(),
        min_s,
        min_z,
        wz_gap: norm2(&sub(&v.w, &v.z)) / norm2(&v.z).max(T::one()),
        approx_kkt,
    }
}

fn check_start<T: Scalar>(program: &ConvexProgram<T>, start: &Point<T>) -> Result<(), SolveError> {
    let (n, m, p) = (program.n(), program.m(), program.p());
    let dims = [
        ("x", n, start.x.len()),
        ("y", m, start.y.len()),
        ("w", p, start.w.len()),
        ("s", p, start.s.len()),
        ("z", p, start.z.len()),
    ];
    for (what, expected, found) in dims {
        if expected != found {
            return Err(SolveError::InvalidStart(format!(
                "{what} has length {found}, expected {expected}"
            )));
        }
    }
    let positive = |v: &[T]| v.iter().all(|&c| c > T::zero());
    if !(positive(&start.w) && positive(&start.s) && positive(&start.z)) {
        return Err(SolveError::InvalidStart("w, s and z must be strictly positive".into()));
    }
    if start.w != start.z {
        return Err(SolveError::InvalidStart("w and z must be equal".into()));
    }
    Ok(())
}

/// Runs the iteration from `start` until the KKT norm is below
/// `config.epsilon`, the iteration limit is hit, or a step fails.
pub fn solve<T: Scalar>(
    program: &ConvexProgram<T>,
    config: &SolverConfig<T>,
    start: Point<T>,
) -> Result<SolverReport<T>, SolveError> {
    config.validate()?;
    check_start(program, &start)?;

    let mut iterate = Iterate::evaluate(program, start, T::one()).map_err(|e| match e {
        KktError::Eval(e) => SolveError::Eval(e),
        other => SolveError::Kkt(other),
    })?;
    let mut warnings = Vec::new();
    let mut trace = vec![trace_row(program, &iterate, 0, None, config.epsilon)];
    let mut steps = Vec::new();
    let mut k = 0;
    let mut failure = None;

    let status = loop {
        if !is_positive_semidefinite(&iterate.hessian) {
            warnings.push(Warning::NonConvexHessian { iteration: k });
        }
        if kkt_norm(&iterate) <= config.epsilon {
            break Status::Converged;
        }
        if k >= config.max_iter {
            break Status::MaxIter;
        }
        let v = &iterate.point;
        let matrix = assemble_newton_matrix(&iterate.hessian, program.a_eq(), program.a_in(), &v.s, &v.z);
        let dirs = match solve_directions(&matrix, &iterate) {
            Ok(d) => d,
            Err(e) => {
                failure = Some(e.to_string());
                break Status::SingularKkt;
            }
        };
        let sel = match select_step(&iterate, &dirs, config) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e.to_string());
                break Status::StepFailure;
            }
        };

        let sddot = dirs.second(sel.sigma);
        let fourth = v
            .w
            .iter()
            .zip(&v.z)
            .zip(dirs.vdot.w.iter().zip(&dirs.vdot.z))
            .fold(T::zero(), |acc, ((&w, &z), (&wd, &zd))| acc.max(((wd - zd) - (w - z)).abs()));
        steps.push(StepRecord {
            k,
            sigma: sel.sigma,
            alpha: sel.alpha,
            alpha_tilde: sel.alpha_tilde,
            phi: sel.phi,
            psi: sel.psi,
            a_u: sel.a_u,
            b_u: sel.b_u,
            backtracks: sel.backtrack_count,
            branch: sel.branch,
            mu_before: iterate.mu,
            mu_after: sel.mu_next,
            cross_products: [
                dot(&sddot.s, &sddot.z),
                dot(&dirs.p.s, &dirs.p.z),
                dot(&dirs.q.s, &dirs.q.z),
            ],
            cross_scales: [
                norm2(&sddot.s) * norm2(&sddot.z),
                norm2(&dirs.p.s) * norm2(&dirs.p.z),
                norm2(&dirs.q.s) * norm2(&dirs.q.z),
            ],
            fourth_block_error: fourth,
            solve_residuals: dirs.solve_residuals,
        });

        let (nu, vanished) = update_nu(iterate.nu, sel.alpha);
        if vanished {
            warnings.push(Warning::ResidualsVanished { iteration: k + 1 });
        }
        iterate = match Iterate::evaluate(program, sel.candidate, nu) {
            Ok(next) => next,
            Err(e) => {
                failure = Some(e.to_string());
                break Status::EvaluationFailure;
            }
        };
        k += 1;
        trace.push(trace_row(program, &iterate, k, Some((sel.sigma, sel.alpha)), config.epsilon));
    };

    let x = iterate.point.x.clone();
    let objective = evaluate(program.objective(), &x).unwrap_or(iterate.objective);
    let infeasibility = norm2(&sub(&program.a_eq().mul_vec(&x), program.b_eq()));
    Ok(SolverReport {
        objective,
        infeasibility,
        status,
        iterations: k,
        kkt_norm: kkt_norm(&iterate),
        x,
        final_point: iterate.point,
        trace,
        steps,
        warnings,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::problem::parse_expression;

    fn box_qp() -> ConvexProgram<f64> {
        // min x1^2 + x2^2  s.t.  x1 + x2 >= 2, x >= 0
        let names = ["x1".to_string(), "x2".to_string()];
        let f = parse_expression("x1^2 + x2^2", &names).unwrap();
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        ConvexProgram::new(2, f, Matrix::zeros(0, 2), vec![], a, vec![2.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn default_start_layout() {
        let prog = box_qp();
        let v = default_start(&prog, None);
        assert_eq!(v.x, vec![0.0, 0.0]);
        assert_eq!(v.w, vec![100.0; 3]);
        assert_eq!(v.s, vec![0.01; 3]);
        assert_eq!(v.w, v.z);
        let v = default_start(&prog, Some(&[3.0, 4.0]));
        assert_eq!(v.x, vec![3.0, 4.0]);
    }

    #[test]
    fn solves_small_qp() {
        let prog = box_qp();
        let rep = solve(&prog, &SolverConfig::default(), default_start(&prog, Some(&[3.0, 0.5]))).unwrap();
        assert_eq!(rep.status, Status::Converged, "{:?}", rep.failure);
        assert!((rep.x[0] - 1.0).abs() < 1e-5 && (rep.x[1] - 1.0).abs() < 1e-5, "{:?}", rep.x);
        assert_eq!(rep.trace.len(), rep.iterations + 1);
        assert!(rep.kkt_norm <= 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        let prog = box_qp();
        let mut start = default_start(&prog, None);
        start.z[0] = 1.0;
        assert!(matches!(
            solve(&prog, &SolverConfig::default(), start),
            Err(SolveError::InvalidStart(_))
        ));
        let cfg = SolverConfig {
            theta: 1.5,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve(&prog, &cfg, default_start(&prog, None)),
            Err(SolveError::InvalidConfig(_))
        ));
        let short = Point {
            x: vec![0.0],
            ..default_start(&prog, None)
        };
        assert!(solve(&prog, &SolverConfig::default(), short).is_err());
    }

    #[test]
    fn iteration_cap() {
        let prog = box_qp();
        let cfg = SolverConfig {
            max_iter: 2,
            ..SolverConfig::default()
        };
        let rep = solve(&prog, &cfg, default_start(&prog, None)).unwrap();
        assert_eq!(rep.status, Status::MaxIter);
        assert_eq!(rep.iterations, 2);
        assert_eq!(rep.trace.len(), 3);
    }
}
