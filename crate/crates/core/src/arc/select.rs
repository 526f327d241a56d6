//! Joint choice of the centering parameter `σ` and the step angle `α`.

use thiserror::Error;

use super::limits::{alpha_tilde, for_each_limit};
use super::{arc_point, floors, mu_coefficients, mu_exact};
use crate::kkt::{Iterate, NewtonDirections, Point};
use crate::linalg::dot;
use crate::scalar::{lit, Scalar};
use crate::solver::SolverConfig;

/// Which rule produced `(σ, α̃)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionBranch {
    /// `ṡᵀp_z + żᵀp_s < 0`: `σ = 0`, `α̃` minimizes `b_u`.
    Affine,
    /// `σ` from bisection on the max-min step problem.
    Bisection,
}

#[derive(Debug, Clone)]
pub struct StepSelection<T> {
    pub sigma: T,
    pub alpha: T,
    pub alpha_tilde: T,
    pub a_u: T,
    pub b_u: T,
    pub phi: T,
    pub psi: T,
    pub backtrack_count: usize,
    pub branch: SelectionBranch,
    /// Accepted point `v(σ, α)`.
    pub candidate: Point<T>,
    /// `μ` at the accepted point.
    pub mu_next: T,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("step angle fell below {alpha_floor:e} after {backtracks} reductions (σ = {sigma}, α̃ = {alpha_tilde:e})")]
pub struct StepFailure {
    pub sigma: f64,
    pub alpha_tilde: f64,
    pub alpha_floor: f64,
    pub backtracks: usize,
}

/// Minimum limits over components whose `p`-coefficient is negative and
/// positive, plus the overall minimum.
struct SplitMinimum<T> {
    falling: T,
    rising: T,
    overall: T,
}

fn split_minimum<T: Scalar>(
    v: &Point<T>,
    dirs: &NewtonDirections<T>,
    phi: T,
    psi: T,
    sigma: T,
) -> SplitMinimum<T> {
    let inf = T::infinity();
    let mut out = SplitMinimum {
        falling: inf,
        rising: inf,
        overall: T::FRAC_PI_2(),
    };
    for_each_limit(v, dirs, phi, psi, sigma, |alpha, p_coef| {
        out.overall = out.overall.min(alpha);
        if p_coef < T::zero() {
            out.falling = out.falling.min(alpha);
        } else if p_coef > T::zero() {
            out.rising = out.rising.min(alpha);
        }
    });
    out
}

/// Bisection on `σ ∈ [σ_min, σ_max]` for `max_σ α̃(σ)`.
///
/// Limits of components with positive `p`-coefficient grow with `σ`, those
/// with negative coefficient shrink. While the shrinking side is still the
/// looser one (strictly), `σ` can grow; ties move the upper end down.
/// Returns the last midpoint and `α̃` there.
pub fn bisect_sigma<T: Scalar>(
    v: &Point<T>,
    dirs: &NewtonDirections<T>,
    phi: T,
    psi: T,
    sigma_min: T,
    sigma_max: T,
    eps: T,
) -> (T, T) {
    let half = lit::<T>(0.5);
    let (mut lb, mut ub) = (sigma_min, sigma_max);
    let mut sigma = lb + half * (ub - lb);
    let mut alpha = split_minimum(v, dirs, phi, psi, sigma).overall;
    while ub - lb > eps {
        sigma = lb + half * (ub - lb);
        let split = split_minimum(v, dirs, phi, psi, sigma);
        if split.falling > split.rising {
            lb = sigma;
        } else {
            ub = sigma;
        }
        alpha = split.overall;
    }
    (sigma, alpha)
}

/// Golden-section minimizer of `b_u(α)` on `[0, alpha_cap]` (interval
/// tolerance `1e-4`). The cap itself is returned when `b_u` is no larger
/// there than at the bracketed minimizer.
pub fn golden_min_bu<T: Scalar>(iterate: &Iterate<T>, dirs: &NewtonDirections<T>, alpha_cap: T) -> T {
    if !(alpha_cap > T::zero()) {
        return T::zero();
    }
    let b_u = |a: T| mu_coefficients(iterate, dirs, a).1;
    let tol = lit::<T>(1e-4);
    let inv_phi = (lit::<T>(5.0).sqrt() - T::one()) * lit(0.5);
    let (mut lo, mut hi) = (T::zero(), alpha_cap);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (b_u(c), b_u(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = b_u(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = b_u(d);
        }
    }
    let mid = (lo + hi) * lit(0.5);
    if b_u(alpha_cap) <= b_u(mid) {
        alpha_cap
    } else {
        mid
    }
}

/// Chooses `(σ_k, α_k)` and returns the accepted arc point.
///
/// `α̃` comes from the affine branch when `ṡᵀp_z + żᵀp_s < 0` and from
/// [`bisect_sigma`] otherwise. Starting at `α̃`, the angle is multiplied by
/// `config.backtrack` until the candidate satisfies `s ≥ φe`, `z ≥ ψe`,
/// `w > 0`, `s∘z ≥ θμ'e` and `μ' < μ`.
pub fn select_step<T: Scalar>(
    iterate: &Iterate<T>,
    dirs: &NewtonDirections<T>,
    config: &SolverConfig<T>,
) -> Result<StepSelection<T>, StepFailure> {
    let v = &iterate.point;
    let (phi, psi) = floors(&v.s, &v.z, iterate.nu, config.rho);
    let cross = dot(&dirs.vdot.s, &dirs.p.z) + dot(&dirs.vdot.z, &dirs.p.s);

    let (sigma, alpha_tilde, branch) = if cross < T::zero() {
        let cap = alpha_tilde(v, dirs, phi, psi, T::zero());
        (T::zero(), golden_min_bu(iterate, dirs, cap), SelectionBranch::Affine)
    } else {
        let (sigma, alpha) = bisect_sigma(
            v,
            dirs,
            phi,
            psi,
            config.sigma_min,
            config.sigma_max,
            config.eps_bisection,
        );
        (sigma, alpha, SelectionBranch::Bisection)
    };

    let mut alpha = alpha_tilde;
    let mut backtracks = 0;
    while alpha >= config.alpha_floor {
        let candidate = arc_point(v, dirs, sigma, alpha);
        let mu_next = mu_exact(&candidate);
        if acceptable(&candidate, phi, psi, config.theta, mu_next, iterate.mu) {
            let (a_u, b_u) = mu_coefficients(iterate, dirs, alpha);
            return Ok(StepSelection {
                sigma,
                alpha,
                alpha_tilde,
                a_u,
                b_u,
                phi,
                psi,
                backtrack_count: backtracks,
                branch,
                candidate,
                mu_next,
            });
        }
        alpha *= config.backtrack;
        backtracks += 1;
    }
    let f = |t: T| t.to_f64().unwrap_or(f64::NAN);
    Err(StepFailure {
        sigma: f(sigma),
        alpha_tilde: f(alpha_tilde),
        alpha_floor: f(config.alpha_floor),
        backtracks,
    })
}

fn acceptable<T: Scalar>(c: &Point<T>, phi: T, psi: T, theta: T, mu_next: T, mu: T) -> bool {
    if !(mu_next < mu) {
        return false;
    }
    let band = theta * mu_next;
    c.s.iter().all(|&s| s >= phi)
        && c.z.iter().all(|&z| z >= psi)
        && c.w.iter().all(|&w| w > T::zero())
        && c.s.iter().zip(&c.z).all(|(&s, &z)| s * z >= band)
}
