//! Searching along the ellipsoidal arc
//!
//! `v(σ, α) = v − v̇ sin α + v̈(σ)(1 − cos α)` with `v̈(σ) = pσ + q`.
//!
//! This module holds the arc itself, the residual-shrink factor `ν`, the
//! positivity floors `(φ, ψ)`, the duality-measure coefficients `(a_u, b_u)`,
//! the closed-form per-component step limits ([`limits`]) and the joint
//! selection of the centering parameter and the step ([`select`]).

pub mod limits;
pub mod select;

use crate::kkt::{Iterate, NewtonDirections, Point};
use crate::linalg::{dot, min_entry};
use crate::scalar::{from_usize, Scalar};

pub use limits::{alpha_tilde, classify, component_alpha_limit, component_alpha_limit_with_case, LimitCase};
pub use select::{
    bisect_sigma, golden_min_bu, select_step, SelectionBranch, StepFailure, StepSelection,
};

/// Point on the arc through `v` at angle `alpha` for centering `sigma`.
pub fn arc_point<T: Scalar>(v: &Point<T>, dirs: &NewtonDirections<T>, sigma: T, alpha: T) -> Point<T> {
    let sin = alpha.sin();
    let one_minus_cos = T::one() - alpha.cos();
    let step = |base: &[T], d1: &[T], p: &[T], q: &[T]| -> Vec<T> {
        base.iter()
            .zip(d1)
            .zip(p.iter().zip(q))
            .map(|((&b, &d), (&pp, &qq))| b - d * sin + (pp * sigma + qq) * one_minus_cos)
            .collect()
    };
    let (d, p, q) = (&dirs.vdot, &dirs.p, &dirs.q);
    Point {
        x: step(&v.x, &d.x, &p.x, &q.x),
        y: step(&v.y, &d.y, &p.y, &q.y),
        w: step(&v.w, &d.w, &p.w, &q.w),
        s: step(&v.s, &d.s, &p.s, &q.s),
        z: step(&v.z, &d.z, &p.z, &q.z),
    }
}

/// `ν (1 − sin α)`. When the product underflows to zero (a full step at
/// `α = π/2`) the smallest positive normal value is returned together with
/// `true`.
pub fn update_nu<T: Scalar>(nu: T, alpha: T) -> (T, bool) {
    let next = nu * (T::one() - alpha.sin());
    if next > T::zero() {
        (next, false)
    } else {
        (T::min_positive_value(), true)
    }
}

/// `φ = min(ρ min s, ν)`, `ψ = min(ρ min z, ν)`.
pub fn floors<T: Scalar>(s: &[T], z: &[T], nu: T, rho: T) -> (T, T) {
    ((rho * min_entry(s)).min(nu), (rho * min_entry(z)).min(nu))
}

/// Coefficients of the predicted duality measure `p μ(σ, α) ≈ a_u σ + b_u`:
///
/// ```text
/// a_u = pμ(1 − cos α) − (żᵀp_s + ṡᵀp_z) sin α (1 − cos α)
/// b_u = pμ(1 − sin α) − [żᵀṡ (1 − cos α)² + (ṡᵀq_z + żᵀq_s) sin α (1 − cos α)]
/// ```
///
/// The exact product differs by `s̈ᵀz̈ (1 − cos α)²`, see [`mu_exact`].
pub fn mu_coefficients<T: Scalar>(iterate: &Iterate<T>, dirs: &NewtonDirections<T>, alpha: T) -> (T, T) {
    let pmu = from_usize::<T>(iterate.p()) * iterate.mu;
    let d = &dirs.vdot;
    let sin = alpha.sin();
    let c = T::one() - alpha.cos();
    let a_u = pmu * c - (dot(&d.z, &dirs.p.s) + dot(&d.s, &dirs.p.z)) * sin * c;
    let b_u = pmu * (T::one() - sin)
        - (dot(&d.z, &d.s) * c * c + (dot(&d.s, &dirs.q.z) + dot(&d.z, &dirs.q.s)) * sin * c);
    (a_u, b_u)
}

/// `sᵀz / p` at a candidate point.
pub fn mu_exact<T: Scalar>(candidate: &Point<T>) -> T {
    dot(&candidate.s, &candidate.z) / from_usize(candidate.s.len())
}
