//! Closed-form step limits for a single slack or multiplier component.
//!
//! Along the arc a component follows
//!
//! ```text
//! g(α) = c − r sin α + d (1 − cos α),   c = current − floor,  d = p σ + q
//! ```
//!
//! and the limit is the largest `α ∈ [0, π/2]` with `g ≥ 0` on `[0, α]`. The
//! seven sign patterns of `(r, d)` each have a closed form; the same formulas
//! serve slacks (floor `φ`) and multipliers (floor `ψ`).

use crate::kkt::{NewtonDirections, Point};
use crate::scalar::Scalar;

/// Sign pattern of `(rate, second)`; the numbering follows the usual case
/// table (1: rate zero, 2: second zero, 3: both positive, 4: rate positive
/// and second negative, 5: both negative, 6: rate negative and second
/// positive, 7: both zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitCase {
    RateZero,
    SecondZero,
    BothPositive,
    RisingRateFallingSecond,
    BothNegative,
    FallingRateRisingSecond,
    BothZero,
}

impl LimitCase {
    pub fn number(self) -> u8 {
        match self {
            LimitCase::RateZero => 1,
            LimitCase::SecondZero => 2,
            LimitCase::BothPositive => 3,
            LimitCase::RisingRateFallingSecond => 4,
            LimitCase::BothNegative => 5,
            LimitCase::FallingRateRisingSecond => 6,
            LimitCase::BothZero => 7,
        }
    }
}

pub fn classify<T: Scalar>(rate: T, second: T) -> LimitCase {
    let zero = T::zero();
    match (rate == zero, second == zero) {
        (true, true) => LimitCase::BothZero,
        (true, false) => LimitCase::RateZero,
        (false, true) => LimitCase::SecondZero,
        (false, false) => match (rate > zero, second > zero) {
            (true, true) => LimitCase::BothPositive,
            (true, false) => LimitCase::RisingRateFallingSecond,
            (false, false) => LimitCase::BothNegative,
            (false, true) => LimitCase::FallingRateRisingSecond,
        },
    }
}

#[inline]
fn clamp_unit<T: Scalar>(v: T) -> T {
    v.max(-T::one()).min(T::one())
}

/// Limit and case for margin `c`, rate `r` and second-order coefficient `d`.
fn trajectory_limit<T: Scalar>(c: T, r: T, d: T) -> (T, LimitCase) {
    let case = classify(r, d);
    let half_pi = T::FRAC_PI_2();
    if c < T::zero() {
        return (T::zero(), case);
    }
    let zero = T::zero();
    let alpha = match case {
        LimitCase::RateZero => {
            if c + d >= zero {
                half_pi
            } else {
                clamp_unit((c + d) / d).acos()
            }
        }
        LimitCase::SecondZero => {
            if r <= c {
                half_pi
            } else {
                clamp_unit(c / r).asin()
            }
        }
        LimitCase::BothPositive => {
            let radius = r.hypot(d);
            if c + d >= radius {
                half_pi
            } else {
                let beta = clamp_unit(d / radius).asin();
                clamp_unit((c + d) / radius).asin() - beta
            }
        }
        LimitCase::RisingRateFallingSecond => {
            let radius = r.hypot(d);
            if c + d >= radius {
                half_pi
            } else {
                let beta = clamp_unit(-d / radius).asin();
                clamp_unit((c + d) / radius).asin() + beta
            }
        }
        LimitCase::BothNegative => {
            if c + d >= zero {
                half_pi
            } else {
                let radius = r.hypot(d);
                let beta = clamp_unit(-d / radius).asin();
                T::PI() - clamp_unit(-(c + d) / radius).asin() - beta
            }
        }
        LimitCase::FallingRateRisingSecond | LimitCase::BothZero => half_pi,
    };
    (alpha.max(zero).min(half_pi), case)
}

/// Largest `α ∈ [0, π/2]` such that
/// `current − rate·sin α' + (p_coef·σ + q_coef)(1 − cos α') ≥ floor` for all
/// `α' ∈ [0, α]`. Returns 0 when the component already sits below its floor.
pub fn component_alpha_limit<T: Scalar>(current: T, rate: T, p_coef: T, q_coef: T, floor: T, sigma: T) -> T {
    component_alpha_limit_with_case(current, rate, p_coef, q_coef, floor, sigma).0
}

pub fn component_alpha_limit_with_case<T: Scalar>(
    current: T,
    rate: T,
    p_coef: T,
    q_coef: T,
    floor: T,
    sigma: T,
) -> (T, LimitCase) {
    trajectory_limit(current - floor, rate, p_coef * sigma + q_coef)
}

/// Visits every component limit as `(alpha, p_coef)`: slacks against `phi`,
/// then multipliers against `psi`.
pub(crate) fn for_each_limit<T: Scalar>(
    v: &Point<T>,
    dirs: &NewtonDirections<T>,
    phi: T,
    psi: T,
    sigma: T,
    mut visit: impl FnMut(T, T),
) {
    let (d, p, q) = (&dirs.vdot, &dirs.p, &dirs.q);
    for i in 0..v.s.len() {
        visit(component_alpha_limit(v.s[i], d.s[i], p.s[i], q.s[i], phi, sigma), p.s[i]);
    }
    for i in 0..v.z.len() {
        visit(component_alpha_limit(v.z[i], d.z[i], p.z[i], q.z[i], psi, sigma), p.z[i]);
    }
}

/// `α̃(σ) = min(min_i α_{s_i}, min_i α_{z_i})`.
pub fn alpha_tilde<T: Scalar>(v: &Point<T>, dirs: &NewtonDirections<T>, phi: T, psi: T, sigma: T) -> T {
    let mut out = T::FRAC_PI_2();
    for_each_limit(v, dirs, phi, psi, sigma, |a, _| out = out.min(a));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    #[test]
    fn flat_trajectory_is_unbounded() {
        let (a, case) = component_alpha_limit_with_case(1.0, 0.0, 0.0, 0.0, 0.5, 0.3);
        assert_eq!(case, LimitCase::BothZero);
        assert_eq!(a, FRAC_PI_2);
    }

    #[test]
    fn rising_trajectory_is_unbounded() {
        let (a, case) = component_alpha_limit_with_case(1.0, -1.0, 0.0, 1.0, 0.5, 0.0);
        assert_eq!(case, LimitCase::FallingRateRisingSecond);
        assert_eq!(a, FRAC_PI_2);
    }

    #[test]
    fn linear_descent_hits_floor_at_pi_over_six() {
        let (a, case) = component_alpha_limit_with_case(1.0, 1.0, 0.0, 0.0, 0.5, 0.0);
        assert_eq!(case, LimitCase::SecondZero);
        assert!((a - FRAC_PI_6).abs() < 1e-15);
    }

    #[test]
    fn below_floor_gives_zero() {
        assert_eq!(component_alpha_limit(0.4, -1.0, 0.0, 1.0, 0.5, 0.0), 0.0);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(0.0, -1.0), LimitCase::RateZero);
        assert_eq!(classify(1.0, 0.0), LimitCase::SecondZero);
        assert_eq!(classify(1.0, 1.0), LimitCase::BothPositive);
        assert_eq!(classify(1.0, -1.0), LimitCase::RisingRateFallingSecond);
        assert_eq!(classify(-1.0, -1.0), LimitCase::BothNegative);
        assert_eq!(classify(-1.0, 1.0), LimitCase::FallingRateRisingSecond);
        assert_eq!(classify(0.0, 0.0), LimitCase::BothZero);
        assert_eq!(LimitCase::BothNegative.number(), 5);
    }

    #[test]
    fn single_precision() {
        let a = component_alpha_limit(1.0f32, 1.0, 0.0, 0.0, 0.5, 0.0);
        assert!((a - std::f32::consts::FRAC_PI_6).abs() < 1e-6);
    }
}
