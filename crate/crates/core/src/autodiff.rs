//! Second-order forward-mode differentiation of objective expressions.
//!
//! A [`SecondOrderValue`] carries `f(x + t d)` truncated after the quadratic
//! term: the value, the directional derivative `∇f·d` and the second
//! directional derivative `dᵀ∇²f d`. The Hessian is recovered from `n(n+1)/2`
//! directional passes: diagonal entries from the unit directions and
//! off-diagonal entries by polarization over `e_i + e_j`.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::linalg::Matrix;
use crate::problem::Expr;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log of non-positive argument {0}")]
    LogOfNonPositive(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero raised to negative power {0}")]
    ZeroToNegativePower(f64),
    #[error("negative base {base} raised to non-integer power {exponent}")]
    NegativeBaseFractionalPower { base: f64, exponent: f64 },
    #[error("non-finite value produced at the evaluation point")]
    NonFinite,
    #[error("point has {found} coordinates, expression needs {needed}")]
    Dimension { needed: usize, found: usize },
}

fn as_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Truncated second-order Taylor scalar along a fixed direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderValue<T> {
    pub value: T,
    pub first: T,
    pub second: T,
}

impl<T: Scalar> SecondOrderValue<T> {
    pub fn constant(value: T) -> Self {
        Self {
            value,
            first: T::zero(),
            second: T::zero(),
        }
    }

    /// Coordinate `value` moving with slope `first` along the direction.
    pub fn variable(value: T, first: T) -> Self {
        Self {
            value,
            first,
            second: T::zero(),
        }
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    fn chain(self, g: T, dg: T, d2g: T) -> Self {
        Self {
            value: g,
            first: dg * self.first,
            second: d2g * self.first * self.first + dg * self.second,
        }
    }

    fn finite(self) -> Result<Self, EvalError> {
        if self.value.is_finite() && self.first.is_finite() && self.second.is_finite() {
            Ok(self)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    pub fn recip(self) -> Result<Self, EvalError> {
        let u = self.value;
        if u == T::zero() {
            return Err(EvalError::DivisionByZero);
        }
        let r = u.recip();
        self.chain(r, -r * r, lit::<T>(2.0) * r * r * r).finite()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, rhs: Self) -> Result<Self, EvalError> {
        Ok(self * rhs.recip()?).and_then(Self::finite)
    }

    pub fn ln(self) -> Result<Self, EvalError> {
        let u = self.value;
        if !(u > T::zero()) {
            return Err(EvalError::LogOfNonPositive(as_f64(u)));
        }
        let r = u.recip();
        self.chain(u.ln(), r, -r * r).finite()
    }

    pub fn exp(self) -> Result<Self, EvalError> {
        let e = self.value.exp();
        self.chain(e, e, e).finite()
    }

    /// `self^c` for a constant real exponent.
    pub fn powf(self, c: T) -> Result<Self, EvalError> {
        let u = self.value;
        if c == T::zero() {
            return Ok(Self::constant(T::one()));
        }
        if c == T::one() {
            return Ok(self);
        }
        if u < T::zero() && c.fract() != T::zero() {
            return Err(EvalError::NegativeBaseFractionalPower {
                base: as_f64(u),
                exponent: as_f64(c),
            });
        }
        if u == T::zero() && c < T::zero() {
            return Err(EvalError::ZeroToNegativePower(as_f64(c)));
        }
        let one = T::one();
        let two = lit::<T>(2.0);
        let g = u.powf(c);
        let dg = c * u.powf(c - one);
        let d2g = if c == two {
            two
        } else {
            c * (c - one) * u.powf(c - two)
        };
        self.chain(g, dg, d2g).finite()
    }

    /// `self^e` for a non-constant exponent, via `exp(e ln self)`.
    pub fn pow(self, e: Self) -> Result<Self, EvalError> {
        (e * self.ln()?).exp()
    }
}

impl<T: Scalar> Add for SecondOrderValue<T> {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self {
            value: self.value + r.value,
            first: self.first + r.first,
            second: self.second + r.second,
        }
    }
}

impl<T: Scalar> Sub for SecondOrderValue<T> {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self {
            value: self.value - r.value,
            first: self.first - r.first,
            second: self.second - r.second,
        }
    }
}

impl<T: Scalar> Mul for SecondOrderValue<T> {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        Self {
            value: self.value * r.value,
            first: self.first * r.value + self.value * r.first,
            second: self.second * r.value
                + lit::<T>(2.0) * self.first * r.first
                + self.value * r.second,
        }
    }
}

impl<T: Scalar> Neg for SecondOrderValue<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            value: -self.value,
            first: -self.first,
            second: -self.second,
        }
    }
}

fn check_dim<T: Scalar>(expr: &Expr<T>, x: &[T]) -> Result<(), EvalError> {
    match expr.max_var() {
        Some(i) if i >= x.len() => Err(EvalError::Dimension {
            needed: i + 1,
            found: x.len(),
        }),
        _ => Ok(()),
    }
}

/// Propagates a second-order value through the tree along direction `dir`.
pub fn eval_directional<T: Scalar>(
    expr: &Expr<T>,
    x: &[T],
    dir: &[T],
) -> Result<SecondOrderValue<T>, EvalError> {
    check_dim(expr, x)?;
    jet(expr, x, dir)
}

fn jet<T: Scalar>(expr: &Expr<T>, x: &[T], dir: &[T]) -> Result<SecondOrderValue<T>, EvalError> {
    type V<T> = SecondOrderValue<T>;
    let out = match expr {
        Expr::Const(c) => V::constant(*c),
        Expr::Var(i) => V::variable(x[*i], dir[*i]),
        Expr::Add(a, b) => jet(a, x, dir)? + jet(b, x, dir)?,
        Expr::Sub(a, b) => jet(a, x, dir)? - jet(b, x, dir)?,
        Expr::Mul(a, b) => jet(a, x, dir)? * jet(b, x, dir)?,
        Expr::Div(a, b) => jet(a, x, dir)?.div(jet(b, x, dir)?)?,
        Expr::Neg(a) => -jet(a, x, dir)?,
        Expr::Log(a) => jet(a, x, dir)?.ln()?,
        Expr::Exp(a) => jet(a, x, dir)?.exp()?,
        Expr::Pow(a, b) => {
            let base = jet(a, x, dir)?;
            if b.is_constant() {
                base.powf(evaluate(b, x)?)?
            } else {
                base.pow(jet(b, x, dir)?)?
            }
        }
    };
    out.finite()
}

/// `f(x)`.
pub fn evaluate<T: Scalar>(expr: &Expr<T>, x: &[T]) -> Result<T, EvalError> {
    check_dim(expr, x)?;
    value(expr, x)
}

fn value<T: Scalar>(expr: &Expr<T>, x: &[T]) -> Result<T, EvalError> {
    let v = match expr {
        Expr::Const(c) => *c,
        Expr::Var(i) => x[*i],
        Expr::Add(a, b) => value(a, x)? + value(b, x)?,
        Expr::Sub(a, b) => value(a, x)? - value(b, x)?,
        Expr::Mul(a, b) => value(a, x)? * value(b, x)?,
        Expr::Div(a, b) => {
            let d = value(b, x)?;
            if d == T::zero() {
                return Err(EvalError::DivisionByZero);
            }
            value(a, x)? / d
        }
        Expr::Neg(a) => -value(a, x)?,
        Expr::Log(a) => {
            let u = value(a, x)?;
            if !(u > T::zero()) {
                return Err(EvalError::LogOfNonPositive(as_f64(u)));
            }
            u.ln()
        }
        Expr::Exp(a) => value(a, x)?.exp(),
        Expr::Pow(a, b) => {
            let u = value(a, x)?;
            let c = value(b, x)?;
            if u < T::zero() && c.fract() != T::zero() {
                return Err(EvalError::NegativeBaseFractionalPower {
                    base: as_f64(u),
                    exponent: as_f64(c),
                });
            }
            if u == T::zero() && c < T::zero() {
                return Err(EvalError::ZeroToNegativePower(as_f64(c)));
            }
            if !b.is_constant() && !(u > T::zero()) {
                return Err(EvalError::LogOfNonPositive(as_f64(u)));
            }
            u.powf(c)
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// `∇f(x)` from `n` directional passes.
pub fn gradient<T: Scalar>(expr: &Expr<T>, x: &[T]) -> Result<Vec<T>, EvalError> {
    check_dim(expr, x)?;
    let n = x.len();
    let mut dir = vec![T::zero(); n];
    let mut g = Vec::with_capacity(n);
    for i in 0..n {
        dir[i] = T::one();
        g.push(jet(expr, x, &dir)?.first);
        dir[i] = T::zero();
    }
    Ok(g)
}

/// Value, gradient and Hessian from `n(n+1)/2` directional passes.
///
/// The Hessian is exactly symmetric: each cross term is computed once and
/// written to both triangles.
pub fn value_gradient_hessian<T: Scalar>(
    expr: &Expr<T>,
    x: &[T],
) -> Result<(T, Vec<T>, Matrix<T>), EvalError> {
    check_dim(expr, x)?;
    let n = x.len();
    let mut dir = vec![T::zero(); n];
    let mut grad = vec![T::zero(); n];
    let mut h = Matrix::zeros(n, n);
    let mut f = value(expr, x)?;
    for i in 0..n {
        dir[i] = T::one();
        let v = jet(expr, x, &dir)?;
        dir[i] = T::zero();
        f = v.value;
        grad[i] = v.first;
        h[(i, i)] = v.second;
    }
    let half = lit::<T>(0.5);
    for i in 0..n {
        for j in i + 1..n {
            dir[i] = T::one();
            dir[j] = T::one();
            let v = jet(expr, x, &dir)?;
            dir[i] = T::zero();
            dir[j] = T::zero();
            let hij = half * (v.second - h[(i, i)] - h[(j, j)]);
            h[(i, j)] = hij;
            h[(j, i)] = hij;
        }
    }
    Ok((f, grad, h))
}

/// `∇²f(x)`.
pub fn hessian<T: Scalar>(expr: &Expr<T>, x: &[T]) -> Result<Matrix<T>, EvalError> {
    value_gradient_hessian(expr, x).map(|(_, _, h)| h)
}

/// Cholesky test of `h + δI` with `δ = 1e-10·max(1, max|h_ij|)`.
pub fn is_positive_semidefinite<T: Scalar>(h: &Matrix<T>) -> bool {
    let n = h.rows();
    let delta = lit::<T>(1e-10) * h.max_abs().max(T::one());
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)] + delta;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut v = h[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / d;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_expression;

    fn parse(s: &str, n: usize) -> Expr<f64> {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        parse_expression(s, &names).unwrap()
    }

    const EX1: &str = "-(5*log(x1) - x1 + 7) - (7*log(x2) - x2 + 8)";

    #[test]
    fn evaluates_reference_objectives() {
        assert_eq!(evaluate(&parse(EX1, 2), &[1.0, 1.0]).unwrap(), -13.0);
        assert_eq!(evaluate(&parse("x1", 1), &[3.0]).unwrap(), 3.0);
        let ex2 = parse("(5*exp(x1) + 7) + (7*exp(x2) + 8)", 2);
        assert!((evaluate(&ex2, &[2.0, 1.0]).unwrap() - 70.9733).abs() < 1e-4);
    }

    #[test]
    fn gradients() {
        assert_eq!(gradient(&parse("x1^2 + x2^2", 2), &[1.0, 2.0]).unwrap(), vec![2.0, 4.0]);
        assert_eq!(gradient(&parse("log(x1)", 1), &[2.0]).unwrap(), vec![0.5]);
        // central differences h = 1e-6 give (-4, -6) for the log objective
        let g = gradient(&parse(EX1, 2), &[1.0, 1.0]).unwrap();
        assert!((g[0] + 4.0).abs() < 1e-6 && (g[1] + 6.0).abs() < 1e-6);
    }

    #[test]
    fn hessians() {
        let h = hessian(&parse(EX1, 2), &[1.0, 1.0]).unwrap();
        assert!((h[(0, 0)] - 5.0).abs() < 1e-12 && (h[(1, 1)] - 7.0).abs() < 1e-12);
        assert!(h[(0, 1)].abs() < 1e-12);

        let h = hessian(&parse("x1*x2", 2), &[0.3, -1.7]).unwrap();
        assert_eq!(h.as_slice(), &[0.0, 1.0, 1.0, 0.0]);

        let h = hessian(&parse("(5*x1)^2 / (7*x2)", 2), &[5.0, 5.0]).unwrap();
        assert!((h[(0, 0)] - 10.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn domain_errors_are_not_nan() {
        assert!(matches!(
            evaluate(&parse("log(x1)", 1), &[0.0]),
            Err(EvalError::LogOfNonPositive(_))
        ));
        assert_eq!(evaluate(&parse("1/x1", 1), &[0.0]), Err(EvalError::DivisionByZero));
        assert!(matches!(
            evaluate(&parse("x1^-1", 1), &[0.0]),
            Err(EvalError::ZeroToNegativePower(_))
        ));
        assert!(matches!(
            evaluate(&parse("x1^0.5", 1), &[-1.0]),
            Err(EvalError::NegativeBaseFractionalPower { .. })
        ));
        assert!(gradient(&parse("log(x1)", 1), &[-1.0]).is_err());
        assert!(hessian(&parse("1/x1", 1), &[0.0]).is_err());
        // derivative of sqrt blows up at zero
        assert_eq!(gradient(&parse("x1^0.5", 1), &[0.0]), Err(EvalError::NonFinite));
        assert!(matches!(
            evaluate(&parse("x2", 2), &[1.0]),
            Err(EvalError::Dimension { needed: 2, found: 1 })
        ));
    }

    #[test]
    fn integer_powers_of_negative_bases() {
        let e = parse("x1^3", 1);
        assert_eq!(evaluate(&e, &[-2.0]).unwrap(), -8.0);
        assert_eq!(gradient(&e, &[-2.0]).unwrap(), vec![12.0]);
        assert_eq!(hessian(&e, &[-2.0]).unwrap()[(0, 0)], -12.0);
    }

    #[test]
    fn variable_exponent() {
        let e = parse("x1^x2", 2);
        let (f, g, h) = value_gradient_hessian(&e, &[2.0, 3.0]).unwrap();
        let ln2 = 2f64.ln();
        assert!((f - 8.0).abs() < 1e-12);
        assert!((g[0] - 12.0).abs() < 1e-12);
        assert!((g[1] - 8.0 * ln2).abs() < 1e-12);
        assert!((h[(0, 0)] - 12.0).abs() < 1e-12);
        assert!((h[(1, 1)] - 8.0 * ln2 * ln2).abs() < 1e-12);
        assert!((h[(0, 1)] - (4.0 + 12.0 * ln2)).abs() < 1e-11);
    }

    #[test]
    fn psd_check() {
        assert!(is_positive_semidefinite(&Matrix::<f64>::identity(3)));
        let h = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], 2).unwrap();
        assert!(!is_positive_semidefinite(&h));
        assert!(is_positive_semidefinite(&Matrix::<f64>::zeros(2, 2)));
    }

    #[test]
    fn works_in_single_precision() {
        let names = ["x1".to_string()];
        let e: Expr<f32> = parse_expression("x1^3 + exp(x1)", &names).unwrap();
        let g = gradient(&e, &[1.0f32]).unwrap();
        assert!((g[0] - (3.0 + 1f32.exp())).abs() < 1e-5);
    }
}
