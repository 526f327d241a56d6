use std::fmt;

use crate::scalar::Scalar;

/// Objective expression over variables `x[0..n]`.
///
/// Variables are stored zero-based; the textual form uses the names passed to
/// the parser.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Const(T),
    Var(usize),
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, Box<Expr<T>>),
    Pow(Box<Expr<T>>, Box<Expr<T>>),
    Neg(Box<Expr<T>>),
    Log(Box<Expr<T>>),
    Exp(Box<Expr<T>>),
}

impl<T: Scalar> Expr<T> {
    pub fn constant(v: T) -> Self {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Self, b: Self) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Self, b: Self) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Self, b: Self) -> Self {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Self, b: Self) -> Self {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Self, b: Self) -> Self {
        Expr::Pow(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Self) -> Self {
        Expr::Neg(Box::new(a))
    }

    pub fn log(a: Self) -> Self {
        Expr::Log(Box::new(a))
    }

    pub fn exp(a: Self) -> Self {
        Expr::Exp(Box::new(a))
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Neg(a) | Expr::Log(a) | Expr::Exp(a) => a.max_var(),
        }
    }

    /// True when no variable occurs in the subtree.
    pub fn is_constant(&self) -> bool {
        self.max_var().is_none()
    }

    /// Renders the expression with the given variable names, fully
    /// parenthesized so that re-parsing reproduces the same tree.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Named { expr: self, names }
    }
}

struct Named<'a, T> {
    expr: &'a Expr<T>,
    names: &'a [String],
}

impl<T: Scalar> Named<'_, T> {
    fn write(&self, e: &Expr<T>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bin = |f: &mut fmt::Formatter<'_>, a: &Expr<T>, op: &str, b: &Expr<T>| -> fmt::Result {
            f.write_str("(")?;
            self.write(a, f)?;
            write!(f, " {op} ")?;
            self.write(b, f)?;
            f.write_str(")")
        };
        match e {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "(-{})", c.abs())
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(i) => match self.names.get(*i) {
                Some(name) => f.write_str(name),
                None => write!(f, "x{}", i + 1),
            },
            Expr::Add(a, b) => bin(f, a, "+", b),
            Expr::Sub(a, b) => bin(f, a, "-", b),
            Expr::Mul(a, b) => bin(f, a, "*", b),
            Expr::Div(a, b) => bin(f, a, "/", b),
            Expr::Pow(a, b) => bin(f, a, "^", b),
            Expr::Neg(a) => {
                f.write_str("(-")?;
                self.write(a, f)?;
                f.write_str(")")
            }
            Expr::Log(a) => {
                f.write_str("log(")?;
                self.write(a, f)?;
                f.write_str(")")
            }
            Expr::Exp(a) => {
                f.write_str("exp(")?;
                self.write(a, f)?;
                f.write_str(")")
            }
        }
    }
}

impl<T: Scalar> fmt::Display for Named<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

impl<T: Scalar> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Named {
            expr: self,
            names: &[],
        }
        .fmt(f)
    }
}
