//! Residuals, duality measure and the primal-dual Newton system.
//!
//! The unknown vector is ordered `(x, y, w, s, z)` with sizes `(n, m, p, p, p)`
//! and the Newton matrix has the block rows
//!
//! ```text
//! [ H    A_Eᵀ  -A_Iᵀ   0    0 ]
//! [ A_E  0      0      0    0 ]
//! [ A_I  0      0     -I    0 ]
//! [ 0    0      I      0   -I ]
//! [ 0    0      0      Z    S ]
//! ```
//!
//! One factorization per iteration serves three right-hand sides: the
//! first-order direction and the two halves `p`, `q` of the second-order
//! direction `v̈(σ) = pσ + q`.

use thiserror::Error;

use crate::autodiff::{value_gradient_hessian, EvalError};
use crate::linalg::{dot, hadamard, norm2, sub, Lu, Matrix};
use crate::problem::ConvexProgram;
use crate::scalar::{from_usize, lit, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KktError {
    #[error("{what}: expected length {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("duality measure needs at least one complementarity pair")]
    NoComplementarity,
    #[error("Newton matrix is singular to working precision (column {column}, pivot {pivot:e}, threshold {threshold:e})")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A point `v = (x, y, w, s, z)` or a direction in the same space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub w: Vec<T>,
    pub s: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Scalar> Point<T> {
    pub fn zeros(n: usize, m: usize, p: usize) -> Self {
        Self {
            x: vec![T::zero(); n],
            y: vec![T::zero(); m],
            w: vec![T::zero(); p],
            s: vec![T::zero(); p],
            z: vec![T::zero(); p],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.x.len(), self.y.len(), self.s.len())
    }

    /// Stacked `(x, y, w, s, z)`.
    pub fn to_stacked(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.x.len() + self.y.len() + 3 * self.s.len());
        for block in [&self.x, &self.y, &self.w, &self.s, &self.z] {
            v.extend_from_slice(block);
        }
        v
    }

    pub fn from_stacked(v: &[T], n: usize, m: usize, p: usize) -> Self {
        assert_eq!(v.len(), n + m + 3 * p);
        let mut at = 0;
        let mut take = |len: usize| {
            let out = v[at..at + len].to_vec();
            at += len;
            out
        };
        Self {
            x: take(n),
            y: take(m),
            w: take(p),
            s: take(p),
            z: take(p),
        }
    }

    /// `a·self + b·other`, blockwise.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        let lin = |u: &[T], v: &[T]| -> Vec<T> { u.iter().zip(v).map(|(&p, &q)| a * p + b * q).collect() };
        Self {
            x: lin(&self.x, &other.x),
            y: lin(&self.y, &other.y),
            w: lin(&self.w, &other.w),
            s: lin(&self.s, &other.s),
            z: lin(&self.z, &other.z),
        }
    }
}

/// `(r_C, r_E, r_I)`, with `r_C` built from `H x` rather than `∇f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals<T> {
    pub r_c: Vec<T>,
    pub r_e: Vec<T>,
    pub r_i: Vec<T>,
}

impl<T: Scalar> Residuals<T> {
    pub fn norms(&self) -> (T, T, T) {
        (norm2(&self.r_c), norm2(&self.r_e), norm2(&self.r_i))
    }
}

/// Current primal-dual point with the quantities evaluated at it.
#[derive(Debug, Clone)]
pub struct Iterate<T> {
    pub point: Point<T>,
    pub objective: T,
    pub gradient: Vec<T>,
    pub hessian: Matrix<T>,
    pub residuals: Residuals<T>,
    pub mu: T,
    pub nu: T,
}

impl<T: Scalar> Iterate<T> {
    /// Evaluates `f`, `∇f`, `H`, the residuals and `μ` at `point`.
    pub fn evaluate(program: &ConvexProgram<T>, point: Point<T>, nu: T) -> Result<Self, KktError> {
        let (n, m, p) = (program.n(), program.m(), program.p());
        let dims_ok = [
            ("x", n, point.x.len()),
            ("y", m, point.y.len()),
            ("w", p, point.w.len()),
            ("s", p, point.s.len()),
            ("z", p, point.z.len()),
        ];
        for (what, expected, found) in dims_ok {
            if expected != found {
                return Err(KktError::Dimension {
                    what,
                    expected,
                    found,
                });
            }
        }
        let (objective, gradient, hessian) = value_gradient_hessian(program.objective(), &point.x)?;
        let residuals = compute_residuals(program, &hessian, &point.x, &point.y, &point.w, &point.s)?;
        let mu = duality_measure(&point.s, &point.z)?;
        Ok(Self {
            point,
            objective,
            gradient,
            hessian,
            residuals,
            mu,
            nu,
        })
    }

    pub fn p(&self) -> usize {
        self.point.s.len()
    }

    /// `min_i s_i z_i / μ`.
    pub fn centrality(&self) -> T {
        let worst = self
            .point
            .s
            .iter()
            .zip(&self.point.z)
            .fold(T::infinity(), |acc, (&s, &z)| acc.min(s * z));
        worst / self.mu
    }
}

/// `r_C = H x + A_Eᵀ y − A_Iᵀ w`, `r_E = A_E x − b_E`, `r_I = A_I x − s − b_I`.
pub fn compute_residuals<T: Scalar>(
    program: &ConvexProgram<T>,
    h: &Matrix<T>,
    x: &[T],
    y: &[T],
    w: &[T],
    s: &[T],
) -> Result<Residuals<T>, KktError> {
    let (n, m, p) = (program.n(), program.m(), program.p());
    for (what, expected, found) in [
        ("x", n, x.len()),
        ("y", m, y.len()),
        ("w", p, w.len()),
        ("s", p, s.len()),
        ("Hessian rows", n, h.rows()),
        ("Hessian columns", n, h.cols()),
    ] {
        if expected != found {
            return Err(KktError::Dimension {
                what,
                expected,
                found,
            });
        }
    }
    let hx = h.mul_vec(x);
    let aey = program.a_eq().tr_mul_vec(y);
    let aiw = program.a_in().tr_mul_vec(w);
    let r_c = (0..n).map(|i| hx[i] + aey[i] - aiw[i]).collect();
    let r_e = sub(&program.a_eq().mul_vec(x), program.b_eq());
    let aix = program.a_in().mul_vec(x);
    let r_i = (0..p).map(|i| aix[i] - s[i] - program.b_in()[i]).collect();
    Ok(Residuals { r_c, r_e, r_i })
}

/// `μ = sᵀz / p`.
pub fn duality_measure<T: Scalar>(s: &[T], z: &[T]) -> Result<T, KktError> {
    if s.is_empty() {
        return Err(KktError::NoComplementarity);
    }
    if s.len() != z.len() {
        return Err(KktError::Dimension {
            what: "z",
            expected: s.len(),
            found: z.len(),
        });
    }
    Ok(dot(s, z) / from_usize(s.len()))
}

/// Euclidean norm of `(r_C, r_E, r_I, w − z, Z s)`.
pub fn kkt_norm<T: Scalar>(iterate: &Iterate<T>) -> T {
    let r = &iterate.residuals;
    let v = &iterate.point;
    let sq = |a: &[T]| dot(a, a);
    let wz = sub(&v.w, &v.z);
    let zs = hadamard(&v.z, &v.s);
    (sq(&r.r_c) + sq(&r.r_e) + sq(&r.r_i) + sq(&wz) + sq(&zs)).sqrt()
}

/// `‖∇f(x) + A_Eᵀ y − A_Iᵀ w‖`, the stationarity residual with the true
/// gradient. Diagnostic only.
pub fn true_stationarity_norm<T: Scalar>(program: &ConvexProgram<T>, iterate: &Iterate<T>) -> T {
    let aey = program.a_eq().tr_mul_vec(&iterate.point.y);
    let aiw = program.a_in().tr_mul_vec(&iterate.point.w);
    let r: Vec<T> = (0..program.n())
        .map(|i| iterate.gradient[i] + aey[i] - aiw[i])
        .collect();
    norm2(&r)
}

/// Dense Newton matrix of side `n + m + 3p`.
pub fn assemble_newton_matrix<T: Scalar>(
    h: &Matrix<T>,
    a_eq: &Matrix<T>,
    a_in: &Matrix<T>,
    s: &[T],
    z: &[T],
) -> Matrix<T> {
    let n = h.rows();
    let m = a_eq.rows();
    let p = a_in.rows();
    let dim = n + m + 3 * p;
    let (cx, cy, cw, cs, cz) = (0, n, n + m, n + m + p, n + m + 2 * p);
    let mut k = Matrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            k[(i, cx + j)] = h[(i, j)];
        }
        for j in 0..m {
            k[(i, cy + j)] = a_eq[(j, i)];
        }
        for j in 0..p {
            k[(i, cw + j)] = -a_in[(j, i)];
        }
    }
    for r in 0..m {
        for j in 0..n {
            k[(n + r, cx + j)] = a_eq[(r, j)];
        }
    }
    let one = T::one();
    for r in 0..p {
        let row = n + m + r;
        for j in 0..n {
            k[(row, cx + j)] = a_in[(r, j)];
        }
        k[(row, cs + r)] = -one;

        let row = n + m + p + r;
        k[(row, cw + r)] = one;
        k[(row, cz + r)] = -one;

        let row = n + m + 2 * p + r;
        k[(row, cs + r)] = z[r];
        k[(row, cz + r)] = s[r];
    }
    k
}

/// First-order direction `v̇` and the split second-order pieces `p`, `q`.
#[derive(Debug, Clone)]
pub struct NewtonDirections<T> {
    pub vdot: Point<T>,
    pub p: Point<T>,
    pub q: Point<T>,
    /// `‖M d − b‖` for the three solves, in the order `v̇, p, q`.
    pub solve_residuals: [T; 3],
}

impl<T: Scalar> NewtonDirections<T> {
    /// `v̈(σ) = pσ + q`.
    pub fn second(&self, sigma: T) -> Point<T> {
        self.p.combine(sigma, &self.q, T::one())
    }
}

/// Right-hand side of the first-order system:
/// `(r_C, r_E, r_I, w − z, Z s)`.
pub fn first_order_rhs<T: Scalar>(iterate: &Iterate<T>) -> Vec<T> {
    let r = &iterate.residuals;
    let v = &iterate.point;
    let mut b = Vec::new();
    b.extend_from_slice(&r.r_c);
    b.extend_from_slice(&r.r_e);
    b.extend_from_slice(&r.r_i);
    b.extend(sub(&v.w, &v.z));
    b.extend(hadamard(&v.z, &v.s));
    b
}

fn complementarity_rhs<T: Scalar>(n: usize, m: usize, last: Vec<T>) -> Vec<T> {
    let p = last.len();
    let mut b = vec![T::zero(); n + m + 2 * p];
    b.extend(last);
    b
}

/// Solve, then refine once if the residual exceeds `1e-8 (1 + ‖b‖)`.
fn solve_checked<T: Scalar>(lu: &Lu<T>, matrix: &Matrix<T>, b: &[T]) -> (Vec<T>, T) {
    let mut x = lu.solve(b);
    let mut r = sub(b, &matrix.mul_vec(&x));
    let tol = lit::<T>(1e-8) * (T::one() + norm2(b));
    if norm2(&r) > tol {
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        r = sub(b, &matrix.mul_vec(&x));
    }
    (x, norm2(&r))
}

/// Factors `matrix` once and solves for `v̇` (first-order rhs), then `p`
/// (rhs `μe` in the last block) and `q` (rhs `−2 ż∘ṡ`, which needs `v̇`).
pub fn solve_directions<T: Scalar>(
    matrix: &Matrix<T>,
    iterate: &Iterate<T>,
) -> Result<NewtonDirections<T>, KktError> {
    let (n, m, p) = iterate.point.dims();
    let lu = Lu::factor(matrix, Lu::default_threshold()).map_err(|e| KktError::Singular {
        column: e.column,
        pivot: e.pivot.to_f64().unwrap_or(f64::NAN),
        threshold: e.threshold.to_f64().unwrap_or(f64::NAN),
    })?;

    let (vdot, r0) = solve_checked(&lu, matrix, &first_order_rhs(iterate));
    let vdot = Point::from_stacked(&vdot, n, m, p);

    let (pd, r1) = solve_checked(&lu, matrix, &complementarity_rhs(n, m, vec![iterate.mu; p]));
    let pd = Point::from_stacked(&pd, n, m, p);

    let two = lit::<T>(2.0);
    let zs: Vec<T> = vdot
        .z
        .iter()
        .zip(&vdot.s)
        .map(|(&zd, &sd)| -two * zd * sd)
        .collect();
    let (qd, r2) = solve_checked(&lu, matrix, &complementarity_rhs(n, m, zs));
    let qd = Point::from_stacked(&qd, n, m, p);

    Ok(NewtonDirections {
        vdot,
        p: pd,
        q: qd,
        solve_residuals: [r0, r1, r2],
    })
}
