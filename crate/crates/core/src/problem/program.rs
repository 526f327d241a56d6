use thiserror::Error;

use super::expr::Expr;
use crate::linalg::Matrix;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProgramError {
    #[error("program needs at least one variable")]
    NoVariables,
    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("objective references variable {index} but only {n} are declared")]
    VariableOutOfRange { index: usize, n: usize },
    #[error("{m} equality rows for {n} variables; need m < n")]
    TooManyEqualities { m: usize, n: usize },
    #[error("equality rows are linearly dependent (rank {rank} < {m})")]
    DependentEqualities { rank: usize, m: usize },
    #[error("no inequality rows; the method needs at least one slack")]
    NoInequalities,
    #[error("bound on variable {index}: lower {lower} is not below upper {upper}")]
    InvalidBound { index: usize, lower: f64, upper: f64 },
}

/// `min f(x)  s.t.  A_E x = b_E,  A_I x >= b_I`.
#[derive(Debug, Clone)]
pub struct ConvexProgram<T> {
    objective: Expr<T>,
    a_eq: Matrix<T>,
    b_eq: Vec<T>,
    a_in: Matrix<T>,
    b_in: Vec<T>,
    names: Vec<String>,
}

impl<T: Scalar> ConvexProgram<T> {
    /// Validates shapes, the equality-row rank and the presence of at least
    /// one inequality row.
    pub fn new(
        n: usize,
        objective: Expr<T>,
        a_eq: Matrix<T>,
        b_eq: Vec<T>,
        a_in: Matrix<T>,
        b_in: Vec<T>,
    ) -> Result<Self, ProgramError> {
        if n == 0 {
            return Err(ProgramError::NoVariables);
        }
        if let Some(index) = objective.max_var() {
            if index >= n {
                return Err(ProgramError::VariableOutOfRange { index: index + 1, n });
            }
        }
        let check = |what, expected, found| {
            if expected == found {
                Ok(())
            } else {
                Err(ProgramError::DimensionMismatch {
                    what,
                    expected,
                    found,
                })
            }
        };
        if a_eq.rows() > 0 {
            check("equality matrix columns", n, a_eq.cols())?;
        }
        check("equality right-hand side length", a_eq.rows(), b_eq.len())?;
        if a_in.rows() > 0 {
            check("inequality matrix columns", n, a_in.cols())?;
        }
        check("inequality right-hand side length", a_in.rows(), b_in.len())?;

        let m = a_eq.rows();
        if m > 0 {
            if m >= n {
                return Err(ProgramError::TooManyEqualities { m, n });
            }
            let rank = a_eq.rank(lit(1e-10));
            if rank < m {
                return Err(ProgramError::DependentEqualities { rank, m });
            }
        }
        if a_in.rows() == 0 {
            return Err(ProgramError::NoInequalities);
        }
        // normalize empty blocks to the right width
        let a_eq = if m == 0 { Matrix::zeros(0, n) } else { a_eq };
        Ok(Self {
            objective,
            a_eq,
            b_eq,
            a_in,
            b_in,
            names: (1..=n).map(|i| format!("x{i}")).collect(),
        })
    }

    /// Replaces the default `x1..xn` variable names used for display.
    pub fn with_names(mut self, names: Vec<String>) -> Self {
        if names.len() == self.n() {
            self.names = names;
        }
        self
    }

    pub fn n(&self) -> usize {
        self.a_in.cols()
    }

    pub fn m(&self) -> usize {
        self.a_eq.rows()
    }

    pub fn p(&self) -> usize {
        self.a_in.rows()
    }

    pub fn objective(&self) -> &Expr<T> {
        &self.objective
    }

    pub fn a_eq(&self) -> &Matrix<T> {
        &self.a_eq
    }

    pub fn b_eq(&self) -> &[T] {
        &self.b_eq
    }

    pub fn a_in(&self) -> &Matrix<T> {
        &self.a_in
    }

    pub fn b_in(&self) -> &[T] {
        &self.b_in
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Appends box bounds to an inequality block as `x_i >= l_i` rows (in index
/// order) followed by `-x_i >= -u_i` rows. Infinite bounds are skipped.
///
/// `a_in` may have zero rows; its column count must equal the bound lengths
/// unless it is empty.
pub fn fold_bounds<T: Scalar>(
    a_in: &Matrix<T>,
    b_in: &[T],
    lower: &[T],
    upper: &[T],
) -> Result<(Matrix<T>, Vec<T>), ProgramError> {
    let n = lower.len();
    if upper.len() != n {
        return Err(ProgramError::DimensionMismatch {
            what: "upper bound length",
            expected: n,
            found: upper.len(),
        });
    }
    if a_in.rows() > 0 && a_in.cols() != n {
        return Err(ProgramError::DimensionMismatch {
            what: "inequality matrix columns",
            expected: n,
            found: a_in.cols(),
        });
    }
    if b_in.len() != a_in.rows() {
        return Err(ProgramError::DimensionMismatch {
            what: "inequality right-hand side length",
            expected: a_in.rows(),
            found: b_in.len(),
        });
    }
    for (i, (&l, &u)) in lower.iter().zip(upper).enumerate() {
        if !(l < u) || l == T::infinity() || u == T::neg_infinity() {
            return Err(ProgramError::InvalidBound {
                index: i + 1,
                lower: l.to_f64().unwrap_or(f64::NAN),
                upper: u.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let mut rows: Vec<Vec<T>> = (0..a_in.rows()).map(|i| a_in.row(i).to_vec()).collect();
    let mut rhs = b_in.to_vec();
    for (i, &l) in lower.iter().enumerate() {
        if l.is_finite() {
            let mut r = vec![T::zero(); n];
            r[i] = T::one();
            rows.push(r);
            rhs.push(l);
        }
    }
    for (i, &u) in upper.iter().enumerate() {
        if u.is_finite() {
            let mut r = vec![T::zero(); n];
            r[i] = -T::one();
            rows.push(r);
            rhs.push(-u);
        }
    }
    let a = Matrix::from_rows(&rows, n).expect("rows share width n");
    Ok((a, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1_rows() -> (Matrix<f64>, Vec<f64>) {
        (
            Matrix::from_rows(&[vec![-1.0, -1.0]], 2).unwrap(),
            vec![-10.0],
        )
    }

    #[test]
    fn folds_single_row_with_two_boxes() {
        let (a, b) = ex1_rows();
        let (a2, b2) = fold_bounds(&a, &b, &[1.0, 1.0], &[10.0, 10.0]).unwrap();
        assert_eq!(a2.rows(), 5);
        assert_eq!(b2, vec![-10.0, 1.0, 1.0, -10.0, -10.0]);
        assert_eq!(a2.row(0), &[-1.0, -1.0]);
        assert_eq!(a2.row(1), &[1.0, 0.0]);
        assert_eq!(a2.row(2), &[0.0, 1.0]);
        assert_eq!(a2.row(3), &[-1.0, 0.0]);
        assert_eq!(a2.row(4), &[0.0, -1.0]);
    }

    #[test]
    fn no_bounds_is_identity() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], 2).unwrap();
        let b = vec![1.0, 2.0];
        let inf = f64::INFINITY;
        let (a2, b2) = fold_bounds(&a, &b, &[-inf, -inf], &[inf, inf]).unwrap();
        assert_eq!(a2, a);
        assert_eq!(b2, b);
    }

    #[test]
    fn three_box_pairs_and_two_rows_give_eight() {
        let a = Matrix::from_rows(&[vec![-1.0, -1.0, 0.0], vec![0.0, -1.0, -1.0]], 3).unwrap();
        let (a2, b2) =
            fold_bounds(&a, &[-10.0, -10.0], &[5.0, 1.0, 5.0], &[10.0, 3.0, 10.0]).unwrap();
        assert_eq!(a2.rows(), 8);
        assert_eq!(b2.len(), 8);
    }

    #[test]
    fn rejects_crossed_bounds() {
        let (a, b) = ex1_rows();
        let err = fold_bounds(&a, &b, &[1.0, 5.0], &[10.0, 5.0]).unwrap_err();
        assert!(matches!(err, ProgramError::InvalidBound { index: 2, .. }));
    }

    #[test]
    fn program_validation() {
        let obj = Expr::var(0);
        let (a, b) = ex1_rows();
        let empty = Matrix::<f64>::zeros(0, 2);
        assert!(ConvexProgram::new(2, obj.clone(), empty.clone(), vec![], a.clone(), b.clone()).is_ok());
        assert_eq!(
            ConvexProgram::new(2, obj.clone(), empty.clone(), vec![], Matrix::zeros(0, 2), vec![])
                .unwrap_err(),
            ProgramError::NoInequalities
        );
        assert!(matches!(
            ConvexProgram::new(1, Expr::var(1), Matrix::zeros(0, 1), vec![], Matrix::identity(1), vec![0.0])
                .unwrap_err(),
            ProgramError::VariableOutOfRange { .. }
        ));
        let dep = Matrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]], 3).unwrap();
        let a3 = Matrix::identity(3);
        assert!(matches!(
            ConvexProgram::new(3, Expr::var(0), dep, vec![1.0, 2.0], a3.clone(), vec![0.0; 3])
                .unwrap_err(),
            ProgramError::DependentEqualities { rank: 1, m: 2 }
        ));
        let square = Matrix::identity(2);
        assert!(matches!(
            ConvexProgram::new(2, obj, square, vec![1.0, 1.0], a, b).unwrap_err(),
            ProgramError::TooManyEqualities { .. }
        ));
    }
}
