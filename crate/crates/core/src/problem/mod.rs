//! Linearly constrained convex programs and their objective expressions.

mod expr;
mod parser;
mod program;

pub use expr::Expr;
pub use parser::{parse_expression, ParseError};
pub use program::{fold_bounds, ConvexProgram, ProgramError};
