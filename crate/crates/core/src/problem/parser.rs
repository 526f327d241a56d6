//! Recursive-descent parser for objective expressions.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" unary)?
//! atom  := number | ident | "log" "(" expr ")" | "exp" "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus (`-x^2` is `-(x^2)`) and is
//! right-associative.

use thiserror::Error;

use super::expr::Expr;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown variable `{name}` at column {column}")]
    UnknownVariable { name: String, column: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(s) => format!("`{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn syntax(column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        column,
        message: message.into(),
    }
}

/// Tokens paired with their 1-based column.
fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Token::Plus, col)),
            b'-' => out.push((Token::Minus, col)),
            b'*' => out.push((Token::Star, col)),
            b'/' => out.push((Token::Slash, col)),
            b'^' => out.push((Token::Caret, col)),
            b'(' => out.push((Token::LParen, col)),
            b')' => out.push((Token::RParen, col)),
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme = &text[start..i];
                let v: f64 = lexeme
                    .parse()
                    .map_err(|_| syntax(col, format!("malformed number `{lexeme}`")))?;
                out.push((Token::Num(v), col));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_string()), col));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(col, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    out.push((Token::End, text.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn column(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Token, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.column(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Token::Minus => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Token::Slash => {
                    self.bump();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        if *self.peek() == Token::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn atom<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let (tok, col) = self.bump();
        match tok {
            Token::Num(v) => T::from_f64(v)
                .map(Expr::Const)
                .ok_or_else(|| syntax(col, "number out of range")),
            Token::LParen => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Token::Ident(name) if name == "log" || name == "exp" => {
                self.expect(Token::LParen)?;
                let arg = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(if name == "log" { Expr::log(arg) } else { Expr::exp(arg) })
            }
            Token::Ident(name) => match self.vars.iter().position(|v| *v == name) {
                Some(i) => Ok(Expr::Var(i)),
                None => Err(ParseError::UnknownVariable { name, column: col }),
            },
            other => Err(syntax(col, format!("expected an operand, found {}", other.describe()))),
        }
    }
}

/// Parses `text` into an expression over the named variables. The i-th name
/// maps to `Expr::Var(i)`.
pub fn parse_expression<T: Scalar, S: AsRef<str>>(
    text: &str,
    variables: &[S],
) -> Result<Expr<T>, ParseError> {
    let names: Vec<&str> = variables.iter().map(AsRef::as_ref).collect();
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        vars: &names,
    };
    let e = p.expr()?;
    if *p.peek() != Token::End {
        return Err(syntax(
            p.column(),
            format!("unexpected {} after expression", p.peek().describe()),
        ));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = Expr<f64>;

    fn vars2() -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }

    fn c(v: f64) -> E {
        Expr::Const(v)
    }

    #[test]
    fn parses_sum() {
        let e: E = parse_expression("x1 + x2", &vars2()).unwrap();
        assert_eq!(e, Expr::add(Expr::var(0), Expr::var(1)));
    }

    #[test]
    fn parses_log_objective() {
        let e: E = parse_expression(
            "-(5*log(x1) - x1 + 7) - (7*log(x2) - x2 + 8)",
            &vars2(),
        )
        .unwrap();
        let part = |a: f64, b: f64, i: usize| {
            Expr::add(
                Expr::sub(Expr::mul(c(a), Expr::log(Expr::var(i))), Expr::var(i)),
                c(b),
            )
        };
        let want = Expr::sub(Expr::neg(part(5.0, 7.0, 0)), part(7.0, 8.0, 1));
        assert_eq!(e, want);
    }

    #[test]
    fn parses_quadratic_over_linear() {
        let e: E = parse_expression("(5*x1)^2 / (7*x2)", &vars2()).unwrap();
        let want = Expr::div(
            Expr::pow(Expr::mul(c(5.0), Expr::var(0)), c(2.0)),
            Expr::mul(c(7.0), Expr::var(1)),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn precedence() {
        let e: E = parse_expression("-x1^2", &vars2()).unwrap();
        assert_eq!(e, Expr::neg(Expr::pow(Expr::var(0), c(2.0))));
        let e: E = parse_expression("1 + 2 * x1 ^ 3", &vars2()).unwrap();
        assert_eq!(
            e,
            Expr::add(c(1.0), Expr::mul(c(2.0), Expr::pow(Expr::var(0), c(3.0))))
        );
        let e: E = parse_expression("x1 - x2 - 1", &vars2()).unwrap();
        assert_eq!(e, Expr::sub(Expr::sub(Expr::var(0), Expr::var(1)), c(1.0)));
        let e: E = parse_expression("x1^-2", &vars2()).unwrap();
        assert_eq!(e, Expr::pow(Expr::var(0), Expr::neg(c(2.0))));
    }

    #[test]
    fn numbers_with_exponents() {
        let e: E = parse_expression("1.5e-3 * x1 + .25 + 2E2", &vars2()).unwrap();
        assert_eq!(
            e,
            Expr::add(
                Expr::add(Expr::mul(c(1.5e-3), Expr::var(0)), c(0.25)),
                c(200.0)
            )
        );
    }

    #[test]
    fn unknown_variable_is_reported() {
        let err = parse_expression::<f64, _>("x1 + y", &vars2()).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownVariable {
                name: "y".into(),
                column: 6
            }
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_expression::<f64, _>("x1 + * x2", &vars2()).unwrap_err() {
            ParseError::Syntax { column, .. } => assert_eq!(column, 6),
            e => panic!("unexpected {e:?}"),
        }
        match parse_expression::<f64, _>("log(x1", &vars2()).unwrap_err() {
            ParseError::Syntax { column, .. } => assert_eq!(column, 7),
            e => panic!("unexpected {e:?}"),
        }
        assert!(parse_expression::<f64, _>("x1 $ x2", &vars2()).is_err());
        assert!(parse_expression::<f64, _>("(x1) x2", &vars2()).is_err());
        assert!(parse_expression::<f64, _>("", &vars2()).is_err());
    }
}
