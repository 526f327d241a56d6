//! Problem files and the `arcsearch` command.
//!
//! A problem file holds one directive per line; `#` starts a comment.
//!
//! ```text
//! vars x1 x2
//! min -(5*log(x1) - x1 + 7) - (7*log(x2) - x2 + 8)
//! ineq -1 -1 >= -10
//! bound x1 1 10
//! bound x2 1 inf
//! start 5 5
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use arcsearch::{
    default_start, fold_bounds, parse_expression, solve, Config, ConvexProgram, Matrix, ParseError, ProgramError,
    Report, SolveError, Status,
};
use clap::Parser;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("parse error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("dimension error at line {line}: expected {expected} values, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("invalid problem: {0}")]
    Program(#[from] ProgramError),
    #[error("missing `{0}` directive")]
    Missing(&'static str),
    #[error("--x0: {0}")]
    StartFlag(String),
    #[error("{0}")]
    Solve(#[from] SolveError),
}

/// A parsed problem file before bounds are folded into the inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub vars: Vec<String>,
    pub objective: String,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub ineq: Vec<(Vec<f64>, f64)>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub start: Option<Vec<f64>>,
}

fn syntax(line: usize, message: impl Into<String>) -> InputError {
    InputError::Syntax {
        line,
        message: message.into(),
    }
}

fn number(line: usize, tok: &str) -> Result<f64, InputError> {
    match tok {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| syntax(line, format!("`{tok}` is not a number"))),
    }
}

fn numbers(line: usize, toks: &[&str]) -> Result<Vec<f64>, InputError> {
    toks.iter().map(|t| number(line, t)).collect()
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let mut vars: Option<Vec<String>> = None;
        let mut objective: Option<(usize, String)> = None;
        let mut file = ProblemFile {
            vars: vec![],
            objective: String::new(),
            eq: vec![],
            ineq: vec![],
            lower: vec![],
            upper: vec![],
            start: None,
        };

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (directive, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
            let rest = rest.trim();
            let toks: Vec<&str> = rest.split_whitespace().collect();

            if directive == "vars" {
                if vars.is_some() {
                    return Err(syntax(line, "`vars` given twice"));
                }
                if toks.is_empty() {
                    return Err(syntax(line, "`vars` needs at least one name"));
                }
                for (i, t) in toks.iter().enumerate() {
                    let ok = t.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                        && t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                    if !ok || matches!(*t, "log" | "exp") {
                        return Err(syntax(line, format!("`{t}` is not a valid variable name")));
                    }
                    if toks[..i].contains(t) {
                        return Err(syntax(line, format!("variable `{t}` declared twice")));
                    }
                }
                let n = toks.len();
                file.lower = vec![f64::NEG_INFINITY; n];
                file.upper = vec![f64::INFINITY; n];
                vars = Some(toks.iter().map(|s| s.to_string()).collect());
                continue;
            }

            let Some(names) = vars.as_ref() else {
                return Err(syntax(line, format!("`{directive}` before `vars`")));
            };
            let n = names.len();
            match directive {
                "min" => {
                    if objective.is_some() {
                        return Err(syntax(line, "`min` given twice"));
                    }
                    if rest.is_empty() {
                        return Err(syntax(line, "`min` needs an expression"));
                    }
                    objective = Some((line, rest.to_string()));
                }
                "eq" | "ineq" => {
                    let sep = if directive == "eq" { "=" } else { ">=" };
                    let Some(pos) = toks.iter().position(|t| *t == sep) else {
                        return Err(syntax(line, format!("`{directive}` needs `{sep} rhs`")));
                    };
                    if toks.len() != pos + 2 {
                        return Err(syntax(line, format!("expected a single value after `{sep}`")));
                    }
                    let coefs = numbers(line, &toks[..pos])?;
                    if coefs.len() != n {
                        return Err(InputError::Dimension {
                            line,
                            expected: n,
                            found: coefs.len(),
                        });
                    }
                    if coefs.iter().any(|c| c.is_infinite()) {
                        return Err(syntax(line, "coefficients must be finite"));
                    }
                    let rhs = number(line, toks[pos + 1])?;
                    if rhs.is_infinite() {
                        return Err(syntax(line, "right-hand side must be finite"));
                    }
                    if directive == "eq" {
                        file.eq.push((coefs, rhs));
                    } else {
                        file.ineq.push((coefs, rhs));
                    }
                }
                "bound" => {
                    if toks.len() != 3 {
                        return Err(syntax(line, "expected `bound <var> <lo> <hi>`"));
                    }
                    let Some(i) = names.iter().position(|v| v == toks[0]) else {
                        return Err(syntax(line, format!("unknown variable `{}`", toks[0])));
                    };
                    let (lo, hi) = (number(line, toks[1])?, number(line, toks[2])?);
                    if !(lo < hi) || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                        return Err(syntax(line, format!("empty bound interval [{lo}, {hi}]")));
                    }
                    file.lower[i] = lo;
                    file.upper[i] = hi;
                }
                "start" => {
                    let v = numbers(line, &toks)?;
                    if v.len() != n {
                        return Err(InputError::Dimension {
                            line,
                            expected: n,
                            found: v.len(),
                        });
                    }
                    if v.iter().any(|c| c.is_infinite()) {
                        return Err(syntax(line, "start values must be finite"));
                    }
                    file.start = Some(v);
                }
                other => return Err(syntax(line, format!("unknown directive `{other}`"))),
            }
        }

        file.vars = vars.ok_or(InputError::Missing("vars"))?;
        let (line, text) = objective.ok_or(InputError::Missing("min"))?;
        parse_expression::<f64, _>(&text, &file.vars).map_err(|e| expression_error(line, &e))?;
        file.objective = text;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, InputError> {
        let text = fs::read_to_string(path).map_err(|source| InputError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The program with bounds appended to the inequality rows.
    pub fn program(&self) -> Result<ConvexProgram<f64>, InputError> {
        let n = self.vars.len();
        let objective = parse_expression(&self.objective, &self.vars).map_err(|e| expression_error(0, &e))?;
        let stack = |rows: &[(Vec<f64>, f64)]| -> (Matrix<f64>, Vec<f64>) {
            let a: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
            let m = if a.is_empty() {
                Matrix::zeros(0, n)
            } else {
                Matrix::from_rows(&a, n).expect("row lengths checked while parsing")
            };
            (m, rows.iter().map(|r| r.1).collect())
        };
        let (a_eq, b_eq) = stack(&self.eq);
        let (a, b) = stack(&self.ineq);
        let (a_in, b_in) = fold_bounds(&a, &b, &self.lower, &self.upper)?;
        Ok(ConvexProgram::new(n, objective, a_eq, b_eq, a_in, b_in)?.with_names(self.vars.clone()))
    }
}

fn expression_error(line: usize, e: &ParseError) -> InputError {
    syntax(line, format!("in objective: {e}"))
}

/// `printf("%g")`-style formatting with six significant digits.
pub fn format_g(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    const P: i32 = 6;
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..P).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip(mantissa), exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        strip(&format!("{v:.decimals$}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "arcsearch", version, about = "Arc-search interior-point solver for linearly constrained convex programs")]
pub struct Args {
    /// Problem file.
    pub problem: PathBuf,
    /// Stopping tolerance on the KKT norm.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Centrality constant: s_i z_i >= theta * mu.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Positivity floor fraction.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub sigma_min: Option<f64>,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    /// Write the per-iteration trace as CSV.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Start point, comma separated; overrides `start` in the file.
    #[arg(long, value_name = "V1,V2,...", allow_hyphen_values = true)]
    pub x0: Option<String>,
}

impl Args {
    pub fn config(&self) -> Config {
        let d = Config::default();
        Config {
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            theta: self.theta.unwrap_or(d.theta),
            rho: self.rho.unwrap_or(d.rho),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            sigma_min: self.sigma_min.unwrap_or(d.sigma_min),
            sigma_max: self.sigma_max.unwrap_or(d.sigma_max),
            ..d
        }
    }
}

fn parse_x0(text: &str, n: usize) -> Result<Vec<f64>, InputError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| InputError::StartFlag(format!("`{t}` is not a finite number")))
        })
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(InputError::StartFlag(format!("expected {n} values, found {}", v.len())));
    }
    Ok(v)
}

pub const TRACE_HEADER: [&str; 11] = [
    "k",
    "mu",
    "sigma",
    "alpha",
    "norm_rC",
    "norm_rE",
    "norm_rI",
    "nu",
    "kkt_norm",
    "true_stat_norm",
    "min_sz_over_mu",
];

pub fn write_trace(path: &Path, report: &Report) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for t in &report.trace {
        w.write_record([
            t.k.to_string(),
            t.mu.to_string(),
            opt(t.sigma),
            opt(t.alpha),
            t.norm_rc.to_string(),
            t.norm_re.to_string(),
            t.norm_ri.to_string(),
            t.nu.to_string(),
            t.kkt_norm.to_string(),
            t.true_stat_norm.to_string(),
            t.min_sz_over_mu.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn print_report(out: &mut impl Write, report: &Report) -> io::Result<()> {
    let x: Vec<String> = report.x.iter().map(|&v| format_g(v)).collect();
    writeln!(out, "x = ({})", x.join(", "))?;
    writeln!(out, "obj = {}", format_g(report.objective))?;
    writeln!(out, "kk = {}", report.iterations)?;
    writeln!(out, "infe = {}", format_g(report.infeasibility))?;
    writeln!(out, "status = {}", report.status)
}

fn solve_file(args: &Args) -> Result<Report, InputError> {
    let file = ProblemFile::read(&args.problem)?;
    let program = file.program()?;
    let x0 = match &args.x0 {
        Some(text) => Some(parse_x0(text, program.n())?),
        None => file.start.clone(),
    };
    Ok(solve(&program, &args.config(), default_start(&program, x0.as_deref()))?)
}

/// Runs the command and returns the process exit code: 0 when converged,
/// 2 when the solver stopped without converging, 1 for input errors.
pub fn run<I, S>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let report = match solve_file(&args) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    if let Some(path) = &args.trace {
        if let Err(e) = write_trace(path, &report) {
            let _ = writeln!(err, "error: cannot write trace {}: {e}", path.display());
            return 1;
        }
    }
    if print_report(out, &report).is_err() {
        return 1;
    }
    if report.status == Status::Converged {
        0
    } else {
        let _ = writeln!(
            err,
            "solver failure: {}{}",
            report.status,
            report.failure.as_deref().map(|m| format!(": {m}")).unwrap_or_default()
        );
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(format_g(-13.0), "-13");
        assert_eq!(format_g(70.973253), "70.9733");
        assert_eq!(format_g(0.0001234567), "0.000123457");
        assert_eq!(format_g(1.234567e-5), "1.23457e-05");
        assert_eq!(format_g(1234567.0), "1.23457e+06");
        assert_eq!(format_g(123456.0), "123456");
        assert_eq!(format_g(1.0000000005), "1");
        assert_eq!(format_g(0.0), "0");
        assert_eq!(format_g(-2.7725887), "-2.77259");
    }

    #[test]
    fn parses_a_problem() {
        let text = "# demo\nvars a b\nmin a^2 + b^2   # objective\neq 1 1 = 2\nineq 1 0 >= -1\nbound b 0 inf\nstart 1 1\n";
        let f = ProblemFile::parse(text).unwrap();
        assert_eq!(f.vars, vec!["a", "b"]);
        assert_eq!(f.eq, vec![(vec![1.0, 1.0], 2.0)]);
        assert_eq!(f.ineq, vec![(vec![1.0, 0.0], -1.0)]);
        assert_eq!(f.lower, vec![f64::NEG_INFINITY, 0.0]);
        assert_eq!(f.start, Some(vec![1.0, 1.0]));
        let p = f.program().unwrap();
        assert_eq!((p.n(), p.m(), p.p()), (2, 1, 2));
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("vars x\nmin x^2\nineq 1 2 >= 0\n", 3, "dimension"),
            ("vars x\nmin x +* 2\n", 2, "parse"),
            ("vars x\nmin x\nbound y 0 1\n", 3, "parse"),
            ("min x\n", 1, "parse"),
            ("vars x\nmin x\nfoo 1\n", 3, "parse"),
            ("vars x\nmin x\nbound x 2 1\n", 3, "parse"),
            ("vars x\nmin x\nineq 1 >= z\n", 3, "parse"),
        ];
        for (text, line, kind) in cases {
            let msg = ProblemFile::parse(text).unwrap_err().to_string();
            assert!(msg.contains(&format!("line {line}")), "{msg}");
            assert!(msg.starts_with(kind), "{msg}");
        }
        assert!(matches!(ProblemFile::parse("vars x\n"), Err(InputError::Missing("min"))));
    }

    #[test]
    fn x0_flag() {
        assert_eq!(parse_x0("1, -2.5", 2).unwrap(), vec![1.0, -2.5]);
        assert!(parse_x0("1", 2).is_err());
        assert!(parse_x0("1,a", 2).is_err());
    }
}
