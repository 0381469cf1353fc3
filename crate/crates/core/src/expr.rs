//! Scalar coefficient expressions over `(x, t)` with the problem constants
//! `p` and `tau` available as variables.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter
//! than unary minus):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | variable | function '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `x`, `t`, `p`, `tau`; functions are `exp`, `sin`, `cos`,
//! `ln`, `sqrt`, `abs`. Numbers are decimal literals with an optional
//! `e`/`E` exponent. `^` with an integral exponent is computed by binary
//! exponentiation (so `x^p` is exact-ish and total for `x <= 0`); a
//! non-integral exponent requires a nonnegative base. `0^0 = 1`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};

use crate::real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    T,
    P,
    Tau,
}

impl core::fmt::Display for Var {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Var::X => "x",
            Var::T => "t",
            Var::P => "p",
            Var::Tau => "tau",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    /// Binding strength; unary minus sits between `*` and `^`.
    fn prec(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

const NEG_PREC: u8 = 3;
const ATOM_PREC: u8 = 5;

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Var),
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("logarithm of a non-positive value in `{0}`")]
    LogDomain(String),
    #[error("square root of a negative value in `{0}`")]
    SqrtDomain(String),
    #[error("negative base with non-integral exponent in `{0}`")]
    PowDomain(String),
    #[error("non-finite result in `{0}`")]
    NonFinite(String),
}

/// Values supplied to [`Expr::eval`]; leave a slot `None` to catch
/// accidental uses of that variable.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    pub x: Option<f64>,
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub tau: Option<f64>,
}

impl Bindings {
    pub fn all(x: f64, t: f64, p: f64, tau: f64) -> Self {
        Bindings {
            x: Some(x),
            t: Some(t),
            p: Some(p),
            tau: Some(tau),
        }
    }

    fn get(&self, v: Var) -> Result<f64, EvalError> {
        match v {
            Var::X => self.x,
            Var::T => self.t,
            Var::P => self.p,
            Var::Tau => self.tau,
        }
        .ok_or(EvalError::Unbound(v))
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let mut p = Parser::new(src);
        let e = p.expr()?;
        match p.peek()? {
            (Token::End, _) => Ok(e),
            (tok, off) => Err(ParseError {
                offset: off,
                message: format!("expected end of input, found {}", tok.describe()),
            }),
        }
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Lit(v) => *v,
            Expr::Var(var) => b.get(*var)?,
            Expr::Neg(e) => -e.eval(b)?,
            Expr::Bin(op, l, r) => {
                let lv = l.eval(b)?;
                let rv = r.eval(b)?;
                match op {
                    BinOp::Add => lv + rv,
                    BinOp::Sub => lv - rv,
                    BinOp::Mul => lv * rv,
                    BinOp::Div => {
                        if rv == 0.0 {
                            return Err(EvalError::DivisionByZero(self.to_string()));
                        }
                        lv / rv
                    }
                    BinOp::Pow => {
                        if rv == real::round(rv) && rv.abs() <= i32::MAX as f64 {
                            if lv == 0.0 && rv < 0.0 {
                                return Err(EvalError::DivisionByZero(self.to_string()));
                            }
                            real::powi(lv, rv as i32)
                        } else if lv < 0.0 {
                            return Err(EvalError::PowDomain(self.to_string()));
                        } else {
                            real::powf(lv, rv)
                        }
                    }
                }
            }
            Expr::Call(f, arg) => {
                let a = arg.eval(b)?;
                match f {
                    Func::Exp => real::exp(a),
                    Func::Sin => real::sin(a),
                    Func::Cos => real::cos(a),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(EvalError::LogDomain(self.to_string()));
                        }
                        real::ln(a)
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::SqrtDomain(self.to_string()));
                        }
                        real::sqrt(a)
                    }
                    Func::Abs => a.abs(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite(self.to_string()))
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Lit(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on(v),
            Expr::Bin(_, l, r) => l.depends_on(v) || r.depends_on(v),
        }
    }

    /// Binding strength of the top node, for the minimal-paren printer.
    fn prec(&self) -> u8 {
        match self {
            Expr::Lit(v) if *v < 0.0 => NEG_PREC,
            Expr::Lit(_) | Expr::Var(_) | Expr::Call(..) => ATOM_PREC,
            Expr::Neg(_) => NEG_PREC,
            Expr::Bin(op, ..) => op.prec(),
        }
    }

    fn fmt_prec(&self, f: &mut core::fmt::Formatter<'_>, min: u8) -> core::fmt::Result {
        let prec = self.prec();
        let paren = prec < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Lit(v) => write!(f, "{v}")?,
            Expr::Var(v) => write!(f, "{v}")?,
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_prec(f, NEG_PREC)?;
            }
            Expr::Bin(op, l, r) => {
                let p = op.prec();
                match op {
                    // left-assoc; `-`/`/` need parens around same-prec right child
                    BinOp::Add | BinOp::Mul => {
                        l.fmt_prec(f, p)?;
                        write!(f, "{}", op.symbol())?;
                        r.fmt_prec(f, p)?;
                    }
                    BinOp::Sub | BinOp::Div => {
                        l.fmt_prec(f, p)?;
                        write!(f, "{}", op.symbol())?;
                        r.fmt_prec(f, p + 1)?;
                    }
                    // right-assoc, exponent may carry a unary minus
                    BinOp::Pow => {
                        l.fmt_prec(f, p + 1)?;
                        write!(f, "{}", op.symbol())?;
                        r.fmt_prec(f, NEG_PREC)?;
                    }
                }
            }
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.fmt_prec(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl core::fmt::Display for Expr {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl core::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number `{v}`"),
            Token::Ident(s) => format!("`{s}`"),
            Token::Op(c) => format!("`{c}`"),
            Token::LParen => "`(`".to_string(),
            Token::RParen => "`)`".to_string(),
            Token::End => "end of input".to_string(),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn error(&self, offset: usize, message: String) -> ParseError {
        ParseError { offset, message }
    }

    /// Next token and its byte offset, without consuming.
    fn peek(&mut self) -> Result<(Token, usize), ParseError> {
        let save = self.pos;
        let t = self.next()?;
        self.pos = save;
        Ok(t)
    }

    fn next(&mut self) -> Result<(Token, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if self.pos >= bytes.len() {
            return Ok((Token::End, start));
        }
        let c = bytes[self.pos];
        match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Ok((Token::Op(c as char), start))
            }
            b'(' => {
                self.pos += 1;
                Ok((Token::LParen, start))
            }
            b')' => {
                self.pos += 1;
                Ok((Token::RParen, start))
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut e = end + 1;
                    if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                        e += 1;
                    }
                    if e < bytes.len() && bytes[e].is_ascii_digit() {
                        end = e;
                        while end < bytes.len() && bytes[end].is_ascii_digit() {
                            end += 1;
                        }
                    }
                }
                let text = &self.src[start..end];
                let v: f64 = text
                    .parse()
                    .map_err(|_| self.error(start, format!("invalid number `{text}`")))?;
                self.pos = end;
                Ok((Token::Num(v), start))
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                let text = &self.src[start..end];
                self.pos = end;
                Ok((Token::Ident(text.to_string()), start))
            }
            _ => Err(self.error(start, format!("unexpected character `{}`", c as char))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek()? {
                (Token::Op('+'), _) => {
                    self.next()?;
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                (Token::Op('-'), _) => {
                    self.next()?;
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek()? {
                (Token::Op('*'), _) => {
                    self.next()?;
                    let rhs = self.unary()?;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                (Token::Op('/'), _) => {
                    self.next()?;
                    let rhs = self.unary()?;
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let (Token::Op('-'), _) = self.peek()? {
            self.next()?;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let (Token::Op('^'), _) = self.peek()? {
            self.next()?;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, off) = self.next()?;
        match tok {
            Token::Num(v) => Ok(Expr::Lit(v)),
            Token::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "t" => Ok(Expr::Var(Var::T)),
                "p" => Ok(Expr::Var(Var::P)),
                "tau" => Ok(Expr::Var(Var::Tau)),
                "exp" | "sin" | "cos" | "ln" | "sqrt" | "abs" => {
                    let func = match name.as_str() {
                        "exp" => Func::Exp,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "ln" => Func::Ln,
                        "sqrt" => Func::Sqrt,
                        _ => Func::Abs,
                    };
                    match self.next()? {
                        (Token::LParen, _) => {}
                        (tok, off) => {
                            return Err(self.error(
                                off,
                                format!("expected `(` after `{name}`, found {}", tok.describe()),
                            ))
                        }
                    }
                    let arg = self.expr()?;
                    match self.next()? {
                        (Token::RParen, _) => Ok(Expr::Call(func, Box::new(arg))),
                        (tok, off) => {
                            Err(self.error(off, format!("expected `)`, found {}", tok.describe())))
                        }
                    }
                }
                _ => Err(self.error(off, format!("unknown identifier `{name}`"))),
            },
            Token::LParen => {
                let inner = self.expr()?;
                match self.next()? {
                    (Token::RParen, _) => Ok(inner),
                    (tok, off) => {
                        Err(self.error(off, format!("expected `)`, found {}", tok.describe())))
                    }
                }
            }
            tok => Err(self.error(off, format!("expected a value, found {}", tok.describe()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b1() -> Bindings {
        Bindings::all(0.5, 1.0, 3.0, 1.0)
    }

    #[test]
    fn powers_use_the_bound_p() {
        let e = Expr::parse("x^p").unwrap();
        assert_eq!(e.eval(&b1()).unwrap(), 0.125);
    }

    #[test]
    fn problem2_forcing_shape() {
        let e = Expr::parse("p*exp(-t)*(x^2-1)").unwrap();
        let b = Bindings::all(0.0, 0.0, 1.0, 1.0);
        assert_eq!(e.eval(&b).unwrap(), -1.0);
    }

    #[test]
    fn literal_evaluates_to_itself() {
        assert_eq!(
            Expr::parse("7")
                .unwrap()
                .eval(&Bindings::default())
                .unwrap(),
            7.0
        );
    }

    #[test]
    fn quadratic_vanishes_at_one() {
        let e = Expr::parse("x^2-1").unwrap();
        let b = Bindings {
            x: Some(1.0),
            ..Bindings::default()
        };
        assert_eq!(e.eval(&b).unwrap(), 0.0);
    }

    #[test]
    fn exp_of_minus_ln_two() {
        let e = Expr::parse("exp(-t)").unwrap();
        let b = Bindings {
            t: Some(core::f64::consts::LN_2),
            ..Bindings::default()
        };
        assert!((e.eval(&b).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dangling_operator_is_rejected_with_offset() {
        let err = Expr::parse("1+*2").unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn unknown_identifiers_are_rejected() {
        assert!(Expr::parse("y+1").is_err());
        assert!(Expr::parse("foo(2)").is_err());
    }

    #[test]
    fn unbound_variable_is_reported() {
        let e = Expr::parse("x+t").unwrap();
        let b = Bindings {
            x: Some(1.0),
            ..Bindings::default()
        };
        assert_eq!(e.eval(&b).unwrap_err(), EvalError::Unbound(Var::T));
    }

    #[test]
    fn division_by_zero_names_the_subexpression() {
        let e = Expr::parse("1/(x-1)+t").unwrap();
        let b = Bindings::all(1.0, 0.0, 1.0, 1.0);
        match e.eval(&b).unwrap_err() {
            EvalError::DivisionByZero(s) => assert_eq!(s, "1/(x-1)"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn precedence_multiplication_binds_tighter() {
        let lhs = Expr::parse("x+t*p").unwrap();
        let rhs = Expr::parse("x+(t*p)").unwrap();
        assert_eq!(lhs, rhs);
        let grouped = Expr::parse("(x+t)*p").unwrap();
        assert_ne!(lhs, grouped);
    }

    #[test]
    fn power_is_right_associative_and_beats_unary_minus() {
        assert_eq!(
            Expr::parse("x^t^p").unwrap(),
            Expr::parse("x^(t^p)").unwrap()
        );
        assert_eq!(Expr::parse("-x^2").unwrap(), Expr::parse("-(x^2)").unwrap());
        assert_eq!(Expr::parse("2^-p").unwrap(), Expr::parse("2^(-p)").unwrap());
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        let e = Expr::parse("x^p").unwrap();
        let b = Bindings::all(0.0, 0.0, 0.0, 1.0);
        assert_eq!(e.eval(&b).unwrap(), 1.0);
    }

    #[test]
    fn negative_base_integral_power_is_total() {
        let e = Expr::parse("(x-1)^2").unwrap();
        let b = Bindings::all(0.0, 0.0, 1.0, 1.0);
        assert_eq!(e.eval(&b).unwrap(), 1.0);
        let f = Expr::parse("(x-1)^1.5").unwrap();
        assert!(matches!(f.eval(&b), Err(EvalError::PowDomain(_))));
    }

    #[test]
    fn display_round_trips_structurally() {
        for src in [
            "x^p",
            "1+t^2",
            "(1-x)^2",
            "p*exp(-t)*(x^2-1)",
            "x-(t-p)",
            "x/(t/p)",
            "(x^t)^p",
            "-(x+t)",
            "-x*t",
            "x--t",
            "2^-p",
            "abs(x-1)+sqrt(t)*ln(p)",
        ] {
            let parsed = Expr::parse(src).unwrap();
            let printed = parsed.to_string();
            let reparsed = Expr::parse(&printed).unwrap();
            assert_eq!(parsed, reparsed, "{src} -> {printed}");
        }
    }

    #[test]
    fn depends_on_sees_through_nesting() {
        let e = Expr::parse("exp(-t)*(x^2-1)").unwrap();
        assert!(e.depends_on(Var::T));
        assert!(e.depends_on(Var::X));
        assert!(!e.depends_on(Var::Tau));
        let s = Expr::parse("(1-x)^2").unwrap();
        assert!(!s.depends_on(Var::T));
    }
}
