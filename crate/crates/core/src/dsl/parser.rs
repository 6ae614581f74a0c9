//! Recursive descent with Pratt-style precedence climbing.
//!
//! Binding powers, loosest first: `+ -` (left), `* /` (left), unary `-`,
//! `^` (right).

use thiserror::Error;

use super::{Expr, Func};

pub const MAX_SOURCE_LEN: usize = 4096;
const MAX_NESTING: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("expression is {len} bytes long; the limit is {MAX_SOURCE_LEN}")]
    TooLong { len: usize },
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<&'static str>, found: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("invalid number `{text}` at byte {offset}")]
    InvalidNumber { text: String, offset: usize },
    #[error("expression nested deeper than {MAX_NESTING} levels at byte {offset}")]
    TooDeep { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::InvalidNumber { offset, .. }
            | ParseError::TooDeep { offset } => Some(*offset),
            ParseError::Empty | ParseError::TooLong { .. } => None,
        }
    }

    /// The message followed by the source line and a caret under the offending byte.
    pub fn render(&self, source: &str) -> String {
        match self.offset() {
            Some(off) => {
                let col = source[..off.min(source.len())].chars().count();
                format!("error: {self}\n  {source}\n  {}^", " ".repeat(col))
            }
            None => format!("error: {self}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
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
                let text = &src[start..i];
                let v: f64 =
                    text.parse().map_err(|_| ParseError::InvalidNumber { text: text.to_string(), offset: start })?;
                if !v.is_finite() {
                    return Err(ParseError::InvalidNumber { text: text.to_string(), offset: start });
                }
                out.push((Tok::Num(v), start));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let found = src[start..].chars().next().map(|ch| format!("`{ch}`")).unwrap_or_default();
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["number", "`x`", "function name", "operator", "parenthesis"],
                    found,
                });
            }
        }
        i += 1;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

const UNARY_BP: u8 = 5;

fn infix_bp(t: &Tok) -> Option<(u8, u8)> {
    match t {
        Tok::Plus | Tok::Minus => Some((1, 2)),
        Tok::Star | Tok::Slash => Some((3, 4)),
        Tok::Caret => Some((8, 7)),
        _ => None,
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, label: &'static str) -> Result<(), ParseError> {
        let (t, off) = self.peek().clone();
        if t == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax { offset: off, expected: vec![label], found: t.describe() })
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ParseError::TooDeep { offset: self.peek().1 });
        }
        let mut lhs = self.prefix()?;
        loop {
            let (op, _) = self.peek().clone();
            let Some((lbp, rbp)) = infix_bp(&op) else { break };
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(rbp)?;
            lhs = match op {
                Tok::Plus => fold::add(lhs, rhs),
                Tok::Minus => fold::sub(lhs, rhs),
                Tok::Star => fold::mul(lhs, rhs),
                Tok::Slash => fold::div(lhs, rhs),
                Tok::Caret => fold::pow(lhs, rhs),
                _ => unreachable!(),
            };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (t, off) = self.bump();
        match t {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Minus => {
                let inner = self.expr(UNARY_BP)?;
                Ok(fold::neg(inner))
            }
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if name == "x" {
                    return Ok(Expr::X);
                }
                match Func::from_name(&name) {
                    Some(func) => {
                        self.expect(Tok::LParen, "`(`")?;
                        let arg = self.expr(0)?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    None => Err(ParseError::UnknownIdentifier { name, offset: off }),
                }
            }
            other => Err(ParseError::Syntax {
                offset: off,
                expected: vec!["number", "`x`", "function call", "`(`", "`-`"],
                found: other.describe(),
            }),
        }
    }
}

/// Parses a potential expression in the variable `x`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.len() > MAX_SOURCE_LEN {
        return Err(ParseError::TooLong { len: text.len() });
    }
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let e = p.expr(0)?;
    let (t, off) = p.peek().clone();
    if t != Tok::Eof {
        return Err(ParseError::Syntax {
            offset: off,
            expected: vec!["operator", "end of input"],
            found: t.describe(),
        });
    }
    Ok(e)
}

/// Node constructors that fold literal operands only when the result is exact.
pub(crate) mod fold {
    use super::Expr;

    fn two_sum_exact(a: f64, b: f64, s: f64) -> bool {
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        err == 0.0 && s.is_finite()
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            let s = x + y;
            if two_sum_exact(*x, *y, s) {
                return Expr::Const(s);
            }
        }
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            let s = x - y;
            if two_sum_exact(*x, -*y, s) {
                return Expr::Const(s);
            }
        }
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            let p = x * y;
            if p.is_finite() && x.mul_add(*y, -p) == 0.0 && (p != 0.0 || *x == 0.0 || *y == 0.0) {
                return Expr::Const(p);
            }
        }
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if *y != 0.0 {
                let q = x / y;
                if q.is_finite() && q.mul_add(*y, -x) == 0.0 && (q != 0.0 || *x == 0.0) {
                    return Expr::Const(q);
                }
            }
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if x.fract() == 0.0 && *y >= 0.0 && y.fract() == 0.0 && *y <= 64.0 {
                let p = x.powi(*y as i32);
                if p.abs() < 9.007_199_254_740_992e15 && !(*x == 0.0 && *y == 0.0) {
                    return Expr::Const(p);
                }
            }
        }
        Expr::Pow(Box::new(a), Box::new(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(v: f64) -> Box<Expr> {
        Box::new(Expr::Const(v))
    }
    fn x() -> Box<Expr> {
        Box::new(Expr::X)
    }

    #[test]
    fn power_of_x() {
        assert_eq!(parse("x^2").unwrap(), Expr::Pow(x(), c(2.0)));
    }

    /// Hand-checked trees.
    #[test]
    fn precedence_corpus() {
        use Expr::*;
        let b = Box::new;
        let cases: Vec<(&str, Expr)> = vec![
            ("x", X),
            ("2.5", Const(2.5)),
            ("-x", Neg(x())),
            ("-2", Const(-2.0)),
            ("x+1*x", Add(x(), b(Mul(c(1.0), x())))),
            ("x*x+1", Add(b(Mul(x(), x())), c(1.0))),
            ("x-x-x", Sub(b(Sub(x(), x())), x())),
            ("x/x/x", Div(b(Div(x(), x())), x())),
            ("x^x^x", Pow(x(), b(Pow(x(), x())))),
            ("-x^2", Neg(b(Pow(x(), c(2.0))))),
            ("(-x)^2", Pow(b(Neg(x())), c(2.0))),
            ("-x*x", Mul(b(Neg(x())), x())),
            ("x*-x", Mul(x(), b(Neg(x())))),
            ("x^-2", Pow(x(), c(-2.0))),
            ("2*x^3", Mul(c(2.0), b(Pow(x(), c(3.0))))),
            ("x^2 + 0.1*x^4", Add(b(Pow(x(), c(2.0))), b(Mul(c(0.1), b(Pow(x(), c(4.0))))))),
            ("cosh(x)-1", Sub(b(Call(Func::Cosh, x())), c(1.0))),
            ("exp(-x^2)", Call(Func::Exp, b(Neg(b(Pow(x(), c(2.0))))))),
            ("(x+1)*(x-1)", Mul(b(Add(x(), c(1.0))), b(Sub(x(), c(1.0))))),
            ("2*3 + x", Add(c(6.0), x())),
            ("1e-3*x", Mul(c(1e-3), x())),
            ("0.1 + 0.2", Add(c(0.1), c(0.2))),
        ];
        for (src, want) in cases {
            assert_eq!(parse(src).unwrap(), want, "source {src:?}");
        }
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse(" x ^ 2 +\t1 ").unwrap(), parse("x^2+1").unwrap());
    }

    #[test]
    fn errors_carry_offsets() {
        match parse("x + * 2").unwrap_err() {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, 4),
            e => panic!("{e:?}"),
        }
        match parse("x + y").unwrap_err() {
            ParseError::UnknownIdentifier { name, offset } => {
                assert_eq!(name, "y");
                assert_eq!(offset, 4);
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse("(x+1").unwrap_err(), ParseError::Syntax { offset: 4, .. }));
        assert!(matches!(parse("x)").unwrap_err(), ParseError::Syntax { offset: 1, .. }));
        assert_eq!(parse("").unwrap_err(), ParseError::Empty);
        assert!(matches!(parse(&"x+".repeat(3000)).unwrap_err(), ParseError::TooLong { .. }));
        assert!(matches!(parse("1e999").unwrap_err(), ParseError::InvalidNumber { .. }));
        assert!(matches!(parse("x²").unwrap_err(), ParseError::Syntax { offset: 1, .. }));
    }

    #[test]
    fn caret_rendering() {
        let src = "x^2 + foo(x)";
        let msg = parse(src).unwrap_err().render(src);
        let lines: Vec<&str> = msg.lines().collect();
        assert_eq!(lines[1], "  x^2 + foo(x)");
        assert_eq!(lines[2], "        ^");
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!("{}x{}", "(".repeat(1500), ")".repeat(1500));
        assert!(matches!(parse(&src).unwrap_err(), ParseError::TooDeep { .. }));
    }

    proptest! {
        #[test]
        fn parser_is_total(s in "[-+*/^()x0-9.e a-z]{0,200}") {
            let _ = parse(&s);
        }

        #[test]
        fn parser_is_total_on_arbitrary_text(s in any::<String>()) {
            let _ = parse(&s);
        }
    }
}
