//! Text syntax for wave expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := 'w' '(' num ',' num ')' | 'inv' '(' expr ')'
//!         | 'const' '(' num ',' num ')' | '(' expr ')'
//! num    := '-'? digits ('/' digits)?          exact rational
//!         | '-'? digits '.' digits? exponent?  float
//!         | '-'? digits exponent               float
//! ```
//!
//! ASCII only; whitespace between tokens is ignored; no implicit
//! multiplication. `a - b` is `a ⊕ (w(0,1/2) ⊗ b)` and `a / b` is
//! `a ⊗ inv(b)`. Generator rotations are in turns.

use std::fmt;

use thiserror::Error;

use crate::exactq::Rational;
use crate::wave::{self, Num, WaveExpr};

/// Half-open byte range `[start, end)` into the parsed text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {}", span.start)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
    pub expected: Vec<&'static str>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Ident(&'a str),
    Number(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const FACTOR_START: &[&str] = &["w", "inv", "const", "("];

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<(Tok<'a>, SourceSpan)>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            peeked: None,
        }
    }

    fn error(
        &self,
        span: SourceSpan,
        message: impl Into<String>,
        expected: &[&'static str],
    ) -> ParseError {
        ParseError {
            message: message.into(),
            span,
            expected: expected.to_vec(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src.as_bytes()[self.pos..];
        self.pos += rest.iter().take_while(|b| b.is_ascii_whitespace()).count();
    }

    fn lex(&mut self) -> Result<(Tok<'a>, SourceSpan), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::End, SourceSpan { start, end: start }));
        };
        let single = |tok| {
            (
                tok,
                SourceSpan {
                    start,
                    end: start + 1,
                },
            )
        };
        let tok = match c {
            b'+' => single(Tok::Plus),
            b'-' if bytes.get(start + 1).is_some_and(u8::is_ascii_digit) => {
                return Ok(self.lex_number(start));
            }
            b'-' => single(Tok::Minus),
            b'*' => single(Tok::Star),
            b'/' => single(Tok::Slash),
            b'(' => single(Tok::LParen),
            b')' => single(Tok::RParen),
            b',' => single(Tok::Comma),
            b'0'..=b'9' => return Ok(self.lex_number(start)),
            c if c.is_ascii_alphabetic() => {
                let len = bytes[start..]
                    .iter()
                    .take_while(|b| b.is_ascii_alphanumeric())
                    .count();
                self.pos = start + len;
                let span = SourceSpan {
                    start,
                    end: start + len,
                };
                return Ok((Tok::Ident(&self.src[start..start + len]), span));
            }
            _ => {
                let width = self.src[start..].chars().next().map_or(1, char::len_utf8);
                let span = SourceSpan {
                    start,
                    end: start + width,
                };
                let ch = &self.src[start..start + width];
                return Err(self.error(span, format!("unexpected character `{ch}`"), FACTOR_START));
            }
        };
        self.pos = tok.1.end;
        Ok(tok)
    }

    /// Greedy scan of `-?digits(/digits | .digits?)?([eE][+-]?digits)?`; the
    /// literal is validated when it is converted.
    fn lex_number(&mut self, start: usize) -> (Tok<'a>, SourceSpan) {
        let bytes = self.src.as_bytes();
        let mut i = start;
        let digits = |i: &mut usize| {
            while bytes.get(*i).is_some_and(u8::is_ascii_digit) {
                *i += 1;
            }
        };
        if bytes[i] == b'-' {
            i += 1;
        }
        digits(&mut i);
        match bytes.get(i) {
            Some(b'/') if bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                i += 1;
                digits(&mut i);
            }
            Some(b'.') => {
                i += 1;
                digits(&mut i);
            }
            _ => {}
        }
        if matches!(bytes.get(i), Some(b'e' | b'E')) {
            let mut j = i + 1;
            if matches!(bytes.get(j), Some(b'+' | b'-')) {
                j += 1;
            }
            if bytes.get(j).is_some_and(u8::is_ascii_digit) {
                i = j;
                digits(&mut i);
            }
        }
        self.pos = i;
        (
            Tok::Number(&self.src[start..i]),
            SourceSpan { start, end: i },
        )
    }

    fn peek(&mut self) -> Result<(Tok<'a>, SourceSpan), ParseError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex()?);
        }
        Ok(self.peeked.expect("peeked token"))
    }

    fn next(&mut self) -> Result<(Tok<'a>, SourceSpan), ParseError> {
        let t = self.peek()?;
        self.peeked = None;
        Ok(t)
    }

    fn expect(&mut self, want: Tok<'static>, name: &'static str) -> Result<(), ParseError> {
        let (tok, span) = self.next()?;
        if tok == want {
            Ok(())
        } else {
            Err(self.error(
                span,
                format!("expected `{name}`, found {}", tok.describe()),
                &[name],
            ))
        }
    }

    fn expr(&mut self) -> Result<WaveExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek()?.0 {
                Tok::Plus => {
                    self.next()?;
                    lhs = wave::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.next()?;
                    lhs = wave::add(lhs, wave::neg(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<WaveExpr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek()?.0 {
                Tok::Star => {
                    self.next()?;
                    lhs = wave::mul(lhs, self.factor()?);
                }
                Tok::Slash => {
                    self.next()?;
                    lhs = wave::div(lhs, self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<WaveExpr, ParseError> {
        let (tok, span) = self.next()?;
        match tok {
            Tok::Ident("w") => {
                self.expect(Tok::LParen, "(")?;
                let spin = self.num()?;
                self.expect(Tok::Comma, ",")?;
                let rotation = self.num()?;
                self.expect(Tok::RParen, ")")?;
                Ok(WaveExpr::Gen { spin, rotation })
            }
            Tok::Ident("const") => {
                self.expect(Tok::LParen, "(")?;
                let re = self.num()?;
                self.expect(Tok::Comma, ",")?;
                let im = self.num()?;
                self.expect(Tok::RParen, ")")?;
                Ok(WaveExpr::Const { re, im })
            }
            Tok::Ident("inv") => {
                self.expect(Tok::LParen, "(")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(wave::inv(inner))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(inner)
            }
            other => Err(self.error(
                span,
                format!("expected factor, found {}", other.describe()),
                FACTOR_START,
            )),
        }
    }

    fn num(&mut self) -> Result<Num, ParseError> {
        let (tok, span) = self.next()?;
        let Tok::Number(text) = tok else {
            return Err(self.error(
                span,
                format!("expected number, found {}", tok.describe()),
                &["number"],
            ));
        };
        let invalid =
            |why: &str| self.error(span, format!("invalid number `{text}`: {why}"), &["number"]);
        if text.contains(['.', 'e', 'E']) {
            if text.contains('/') {
                return Err(invalid("mixed fraction and decimal"));
            }
            let x: f64 = text.parse().map_err(|_| invalid("malformed decimal"))?;
            if !x.is_finite() {
                return Err(invalid("out of range"));
            }
            Ok(Num::Float(x))
        } else {
            text.parse::<Rational>()
                .map(Num::Exact)
                .map_err(|e| invalid(&e.to_string()))
        }
    }
}

pub fn parse_wave(text: &str) -> Result<WaveExpr, ParseError> {
    let mut p = Parser::new(text);
    let e = p.expr()?;
    match p.next()? {
        (Tok::End, _) => Ok(e),
        (tok, span) => Err(p.error(
            span,
            format!(
                "expected operator or end of input, found {}",
                tok.describe()
            ),
            &["+", "-", "*", "/", "end of input"],
        )),
    }
}

fn write_num(out: &mut String, n: Num) {
    use std::fmt::Write;
    match n {
        Num::Exact(q) => write!(out, "{q}"),
        // `{:?}` keeps a `.` or exponent so the literal reads back as a float,
        // and prints the shortest text that round-trips.
        Num::Float(x) => write!(out, "{x:?}"),
    }
    .expect("writing to a String cannot fail");
}

fn is_minus_one(e: &WaveExpr) -> bool {
    matches!(e, WaveExpr::Gen { spin: Num::Exact(f), rotation: Num::Exact(t) }
        if f.is_zero() && *t == Rational::new(1, 2).expect("1/2"))
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Level {
    Expr,
    Term,
    Factor,
}

fn write_expr(out: &mut String, e: &WaveExpr, ctx: Level) {
    let own = match e {
        WaveExpr::Add(..) => Level::Expr,
        WaveExpr::Mul(..) => Level::Term,
        _ => Level::Factor,
    };
    let paren = own < ctx;
    if paren {
        out.push('(');
    }
    match e {
        WaveExpr::Gen { spin, rotation } => {
            out.push_str("w(");
            write_num(out, *spin);
            out.push(',');
            write_num(out, *rotation);
            out.push(')');
        }
        WaveExpr::Const { re, im } => {
            out.push_str("const(");
            write_num(out, *re);
            out.push(',');
            write_num(out, *im);
            out.push(')');
        }
        WaveExpr::Inv(a) => {
            out.push_str("inv(");
            write_expr(out, a, Level::Expr);
            out.push(')');
        }
        WaveExpr::Add(a, b) => {
            write_expr(out, a, Level::Expr);
            match b.as_ref() {
                WaveExpr::Mul(m, rhs) if is_minus_one(m) => {
                    out.push('-');
                    write_expr(out, rhs, Level::Term);
                }
                _ => {
                    out.push('+');
                    write_expr(out, b, Level::Term);
                }
            }
        }
        WaveExpr::Mul(a, b) => {
            write_expr(out, a, Level::Term);
            match b.as_ref() {
                WaveExpr::Inv(d) => {
                    out.push('/');
                    write_expr(out, d, Level::Factor);
                }
                _ => {
                    out.push('*');
                    write_expr(out, b, Level::Factor);
                }
            }
        }
    }
    if paren {
        out.push(')');
    }
}

/// Canonical text: no whitespace, parentheses only where precedence or left
/// associativity requires them, `-` and `/` used for their desugared forms.
pub fn print_wave(e: &WaveExpr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, Level::Expr);
    out
}

impl fmt::Display for WaveExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_wave(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::{add, gen, inv, mul, neg, spin};

    fn q(n: i64, d: i64) -> Num {
        Num::Exact(Rational::new(n, d).unwrap())
    }

    #[test]
    fn parses_generators() {
        assert_eq!(parse_wave("w(0,0)").unwrap(), gen(0, 0).unwrap());
        let e = parse_wave("w(1,1/4)*w(2,1/4)").unwrap();
        assert_eq!(e, mul(gen(1, q(1, 4)).unwrap(), gen(2, q(1, 4)).unwrap()));
        assert_eq!(spin(&e), 3.0);
        assert_eq!(
            parse_wave(" w ( -3 , 1/4 ) ").unwrap(),
            gen(-3, q(1, 4)).unwrap()
        );
        assert_eq!(parse_wave("w(0.5,1e-3)").unwrap(), gen(0.5, 1e-3).unwrap());
        assert_eq!(parse_wave("w(2E2,-1.)").unwrap(), gen(200.0, -1.0).unwrap());
    }

    #[test]
    fn desugars_minus_and_slash() {
        let a = gen(1, 0).unwrap();
        let b = gen(2, 0).unwrap();
        assert_eq!(
            parse_wave("w(1,0)-w(2,0)").unwrap(),
            add(a.clone(), neg(b.clone()))
        );
        assert_eq!(
            parse_wave("w(1,0)/w(2,0)").unwrap(),
            mul(a.clone(), inv(b.clone()))
        );
        assert_eq!(
            parse_wave("w(1,0)+w(2,0)*w(1,0)").unwrap(),
            add(a.clone(), mul(b.clone(), a.clone()))
        );
        assert_eq!(
            parse_wave("const(1,-2)*inv(w(1,0))").unwrap(),
            mul(wave::constant(1, -2).unwrap(), inv(a))
        );
    }

    #[test]
    fn malformed_double_plus() {
        let err = parse_wave("w(1,0) + + w(2,0)").unwrap_err();
        assert_eq!(err.span, SourceSpan { start: 9, end: 10 });
        assert!(err.message.starts_with("expected factor"));
        assert_eq!(err.expected, FACTOR_START);
    }

    #[test]
    fn error_spans() {
        let cases = [
            ("", 0, "expected factor"),
            ("w(1,0", 5, "expected `)`"),
            ("w(1 0)", 4, "expected `,`"),
            ("w(a,0)", 2, "expected number"),
            ("w(1/0,0)", 2, "invalid number"),
            ("w(1,0) w(2,0)", 7, "expected operator"),
            ("x(1,0)", 0, "expected factor"),
            ("w(1,0)#", 6, "unexpected character"),
            ("w(1.5/2,0)", 5, "expected `,`"),
            ("w(1e999,0)", 2, "invalid number"),
            ("é", 0, "unexpected character"),
        ];
        for (src, at, msg) in cases {
            let err = parse_wave(src).unwrap_err();
            assert_eq!(err.span.start, at, "{src}: {err}");
            assert!(err.span.end <= src.len());
            assert!(err.message.starts_with(msg), "{src}: {}", err.message);
            assert!(!err.expected.is_empty());
        }
    }

    #[test]
    fn printer_examples() {
        assert_eq!(print_wave(&gen(1, q(1, 4)).unwrap()), "w(1,1/4)");
        let a = gen(1, 0).unwrap();
        let b = gen(2, 0).unwrap();
        let c = gen(3, 0).unwrap();
        let e = mul(add(a.clone(), b.clone()), c.clone());
        assert_eq!(print_wave(&e), "(w(1,0)+w(2,0))*w(3,0)");
        let e = add(a.clone(), add(b.clone(), c.clone()));
        assert_eq!(print_wave(&e), "w(1,0)+(w(2,0)+w(3,0))");
        let e = add(
            add(a.clone(), neg(b.clone())),
            neg(add(b.clone(), c.clone())),
        );
        assert_eq!(print_wave(&e), "w(1,0)-w(2,0)-(w(2,0)+w(3,0))");
        let e = mul(a.clone(), inv(mul(b.clone(), c.clone())));
        assert_eq!(print_wave(&e), "w(1,0)/(w(2,0)*w(3,0))");
        assert_eq!(print_wave(&gen(0.5, -0.0).unwrap()), "w(0.5,-0.0)");
    }

    #[test]
    fn printed_text_is_canonical() {
        for src in [
            "w(1,0) - w(2, 2/4) / w(3,0)",
            "((w(1,0)))",
            "inv( w(1,0)+const(2.5,0) )",
        ] {
            let once = print_wave(&parse_wave(src).unwrap());
            assert_eq!(print_wave(&parse_wave(&once).unwrap()), once);
        }
        assert_eq!(print_wave(&parse_wave("w(1, 2/4)").unwrap()), "w(1,1/2)");
    }
}
