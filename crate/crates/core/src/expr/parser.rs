//! Recursive-descent parser for the operator-expression language.
//!
//! ```text
//! expr     := ["-"] term (("+"|"-") term)* ;
//! term     := factor (("*" factor) | ("/" factor))* ;
//! factor   := atom ("^" ["-"] integer)? ;
//! atom     := rational | "i" | ident | "(" expr ")" | func "(" expr ")" ;
//! rational := integer ("/" positive_integer)? ;
//! ```
//!
//! An integer followed by `/integer` is read as a rational literal except
//! directly after a `/`, so `t/2/3` is `(t/2)/3`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::ast::{is_reserved, Expr, Func, OpLeaf};
use crate::gauss::GaussRat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredIdentifier(String),
    OperatorInFunction,
    OperatorInDenominator,
    OperatorPower(i32),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub pos: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error at position {}: {msg}", self.pos),
            ParseErrorKind::UndeclaredIdentifier(name) => {
                write!(f, "undeclared identifier `{name}` at position {}", self.pos)
            }
            ParseErrorKind::OperatorInFunction => {
                write!(f, "operator inside function argument at position {}", self.pos)
            }
            ParseErrorKind::OperatorInDenominator => {
                write!(f, "operator in denominator at position {}", self.pos)
            }
            ParseErrorKind::OperatorPower(n) => {
                write!(f, "power {n} of an operator at position {}", self.pos)
            }
        }
    }
}

/// Which non-reserved identifiers are accepted as parameters.
#[derive(Clone, Copy, Debug)]
pub enum Declared<'a> {
    Only(&'a [&'a str]),
    /// Any non-reserved identifier is a parameter.
    Any,
}

impl Declared<'_> {
    fn contains(&self, name: &str) -> bool {
        match self {
            Declared::Only(names) => names.contains(&name),
            Declared::Any => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(text[start..i].parse().unwrap()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap();
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{ch}`")),
                    pos: start,
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
    declared: Declared<'a>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.idx + k).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { kind: ParseErrorKind::Syntax(msg.into()), pos: self.pos() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            self.syntax(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let negate = if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            true
        } else {
            false
        };
        let first = self.term()?;
        let mut terms = vec![if negate { Expr::Product(vec![Expr::int(-1), first]) } else { first }];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    let t = self.term()?;
                    terms.push(Expr::Product(vec![Expr::int(-1), t]));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor(true)?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    let f = self.factor(true)?;
                    acc = Expr::Product(vec![acc, f]);
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    let pos = self.pos();
                    let d = self.factor(false)?;
                    if !d.is_scalar() {
                        return Err(ParseError { kind: ParseErrorKind::OperatorInDenominator, pos });
                    }
                    acc = acc.div(d);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self, allow_rational: bool) -> Result<Expr, ParseError> {
        let pos = self.pos();
        let base = self.atom(allow_rational)?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.idx += 1;
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            true
        } else {
            false
        };
        let n = match self.bump() {
            Some(Tok::Int(n)) => n,
            _ => {
                self.idx -= 1;
                return self.syntax("expected integer exponent");
            }
        };
        let n = if negative { -n } else { n };
        let Some(n) = n.to_i32() else {
            return self.syntax("exponent out of range");
        };
        if n < 0 && !base.is_scalar() {
            return Err(ParseError { kind: ParseErrorKind::OperatorPower(n), pos });
        }
        Ok(base.pow(n))
    }

    fn atom(&mut self, allow_rational: bool) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(n)) => {
                if allow_rational
                    && self.peek() == Some(&Tok::Slash)
                    && matches!(self.peek_at(1), Some(Tok::Int(_)))
                {
                    self.idx += 1;
                    let Some(Tok::Int(d)) = self.bump() else { unreachable!() };
                    if d.is_zero() {
                        self.idx -= 1;
                        return self.syntax("zero denominator in rational literal");
                    }
                    return Ok(Expr::Const(GaussRat::real(BigRational::new(n, d))));
                }
                Ok(Expr::Const(GaussRat::real(BigRational::from_integer(n))))
            }
            Some(Tok::Ident(name)) => self.ident(name, pos),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(_) => {
                self.idx -= 1;
                self.syntax("expected a number, identifier or `(`")
            }
            None => self.syntax("unexpected end of input"),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Expr, ParseError> {
        if let Some(f) = Func::from_name(&name) {
            self.expect(Tok::LParen, "`(` after function name")?;
            let arg_pos = self.pos();
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            if !arg.is_scalar() {
                return Err(ParseError { kind: ParseErrorKind::OperatorInFunction, pos: arg_pos });
            }
            return Ok(Expr::func(f, arg));
        }
        if let Some(leaf) = OpLeaf::from_name(&name) {
            return Ok(Expr::Op(leaf));
        }
        Ok(match name.as_str() {
            "t" => Expr::Time,
            "hbar" => Expr::Hbar,
            "i" => Expr::Const(GaussRat::i()),
            _ if !is_reserved(&name) && self.declared.contains(&name) => Expr::Param(name),
            _ => {
                return Err(ParseError { kind: ParseErrorKind::UndeclaredIdentifier(name), pos });
            }
        })
    }
}

/// Parse `text`, accepting only reserved identifiers and `declared_params`.
/// The result is in canonical form.
pub fn parse(text: &str, declared_params: &[&str]) -> Result<Expr, ParseError> {
    parse_with(text, Declared::Only(declared_params))
}

pub fn parse_with(text: &str, declared: Declared<'_>) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, idx: 0, end: text.len(), declared };
    if p.peek().is_none() {
        return p.syntax("empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.syntax("unexpected trailing input");
    }
    Ok(e.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARAMS: &[&str] = &["m", "e", "E", "omega"];

    #[test]
    fn galilean_generator_shape() {
        let e = parse("m*x - p*t", PARAMS).unwrap();
        let expected = Expr::Sum(vec![
            Expr::Product(vec![Expr::param("m"), Expr::Op(OpLeaf::X)]),
            Expr::Product(vec![Expr::int(-1), Expr::Op(OpLeaf::P), Expr::Time]),
        ]);
        assert_eq!(e, expected);
    }

    #[test]
    fn single_leaf() {
        assert_eq!(parse("x", PARAMS).unwrap(), Expr::Op(OpLeaf::X));
    }

    #[test]
    fn dilation_generator_top_level_terms() {
        let e = parse(
            "(1/2)*(x*p + p*x) + (3*e*E*t^2/(2*m))*p - t*p^2/m - e*E*t*x - e^2*E^2*t^3/(2*m)",
            PARAMS,
        )
        .unwrap();
        let Expr::Sum(ts) = &e else { panic!("expected a sum") };
        assert_eq!(ts.len(), 5);
        let Expr::Product(fs) = &ts[0] else { panic!() };
        assert!(matches!(&fs[1], Expr::Sum(inner) if inner.len() == 2));
    }

    #[test]
    fn rational_literal_versus_division() {
        let r = parse("3/2", &[]).unwrap();
        assert_eq!(r, Expr::Const(GaussRat::ratio(3, 2)));
        // left-associative division after `/`
        let d = parse("t/2/3", &[]).unwrap();
        assert_eq!(d, Expr::Time.div(Expr::int(2)).div(Expr::int(3)));
    }

    #[test]
    fn errors() {
        let err = parse("m*x + q", PARAMS).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndeclaredIdentifier("q".into()));
        assert_eq!(err.pos, 6);
        assert_eq!(parse("sin(x)", PARAMS).unwrap_err().kind, ParseErrorKind::OperatorInFunction);
        assert_eq!(parse("m/p", PARAMS).unwrap_err().kind, ParseErrorKind::OperatorInDenominator);
        assert_eq!(parse("x^-1", PARAMS).unwrap_err().kind, ParseErrorKind::OperatorPower(-1));
        assert!(matches!(parse("x^(1/2)", PARAMS).unwrap_err().kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(parse("x * -p", PARAMS).unwrap_err().kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(parse("(x", PARAMS).unwrap_err().kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(parse("", PARAMS).unwrap_err().kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(parse("x $ p", PARAMS).unwrap_err().kind, ParseErrorKind::Syntax(_)));
        // eE is one identifier, not e*E
        assert_eq!(
            parse("eE*x", PARAMS).unwrap_err().kind,
            ParseErrorKind::UndeclaredIdentifier("eE".into())
        );
    }

    #[test]
    fn i_is_a_literal() {
        assert_eq!(parse("i", &[]).unwrap(), Expr::Const(GaussRat::i()));
        assert_eq!(parse("i", &["i"]).unwrap(), Expr::Const(GaussRat::i()));
    }

    #[test]
    fn unary_minus_after_paren() {
        let e = parse("(-x)^2", &[]).unwrap();
        assert_eq!(e, Expr::Product(vec![Expr::int(-1), Expr::Op(OpLeaf::X)]).pow(2));
    }

    #[test]
    fn negative_parameter_power() {
        let e = parse("m^-2*x", PARAMS).unwrap();
        assert_eq!(e, Expr::Product(vec![Expr::param("m").pow(-2), Expr::Op(OpLeaf::X)]));
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse(" m * x-p*t ", PARAMS).unwrap(), parse("m*x - p*t", PARAMS).unwrap());
    }
}
