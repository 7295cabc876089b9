//! Canonical text form. `parse(print(e))` rebuilds `e.canonical()` exactly.

use num_traits::Signed;

use super::ast::Expr;
use crate::gauss::GaussRat;

pub fn print(e: &Expr) -> String {
    let mut out = String::new();
    head(&e.canonical(), &mut out);
    out
}

/// Leading coefficient is negative, so the term prints behind a `-` sign.
fn negative_term(e: &Expr) -> bool {
    match e {
        Expr::Const(c) => c.is_negative_leading(),
        Expr::Product(fs) => matches!(&fs[0], Expr::Const(c) if c.is_negative_leading()),
        _ => false,
    }
}

/// Expression position where a leading unary minus is allowed.
fn head(e: &Expr, out: &mut String) {
    match e {
        Expr::Sum(ts) => {
            head(&ts[0], out);
            for t in &ts[1..] {
                if negative_term(t) {
                    out.push_str(" - ");
                    term(&t.neg(), out);
                } else {
                    out.push_str(" + ");
                    term(t, out);
                }
            }
        }
        e if negative_term(e) => {
            out.push('-');
            term(&e.neg(), out);
        }
        e => term(e, out),
    }
}

fn is_positive_integer(c: &GaussRat) -> bool {
    c.is_real() && c.re.is_integer() && c.re.is_positive()
}

fn constant(c: &GaussRat, out: &mut String) {
    if c.is_negative_leading() {
        out.push('(');
        out.push_str(&c.to_string());
        out.push(')');
    } else {
        out.push_str(&c.to_string());
    }
}

/// Term position: products and quotients print bare, sums get parentheses.
fn term(e: &Expr, out: &mut String) {
    match e {
        Expr::Sum(_) => paren(e, out),
        Expr::Const(c) => constant(c, out),
        Expr::Product(fs) => {
            match &fs[0] {
                Expr::Const(c) => constant(c, out),
                Expr::Div(..) => term(&fs[0], out),
                f => factor(f, out),
            }
            for f in &fs[1..] {
                out.push('*');
                factor(f, out);
            }
        }
        Expr::Div(num, den) => {
            match num.as_ref() {
                Expr::Sum(_) => paren(num, out),
                n => term(n, out),
            }
            out.push('/');
            let mut d = String::new();
            match den.as_ref() {
                Expr::Const(c) if is_positive_integer(c) => constant(c, &mut d),
                Expr::Const(_) => paren(den, &mut d),
                e => factor(e, &mut d),
            }
            // `3/2` right after an integer numerator would lex as one rational
            let bare_int_num = matches!(num.as_ref(), Expr::Const(c) if is_positive_integer(c));
            if bare_int_num && d.starts_with(|c: char| c.is_ascii_digit()) {
                out.push('(');
                out.push_str(&d);
                out.push(')');
            } else {
                out.push_str(&d);
            }
        }
        e => factor(e, out),
    }
}

/// Operand of `*`, `/` or `^` that is not the first factor of a term.
fn factor(e: &Expr, out: &mut String) {
    match e {
        Expr::Pow(base, n) => {
            atom(base, out);
            out.push('^');
            out.push_str(&n.to_string());
        }
        e => atom(e, out),
    }
}

fn atom(e: &Expr, out: &mut String) {
    match e {
        Expr::Const(c) if is_positive_integer(c) => out.push_str(&c.to_string()),
        Expr::Param(p) => out.push_str(p),
        Expr::Time => out.push('t'),
        Expr::Hbar => out.push_str("hbar"),
        Expr::Op(l) => out.push_str(l.name()),
        Expr::Func(f, arg) => {
            out.push_str(f.name());
            out.push('(');
            head(arg, out);
            out.push(')');
        }
        e => paren(e, out),
    }
}

fn paren(e: &Expr, out: &mut String) {
    out.push('(');
    head(e, out);
    out.push(')');
}
