//! Model file grammar: parsing DAE descriptions into systems and writing
//! systems back out, round-trip stable at the structural level.
//!
//! ```text
//! # comment to end of line
//! param R0 = 1000;            # rational constants, 1/2 or 1.5e-3 forms
//! var x1, x2;
//! driver h1, h2;
//! eq f1: x1 + x2 + h1(t) = 0;
//! ```
//!
//! Derivatives use primes (`x''`) or a parenthesized order (`x^(6)`);
//! primes bind tighter than powers, so `x'^2` squares the first
//! derivative. `^(k)` directly after an identifier is a derivative order;
//! powers are written without parentheses (`x^2`) or with a negative
//! exponent (`x^(-1)`). Drivers are always applied to t: `h1'(t)`.

use crate::structure::{DaeSystem, Equation, Variable};
use crate::symbolic::{Expr, VarId};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(BigRational),
    Prime(usize),
    Punct(char),
    Eof,
}

struct Lexer {
    tokens: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn err(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |i: &mut usize, col: &mut usize| {
            *i += 1;
            *col += 1;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => advance(&mut i, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '\'' => {
                let mut count = 0;
                while i < chars.len() && chars[i] == '\'' {
                    count += 1;
                    advance(&mut i, &mut col);
                }
                tokens.push((Tok::Prime(count), tl, tc));
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(&mut i, &mut col);
                }
                let mut frac_digits = 0usize;
                if i < chars.len() && chars[i] == '.' {
                    advance(&mut i, &mut col);
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        frac_digits += 1;
                        advance(&mut i, &mut col);
                    }
                }
                let mantissa: String = chars[start..i].iter().filter(|&&c| c != '.').collect();
                let mut exp: i64 = 0;
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let save = (i, col);
                    advance(&mut i, &mut col);
                    let mut sign = 1i64;
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        if chars[i] == '-' {
                            sign = -1;
                        }
                        advance(&mut i, &mut col);
                    }
                    let estart = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        advance(&mut i, &mut col);
                    }
                    if estart == i {
                        // Not an exponent after all (e.g. an identifier follows).
                        i = save.0;
                        col = save.1;
                    } else {
                        let digits: String = chars[estart..i].iter().collect();
                        exp = sign
                            * digits
                                .parse::<i64>()
                                .map_err(|_| err(tl, tc, "exponent out of range"))?;
                    }
                }
                let digits: BigInt = mantissa
                    .parse()
                    .map_err(|_| err(tl, tc, "bad number literal"))?;
                let net = exp - frac_digits as i64;
                let ten = BigInt::from(10);
                let value = if net >= 0 {
                    BigRational::from_integer(digits * ten.pow(net as u32))
                } else {
                    BigRational::new(digits, ten.pow((-net) as u32))
                };
                tokens.push((Tok::Number(value), tl, tc));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    advance(&mut i, &mut col);
                }
                tokens.push((Tok::Ident(chars[start..i].iter().collect()), tl, tc));
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | '=' | ';' | ':' | ',' => {
                tokens.push((Tok::Punct(c), tl, tc));
                advance(&mut i, &mut col);
            }
            other => return Err(err(tl, tc, format!("unexpected character {other:?}"))),
        }
    }
    tokens.push((Tok::Eof, line, col));
    Ok(Lexer { tokens, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.tokens[self.pos];
        (l, c)
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        let (l, co) = self.here();
        match self.next() {
            Tok::Punct(p) if p == c => Ok(()),
            other => Err(err(l, co, format!("expected {c:?}, found {other:?}"))),
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        let (l, c) = self.here();
        match self.next() {
            Tok::Ident(s) => Ok(s),
            other => Err(err(l, c, format!("expected identifier, found {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SymbolKind {
    Var,
    Driver,
    Param,
}

struct ParserState {
    vars: Vec<String>,
    drivers: Vec<String>,
    params: BTreeMap<String, BigRational>,
    kinds: BTreeMap<String, SymbolKind>,
    equations: Vec<(String, Expr)>,
}

/// Parses a model file into a validated square system.
pub fn parse_model(text: &str) -> Result<DaeSystem, ParseError> {
    let mut lx = lex(text)?;
    let mut st = ParserState {
        vars: vec![],
        drivers: vec![],
        params: BTreeMap::new(),
        kinds: BTreeMap::new(),
        equations: vec![],
    };

    loop {
        let (l, c) = lx.here();
        match lx.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(word) => match word.as_str() {
                "param" => {
                    lx.next();
                    let name = lx.expect_ident()?;
                    declare(&mut st, &name, SymbolKind::Param, l, c)?;
                    lx.expect_punct('=')?;
                    let (vl, vc) = lx.here();
                    let e = parse_expr(&mut lx, &st)?;
                    let value = fold_constant(&e)
                        .ok_or_else(|| err(vl, vc, "parameter value must be a rational constant"))?;
                    st.params.insert(name, value);
                    lx.expect_punct(';')?;
                }
                "var" => {
                    lx.next();
                    loop {
                        let (dl, dc) = lx.here();
                        let name = lx.expect_ident()?;
                        declare(&mut st, &name, SymbolKind::Var, dl, dc)?;
                        st.vars.push(name);
                        if matches!(lx.peek(), Tok::Punct(',')) {
                            lx.next();
                        } else {
                            break;
                        }
                    }
                    lx.expect_punct(';')?;
                }
                "driver" => {
                    lx.next();
                    loop {
                        let (dl, dc) = lx.here();
                        let name = lx.expect_ident()?;
                        declare(&mut st, &name, SymbolKind::Driver, dl, dc)?;
                        st.drivers.push(name);
                        if matches!(lx.peek(), Tok::Punct(',')) {
                            lx.next();
                        } else {
                            break;
                        }
                    }
                    lx.expect_punct(';')?;
                }
                "eq" => {
                    lx.next();
                    let name = lx.expect_ident()?;
                    if st.equations.iter().any(|(n, _)| *n == name) {
                        return Err(err(l, c, format!("duplicate equation name {name}")));
                    }
                    lx.expect_punct(':')?;
                    let lhs = parse_expr(&mut lx, &st)?;
                    lx.expect_punct('=')?;
                    let rhs = parse_expr(&mut lx, &st)?;
                    lx.expect_punct(';')?;
                    let expr = crate::symbolic::simplify(lhs - rhs);
                    st.equations.push((name, expr));
                }
                other => {
                    return Err(err(
                        l,
                        c,
                        format!("expected param/var/driver/eq, found {other:?}"),
                    ))
                }
            },
            other => {
                return Err(err(
                    l,
                    c,
                    format!("expected a declaration keyword, found {other:?}"),
                ))
            }
        }
    }

    if st.equations.len() != st.vars.len() {
        let (l, c) = lx.here();
        return Err(err(
            l,
            c,
            format!(
                "system is not square: {} equations in {} variables",
                st.equations.len(),
                st.vars.len()
            ),
        ));
    }

    let sys = DaeSystem {
        equations: st
            .equations
            .into_iter()
            .map(|(name, expr)| Equation { name, expr })
            .collect(),
        variables: st
            .vars
            .into_iter()
            .map(|name| Variable {
                name,
                introduced: false,
            })
            .collect(),
        parameters: st.params,
        drivers: st.drivers.into_iter().collect(),
        conversions: vec![],
    };
    debug_assert!(sys.validate().is_ok());
    Ok(sys)
}

fn declare(
    st: &mut ParserState,
    name: &str,
    kind: SymbolKind,
    line: usize,
    col: usize,
) -> Result<(), ParseError> {
    if matches!(name, "sin" | "cos" | "exp" | "t") {
        return Err(err(line, col, format!("{name} is a reserved word")));
    }
    if st.kinds.insert(name.to_string(), kind).is_some() {
        return Err(err(line, col, format!("{name} is already declared")));
    }
    Ok(())
}

fn fold_constant(e: &Expr) -> Option<BigRational> {
    crate::symbolic::eval_exact(&crate::symbolic::simplify(e.clone()), &BTreeMap::new(), &BTreeMap::new())
}

fn parse_expr(lx: &mut Lexer, st: &ParserState) -> Result<Expr, ParseError> {
    let mut terms = vec![parse_term(lx, st)?];
    loop {
        match lx.peek() {
            Tok::Punct('+') => {
                lx.next();
                terms.push(parse_term(lx, st)?);
            }
            Tok::Punct('-') => {
                lx.next();
                let t = parse_term(lx, st)?;
                terms.push(Expr::Neg(Box::new(t)));
            }
            _ => break,
        }
    }
    Ok(if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expr::Sum(terms)
    })
}

fn parse_term(lx: &mut Lexer, st: &ParserState) -> Result<Expr, ParseError> {
    let mut acc = parse_unary(lx, st)?;
    loop {
        match lx.peek() {
            Tok::Punct('*') => {
                lx.next();
                let rhs = parse_unary(lx, st)?;
                acc = acc * rhs;
            }
            Tok::Punct('/') => {
                lx.next();
                let (l, c) = lx.here();
                let rhs = parse_unary(lx, st)?;
                if rhs.is_zero_literal() {
                    return Err(err(l, c, "division by the constant zero"));
                }
                acc = acc / rhs;
            }
            _ => break,
        }
    }
    Ok(acc)
}

fn parse_unary(lx: &mut Lexer, st: &ParserState) -> Result<Expr, ParseError> {
    if matches!(lx.peek(), Tok::Punct('-')) {
        lx.next();
        let inner = parse_unary(lx, st)?;
        return Ok(Expr::Neg(Box::new(inner)));
    }
    parse_power(lx, st)
}

fn parse_power(lx: &mut Lexer, st: &ParserState) -> Result<Expr, ParseError> {
    let base = parse_atom(lx, st)?;
    if matches!(lx.peek(), Tok::Punct('^')) {
        lx.next();
        let k = parse_exponent(lx)?;
        return Ok(Expr::Pow(Box::new(base), k));
    }
    Ok(base)
}

fn parse_exponent(lx: &mut Lexer) -> Result<i32, ParseError> {
    let (l, c) = lx.here();
    match lx.next() {
        Tok::Number(r) => int_exponent(&r, false, l, c),
        Tok::Punct('(') => {
            let mut neg = false;
            if matches!(lx.peek(), Tok::Punct('-')) {
                lx.next();
                neg = true;
            }
            let (nl, nc) = lx.here();
            let r = match lx.next() {
                Tok::Number(r) => r,
                other => return Err(err(nl, nc, format!("expected integer exponent, found {other:?}"))),
            };
            lx.expect_punct(')')?;
            int_exponent(&r, neg, nl, nc)
        }
        other => Err(err(l, c, format!("expected integer exponent, found {other:?}"))),
    }
}

fn int_exponent(r: &BigRational, neg: bool, l: usize, c: usize) -> Result<i32, ParseError> {
    if !r.denom().is_one() {
        return Err(err(l, c, "exponent must be an integer"));
    }
    let k: i32 = r
        .numer()
        .try_into()
        .map_err(|_| err(l, c, "exponent out of range"))?;
    Ok(if neg { -k } else { k })
}

fn parse_atom(lx: &mut Lexer, st: &ParserState) -> Result<Expr, ParseError> {
    let (l, c) = lx.here();
    match lx.next() {
        Tok::Number(r) => Ok(Expr::Num(r)),
        Tok::Punct('(') => {
            let e = parse_expr(lx, st)?;
            lx.expect_punct(')')?;
            Ok(e)
        }
        Tok::Ident(name) => parse_symbol(lx, st, name, l, c),
        other => Err(err(l, c, format!("expected an expression, found {other:?}"))),
    }
}

fn parse_symbol(
    lx: &mut Lexer,
    st: &ParserState,
    name: String,
    l: usize,
    c: usize,
) -> Result<Expr, ParseError> {
    if name == "t" {
        return Ok(Expr::Time);
    }
    if matches!(name.as_str(), "sin" | "cos" | "exp") {
        lx.expect_punct('(')?;
        let arg = parse_expr(lx, st)?;
        lx.expect_punct(')')?;
        return Ok(match name.as_str() {
            "sin" => Expr::Sin(Box::new(arg)),
            "cos" => Expr::Cos(Box::new(arg)),
            _ => Expr::Exp(Box::new(arg)),
        });
    }

    let kind = *st
        .kinds
        .get(&name)
        .ok_or_else(|| err(l, c, format!("undeclared symbol {name}")))?;

    let mut order = 0u32;
    if let Tok::Prime(k) = lx.peek() {
        order += *k as u32;
        lx.next();
    }
    // ^(k) with a nonnegative literal directly after an identifier is a
    // derivative order; other uses of ^ are powers handled by the caller.
    if matches!(lx.peek(), Tok::Punct('^'))
        && matches!(lx.tokens.get(lx.pos + 1).map(|t| &t.0), Some(Tok::Punct('(')))
        && matches!(lx.tokens.get(lx.pos + 2).map(|t| &t.0), Some(Tok::Number(_)))
        && matches!(lx.tokens.get(lx.pos + 3).map(|t| &t.0), Some(Tok::Punct(')')))
    {
        lx.next();
        lx.next();
        let (nl, nc) = lx.here();
        if let Tok::Number(r) = lx.next() {
            let k = int_exponent(&r, false, nl, nc)?;
            if k < 0 {
                return Err(err(nl, nc, "derivative order must be nonnegative"));
            }
            order += k as u32;
        }
        lx.expect_punct(')')?;
    }

    match kind {
        SymbolKind::Var => {
            if matches!(lx.peek(), Tok::Punct('(')) {
                return Err(err(l, c, format!("variable {name} cannot take arguments")));
            }
            let id = st
                .vars
                .iter()
                .position(|v| *v == name)
                .expect("declared variable");
            Ok(Expr::Var(VarId(id), order))
        }
        SymbolKind::Driver => {
            lx.expect_punct('(')?;
            let (tl, tc) = lx.here();
            match lx.next() {
                Tok::Ident(s) if s == "t" => {}
                other => {
                    return Err(err(
                        tl,
                        tc,
                        format!("driving function argument must be t, found {other:?}"),
                    ))
                }
            }
            lx.expect_punct(')')?;
            Ok(Expr::Driver(name, order))
        }
        SymbolKind::Param => {
            if order > 0 {
                return Err(err(l, c, format!("parameter {name} cannot be differentiated")));
            }
            Ok(Expr::Param(name))
        }
    }
}

// --- writing ------------------------------------------------------------

/// Renders a system in the model grammar. Conversion provenance goes in as
/// comments, so a fixed model documents how it was produced.
pub fn write_model(sys: &DaeSystem) -> String {
    let mut out = String::new();
    for rec in &sys.conversions {
        out.push_str(&format!(
            "# {} conversion on block {}: {}",
            rec.kind,
            rec.block,
            match &rec.replaced_equation {
                Some(name) => format!("replaced {name}"),
                None => format!(
                    "introduced {} with {}",
                    rec.new_variables.join(", "),
                    rec.new_equations.join(", ")
                ),
            }
        ));
        out.push_str(&format!(
            " (valΣ {} -> {})\n",
            rec.old_val_sigma, rec.new_val_sigma
        ));
    }
    for (name, value) in &sys.parameters {
        out.push_str(&format!("param {name} = {};\n", rational_str(value)));
    }
    if !sys.drivers.is_empty() {
        let names: Vec<&str> = sys.drivers.iter().map(|s| s.as_str()).collect();
        out.push_str(&format!("driver {};\n", names.join(", ")));
    }
    if !sys.variables.is_empty() {
        let names: Vec<&str> = sys.variables.iter().map(|v| v.name.as_str()).collect();
        out.push_str(&format!("var {};\n", names.join(", ")));
    }
    for eq in &sys.equations {
        out.push_str(&format!(
            "eq {}: {} = 0;\n",
            eq.name,
            write_expr(&eq.expr, sys)
        ));
    }
    out
}

fn rational_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders an expression in the model grammar.
pub fn write_expr(e: &Expr, sys: &DaeSystem) -> String {
    render(e, sys, Prec::Sum)
}

#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Prec {
    Sum,
    Prod,
    Atom,
}

fn var_str(name: &str, order: u32) -> String {
    if order <= 3 {
        format!("{name}{}", "'".repeat(order as usize))
    } else {
        format!("{name}^({order})")
    }
}

fn render(e: &Expr, sys: &DaeSystem, ctx: Prec) -> String {
    match e {
        Expr::Num(r) => {
            let s = rational_str(r);
            if (r.is_negative() || !r.denom().is_one()) && ctx > Prec::Sum {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Param(name) => name.clone(),
        Expr::Time => "t".to_string(),
        Expr::Var(j, k) | Expr::NewVar(j, k) => var_str(sys.var_name(*j), *k),
        Expr::Driver(name, k) => format!("{}(t)", var_str(name, *k)),
        Expr::Sum(ts) => {
            let mut s = String::new();
            for (i, t) in ts.iter().enumerate() {
                let (neg, body) = signed(t, sys);
                if i == 0 {
                    if neg {
                        s.push('-');
                    }
                } else {
                    s.push_str(if neg { " - " } else { " + " });
                }
                s.push_str(&body);
            }
            if ctx > Prec::Sum {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Prod(_) => {
            let (neg, body) = signed(e, sys);
            let s = if neg { format!("-{body}") } else { body };
            if ctx > Prec::Sum && neg {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Neg(a) => {
            let inner = render(a, sys, Prec::Prod);
            let s = format!("-{inner}");
            if ctx > Prec::Sum {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Div(a, b) => {
            let s = format!(
                "{}/{}",
                render(a, sys, Prec::Atom),
                render(b, sys, Prec::Atom)
            );
            if ctx > Prec::Prod {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Pow(b, k) => {
            let base = match b.as_ref() {
                Expr::Var(..) | Expr::NewVar(..) | Expr::Param(_) | Expr::Time => {
                    render(b, sys, Prec::Atom)
                }
                _ => format!("({})", render(b, sys, Prec::Sum)),
            };
            if *k < 0 {
                format!("{base}^({k})")
            } else {
                format!("{base}^{k}")
            }
        }
        Expr::Sin(a) => format!("sin({})", render(a, sys, Prec::Sum)),
        Expr::Cos(a) => format!("cos({})", render(a, sys, Prec::Sum)),
        Expr::Exp(a) => format!("exp({})", render(a, sys, Prec::Sum)),
    }
}

/// Splits a term into a sign and the rendering of its magnitude, pulling
/// rational coefficients and negative powers into x/y form.
fn signed(e: &Expr, sys: &DaeSystem) -> (bool, String) {
    let factors: Vec<&Expr> = match e {
        Expr::Prod(fs) => fs.iter().collect(),
        other => vec![other],
    };
    let mut coeff = BigRational::one();
    let mut num_parts: Vec<String> = Vec::new();
    let mut den_parts: Vec<String> = Vec::new();
    for f in factors {
        match f {
            Expr::Num(r) => coeff *= r.clone(),
            Expr::Pow(b, k) if *k < 0 => {
                let base = match b.as_ref() {
                    Expr::Var(..) | Expr::NewVar(..) | Expr::Param(_) | Expr::Time => {
                        render(b, sys, Prec::Atom)
                    }
                    _ => format!("({})", render(b, sys, Prec::Sum)),
                };
                if *k == -1 {
                    den_parts.push(base);
                } else {
                    den_parts.push(format!("{base}^{}", -k));
                }
            }
            other => num_parts.push(render(other, sys, Prec::Atom)),
        }
    }
    let neg = coeff.is_negative();
    let coeff = coeff.abs();
    if !coeff.numer().is_one() || num_parts.is_empty() {
        num_parts.insert(0, coeff.numer().to_string());
    }
    if !coeff.denom().is_one() {
        den_parts.insert(0, coeff.denom().to_string());
    }
    let mut s = num_parts.join("*");
    match den_parts.len() {
        0 => {}
        1 => s = format!("{s}/{}", den_parts[0]),
        _ => s = format!("{s}/({})", den_parts.join("*")),
    }
    (neg, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_one_equation_model() {
        let sys = parse_model("var x;\neq f: x = 0;\n").unwrap();
        assert_eq!(sys.n(), 1);
        assert_eq!(sys.equations[0].name, "f");
    }

    #[test]
    fn rejects_undeclared_symbols() {
        let e = parse_model("var x;\neq f: x + z = 0;\n").unwrap_err();
        assert!(e.message.contains("undeclared symbol z"));
        assert_eq!(e.line, 2);
    }

    #[test]
    fn rejects_non_square_systems() {
        let e = parse_model("var x, y;\neq f: x + y = 0;\n").unwrap_err();
        assert!(e.message.contains("not square"));
    }

    #[test]
    fn primes_bind_tighter_than_powers() {
        let sys = parse_model("var x;\neq f: x'^2 = 0;\n").unwrap();
        let expected = crate::symbolic::simplify(Expr::Var(VarId(0), 1).pow(2));
        assert_eq!(sys.equations[0].expr, expected);
    }

    #[test]
    fn caret_order_is_a_derivative() {
        let sys = parse_model("var x;\neq f: x^(6) = 0;\n").unwrap();
        assert_eq!(sys.equations[0].expr, Expr::Var(VarId(0), 6));
        // ...but a negative parenthesized exponent is a power.
        let sys = parse_model("var x;\neq f: x^(-1) + x = 0;\n").unwrap();
        let expected =
            crate::symbolic::simplify(Expr::Var(VarId(0), 0).pow(-1) + Expr::Var(VarId(0), 0));
        assert_eq!(sys.equations[0].expr, expected);
    }

    #[test]
    fn drivers_take_time_arguments() {
        let sys = parse_model("var x;\ndriver h;\neq f: x' + h''(t) = 0;\n").unwrap();
        let expected = crate::symbolic::simplify(Expr::Var(VarId(0), 1) + Expr::driver("h", 2));
        assert_eq!(sys.equations[0].expr, expected);
        assert!(parse_model("var x;\ndriver h;\neq f: x + h = 0;\n").is_err());
    }

    #[test]
    fn decimal_literals_are_exact() {
        let sys = parse_model("param a = 1.6e-8;\nvar x;\neq f: a*x = 0;\n").unwrap();
        assert_eq!(
            sys.parameters["a"],
            BigRational::new(16.into(), 1_000_000_000i64.into())
        );
    }

    #[test]
    fn expressions_round_trip_through_the_grammar() {
        let text = "param a = 3/2;\nvar x, y;\ndriver h;\n\
                    eq f1: a*x'' - y^2/(1 + x^2) + sin(x) = 0;\n\
                    eq f2: h'(t)*x - exp(y)*t + 5/7 = 0;\n";
        let sys = parse_model(text).unwrap();
        let written = write_model(&sys);
        let reparsed = parse_model(&written).unwrap();
        for (a, b) in sys.equations.iter().zip(reparsed.equations.iter()) {
            assert_eq!(a.expr, b.expr, "round trip changed {}", a.name);
        }
    }
}
