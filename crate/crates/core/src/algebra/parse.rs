//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! base     := number | variable | '(' expr ')'
//! exponent := ['-'] integer | '(' ['-'] integer ['/' integer] ')'
//! ```

use super::closed::ClosedForm;
use super::poly::MPoly;
use super::rat::Rat;
use super::ratfunc::RatFunc;
use super::var::Var;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            out.push((pos, Tok::Num(s.parse().expect("digits"))));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().map(|&(_, c)| c).collect())));
        } else if "+-*/^()".contains(c) {
            out.push((pos, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Syntax { pos, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    allowed: Option<&'a [Var]>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<ClosedForm> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(self.term()?.neg());
            } else {
                return Ok(ClosedForm::sum_of(terms));
            }
        }
    }

    fn term(&mut self) -> Result<ClosedForm> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.factor()?);
            } else if self.peek() == Some(&Tok::Sym('/')) {
                let pos = self.pos();
                self.at += 1;
                let d = self.factor()?;
                if d.is_zero() {
                    return Err(Error::Syntax { pos, msg: "division by zero".into() });
                }
                acc = acc.div(&d)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<ClosedForm> {
        if self.eat('-') {
            return Ok(self.factor()?.neg());
        }
        let base = self.base()?;
        if self.eat('^') {
            let pos = self.pos();
            let e = self.exponent()?;
            return base.pow(&e).map_err(|err| match err {
                Error::DivisionByZero => Error::Syntax { pos, msg: "zero raised to a negative power".into() },
                other => other,
            });
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.at += 1;
                Ok(if neg { -n } else { n })
            }
            Some(Tok::Ident(name)) => Err(Error::UnknownVariable(name)),
            _ => self.err("expected an integer exponent"),
        }
    }

    fn exponent(&mut self) -> Result<Rat> {
        if self.eat('(') {
            let n = self.integer()?;
            let d = if self.eat('/') { self.integer()? } else { BigInt::from(1) };
            self.expect(')')?;
            if d.is_zero() {
                return self.err("zero exponent denominator");
            }
            return Ok(Rat::new(n, d));
        }
        Ok(Rat::from_integer(self.integer()?))
    }

    fn base(&mut self) -> Result<ClosedForm> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.at += 1;
                Ok(ClosedForm::constant(Rat::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                let v = Var::from_name(&name).ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                if v.is_aux() || self.allowed.is_some_and(|a| !a.contains(&v)) {
                    return Err(Error::UnknownVariable(name));
                }
                self.at += 1;
                Ok(ClosedForm::var(v))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

fn run(text: &str, allowed: Option<&[Var]>) -> Result<ClosedForm> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0, end: text.len(), allowed };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parse with a fixed set of admissible variables.
pub fn parse_expr(text: &str, variables: &[Var]) -> Result<ClosedForm> {
    run(text, Some(variables))
}

/// Parse admitting every nameable variable.
pub fn parse_any(text: &str) -> Result<ClosedForm> {
    run(text, None)
}

pub fn parse_ratfunc(text: &str) -> Result<RatFunc> {
    parse_any(text)?.to_ratfunc()
}

pub fn parse_poly(text: &str) -> Result<MPoly> {
    let r = parse_ratfunc(text)?;
    if r.is_poly() {
        Ok(r.num().clone())
    } else {
        Err(Error::Domain(format!("`{text}` is not a polynomial")))
    }
}

/// Split a comma-separated tuple at top-level commas.
pub fn split_tuple(text: &str) -> Vec<&str> {
    let mut depth = 0i32;
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(text[start..].trim());
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat::rat;

    const XY: &[Var] = &[Var::X, Var::Y, Var::Z, Var::W];

    #[test]
    fn grammar_examples() {
        let f = parse_expr("x*(y+1)^2", XY).unwrap();
        assert_eq!(f, ClosedForm::Rational(parse_ratfunc("x*y^2+2*x*y+x").unwrap()));
        match parse_expr("(y+1)^(4/3)", XY).unwrap() {
            ClosedForm::Power(_, e) => assert_eq!(e, rat(4, 3)),
            other => panic!("expected a power node, got {other:?}"),
        }
        assert_eq!(parse_expr("x*(y+1)^(N-1)", XY), Err(Error::UnknownVariable("N".into())));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_expr("x+*y", XY) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("(x+1", XY).is_err());
        assert!(parse_expr("x $ y", XY).is_err());
        assert_eq!(parse_expr("t", XY), Err(Error::UnknownVariable("t".into())));
    }

    #[test]
    fn rationals_and_unary_minus() {
        assert_eq!(parse_ratfunc("-1/3*x").unwrap(), parse_ratfunc("x*(-1)/3").unwrap());
        assert_eq!(parse_ratfunc("2^-1").unwrap(), RatFunc::constant(rat(1, 2)));
        assert_eq!(parse_ratfunc("x^(-2)").unwrap(), parse_ratfunc("1/x^2").unwrap());
    }

    #[test]
    fn tuple_split() {
        assert_eq!(split_tuple("x*(y+1)^2, y/(y+1)"), vec!["x*(y+1)^2", "y/(y+1)"]);
    }
}
