//! Recursive-descent parser for metric component expressions.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" integer)?
//! base   := number | "i" | "z" digits | ("conj" | "exp") "(" expr ")"
//!         | "(" expr ")" | "-" base
//! ```
//!
//! Binary operators associate to the left. Numbers accept an optional
//! fraction and exponent (`2`, `0.5`, `1e-3`); exponents of `^` may carry a
//! leading minus sign.

use super::expr::Expr;
use crate::{HscError, Result};

/// Parse `source` as an expression in `z1..zn`.
pub fn parse(source: &str, n: usize) -> Result<Expr> {
    let mut p = Parser { src: source.as_bytes(), pos: 0, n };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(&format!("unexpected `{}`", p.peek() as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> u8 {
        self.src.get(self.pos).copied().unwrap_or(0)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn error(&self, message: &str) -> HscError {
        HscError::Parse { offset: self.pos, message: message.to_string() }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == c {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else if self.at_end() {
            Err(self.error(&format!("expected `{}`, found end of input", c as char)))
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat(b'-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::mul(lhs, self.factor()?);
            } else if self.eat(b'/') {
                lhs = Expr::div(lhs, self.factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            let negative = self.eat(b'-');
            self.skip_ws();
            let digits_start = self.pos;
            while self.peek().is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits_start {
                self.pos = start;
                return Err(self.error("expected integer exponent"));
            }
            let text = std::str::from_utf8(&self.src[digits_start..self.pos]).unwrap_or("");
            let magnitude: i32 = text.parse().map_err(|_| {
                HscError::Parse { offset: digits_start, message: "exponent out of range".into() }
            })?;
            Ok(Expr::pow(base, if negative { -magnitude } else { magnitude }))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr> {
        self.skip_ws();
        let c = self.peek();
        if c == b'-' {
            self.pos += 1;
            return Ok(Expr::neg(self.base()?));
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            return self.identifier();
        }
        if self.at_end() {
            Err(self.error("unexpected end of input"))
        } else {
            Err(self.error(&format!("unexpected `{}`", c as char)))
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.peek().is_ascii_digit() {
            self.pos += 1;
        }
        if self.peek() == b'.' {
            self.pos += 1;
            while self.peek().is_ascii_digit() {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), b'+' | b'-') {
                self.pos += 1;
            }
            if self.peek().is_ascii_digit() {
                while self.peek().is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // not an exponent (e.g. `2exp(...)` is still a syntax error later)
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Expr::real)
            .map_err(|_| HscError::Parse { offset: start, message: format!("bad number `{text}`") })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.peek().is_ascii_alphanumeric() || self.peek() == b'_' {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match word {
            "i" => Ok(Expr::I),
            "conj" | "exp" => {
                self.expect(b'(')?;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(if word == "conj" { Expr::conj(inner) } else { Expr::exp(inner) })
            }
            _ => {
                let digits = word.strip_prefix('z').filter(|d| {
                    !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())
                });
                match digits {
                    Some(d) => {
                        let index: usize = d
                            .parse()
                            .map_err(|_| HscError::UnknownIdentifier(word.to_string()))?;
                        if index == 0 || index > self.n {
                            Err(HscError::VariableOutOfRange { index, dim: self.n })
                        } else {
                            Ok(Expr::var(index - 1))
                        }
                    }
                    None => Err(HscError::UnknownIdentifier(word.to_string())),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn ms(k: usize) -> Expr {
        Expr::modulus_sq(k)
    }

    #[test]
    fn base_metric_expression() {
        let e = parse("1/(1+z1*conj(z1))", 1).unwrap();
        assert_eq!(e, Expr::div(Expr::real(1.0), Expr::add(Expr::real(1.0), ms(0))));
    }

    #[test]
    fn zero_literal() {
        assert_eq!(parse("0", 1).unwrap(), Expr::real(0.0));
        assert_eq!(parse("  2.50 ", 1).unwrap(), Expr::real(2.5));
        assert_eq!(parse("1e-3", 1).unwrap(), Expr::real(1e-3));
    }

    #[test]
    fn exponential_of_scaled_modulus() {
        let e = parse("exp(2*z2*conj(z2))", 2).unwrap();
        let inner = Expr::mul(Expr::mul(Expr::real(2.0), Expr::var(1)), Expr::conj(Expr::var(1)));
        assert_eq!(e, Expr::exp(inner));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse("1-2-3", 1).unwrap();
        assert_eq!(
            e,
            Expr::sub(Expr::sub(Expr::real(1.0), Expr::real(2.0)), Expr::real(3.0))
        );
        let e = parse("2*z1^2", 1).unwrap();
        assert_eq!(e, Expr::mul(Expr::real(2.0), Expr::pow(Expr::var(0), 2)));
        let e = parse("-z1^2", 1).unwrap();
        assert_eq!(e, Expr::pow(Expr::neg(Expr::var(0)), 2));
        let e = parse("(1+z1)^-2", 1).unwrap();
        assert_eq!(e, Expr::pow(Expr::add(Expr::real(1.0), Expr::var(0)), -2));
        assert_eq!(parse("i", 1).unwrap(), Expr::I);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("1+*z1", 1) {
            Err(HscError::Parse { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        match parse("(1+z1", 1) {
            Err(HscError::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("", 1), Err(HscError::Parse { offset: 0, .. })));
        assert!(matches!(parse("z1^x", 1), Err(HscError::Parse { .. })));
        assert!(matches!(parse("1 2", 1), Err(HscError::Parse { offset: 2, .. })));
    }

    #[test]
    fn identifier_errors() {
        assert!(matches!(parse("log(z1)", 1), Err(HscError::UnknownIdentifier(w)) if w == "log"));
        assert!(matches!(
            parse("z3", 2),
            Err(HscError::VariableOutOfRange { index: 3, dim: 2 })
        ));
        assert!(matches!(parse("z0", 2), Err(HscError::VariableOutOfRange { index: 0, .. })));
    }

    #[test]
    fn printing_round_trips_catalog_forms() {
        for src in [
            "1/(1+z2*conj(z2))",
            "exp(2*z2*conj(z2))/(1+(z1*conj(z1))^2*exp(4*z2*conj(z2)))",
            "(1-z1*conj(z1))^-2",
            "-z1^2--z1*i",
            "1-(2-3)",
            "z1/(z2/z1)",
            "0.5*z1",
        ] {
            let e = parse(src, 2).unwrap();
            assert_eq!(e.to_string(), src, "printing {src}");
        }
    }

    #[test]
    fn complex_constants_print_parenthesised() {
        let e = Expr::mul(Expr::Const(C64::new(0.5, -0.25)), Expr::var(0));
        let s = e.to_string();
        assert_eq!(s, "(0.5-0.25*i)*z1");
        let back = parse(&s, 1).unwrap();
        let p = [C64::new(0.3, 0.7)];
        let (a, b) = (e.eval(&p, 1e-12).unwrap(), back.eval(&p, 1e-12).unwrap());
        assert!((a - b).norm() < 1e-15);
    }
}
