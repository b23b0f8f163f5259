use std::fmt;

use crate::wirtinger::{Jet2, Var};
use crate::{HscError, Result, C64};

/// Expression tree over `z_1..z_n` and their conjugates.
///
/// Variables are stored 0-based; the textual form is 1-based (`z1`).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(C64),
    /// The imaginary unit `i`.
    I,
    Var(usize),
    Neg(Box<Expr>),
    Conj(Box<Expr>),
    Exp(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn real(x: f64) -> Self {
        Expr::Const(C64::new(x, 0.0))
    }

    pub fn var(k: usize) -> Self {
        Expr::Var(k)
    }

    pub fn neg(e: Expr) -> Self {
        Expr::Neg(Box::new(e))
    }

    pub fn conj(e: Expr) -> Self {
        Expr::Conj(Box::new(e))
    }

    pub fn exp(e: Expr) -> Self {
        Expr::Exp(Box::new(e))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, e: i32) -> Self {
        Expr::Pow(Box::new(a), e)
    }

    /// `z_k · z̄_k` for a 0-based `k`.
    pub fn modulus_sq(k: usize) -> Self {
        Expr::mul(Expr::var(k), Expr::conj(Expr::var(k)))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == C64::new(0.0, 0.0))
    }

    pub fn as_const(&self) -> Option<C64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Multiply by `factor`, folding the factor into a constant numerator so
    /// that `5 · (1/(…))` reads `5/(…)`.
    pub fn scaled_by(self, factor: Expr) -> Expr {
        if factor.as_const() == Some(C64::new(1.0, 0.0)) {
            return self;
        }
        match self {
            Expr::Div(num, den) => match (num.as_const(), factor.as_const()) {
                (Some(one), _) if one == C64::new(1.0, 0.0) => Expr::Div(Box::new(factor), den),
                (Some(a), Some(c)) => Expr::Div(Box::new(Expr::Const(a * c)), den),
                _ => Expr::mul(factor, Expr::Div(num, den)),
            },
            other => Expr::mul(factor, other),
        }
    }

    /// Largest variable index plus one (0 for closed expressions).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::I => 0,
            Expr::Var(k) => k + 1,
            Expr::Neg(a) | Expr::Conj(a) | Expr::Exp(a) | Expr::Pow(a, _) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    pub fn uses_var(&self, k: usize) -> bool {
        match self {
            Expr::Const(_) | Expr::I => false,
            Expr::Var(j) => *j == k,
            Expr::Neg(a) | Expr::Conj(a) | Expr::Exp(a) | Expr::Pow(a, _) => a.uses_var(k),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses_var(k) || b.uses_var(k)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::I | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Conj(a) | Expr::Exp(a) | Expr::Pow(a, _) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    /// Replace variables: `map[k]` is either a constant to substitute or the
    /// new index of variable `k`.
    pub fn substitute(&self, map: &[Substitution]) -> Expr {
        match self {
            Expr::Var(k) => match map.get(*k) {
                Some(Substitution::Value(c)) => Expr::Const(*c),
                Some(Substitution::Rename(j)) => Expr::Var(*j),
                None => Expr::Var(*k),
            },
            Expr::Const(_) | Expr::I => self.clone(),
            Expr::Neg(a) => Expr::neg(a.substitute(map)),
            Expr::Conj(a) => Expr::conj(a.substitute(map)),
            Expr::Exp(a) => Expr::exp(a.substitute(map)),
            Expr::Pow(a, e) => Expr::pow(a.substitute(map), *e),
            Expr::Add(a, b) => Expr::add(a.substitute(map), b.substitute(map)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(map), b.substitute(map)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(map), b.substitute(map)),
            Expr::Div(a, b) => Expr::div(a.substitute(map), b.substitute(map)),
        }
    }

    /// Pointwise value, with `conj` acting on the value.
    pub fn eval(&self, point: &[C64], eps: f64) -> Result<C64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::I => C64::new(0.0, 1.0),
            Expr::Var(k) => *point
                .get(*k)
                .ok_or(HscError::IndexOutOfRange { index: *k, dim: point.len() })?,
            Expr::Neg(a) => -a.eval(point, eps)?,
            Expr::Conj(a) => a.eval(point, eps)?.conj(),
            Expr::Exp(a) => a.eval(point, eps)?.exp(),
            Expr::Add(a, b) => a.eval(point, eps)? + b.eval(point, eps)?,
            Expr::Sub(a, b) => a.eval(point, eps)? - b.eval(point, eps)?,
            Expr::Mul(a, b) => a.eval(point, eps)? * b.eval(point, eps)?,
            Expr::Div(a, b) => {
                let den = b.eval(point, eps)?;
                check_den(den, eps)?;
                a.eval(point, eps)? / den
            }
            Expr::Pow(a, e) => {
                let base = a.eval(point, eps)?;
                if *e < 0 {
                    check_den(base, eps)?;
                }
                base.powi(*e)
            }
        })
    }

    /// Second-order Wirtinger jet at `point`.
    pub fn eval_jet(&self, point: &[C64], eps: f64) -> Result<Jet2> {
        let n = point.len();
        Ok(match self {
            Expr::Const(c) => Jet2::constant(n, *c),
            Expr::I => Jet2::constant(n, C64::new(0.0, 1.0)),
            Expr::Var(k) => Jet2::seed(point, Var::Z(*k))?,
            Expr::Neg(a) => -a.eval_jet(point, eps)?,
            Expr::Conj(a) => a.eval_jet(point, eps)?.conj(),
            Expr::Exp(a) => a.eval_jet(point, eps)?.exp(),
            Expr::Add(a, b) => &a.eval_jet(point, eps)? + &b.eval_jet(point, eps)?,
            Expr::Sub(a, b) => &a.eval_jet(point, eps)? - &b.eval_jet(point, eps)?,
            Expr::Mul(a, b) => &a.eval_jet(point, eps)? * &b.eval_jet(point, eps)?,
            Expr::Div(a, b) => a.eval_jet(point, eps)?.checked_div(&b.eval_jet(point, eps)?, eps)?,
            Expr::Pow(a, e) => a.eval_jet(point, eps)?.powi(*e, eps)?,
        })
    }
}

fn check_den(den: C64, eps: f64) -> Result<()> {
    let modulus = den.norm();
    if modulus < eps {
        Err(HscError::Singular { modulus, eps })
    } else {
        Ok(())
    }
}

/// Per-variable action of [`Expr::substitute`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Substitution {
    Value(C64),
    Rename(usize),
}

// Printing: minimal parentheses under the grammar's precedence.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_POWER: u8 = 3;
const PREC_UNARY: u8 = 4;
const PREC_ATOM: u8 = 5;

fn fmt_real(x: f64) -> String {
    format!("{x}")
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => PREC_SUM,
            Expr::Mul(..) | Expr::Div(..) => PREC_PRODUCT,
            Expr::Pow(..) => PREC_POWER,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Const(c) if c.im != 0.0 => PREC_SUM,
            Expr::Const(c) if c.re < 0.0 || (c.re == 0.0 && c.re.is_sign_negative()) => PREC_UNARY,
            _ => PREC_ATOM,
        }
    }

    fn write_with(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.write_bare(f)?;
            write!(f, ")")
        } else {
            self.write_bare(f)
        }
    }

    fn write_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.im == 0.0 => {
                if c.re < 0.0 || c.re.is_sign_negative() {
                    write!(f, "-{}", fmt_real(-c.re))
                } else {
                    write!(f, "{}", fmt_real(c.re))
                }
            }
            Expr::Const(c) => {
                let re = if c.re < 0.0 { format!("-{}", fmt_real(-c.re)) } else { fmt_real(c.re) };
                if c.im < 0.0 {
                    write!(f, "{re}-{}*i", fmt_real(-c.im))
                } else {
                    write!(f, "{re}+{}*i", fmt_real(c.im))
                }
            }
            Expr::I => write!(f, "i"),
            Expr::Var(k) => write!(f, "z{}", k + 1),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_with(f, PREC_UNARY)
            }
            Expr::Conj(a) => write!(f, "conj({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Add(a, b) => {
                a.write_with(f, PREC_SUM)?;
                write!(f, "+")?;
                b.write_with(f, PREC_SUM + 1)
            }
            Expr::Sub(a, b) => {
                a.write_with(f, PREC_SUM)?;
                write!(f, "-")?;
                b.write_with(f, PREC_SUM + 1)
            }
            Expr::Mul(a, b) => {
                a.write_with(f, PREC_PRODUCT)?;
                write!(f, "*")?;
                b.write_with(f, PREC_PRODUCT + 1)
            }
            Expr::Div(a, b) => {
                a.write_with(f, PREC_PRODUCT)?;
                write!(f, "/")?;
                b.write_with(f, PREC_PRODUCT + 1)
            }
            Expr::Pow(a, e) => {
                // The base of `^` must be a grammar `base`: atom or unary minus.
                a.write_with(f, PREC_UNARY)?;
                write!(f, "^{e}")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_bare(f)
    }
}
