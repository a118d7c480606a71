//! Flux expressions in one variable `u`.
//!
//! Fluxes are parsed once into an immutable tree and then evaluated either
//! plainly or with forward-mode dual numbers, which gives the exact
//! derivative alongside the value.

mod dual;
mod parser;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use dual::Dual;
pub use parser::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
        }
    }
}

/// Expression tree node. Exponents are always number literals.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var => f.write_str("u"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(b, n) => write!(f, "({b}^{n:?})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

/// Why an expression could not be evaluated at a given `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    ZeroToNegativePower,
    NegativeToFractionalPower,
    /// Value is not finite.
    Overflow,
    /// Value is finite but the derivative is not (e.g. `sqrt` at 0).
    NonDifferentiable,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogOfNonPositive => "log of a non-positive number",
            DomainKind::SqrtOfNegative => "sqrt of a negative number",
            DomainKind::ZeroToNegativePower => "zero raised to a negative power",
            DomainKind::NegativeToFractionalPower => "negative number raised to a fractional power",
            DomainKind::Overflow => "non-finite value",
            DomainKind::NonDifferentiable => "non-finite derivative",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{subexpr}` at u = {u}")]
pub struct EvalError {
    pub kind: DomainKind,
    /// Canonical form of the offending sub-expression.
    pub subexpr: String,
    pub u: f64,
}

/// Arithmetic needed by the tree walker; implemented for plain `f64` and
/// for [`Dual`].
pub(crate) trait Scalar: Copy {
    fn constant(c: f64) -> Self;
    fn variable(u: f64) -> Self;
    fn finite(self) -> Result<Self, DomainKind>;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn div(self, o: Self) -> Result<Self, DomainKind>;
    fn pow_lit(self, n: f64) -> Result<Self, DomainKind>;
    fn sqrt(self) -> Result<Self, DomainKind>;
    fn exp(self) -> Self;
    fn ln(self) -> Result<Self, DomainKind>;
    fn abs(self) -> Self;
}

pub(crate) fn is_integer(n: f64) -> bool {
    n.fract() == 0.0 && n.abs() <= i32::MAX as f64
}

/// Value-level domain rules shared by both scalar types.
pub(crate) fn pow_value(v: f64, n: f64) -> Result<f64, DomainKind> {
    if v == 0.0 && n < 0.0 {
        return Err(DomainKind::ZeroToNegativePower);
    }
    if is_integer(n) {
        Ok(v.powi(n as i32))
    } else if v < 0.0 {
        Err(DomainKind::NegativeToFractionalPower)
    } else {
        Ok(v.powf(n))
    }
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn variable(u: f64) -> Self {
        u
    }
    fn finite(self) -> Result<Self, DomainKind> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(DomainKind::Overflow)
        }
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn neg(self) -> Self {
        -self
    }
    fn div(self, o: Self) -> Result<Self, DomainKind> {
        if o == 0.0 {
            Err(DomainKind::DivisionByZero)
        } else {
            Ok(self / o)
        }
    }
    fn pow_lit(self, n: f64) -> Result<Self, DomainKind> {
        pow_value(self, n)
    }
    fn sqrt(self) -> Result<Self, DomainKind> {
        if self < 0.0 {
            Err(DomainKind::SqrtOfNegative)
        } else {
            Ok(f64::sqrt(self))
        }
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Result<Self, DomainKind> {
        if self <= 0.0 {
            Err(DomainKind::LogOfNonPositive)
        } else {
            Ok(f64::ln(self))
        }
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

fn walk<S: Scalar>(e: &Expr, u: f64) -> Result<S, EvalError> {
    let fail = |kind| EvalError {
        kind,
        subexpr: e.to_string(),
        u,
    };
    let r = match e {
        Expr::Num(v) => Ok(S::constant(*v)),
        Expr::Var => Ok(S::variable(u)),
        Expr::Neg(a) => Ok(walk::<S>(a, u)?.neg()),
        Expr::Binary(op, a, b) => {
            let a = walk::<S>(a, u)?;
            let b = walk::<S>(b, u)?;
            match op {
                BinOp::Add => Ok(a.add(b)),
                BinOp::Sub => Ok(a.sub(b)),
                BinOp::Mul => Ok(a.mul(b)),
                BinOp::Div => a.div(b),
            }
        }
        Expr::Pow(b, n) => walk::<S>(b, u)?.pow_lit(*n),
        Expr::Call(func, a) => {
            let a = walk::<S>(a, u)?;
            match func {
                Func::Sqrt => a.sqrt(),
                Func::Exp => Ok(a.exp()),
                Func::Log => a.ln(),
                Func::Abs => Ok(a.abs()),
            }
        }
    };
    r.and_then(S::finite).map_err(fail)
}

/// A parsed flux `f(u)`. Immutable; cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxExpr {
    root: Expr,
}

impl FluxExpr {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parser::parse_expr(text).map(|root| FluxExpr { root })
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn eval(&self, u: f64) -> Result<f64, EvalError> {
        walk::<f64>(&self.root, u)
    }

    /// Value and exact derivative at `u`.
    pub fn eval_d(&self, u: f64) -> Result<(f64, f64), EvalError> {
        walk::<Dual>(&self.root, u).map(|d| (d.re, d.eps))
    }

    pub fn derivative(&self, u: f64) -> Result<f64, EvalError> {
        self.eval_d(u).map(|(_, d)| d)
    }
}

impl From<Expr> for FluxExpr {
    fn from(root: Expr) -> Self {
        FluxExpr { root }
    }
}

impl FromStr for FluxExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FluxExpr::parse(s)
    }
}

impl fmt::Display for FluxExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl Serialize for FluxExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
