//! Moment-map symbols over the phase-space variables `(t, φ, ξ_t, ξ_φ)`.
//!
//! Symbols come either from the built-in pair
//! `p1 = ξ_t² + ξ_φ²/f(t)²`, `p2 = ξ_φ` or from expressions in a small
//! arithmetic language (see [`parse_expr`]).

mod parse;

pub use parse::{parse_expr, ParseError};

use crate::geometry::ProfileFunction;
use std::fmt;
use thiserror::Error;

/// Phase-space variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    T,
    Phi,
    XiT,
    XiPhi,
}

impl Variable {
    pub const ALL: [Variable; 4] = [Variable::T, Variable::Phi, Variable::XiT, Variable::XiPhi];

    pub fn name(self) -> &'static str {
        match self {
            Variable::T => "t",
            Variable::Phi => "phi",
            Variable::XiT => "xi_t",
            Variable::XiPhi => "xi_phi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Sin,
    Cos,
    Sqrt,
    Abs,
    /// The profile `f`.
    F,
    /// The profile derivative `f'`.
    Fp,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Sin,
        Builtin::Cos,
        Builtin::Sqrt,
        Builtin::Abs,
        Builtin::F,
        Builtin::Fp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Sqrt => "sqrt",
            Builtin::Abs => "abs",
            Builtin::F => "f",
            Builtin::Fp => "fp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

/// Expression tree. Literals produced by the parser are non-negative;
/// negation is always an explicit [`SymbolExpr::Neg`].
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolExpr {
    Literal(f64),
    Var(Variable),
    Call(Builtin, Box<SymbolExpr>),
    Neg(Box<SymbolExpr>),
    Binary(BinaryOp, Box<SymbolExpr>, Box<SymbolExpr>),
    Pow(Box<SymbolExpr>, u32),
}

impl SymbolExpr {
    pub fn binary(op: BinaryOp, lhs: SymbolExpr, rhs: SymbolExpr) -> Self {
        SymbolExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Canonical text of the built-in `p1`.
    pub const BUILTIN_P1: &'static str = "xi_t^2 + xi_phi^2 / f(t)^2";
    /// Canonical text of the built-in `p2`.
    pub const BUILTIN_P2: &'static str = "xi_phi";

    // Precedence levels: 0 = expr, 1 = term, 2 = factor/atom.
    fn level(&self) -> u8 {
        match self {
            SymbolExpr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 0,
            SymbolExpr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 1,
            SymbolExpr::Pow(..) => 2,
            _ => 3,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            SymbolExpr::Literal(v) => write!(f, "{v}"),
            SymbolExpr::Var(v) => write!(f, "{}", v.name()),
            SymbolExpr::Call(b, arg) => {
                write!(f, "{}(", b.name())?;
                arg.write_at(f, 0)?;
                write!(f, ")")
            }
            SymbolExpr::Neg(inner) => {
                write!(f, "-")?;
                inner.write_at(f, 3)
            }
            SymbolExpr::Pow(base, n) => {
                base.write_at(f, 3)?;
                write!(f, "^{n}")
            }
            SymbolExpr::Binary(op, lhs, rhs) => {
                let (left_min, right_min) = match op {
                    BinaryOp::Add | BinaryOp::Sub => (0, 1),
                    BinaryOp::Mul | BinaryOp::Div => (1, 2),
                };
                lhs.write_at(f, left_min)?;
                write!(f, " {} ", op.symbol())?;
                rhs.write_at(f, right_min)
            }
        }
    }

    /// Evaluates the expression at a phase point.
    pub fn eval(&self, point: &PhasePoint, surface: &ProfileFunction) -> Result<f64, EvalError> {
        Ok(match self {
            SymbolExpr::Literal(v) => *v,
            SymbolExpr::Var(v) => point.get(*v),
            SymbolExpr::Neg(inner) => -inner.eval(point, surface)?,
            SymbolExpr::Pow(base, n) => powu(base.eval(point, surface)?, *n),
            SymbolExpr::Binary(op, lhs, rhs) => {
                let a = lhs.eval(point, surface)?;
                let b = rhs.eval(point, surface)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero(rhs.to_string()));
                        }
                        a / b
                    }
                }
            }
            SymbolExpr::Call(builtin, arg) => {
                let x = arg.eval(point, surface)?;
                match builtin {
                    Builtin::Sin => x.sin(),
                    Builtin::Cos => x.cos(),
                    Builtin::Abs => x.abs(),
                    Builtin::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::NegativeSqrt {
                                expr: self.to_string(),
                                value: x,
                            });
                        }
                        x.sqrt()
                    }
                    Builtin::F => {
                        if !(-1.0..=1.0).contains(&x) {
                            return Err(EvalError::ProfileDomain {
                                expr: self.to_string(),
                                value: x,
                            });
                        }
                        surface.f(x)
                    }
                    Builtin::Fp => {
                        if !(x > -1.0 && x < 1.0) {
                            return Err(EvalError::ProfileDomain {
                                expr: self.to_string(),
                                value: x,
                            });
                        }
                        surface.fp(x)
                    }
                }
            }
        })
    }
}

fn powu(base: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(n) => base.powi(n),
        Err(_) => base.powf(n as f64),
    }
}

/// Canonical printout; re-parsing it yields the same tree.
impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl std::str::FromStr for SymbolExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("negative argument {value} in `{expr}`")]
    NegativeSqrt { expr: String, value: f64 },
    #[error("profile argument {value} outside its domain in `{expr}`")]
    ProfileDomain { expr: String, value: f64 },
}

/// A point `(t, φ; ξ_t, ξ_φ)` of the cotangent bundle in the profile chart.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint {
    pub t: f64,
    pub phi: f64,
    pub xi_t: f64,
    pub xi_phi: f64,
}

impl PhasePoint {
    pub fn new(t: f64, phi: f64, xi_t: f64, xi_phi: f64) -> Self {
        Self { t, phi, xi_t, xi_phi }
    }

    pub fn get(&self, v: Variable) -> f64 {
        match v {
            Variable::T => self.t,
            Variable::Phi => self.phi,
            Variable::XiT => self.xi_t,
            Variable::XiPhi => self.xi_phi,
        }
    }

    pub fn with_covector(&self, xi_t: f64, xi_phi: f64) -> Self {
        Self { xi_t, xi_phi, ..*self }
    }
}

/// One component of a moment map.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    /// `ξ_t² + ξ_φ²/f(t)²`.
    BuiltinP1,
    /// `ξ_φ`.
    BuiltinP2,
    Expr(SymbolExpr),
    /// `c·s` for a positive constant `c`.
    Scaled(f64, Box<Symbol>),
}

impl Symbol {
    pub fn eval(&self, point: &PhasePoint, surface: &ProfileFunction) -> Result<f64, EvalError> {
        match self {
            Symbol::BuiltinP1 => {
                let f2 = surface.f2(point.t);
                if f2 == 0.0 {
                    return Err(EvalError::DivisionByZero("f(t)^2".into()));
                }
                Ok(point.xi_t * point.xi_t + point.xi_phi * point.xi_phi / f2)
            }
            Symbol::BuiltinP2 => Ok(point.xi_phi),
            Symbol::Expr(e) => e.eval(point, surface),
            Symbol::Scaled(c, inner) => Ok(c * inner.eval(point, surface)?),
        }
    }
}

/// The pair `(p1, p2)` on a given surface.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMap {
    pub p1: Symbol,
    pub p2: Symbol,
    pub surface: ProfileFunction,
}

/// The standard pair for a surface of revolution.
pub fn builtin_moment_map(surface: &ProfileFunction) -> MomentMap {
    MomentMap {
        p1: Symbol::BuiltinP1,
        p2: Symbol::BuiltinP2,
        surface: surface.clone(),
    }
}

impl MomentMap {
    /// Builds a map from optional expression strings; `None` keeps the
    /// corresponding built-in.
    pub fn from_sources(
        surface: &ProfileFunction,
        p1: Option<&str>,
        p2: Option<&str>,
    ) -> Result<Self, ParseError> {
        let p1 = match p1 {
            Some(src) => Symbol::Expr(parse_expr(src)?),
            None => Symbol::BuiltinP1,
        };
        let p2 = match p2 {
            Some(src) => Symbol::Expr(parse_expr(src)?),
            None => Symbol::BuiltinP2,
        };
        Ok(Self {
            p1,
            p2,
            surface: surface.clone(),
        })
    }

    pub fn p1(&self, point: &PhasePoint) -> Result<f64, EvalError> {
        self.p1.eval(point, &self.surface)
    }

    pub fn p2(&self, point: &PhasePoint) -> Result<f64, EvalError> {
        self.p2.eval(point, &self.surface)
    }

    /// True when `p1` is the built-in metric symbol, whose fibers are
    /// ellipses in closed form.
    pub fn has_builtin_p1(&self) -> bool {
        matches!(self.p1, Symbol::BuiltinP1)
    }

    /// Same map with `p2` multiplied by `c`.
    pub fn with_scaled_p2(&self, c: f64) -> Self {
        Self {
            p2: Symbol::Scaled(c, Box::new(self.p2.clone())),
            ..self.clone()
        }
    }
}

/// Evaluates a parsed expression; free-function form of [`SymbolExpr::eval`].
pub fn eval_expr(
    expr: &SymbolExpr,
    env: &PhasePoint,
    surface: &ProfileFunction,
) -> Result<f64, EvalError> {
    expr.eval(env, surface)
}
