//! Guarded-command models: a small modelling language whose semantics is a
//! chain over the product of bounded integer variables.
//!
//! A model is a list of modules, each declaring variables `x : [lo..hi]
//! init v;` and commands `[] guard -> p1:(x'=e) + p2:(y'=e);`. In a state,
//! every enabled command is selected uniformly at random, then one of its
//! updates fires with its listed probability; a state with no enabled
//! command idles on a probability-one self-loop. Assignments may update any
//! variable, not just the owning module's, so a command can describe a
//! synchronous step of the whole system. Label declarations map boolean
//! expressions to atomic propositions, and reward declarations attach state
//! rewards (`guard : value;`) and transition rewards (`[] guard : value;`,
//! where primed variables refer to the target state) to the built chain.

pub mod build;
pub mod rfid;
pub mod text;

pub use build::{build, build_capped, BuiltModel, ModelError, STATE_CAP};
pub use rfid::{
    build_per_tag_model, build_rfid_model, model_system, parse_config, AuthCosts, ConfigError,
    PerTagModel, RfidError, RfidModelConfig, TagPhase,
};

use std::fmt;

use thiserror::Error;

/// Bounded integer state variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
}

/// One probabilistic branch of a command: simultaneous assignments, all
/// evaluated over the pre-state.
#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    pub prob: f64,
    pub assigns: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub guard: Expr,
    pub updates: Vec<Update>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardedCommandModule {
    pub name: String,
    pub vars: Vec<Variable>,
    pub commands: Vec<Command>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelDecl {
    pub name: String,
    pub expr: Expr,
}

/// `guard : value;` — counted while the guard holds in the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRewardItem {
    pub guard: Expr,
    pub value: Expr,
}

/// `[] guard : value;` — counted on a transition; guard and value may use
/// primed variables for the target state.
#[derive(Debug, Clone, PartialEq)]
pub struct TransRewardItem {
    pub guard: Expr,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardDecl {
    pub name: String,
    pub state_items: Vec<StateRewardItem>,
    pub trans_items: Vec<TransRewardItem>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSystem {
    pub modules: Vec<GuardedCommandModule>,
    pub labels: Vec<LabelDecl>,
    pub rewards: Vec<RewardDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Const {
    Int(i64),
    Bool(bool),
}

impl Const {
    pub fn type_name(self) -> &'static str {
        match self {
            Const::Int(_) => "integer",
            Const::Bool(_) => "boolean",
        }
    }

    fn as_int(self) -> Result<i64, ExprError> {
        match self {
            Const::Int(v) => Ok(v),
            Const::Bool(_) => Err(ExprError::Type("expected an integer, found a boolean".into())),
        }
    }

    fn as_bool(self) -> Result<bool, ExprError> {
        match self {
            Const::Bool(v) => Ok(v),
            Const::Int(_) => Err(ExprError::Type("expected a boolean, found an integer".into())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("primed variable `{0}'` is only allowed in transition rewards")]
    StrayPrime(String),
    #[error("{0}")]
    Type(String),
    #[error("arithmetic overflow while evaluating `{0}`")]
    Overflow(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Min,
    Max,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var { name: String, primed: bool },
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Int(v)
    }

    pub fn truth(v: bool) -> Expr {
        Expr::Bool(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var { name: name.into(), primed: false }
    }

    pub fn primed(name: impl Into<String>) -> Expr {
        Expr::Var { name: name.into(), primed: true }
    }

    fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn add(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, o)
    }

    pub fn sub(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Sub, self, o)
    }

    pub fn mul(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, o)
    }

    pub fn min(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Min, self, o)
    }

    pub fn max(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Max, self, o)
    }

    pub fn eq(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Eq, self, o)
    }

    pub fn ne(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Ne, self, o)
    }

    pub fn lt(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Lt, self, o)
    }

    pub fn le(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Le, self, o)
    }

    pub fn gt(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Gt, self, o)
    }

    pub fn ge(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Ge, self, o)
    }

    pub fn and(self, o: Expr) -> Expr {
        Expr::binary(BinOp::And, self, o)
    }

    pub fn or(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Or, self, o)
    }

    pub fn not(self) -> Expr {
        Expr::Unary(UnaryOp::Not, Box::new(self))
    }

    pub fn neg(self) -> Expr {
        Expr::Unary(UnaryOp::Neg, Box::new(self))
    }

    /// Evaluates under an environment resolving `(name, primed)` pairs.
    pub fn eval<F>(&self, env: &F) -> Result<Const, ExprError>
    where
        F: Fn(&str, bool) -> Option<Const>,
    {
        match self {
            Expr::Int(v) => Ok(Const::Int(*v)),
            Expr::Bool(v) => Ok(Const::Bool(*v)),
            Expr::Var { name, primed } => env(name, *primed).ok_or_else(|| {
                if *primed {
                    ExprError::StrayPrime(name.clone())
                } else {
                    ExprError::UnknownVariable(name.clone())
                }
            }),
            Expr::Unary(op, inner) => {
                let v = inner.eval(env)?;
                match op {
                    UnaryOp::Neg => v
                        .as_int()?
                        .checked_neg()
                        .map(Const::Int)
                        .ok_or_else(|| ExprError::Overflow(self.to_string())),
                    UnaryOp::Not => Ok(Const::Bool(!v.as_bool()?)),
                }
            }
            Expr::Binary(op, l, r) => {
                let lv = l.eval(env)?;
                let rv = r.eval(env)?;
                use BinOp::*;
                let arith = |f: fn(i64, i64) -> Option<i64>| -> Result<Const, ExprError> {
                    f(lv.as_int()?, rv.as_int()?)
                        .map(Const::Int)
                        .ok_or_else(|| ExprError::Overflow(self.to_string()))
                };
                let cmp = |f: fn(&i64, &i64) -> bool| -> Result<Const, ExprError> {
                    Ok(Const::Bool(f(&lv.as_int()?, &rv.as_int()?)))
                };
                match op {
                    Add => arith(i64::checked_add),
                    Sub => arith(i64::checked_sub),
                    Mul => arith(i64::checked_mul),
                    Min => arith(|a, b| Some(a.min(b))),
                    Max => arith(|a, b| Some(a.max(b))),
                    Lt => cmp(i64::lt),
                    Le => cmp(i64::le),
                    Gt => cmp(i64::gt),
                    Ge => cmp(i64::ge),
                    Eq | Ne => {
                        let same = match (lv, rv) {
                            (Const::Int(a), Const::Int(b)) => a == b,
                            (Const::Bool(a), Const::Bool(b)) => a == b,
                            _ => {
                                return Err(ExprError::Type(format!(
                                    "cannot compare {} with {}",
                                    lv.type_name(),
                                    rv.type_name()
                                )))
                            }
                        };
                        Ok(Const::Bool(if *op == Eq { same } else { !same }))
                    }
                    And => Ok(Const::Bool(lv.as_bool()? && rv.as_bool()?)),
                    Or => Ok(Const::Bool(lv.as_bool()? || rv.as_bool()?)),
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => match op {
                BinOp::Or => 1,
                BinOp::And => 2,
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
                BinOp::Add | BinOp::Sub => 5,
                BinOp::Mul => 6,
                BinOp::Min | BinOp::Max => 8,
            },
            Expr::Unary(UnaryOp::Not, _) => 3,
            Expr::Unary(UnaryOp::Neg, _) => 7,
            _ => 8,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            Expr::Int(v) => write!(f, "{v}")?,
            Expr::Bool(v) => write!(f, "{v}")?,
            Expr::Var { name, primed } => {
                write!(f, "{name}")?;
                if *primed {
                    write!(f, "'")?;
                }
            }
            Expr::Unary(UnaryOp::Not, inner) => {
                write!(f, "!")?;
                inner.fmt_prec(f, 8)?;
            }
            Expr::Unary(UnaryOp::Neg, inner) => {
                write!(f, "-")?;
                inner.fmt_prec(f, 8)?;
            }
            Expr::Binary(op, l, r) => match op {
                BinOp::Min | BinOp::Max => {
                    let name = if *op == BinOp::Min { "min" } else { "max" };
                    write!(f, "{name}(")?;
                    l.fmt_prec(f, 0)?;
                    write!(f, ", ")?;
                    r.fmt_prec(f, 0)?;
                    write!(f, ")")?;
                }
                _ => {
                    let (sym, lmin, rmin) = match op {
                        BinOp::Or => ("|", 1, 2),
                        BinOp::And => ("&", 2, 3),
                        BinOp::Eq => ("=", 5, 5),
                        BinOp::Ne => ("!=", 5, 5),
                        BinOp::Lt => ("<", 5, 5),
                        BinOp::Le => ("<=", 5, 5),
                        BinOp::Gt => (">", 5, 5),
                        BinOp::Ge => (">=", 5, 5),
                        BinOp::Add => ("+", 5, 6),
                        BinOp::Sub => ("-", 5, 6),
                        BinOp::Mul => ("*", 6, 7),
                        BinOp::Min | BinOp::Max => unreachable!(),
                    };
                    l.fmt_prec(f, lmin)?;
                    write!(f, " {sym} ")?;
                    r.fmt_prec(f, rmin)?;
                }
            },
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
