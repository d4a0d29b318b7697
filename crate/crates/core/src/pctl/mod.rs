//! Property language over labelled chains: propositional formulas,
//! probability operators on path formulas, and reward queries.
//!
//! Surface syntax follows the usual probabilistic-logic conventions:
//!
//! ```text
//! P>=0.9 [ F<=200 allauth ]      bounded reachability with a threshold
//! P=? [ idle U busy ]            numeric query, value at the initial state
//! R{"MD_RT"}=? [ F allauth ]     expected reward until a goal
//! R=? [ S ]                      long-run average reward
//! ```
//!
//! `F φ` abbreviates `true U φ`; the abstract syntax stores only the until
//! forms, and printing restores the abbreviation. [`Display`] output parses
//! back to a structurally identical formula.

mod eval;
mod parse;

pub use eval::{evaluate, EvalError, ModelContext, Value};
pub use parse::{parse_formula, parse_property_file, ParseError, Property};

use std::fmt;

/// State formula.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Prob { bound: Bound, path: PathFormula },
    Reward { name: Option<String>, bound: Bound, form: RewardForm },
}

/// Threshold part of an operator: a comparison, or `=?` asking for the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Query,
    Cmp(Cmp, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathFormula {
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    BoundedUntil(Box<Formula>, Box<Formula>, u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RewardForm {
    /// `I=t`: state reward observed at instant `t`.
    Instantaneous(u64),
    /// `C<=t`: reward accumulated over the first `t` steps.
    Cumulative(u64),
    /// `F φ`: reward accumulated until first reaching `φ`.
    Reachability(Box<Formula>),
    /// `S`: long-run average reward per step.
    SteadyState,
}

/// Words with fixed meaning in the syntax; none of them can name an atom.
pub const RESERVED: &[&str] = &["true", "P", "R", "F", "X", "U", "I", "C", "S"];

impl Formula {
    fn precedence(&self) -> u8 {
        match self {
            Formula::And(..) => 1,
            Formula::Not(..) => 2,
            _ => 3,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            Formula::True => write!(f, "true")?,
            Formula::Atom(a) => write!(f, "{a}")?,
            Formula::Not(inner) => {
                write!(f, "!")?;
                inner.fmt_prec(f, 2)?;
            }
            Formula::And(l, r) => {
                l.fmt_prec(f, 1)?;
                write!(f, " & ")?;
                r.fmt_prec(f, 2)?;
            }
            Formula::Prob { bound, path } => write!(f, "P{bound} [ {path} ]")?,
            Formula::Reward { name, bound, form } => {
                write!(f, "R")?;
                if let Some(n) = name {
                    write!(f, "{{\"{n}\"}}")?;
                }
                write!(f, "{bound} [ {form} ]")?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Query => write!(f, "=?"),
            Bound::Cmp(op, v) => write!(f, "{op}{v}"),
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        };
        write!(f, "{s}")
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathFormula::Next(p) => write!(f, "X {p}"),
            PathFormula::Until(a, b) if **a == Formula::True => write!(f, "F {b}"),
            PathFormula::Until(a, b) => write!(f, "{a} U {b}"),
            PathFormula::BoundedUntil(a, b, t) if **a == Formula::True => {
                write!(f, "F<={t} {b}")
            }
            PathFormula::BoundedUntil(a, b, t) => write!(f, "{a} U<={t} {b}"),
        }
    }
}

impl fmt::Display for RewardForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewardForm::Instantaneous(t) => write!(f, "I={t}"),
            RewardForm::Cumulative(t) => write!(f, "C<={t}"),
            RewardForm::Reachability(p) => write!(f, "F {p}"),
            RewardForm::SteadyState => write!(f, "S"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> Box<Formula> {
        Box::new(Formula::Atom(s.into()))
    }

    #[test]
    fn display_uses_minimal_parentheses() {
        let f = Formula::Not(Box::new(Formula::And(atom("a"), atom("b"))));
        assert_eq!(f.to_string(), "!(a & b)");
        let g = Formula::And(Box::new(Formula::Not(atom("a"))), atom("b"));
        assert_eq!(g.to_string(), "!a & b");
        let left = Formula::And(Box::new(Formula::And(atom("a"), atom("b"))), atom("c"));
        assert_eq!(left.to_string(), "a & b & c");
        let right = Formula::And(atom("a"), Box::new(Formula::And(atom("b"), atom("c"))));
        assert_eq!(right.to_string(), "a & (b & c)");
    }

    #[test]
    fn eventually_prints_as_sugar() {
        let f = Formula::Prob {
            bound: Bound::Cmp(Cmp::Ge, 0.9),
            path: PathFormula::BoundedUntil(Box::new(Formula::True), atom("goal"), 20),
        };
        assert_eq!(f.to_string(), "P>=0.9 [ F<=20 goal ]");
        let g = Formula::Reward {
            name: Some("MD_RT".into()),
            bound: Bound::Query,
            form: RewardForm::Reachability(atom("allauth")),
        };
        assert_eq!(g.to_string(), "R{\"MD_RT\"}=? [ F allauth ]");
    }

    #[test]
    fn thresholds_print_in_shortest_form() {
        let f = Formula::Prob {
            bound: Bound::Cmp(Cmp::Lt, 0.5),
            path: PathFormula::Next(atom("a")),
        };
        assert_eq!(f.to_string(), "P<0.5 [ X a ]");
        let g = Formula::Prob {
            bound: Bound::Cmp(Cmp::Le, 1.0),
            path: PathFormula::Until(atom("a"), atom("b")),
        };
        assert_eq!(g.to_string(), "P<=1 [ a U b ]");
    }
}
