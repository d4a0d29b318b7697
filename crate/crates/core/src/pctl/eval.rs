//! Model checking: deciding formulas against a chain and its rewards.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dtmc::analysis::{self, AnalysisError, SolveOptions};
use crate::dtmc::{Dtmc, RewardStructure};
use crate::scalar::Real;

use super::{Bound, Cmp, Formula, PathFormula, RewardForm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("unknown reward structure `{0}`")]
    UnknownReward(String),
    #[error("unnamed reward query, but the model defines {count} reward structures; pick one with R{{\"…\"}}")]
    UnnamedReward { count: usize },
    #[error("`=?` queries cannot be nested inside a formula")]
    NestedQuery,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// A chain together with its named reward structures.
pub struct ModelContext<'a, T: Real> {
    pub dtmc: &'a Dtmc<T>,
    pub rewards: &'a BTreeMap<String, RewardStructure<T>>,
    /// Structure used by unnamed `R` operators; without it, an unnamed
    /// operator resolves only when exactly one structure exists.
    pub default_reward: Option<&'a str>,
}

impl<'a, T: Real> ModelContext<'a, T> {
    /// The reward structure an `R` operator with this name refers to:
    /// the named one, else the default, else the only one there is.
    pub fn resolve_reward(
        &self,
        name: Option<&str>,
    ) -> Result<&'a RewardStructure<T>, EvalError> {
        resolve_rewards(self, name)
    }
}

/// Result of checking a formula: a truth value at the initial state (with
/// the full satisfying set), or the number a `=?` query asked for.
#[derive(Debug, Clone, PartialEq)]
pub enum Value<T> {
    Bool { at_initial: bool, sat: Vec<bool> },
    Real(T),
}

impl<T: Real> Value<T> {
    pub fn as_real(&self) -> Option<T> {
        match self {
            Value::Real(v) => Some(*v),
            Value::Bool { .. } => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool { at_initial, .. } => Some(*at_initial),
            Value::Real(_) => None,
        }
    }
}

pub fn evaluate<T: Real>(
    ctx: &ModelContext<'_, T>,
    f: &Formula,
    opts: &SolveOptions<T>,
) -> Result<Value<T>, EvalError> {
    match f {
        Formula::Prob { bound: Bound::Query, path } => {
            let v = path_probabilities(ctx, path, opts)?;
            Ok(Value::Real(v[ctx.dtmc.initial()]))
        }
        Formula::Reward { bound: Bound::Query, name, form } => {
            let v = reward_values(ctx, name.as_deref(), form, opts)?;
            Ok(Value::Real(v[ctx.dtmc.initial()]))
        }
        _ => {
            let sat = satisfying(ctx, f, opts)?;
            Ok(Value::Bool { at_initial: sat[ctx.dtmc.initial()], sat })
        }
    }
}

fn satisfying<T: Real>(
    ctx: &ModelContext<'_, T>,
    f: &Formula,
    opts: &SolveOptions<T>,
) -> Result<Vec<bool>, EvalError> {
    let n = ctx.dtmc.n_states();
    match f {
        Formula::True => Ok(vec![true; n]),
        Formula::Atom(a) => ctx
            .dtmc
            .label_vector(a)
            .ok_or_else(|| EvalError::UnknownLabel(a.clone())),
        Formula::Not(inner) => {
            let mut v = satisfying(ctx, inner, opts)?;
            for b in v.iter_mut() {
                *b = !*b;
            }
            Ok(v)
        }
        Formula::And(l, r) => {
            let mut v = satisfying(ctx, l, opts)?;
            let w = satisfying(ctx, r, opts)?;
            for (b, c) in v.iter_mut().zip(w) {
                *b = *b && c;
            }
            Ok(v)
        }
        Formula::Prob { bound: Bound::Cmp(op, p), path } => {
            let probs = path_probabilities(ctx, path, opts)?;
            Ok(probs.iter().map(|&v| compare(v, *op, *p)).collect())
        }
        Formula::Reward { bound: Bound::Cmp(op, p), name, form } => {
            let values = reward_values(ctx, name.as_deref(), form, opts)?;
            Ok(values.iter().map(|&v| compare(v, *op, *p)).collect())
        }
        Formula::Prob { bound: Bound::Query, .. }
        | Formula::Reward { bound: Bound::Query, .. } => Err(EvalError::NestedQuery),
    }
}

fn path_probabilities<T: Real>(
    ctx: &ModelContext<'_, T>,
    path: &PathFormula,
    opts: &SolveOptions<T>,
) -> Result<Vec<T>, EvalError> {
    let d = ctx.dtmc;
    match path {
        PathFormula::Next(f) => Ok(analysis::prob_next(d, &satisfying(ctx, f, opts)?)),
        PathFormula::Until(a, b) => {
            let sa = satisfying(ctx, a, opts)?;
            let sb = satisfying(ctx, b, opts)?;
            Ok(analysis::prob_until(d, &sa, &sb, opts)?)
        }
        PathFormula::BoundedUntil(a, b, t) => {
            let sa = satisfying(ctx, a, opts)?;
            let sb = satisfying(ctx, b, opts)?;
            Ok(analysis::prob_bounded_until(d, &sa, &sb, *t))
        }
    }
}

fn reward_values<T: Real>(
    ctx: &ModelContext<'_, T>,
    name: Option<&str>,
    form: &RewardForm,
    opts: &SolveOptions<T>,
) -> Result<Vec<T>, EvalError> {
    let r = resolve_rewards(ctx, name)?;
    let d = ctx.dtmc;
    match form {
        RewardForm::Instantaneous(t) => Ok(analysis::reward_instantaneous(d, r, *t)),
        RewardForm::Cumulative(t) => Ok(analysis::reward_cumulative(d, r, *t)),
        RewardForm::Reachability(f) => {
            let target = satisfying(ctx, f, opts)?;
            Ok(analysis::reward_reachability(d, r, &target, opts)?)
        }
        RewardForm::SteadyState => {
            let v = analysis::reward_steady_state(d, r, opts)?;
            Ok(vec![v; d.n_states()])
        }
    }
}

fn resolve_rewards<'a, T: Real>(
    ctx: &ModelContext<'a, T>,
    name: Option<&str>,
) -> Result<&'a RewardStructure<T>, EvalError> {
    let key = match name.or(ctx.default_reward) {
        Some(k) => k,
        None if ctx.rewards.len() == 1 => ctx.rewards.keys().next().unwrap(),
        None => return Err(EvalError::UnnamedReward { count: ctx.rewards.len() }),
    };
    ctx.rewards
        .get(key)
        .ok_or_else(|| EvalError::UnknownReward(key.to_string()))
}

fn compare<T: Real>(value: T, op: Cmp, threshold: f64) -> bool {
    match value.partial_cmp(&T::of(threshold)) {
        None => false,
        Some(ord) => match op {
            Cmp::Lt => ord == std::cmp::Ordering::Less,
            Cmp::Le => ord != std::cmp::Ordering::Greater,
            Cmp::Gt => ord == std::cmp::Ordering::Greater,
            Cmp::Ge => ord != std::cmp::Ordering::Less,
        },
    }
}
