//! Exhaustive state-space construction: from a guarded-command system to a
//! concrete chain with labels and reward structures.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::dtmc::{Dtmc, RewardStructure};
use crate::scalar::Real;

use super::{Const, ExprError, ModelSystem, Variable};

/// Hard ceiling on explored states; hitting it is an error rather than a
/// truncated model.
pub const STATE_CAP: usize = 5_000_000;

/// Probabilities are literals, so each command can be checked once, up
/// front, against this slack.
const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{name}` has an empty range [{lo}..{hi}]")]
    EmptyRange { name: String, lo: i64, hi: i64 },
    #[error("variable `{name}` starts at {init}, outside [{lo}..{hi}]")]
    InitOutOfRange { name: String, init: i64, lo: i64, hi: i64 },
    #[error("{context}: {source}")]
    Eval { context: String, source: ExprError },
    #[error("assignment to unknown variable `{0}`")]
    UnknownAssignTarget(String),
    #[error("variable `{0}` assigned twice in one update")]
    DuplicateAssignment(String),
    #[error("update probability {0} lies outside (0, 1]")]
    BadUpdateProbability(f64),
    #[error("update probabilities sum to {sum}, expected 1 ({context})")]
    BadProbabilitySum { sum: f64, context: String },
    #[error(
        "assignment drives `{var}` to {value}, outside [{lo}..{hi}], from state ({state}) in {command}"
    )]
    OutOfRange { var: String, value: i64, lo: i64, hi: i64, state: String, command: String },
    #[error("state space exceeds the cap of {0} states")]
    StateCap(usize),
    #[error("duplicate reward structure `{0}`")]
    DuplicateReward(String),
    #[error("{context} evaluates to {value}, but rewards must be nonnegative")]
    NegativeReward { context: String, value: i64 },
}

/// A built chain plus everything needed to interpret its states.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltModel<T: Real> {
    pub dtmc: Dtmc<T>,
    pub rewards: BTreeMap<String, RewardStructure<T>>,
    /// Variable names in declaration order; `states[s]` holds the matching
    /// valuation of state `s`.
    pub var_names: Vec<String>,
    pub states: Vec<Vec<i64>>,
}

impl<T: Real> BuiltModel<T> {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|n| n == name)
    }

    /// Valuation of one variable in one state.
    pub fn value(&self, state: usize, var: &str) -> Option<i64> {
        Some(self.states[state][self.var_index(var)?])
    }
}

pub fn build<T: Real>(sys: &ModelSystem) -> Result<BuiltModel<T>, ModelError> {
    build_capped(sys, STATE_CAP)
}

/// [`build`] with an explicit state cap.
pub fn build_capped<T: Real>(
    sys: &ModelSystem,
    cap: usize,
) -> Result<BuiltModel<T>, ModelError> {
    let vars: Vec<&Variable> = sys.modules.iter().flat_map(|m| &m.vars).collect();
    let mut var_index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, v) in vars.iter().enumerate() {
        if var_index.insert(v.name.as_str(), i).is_some() {
            return Err(ModelError::DuplicateVariable(v.name.clone()));
        }
        if v.lo > v.hi {
            return Err(ModelError::EmptyRange { name: v.name.clone(), lo: v.lo, hi: v.hi });
        }
        if v.init < v.lo || v.init > v.hi {
            return Err(ModelError::InitOutOfRange {
                name: v.name.clone(),
                init: v.init,
                lo: v.lo,
                hi: v.hi,
            });
        }
    }

    let commands: Vec<(String, usize, &super::Command)> = sys
        .modules
        .iter()
        .flat_map(|m| {
            m.commands
                .iter()
                .enumerate()
                .map(move |(i, c)| (m.name.clone(), i, c))
        })
        .collect();
    for (module, i, cmd) in &commands {
        let mut sum = 0.0;
        for u in &cmd.updates {
            if !(u.prob > 0.0 && u.prob <= 1.0) {
                return Err(ModelError::BadUpdateProbability(u.prob));
            }
            sum += u.prob;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(ModelError::BadProbabilitySum {
                sum,
                context: format!("command {} of module `{module}`", i + 1),
            });
        }
    }

    let init: Vec<i64> = vars.iter().map(|v| v.init).collect();
    let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    index.insert(init.clone(), 0);
    let mut states: Vec<Vec<i64>> = vec![init];
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new()];
    let mut queue: VecDeque<usize> = VecDeque::from([0]);

    let describe = |vals: &[i64]| -> String {
        vars.iter()
            .zip(vals)
            .map(|(v, val)| format!("{}={}", v.name, val))
            .collect::<Vec<_>>()
            .join(", ")
    };

    while let Some(s) = queue.pop_front() {
        let vals = states[s].clone();
        let env = |name: &str, primed: bool| -> Option<Const> {
            if primed {
                return None;
            }
            var_index.get(name).map(|&i| Const::Int(vals[i]))
        };

        let mut enabled = Vec::new();
        for (module, ci, cmd) in &commands {
            let g = cmd
                .guard
                .eval(&env)
                .and_then(Const::as_bool)
                .map_err(|e| ModelError::Eval {
                    context: format!("guard of command {} in module `{module}`", ci + 1),
                    source: e,
                })?;
            if g {
                enabled.push((module, ci, *cmd));
            }
        }
        if enabled.is_empty() {
            rows[s].insert(s, 1.0);
            continue;
        }
        let share = 1.0 / enabled.len() as f64;

        for (module, ci, cmd) in enabled {
            for u in &cmd.updates {
                let mut next = vals.clone();
                let mut touched = vec![false; vars.len()];
                for (var, expr) in &u.assigns {
                    let &vi = var_index
                        .get(var.as_str())
                        .ok_or_else(|| ModelError::UnknownAssignTarget(var.clone()))?;
                    if touched[vi] {
                        return Err(ModelError::DuplicateAssignment(var.clone()));
                    }
                    touched[vi] = true;
                    let value = expr.eval(&env).and_then(Const::as_int).map_err(|e| {
                        ModelError::Eval {
                            context: format!(
                                "assignment to `{var}` in command {} of module `{module}`",
                                ci + 1
                            ),
                            source: e,
                        }
                    })?;
                    let decl = vars[vi];
                    if value < decl.lo || value > decl.hi {
                        return Err(ModelError::OutOfRange {
                            var: var.clone(),
                            value,
                            lo: decl.lo,
                            hi: decl.hi,
                            state: describe(&vals),
                            command: format!("command {} of module `{module}`", ci + 1),
                        });
                    }
                    next[vi] = value;
                }
                let t = match index.get(&next) {
                    Some(&t) => t,
                    None => {
                        if states.len() >= cap {
                            return Err(ModelError::StateCap(cap));
                        }
                        let t = states.len();
                        index.insert(next.clone(), t);
                        states.push(next);
                        rows.push(BTreeMap::new());
                        queue.push_back(t);
                        t
                    }
                };
                *rows[s].entry(t).or_insert(0.0) += share * u.prob;
            }
        }
        let sum: f64 = rows[s].values().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(ModelError::BadProbabilitySum {
                sum,
                context: format!("state ({})", describe(&vals)),
            });
        }
    }

    let n = states.len();
    let mut dtmc: Dtmc<T> = Dtmc::new(n, 0);
    for (s, row) in rows.iter().enumerate() {
        for (&t, &p) in row {
            dtmc.add(s, t, T::of(p));
        }
    }

    for label in &sys.labels {
        dtmc.add_label(&label.name, []);
        for s in 0..n {
            let vals = &states[s];
            let env = |name: &str, primed: bool| -> Option<Const> {
                if primed {
                    return None;
                }
                var_index.get(name).map(|&i| Const::Int(vals[i]))
            };
            let holds = label
                .expr
                .eval(&env)
                .and_then(Const::as_bool)
                .map_err(|e| ModelError::Eval {
                    context: format!("label \"{}\"", label.name),
                    source: e,
                })?;
            if holds {
                dtmc.add_label(&label.name, [s]);
            }
        }
    }

    let mut rewards: BTreeMap<String, RewardStructure<T>> = BTreeMap::new();
    for decl in &sys.rewards {
        if rewards.contains_key(&decl.name) {
            return Err(ModelError::DuplicateReward(decl.name.clone()));
        }
        let mut r = RewardStructure::new(n);
        for s in 0..n {
            let vals = &states[s];
            let env = |name: &str, primed: bool| -> Option<Const> {
                if primed {
                    return None;
                }
                var_index.get(name).map(|&i| Const::Int(vals[i]))
            };
            for (i, item) in decl.state_items.iter().enumerate() {
                let ctx = || format!("reward \"{}\" state item {}", decl.name, i + 1);
                let holds = item
                    .guard
                    .eval(&env)
                    .and_then(Const::as_bool)
                    .map_err(|e| ModelError::Eval { context: ctx(), source: e })?;
                if !holds {
                    continue;
                }
                let v = item
                    .value
                    .eval(&env)
                    .and_then(Const::as_int)
                    .map_err(|e| ModelError::Eval { context: ctx(), source: e })?;
                if v < 0 {
                    return Err(ModelError::NegativeReward { context: ctx(), value: v });
                }
                if v != 0 {
                    r.add_state_reward(s, T::of(v as f64));
                }
            }
            if decl.trans_items.is_empty() {
                continue;
            }
            for &t in rows[s].keys() {
                let target = &states[t];
                let env = |name: &str, primed: bool| -> Option<Const> {
                    let &i = var_index.get(name)?;
                    Some(Const::Int(if primed { target[i] } else { vals[i] }))
                };
                for (i, item) in decl.trans_items.iter().enumerate() {
                    let ctx = || format!("reward \"{}\" transition item {}", decl.name, i + 1);
                    let holds = item
                        .guard
                        .eval(&env)
                        .and_then(Const::as_bool)
                        .map_err(|e| ModelError::Eval { context: ctx(), source: e })?;
                    if !holds {
                        continue;
                    }
                    let v = item
                        .value
                        .eval(&env)
                        .and_then(Const::as_int)
                        .map_err(|e| ModelError::Eval { context: ctx(), source: e })?;
                    if v < 0 {
                        return Err(ModelError::NegativeReward { context: ctx(), value: v });
                    }
                    if v != 0 {
                        r.add_transition_reward(s, t, T::of(v as f64));
                    }
                }
            }
        }
        rewards.insert(decl.name.clone(), r);
    }

    Ok(BuiltModel {
        dtmc,
        rewards,
        var_names: vars.iter().map(|v| v.name.clone()).collect(),
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelgen::{
        Command, Expr, GuardedCommandModule, LabelDecl, RewardDecl, StateRewardItem,
        TransRewardItem, Update,
    };

    fn var(name: &str, hi: i64, init: i64) -> Variable {
        Variable { name: name.into(), lo: 0, hi, init }
    }

    /// Random walk on 0..=3 that sticks at 3.
    fn walk() -> ModelSystem {
        let step = Command {
            guard: Expr::var("x").lt(Expr::int(3)),
            updates: vec![
                Update {
                    prob: 0.5,
                    assigns: vec![("x".into(), Expr::var("x").add(Expr::int(1)))],
                },
                Update {
                    prob: 0.5,
                    assigns: vec![("x".into(), Expr::var("x").sub(Expr::int(1)).max(Expr::int(0)))],
                },
            ],
        };
        ModelSystem {
            modules: vec![GuardedCommandModule {
                name: "walker".into(),
                vars: vec![var("x", 3, 0)],
                commands: vec![step],
            }],
            labels: vec![
                LabelDecl { name: "stuck".into(), expr: Expr::var("x").eq(Expr::int(3)) },
                LabelDecl { name: "nowhere".into(), expr: Expr::truth(false) },
            ],
            rewards: vec![RewardDecl {
                name: "position".into(),
                state_items: vec![StateRewardItem {
                    guard: Expr::truth(true),
                    value: Expr::var("x"),
                }],
                trans_items: vec![TransRewardItem {
                    guard: Expr::primed("x").gt(Expr::var("x")),
                    value: Expr::int(1),
                }],
            }],
        }
    }

    #[test]
    fn explores_exactly_the_reachable_states() {
        let m: BuiltModel<f64> = build(&walk()).unwrap();
        assert_eq!(m.dtmc.n_states(), 4);
        assert_eq!(m.states[0], vec![0]);
        assert_eq!(m.value(3, "x"), Some(3));
        // State 0 steps up with 1/2 and clamps back onto itself with 1/2.
        assert_eq!(m.dtmc.row(0), &[(0, 0.5), (1, 0.5)]);
        assert!(m.dtmc.validate().is_empty());
    }

    #[test]
    fn disabled_states_idle_on_a_self_loop() {
        let m: BuiltModel<f64> = build(&walk()).unwrap();
        let stuck = m.dtmc.label_states("stuck").unwrap();
        assert!(stuck.contains(&3));
        assert_eq!(m.dtmc.row(3), &[(3, 1.0)]);
    }

    #[test]
    fn empty_labels_are_still_registered() {
        let m: BuiltModel<f64> = build(&walk()).unwrap();
        assert!(m.dtmc.label_states("nowhere").unwrap().is_empty());
    }

    #[test]
    fn rewards_cover_states_and_transitions() {
        let m: BuiltModel<f64> = build(&walk()).unwrap();
        let r = &m.rewards["position"];
        assert_eq!(r.state_reward(2), 2.0);
        assert_eq!(r.state_reward(0), 0.0);
        assert_eq!(r.transition_reward(1, 2), 1.0);
        assert_eq!(r.transition_reward(1, 0), 0.0);
        assert!(r.validate(&m.dtmc).is_empty());
    }

    #[test]
    fn simultaneously_enabled_commands_split_uniformly() {
        let mut sys = walk();
        sys.modules[0].commands.push(Command {
            guard: Expr::var("x").eq(Expr::int(0)),
            updates: vec![Update { prob: 1.0, assigns: vec![("x".into(), Expr::int(2))] }],
        });
        let m: BuiltModel<f64> = build(&sys).unwrap();
        // In state 0 both commands are enabled: the walk contributes
        // 0.25 + 0.25, the jump 0.5.
        assert_eq!(m.dtmc.row(0), &[(0, 0.25), (1, 0.25), (2, 0.5)]);
    }

    #[test]
    fn assignments_read_the_pre_state() {
        let swap = Command {
            guard: Expr::truth(true),
            updates: vec![Update {
                prob: 1.0,
                assigns: vec![
                    ("a".into(), Expr::var("b")),
                    ("b".into(), Expr::var("a")),
                ],
            }],
        };
        let sys = ModelSystem {
            modules: vec![GuardedCommandModule {
                name: "m".into(),
                vars: vec![var("a", 5, 2), var("b", 5, 4)],
                commands: vec![swap],
            }],
            ..Default::default()
        };
        let m: BuiltModel<f64> = build(&sys).unwrap();
        assert_eq!(m.states[0], vec![2, 4]);
        assert_eq!(m.states[1], vec![4, 2]);
        assert_eq!(m.dtmc.row(0), &[(1, 1.0)]);
        assert_eq!(m.dtmc.row(1), &[(0, 1.0)]);
    }

    #[test]
    fn out_of_range_assignments_name_state_and_command() {
        let mut sys = walk();
        sys.modules[0].commands[0].updates[1].assigns[0].1 =
            Expr::var("x").sub(Expr::int(1));
        let e = build::<f64>(&sys).unwrap_err();
        match e {
            ModelError::OutOfRange { var, value, state, command, .. } => {
                assert_eq!(var, "x");
                assert_eq!(value, -1);
                assert_eq!(state, "x=0");
                assert_eq!(command, "command 1 of module `walker`");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn bad_probability_sums_are_rejected_up_front() {
        let mut sys = walk();
        sys.modules[0].commands[0].updates[0].prob = 0.6;
        assert!(matches!(
            build::<f64>(&sys),
            Err(ModelError::BadProbabilitySum { .. })
        ));
        let mut sys = walk();
        sys.modules[0].commands[0].updates[0].prob = 0.0;
        assert!(matches!(
            build::<f64>(&sys),
            Err(ModelError::BadUpdateProbability(_))
        ));
    }

    #[test]
    fn evaluation_errors_carry_their_context() {
        let mut sys = walk();
        sys.labels[0].expr = Expr::var("ghost").eq(Expr::int(1));
        let e = build::<f64>(&sys).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("label \"stuck\""), "{msg}");
        assert!(msg.contains("ghost"), "{msg}");
    }

    #[test]
    fn state_cap_is_enforced() {
        let sys = ModelSystem {
            modules: vec![GuardedCommandModule {
                name: "m".into(),
                vars: vec![var("x", 1000, 0)],
                commands: vec![Command {
                    guard: Expr::var("x").lt(Expr::int(1000)),
                    updates: vec![Update {
                        prob: 1.0,
                        assigns: vec![("x".into(), Expr::var("x").add(Expr::int(1)))],
                    }],
                }],
            }],
            ..Default::default()
        };
        assert!(matches!(
            build_capped::<f64>(&sys, 10),
            Err(ModelError::StateCap(10))
        ));
    }

    #[test]
    fn construction_is_deterministic() {
        let a: BuiltModel<f64> = build(&walk()).unwrap();
        let b: BuiltModel<f64> = build(&walk()).unwrap();
        assert_eq!(a.dtmc, b.dtmc);
        assert_eq!(a.states, b.states);
    }
}
