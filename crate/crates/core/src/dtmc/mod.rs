//! Sparse discrete-time Markov chains with reward structures.
//!
//! A chain is a finite state set, a distinguished initial state, a
//! row-stochastic transition function stored as sorted sparse rows, and a
//! labelling of states with atomic propositions. Terminating states are
//! modelled explicitly with a probability-one self-loop — validation treats
//! a row that sums to anything but one as a defect, never as an implicit
//! sink.

pub mod analysis;
pub mod graph;
pub mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Dtmc<T: Real = f64> {
    n: usize,
    initial: usize,
    rows: Vec<Vec<(usize, T)>>,
    labels: BTreeMap<String, BTreeSet<usize>>,
}

impl<T: Real> Dtmc<T> {
    pub fn new(n: usize, initial: usize) -> Self {
        assert!(n > 0, "a chain needs at least one state");
        assert!(initial < n, "initial state {initial} out of range (n = {n})");
        Dtmc {
            n,
            initial,
            rows: vec![Vec::new(); n],
            labels: BTreeMap::new(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// Add probability mass to an edge; repeated calls for the same pair
    /// accumulate. Rows stay sorted by target.
    pub fn add(&mut self, from: usize, to: usize, p: T) {
        assert!(from < self.n && to < self.n, "transition endpoint out of range");
        let row = &mut self.rows[from];
        match row.binary_search_by_key(&to, |e| e.0) {
            Ok(i) => row[i].1 += p,
            Err(i) => row.insert(i, (to, p)),
        }
    }

    /// Outgoing transitions of `s`, sorted by target state.
    pub fn row(&self, s: usize) -> &[(usize, T)] {
        &self.rows[s]
    }

    pub fn labels(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.labels
    }

    pub fn label_states(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.labels.get(name)
    }

    /// Attach (or extend) a label with the given states.
    pub fn add_label<I: IntoIterator<Item = usize>>(&mut self, name: &str, states: I) {
        let set = self.labels.entry(name.to_string()).or_default();
        for s in states {
            assert!(s < self.n, "labelled state {s} out of range");
            set.insert(s);
        }
    }

    /// A label as a dense membership vector; `None` for unknown names.
    pub fn label_vector(&self, name: &str) -> Option<Vec<bool>> {
        self.labels.get(name).map(|set| {
            let mut v = vec![false; self.n];
            for &s in set {
                v[s] = true;
            }
            v
        })
    }

    /// Column-oriented view (transposed adjacency), built on demand.
    pub fn transpose(&self) -> Vec<Vec<(usize, T)>> {
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.n];
        for (from, row) in self.rows.iter().enumerate() {
            for &(to, p) in row {
                cols[to].push((from, p));
            }
        }
        cols
    }

    /// Structural checks: every probability in `[0,1]`, every row summing to
    /// one within [`Real::ROW_SUM_TOL`], no state without outgoing mass.
    /// Returns all defects rather than failing fast.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (s, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                out.push(Violation::NoOutgoing { state: s });
                continue;
            }
            let mut sum = T::zero();
            for &(to, p) in row {
                if p < T::zero() || p > T::one() + T::ROW_SUM_TOL {
                    out.push(Violation::BadProbability {
                        from: s,
                        to,
                        p: p.to_f64().unwrap_or(f64::NAN),
                    });
                }
                sum += p;
            }
            if (sum - T::one()).abs() > T::ROW_SUM_TOL {
                out.push(Violation::RowSum {
                    state: s,
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        out
    }
}

/// State rewards (one value per state) and transition rewards (sparse, on
/// edges of the chain they decorate).
#[derive(Debug, Clone, PartialEq)]
pub struct RewardStructure<T: Real = f64> {
    state: Vec<T>,
    trans: Vec<Vec<(usize, T)>>,
}

impl<T: Real> RewardStructure<T> {
    pub fn new(n: usize) -> Self {
        RewardStructure { state: vec![T::zero(); n], trans: vec![Vec::new(); n] }
    }

    pub fn n_states(&self) -> usize {
        self.state.len()
    }

    pub fn set_state_reward(&mut self, s: usize, v: T) {
        self.state[s] = v;
    }

    pub fn add_state_reward(&mut self, s: usize, v: T) {
        self.state[s] += v;
    }

    pub fn state_reward(&self, s: usize) -> T {
        self.state[s]
    }

    pub fn state_rewards(&self) -> &[T] {
        &self.state
    }

    pub fn add_transition_reward(&mut self, from: usize, to: usize, v: T) {
        let row = &mut self.trans[from];
        match row.binary_search_by_key(&to, |e| e.0) {
            Ok(i) => row[i].1 += v,
            Err(i) => row.insert(i, (to, v)),
        }
    }

    pub fn transition_reward(&self, from: usize, to: usize) -> T {
        match self.trans[from].binary_search_by_key(&to, |e| e.0) {
            Ok(i) => self.trans[from][i].1,
            Err(_) => T::zero(),
        }
    }

    pub fn transition_rewards(&self, from: usize) -> &[(usize, T)] {
        &self.trans[from]
    }

    /// Expected one-step gain from `s`: `ρ(s) + Σ_s' P(s,s')·ι(s,s')`.
    pub fn expected_gain(&self, d: &Dtmc<T>, s: usize) -> T {
        let mut g = self.state[s];
        for &(to, r) in &self.trans[s] {
            if let Ok(i) = d.row(s).binary_search_by_key(&to, |e| e.0) {
                g += d.row(s)[i].1 * r;
            }
        }
        g
    }

    /// Checks against the chain this structure decorates: matching state
    /// count, non-negative values, and no transition reward off the support
    /// of the transition function.
    pub fn validate(&self, d: &Dtmc<T>) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.state.len() != d.n_states() {
            out.push(Violation::SizeMismatch {
                rewards: self.state.len(),
                chain: d.n_states(),
            });
            return out;
        }
        for (s, &v) in self.state.iter().enumerate() {
            if v < T::zero() {
                out.push(Violation::NegativeReward { state: s });
            }
        }
        for (from, row) in self.trans.iter().enumerate() {
            for &(to, v) in row {
                if v < T::zero() {
                    out.push(Violation::NegativeReward { state: from });
                }
                if d.row(from).binary_search_by_key(&to, |e| e.0).is_err() {
                    out.push(Violation::RewardOffSupport { from, to });
                }
            }
        }
        out
    }
}

/// A defect found by validation. Rendered with concrete state numbers so a
/// report can be acted on directly.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum { state: usize, sum: f64 },
    BadProbability { from: usize, to: usize, p: f64 },
    NoOutgoing { state: usize },
    NegativeReward { state: usize },
    RewardOffSupport { from: usize, to: usize },
    SizeMismatch { rewards: usize, chain: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { state, sum } => {
                write!(f, "state {state}: outgoing probabilities sum to {sum}, not 1")
            }
            Violation::BadProbability { from, to, p } => {
                write!(f, "transition {from} -> {to}: probability {p} outside [0,1]")
            }
            Violation::NoOutgoing { state } => write!(
                f,
                "state {state} has no outgoing transitions; terminating states need an explicit self-loop"
            ),
            Violation::NegativeReward { state } => {
                write!(f, "state {state}: negative reward value")
            }
            Violation::RewardOffSupport { from, to } => write!(
                f,
                "transition reward on {from} -> {to}, which has zero probability"
            ),
            Violation::SizeMismatch { rewards, chain } => write!(
                f,
                "reward structure covers {rewards} states but the chain has {chain}"
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_accumulates_parallel_edges() {
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 1, 0.25);
        d.add(0, 1, 0.75);
        d.add(1, 1, 1.0);
        assert_eq!(d.row(0), &[(1, 1.0)]);
        assert!(d.validate().is_empty());
    }

    #[test]
    fn validate_reports_short_row_with_state_number() {
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 0, 0.5);
        d.add(0, 1, 0.4);
        d.add(1, 1, 1.0);
        let v = d.validate();
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::RowSum { state, sum } => {
                assert_eq!(*state, 0);
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("unexpected violation {other:?}"),
        }
        assert!(v[0].to_string().contains("state 0"));
    }

    #[test]
    fn validate_flags_missing_self_loop() {
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 1, 1.0);
        let v = d.validate();
        assert!(matches!(v[0], Violation::NoOutgoing { state: 1 }));
    }

    #[test]
    fn reward_off_support_is_a_violation() {
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 1, 1.0);
        d.add(1, 1, 1.0);
        let mut r: RewardStructure = RewardStructure::new(2);
        r.add_transition_reward(1, 0, 5.0);
        let v = r.validate(&d);
        assert!(matches!(v[0], Violation::RewardOffSupport { from: 1, to: 0 }));
    }

    #[test]
    fn expected_gain_mixes_state_and_transition_rewards() {
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 0, 0.5);
        d.add(0, 1, 0.5);
        d.add(1, 1, 1.0);
        let mut r: RewardStructure = RewardStructure::new(2);
        r.set_state_reward(0, 1.0);
        r.add_transition_reward(0, 1, 4.0);
        assert!((r.expected_gain(&d, 0) - 3.0).abs() < 1e-12);
    }
}
