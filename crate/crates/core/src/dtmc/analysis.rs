//! Numerical engines over chains: transient distributions, until
//! probabilities, the four reward analyses and steady state.
//!
//! Bounded operators run value iteration backwards from the horizon.
//! Unbounded operators first settle the exact zero/one sets by graph search
//! (so no numerics can blur qualitative answers), then solve the residual
//! linear system with Gauss–Seidel sweeps. Convergence is declared on the
//! max-norm of successive differences, tightened by a geometric tail
//! estimate so the reported values honour the tolerance, not just the step
//! size.

use thiserror::Error;

use crate::scalar::Real;

use super::graph;
use super::{Dtmc, RewardStructure};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{op} did not converge within {iters} iterations")]
    Convergence { op: &'static str, iters: usize },
    #[error("steady-state analysis requires an irreducible, aperiodic reachable chain: {reason}")]
    UnsupportedStructure { reason: String },
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<T: Real> {
    /// Max-norm threshold on successive differences.
    pub eps: T,
    /// Sweep cap; hitting it is an explicit error, never a silent truncation.
    pub max_iters: usize,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions { eps: T::SOLVE_TOL, max_iters: 1_000_000 }
    }
}

/// Distribution after exactly `t` steps from the initial state.
pub fn transient_distribution<T: Real>(d: &Dtmc<T>, t: u64) -> Vec<T> {
    let mut sweep = TransientSweep::new(d);
    for _ in 0..t {
        sweep.step();
    }
    sweep.into_dist()
}

/// Incremental forward walker: the state distribution advanced one step at a
/// time, for callers that need the whole time series.
pub struct TransientSweep<'a, T: Real> {
    d: &'a Dtmc<T>,
    dist: Vec<T>,
    scratch: Vec<T>,
}

impl<'a, T: Real> TransientSweep<'a, T> {
    pub fn new(d: &'a Dtmc<T>) -> Self {
        let mut dist = vec![T::zero(); d.n_states()];
        dist[d.initial()] = T::one();
        TransientSweep { d, dist, scratch: vec![T::zero(); d.n_states()] }
    }

    pub fn dist(&self) -> &[T] {
        &self.dist
    }

    pub fn step(&mut self) {
        for v in self.scratch.iter_mut() {
            *v = T::zero();
        }
        for (s, row) in (0..self.d.n_states()).map(|s| (s, self.d.row(s))) {
            let mass = self.dist[s];
            if mass == T::zero() {
                continue;
            }
            for &(to, p) in row {
                self.scratch[to] += mass * p;
            }
        }
        std::mem::swap(&mut self.dist, &mut self.scratch);
    }

    pub fn into_dist(self) -> Vec<T> {
        self.dist
    }
}

/// Per-state probability that the next state lies in `target`.
pub fn prob_next<T: Real>(d: &Dtmc<T>, target: &[bool]) -> Vec<T> {
    assert_eq!(target.len(), d.n_states());
    (0..d.n_states())
        .map(|s| {
            d.row(s)
                .iter()
                .filter(|&&(to, _)| target[to])
                .map(|&(_, p)| p)
                .sum()
        })
        .collect()
}

/// Per-state probability of `a U≤t b`, by backward value iteration.
pub fn prob_bounded_until<T: Real>(d: &Dtmc<T>, a: &[bool], b: &[bool], t: u64) -> Vec<T> {
    assert_eq!(a.len(), d.n_states());
    assert_eq!(b.len(), d.n_states());
    let n = d.n_states();
    let mut x: Vec<T> = (0..n).map(|s| if b[s] { T::one() } else { T::zero() }).collect();
    let mut next = vec![T::zero(); n];
    for _ in 0..t {
        for s in 0..n {
            next[s] = if b[s] {
                T::one()
            } else if !a[s] {
                T::zero()
            } else {
                d.row(s).iter().map(|&(to, p)| p * x[to]).sum()
            };
        }
        std::mem::swap(&mut x, &mut next);
    }
    x
}

/// Per-state probability of `a U b`. The zero and one sets are decided by
/// graph search; only genuinely uncertain states enter the linear solve.
pub fn prob_until<T: Real>(
    d: &Dtmc<T>,
    a: &[bool],
    b: &[bool],
    opts: &SolveOptions<T>,
) -> Result<Vec<T>, AnalysisError> {
    assert_eq!(a.len(), d.n_states());
    assert_eq!(b.len(), d.n_states());
    let n = d.n_states();
    let can_reach = graph::can_reach_through(d, a, b);
    let zero: Vec<bool> = can_reach.iter().map(|&r| !r).collect();
    let one = graph::prob1_set(d, a, b, &zero);

    let mut result: Vec<T> = (0..n)
        .map(|s| if one[s] { T::one() } else { T::zero() })
        .collect();
    let unknown: Vec<usize> = (0..n).filter(|&s| !zero[s] && !one[s]).collect();
    if unknown.is_empty() {
        return Ok(result);
    }

    let mut index = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        index[s] = i;
    }
    let mut sys = LinearSystem::with_capacity(unknown.len());
    for &s in &unknown {
        let mut cst = T::zero();
        let mut selfp = T::zero();
        let mut coeffs = Vec::new();
        for &(to, p) in d.row(s) {
            if to == s {
                selfp = p;
            } else if one[to] {
                cst += p;
            } else if !zero[to] {
                coeffs.push((index[to], p));
            }
        }
        sys.push(cst, selfp, coeffs);
    }
    let x = sys.gauss_seidel(opts, "until probability")?;
    for (i, &s) in unknown.iter().enumerate() {
        result[s] = x[i];
    }
    Ok(result)
}

/// Per-state expectation of the state reward observed after exactly `t`
/// steps (`P^t · ρ`, computed backwards so every start state comes out of
/// one pass).
pub fn reward_instantaneous<T: Real>(d: &Dtmc<T>, r: &RewardStructure<T>, t: u64) -> Vec<T> {
    let n = d.n_states();
    let mut y: Vec<T> = r.state_rewards().to_vec();
    let mut next = vec![T::zero(); n];
    for _ in 0..t {
        for s in 0..n {
            next[s] = d.row(s).iter().map(|&(to, p)| p * y[to]).sum();
        }
        std::mem::swap(&mut y, &mut next);
    }
    y
}

/// Per-state expected reward accumulated over `t` steps: state rewards of
/// the first `t` states visited plus transition rewards of the `t`
/// transitions taken.
pub fn reward_cumulative<T: Real>(d: &Dtmc<T>, r: &RewardStructure<T>, t: u64) -> Vec<T> {
    let n = d.n_states();
    let gain: Vec<T> = (0..n).map(|s| r.expected_gain(d, s)).collect();
    let mut c = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    for _ in 0..t {
        for s in 0..n {
            next[s] = gain[s] + d.row(s).iter().map(|&(to, p)| p * c[to]).sum();
        }
        std::mem::swap(&mut c, &mut next);
    }
    c
}

/// Per-state expected reward accumulated until first hitting `target`;
/// infinite wherever the target is not reached almost surely.
pub fn reward_reachability<T: Real>(
    d: &Dtmc<T>,
    r: &RewardStructure<T>,
    target: &[bool],
    opts: &SolveOptions<T>,
) -> Result<Vec<T>, AnalysisError> {
    assert_eq!(target.len(), d.n_states());
    let n = d.n_states();
    let all = vec![true; n];
    let can_reach = graph::can_reach_through(d, &all, target);
    let zero: Vec<bool> = can_reach.iter().map(|&x| !x).collect();
    let one = graph::prob1_set(d, &all, target, &zero);

    let mut result: Vec<T> = (0..n)
        .map(|s| if one[s] { T::zero() } else { T::infinity() })
        .collect();
    let unknown: Vec<usize> = (0..n).filter(|&s| one[s] && !target[s]).collect();
    if unknown.is_empty() {
        return Ok(result);
    }
    let mut index = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        index[s] = i;
    }
    let mut sys = LinearSystem::with_capacity(unknown.len());
    for &s in &unknown {
        let mut selfp = T::zero();
        let mut coeffs = Vec::new();
        for &(to, p) in d.row(s) {
            if to == s {
                selfp = p;
            } else if !target[to] {
                // Successors of an almost-sure state are almost sure.
                coeffs.push((index[to], p));
            }
        }
        sys.push(r.expected_gain(d, s), selfp, coeffs);
    }
    let x = sys.gauss_seidel(opts, "reachability reward")?;
    for (i, &s) in unknown.iter().enumerate() {
        result[s] = x[i];
    }
    Ok(result)
}

/// Stationary distribution of the reachable part of the chain, which must be
/// irreducible and aperiodic. Unreachable states get probability zero.
pub fn steady_state<T: Real>(
    d: &Dtmc<T>,
    opts: &SolveOptions<T>,
) -> Result<Vec<T>, AnalysisError> {
    let n = d.n_states();
    let reach = graph::reachable(d);
    let reach_states: Vec<usize> = (0..n).filter(|&s| reach[s]).collect();

    let reachable_comps: Vec<Vec<usize>> = graph::sccs(d)
        .into_iter()
        .filter(|c| reach[c[0]])
        .collect();
    if reachable_comps.len() > 1 {
        let bottoms: Vec<Vec<usize>> = graph::bottom_sccs(d)
            .into_iter()
            .filter(|c| reach[c[0]])
            .collect();
        return Err(AnalysisError::UnsupportedStructure {
            reason: format!(
                "reachable part is not irreducible; bottom components: {}",
                describe_components(&bottoms)
            ),
        });
    }
    let p = graph::period(d);
    if p != 1 {
        return Err(AnalysisError::UnsupportedStructure {
            reason: format!(
                "reachable part is periodic with period {p}; bottom components: {}",
                describe_components(&reachable_comps)
            ),
        });
    }

    let mut pi = vec![T::zero(); n];
    if reach_states.len() == 1 {
        pi[reach_states[0]] = T::one();
        return Ok(pi);
    }

    let cols = d.transpose();
    let uniform = T::one() / T::from_usize(reach_states.len()).unwrap();
    for &s in &reach_states {
        pi[s] = uniform;
    }
    let mut prev_delta = T::infinity();
    let mut lambda = T::zero();
    for _ in 0..opts.max_iters {
        // In-place balance sweep, then renormalise.
        for &j in &reach_states {
            let mut acc = T::zero();
            let mut selfp = T::zero();
            for &(i, p) in &cols[j] {
                if i == j {
                    selfp = p;
                } else {
                    acc += pi[i] * p;
                }
            }
            pi[j] = acc / (T::one() - selfp);
        }
        let total: T = reach_states.iter().map(|&s| pi[s]).sum();
        let mut delta = T::zero();
        for &s in &reach_states {
            pi[s] /= total;
        }
        // Measure movement against the stationarity condition π = πP.
        for &j in &reach_states {
            let target: T = cols[j].iter().map(|&(i, p)| pi[i] * p).sum();
            let d_j = (target - pi[j]).abs();
            if d_j > delta {
                delta = d_j;
            }
        }
        if delta == T::zero() {
            return Ok(pi);
        }
        // Contraction estimate: worst recent ratio, decayed slowly so one
        // optimistic sweep cannot end the iteration early.
        if prev_delta.is_finite() && prev_delta > T::zero() {
            let ratio = delta / prev_delta;
            let faded = lambda * T::of(0.9) + ratio * T::of(0.1);
            lambda = if ratio > faded { ratio } else { faded };
        }
        if lambda < T::one() && delta / (T::one() - lambda) <= opts.eps / T::of(4.0) {
            return Ok(pi);
        }
        prev_delta = delta;
    }
    Err(AnalysisError::Convergence { op: "steady state", iters: opts.max_iters })
}

/// Long-run average reward per step: `Σ_s π(s) · gain(s)`.
pub fn reward_steady_state<T: Real>(
    d: &Dtmc<T>,
    r: &RewardStructure<T>,
    opts: &SolveOptions<T>,
) -> Result<T, AnalysisError> {
    let pi = steady_state(d, opts)?;
    Ok((0..d.n_states()).map(|s| pi[s] * r.expected_gain(d, s)).sum())
}

fn describe_components(comps: &[Vec<usize>]) -> String {
    const SHOWN: usize = 16;
    comps
        .iter()
        .map(|c| {
            let head: Vec<String> = c.iter().take(SHOWN).map(|s| s.to_string()).collect();
            let tail = if c.len() > SHOWN { ", …" } else { "" };
            format!("{{{}{}}}", head.join(", "), tail)
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Sparse fixed-point system `x_i = (c_i + Σ_j a_ij x_j) / (1 − selfp_i)`,
/// solved by Gauss–Seidel sweeps.
struct LinearSystem<T> {
    cst: Vec<T>,
    selfp: Vec<T>,
    coeffs: Vec<Vec<(usize, T)>>,
}

impl<T: Real> LinearSystem<T> {
    fn with_capacity(m: usize) -> Self {
        LinearSystem {
            cst: Vec::with_capacity(m),
            selfp: Vec::with_capacity(m),
            coeffs: Vec::with_capacity(m),
        }
    }

    fn push(&mut self, cst: T, selfp: T, coeffs: Vec<(usize, T)>) {
        self.cst.push(cst);
        self.selfp.push(selfp);
        self.coeffs.push(coeffs);
    }

    fn gauss_seidel(
        &self,
        opts: &SolveOptions<T>,
        op: &'static str,
    ) -> Result<Vec<T>, AnalysisError> {
        let m = self.cst.len();
        let mut x = vec![T::zero(); m];
        let mut prev_delta = T::infinity();
        for _ in 0..opts.max_iters {
            let mut delta = T::zero();
            for i in 0..m {
                let mut acc = self.cst[i];
                for &(j, a) in &self.coeffs[i] {
                    acc += a * x[j];
                }
                let new = acc / (T::one() - self.selfp[i]);
                let d = (new - x[i]).abs();
                if d > delta {
                    delta = d;
                }
                x[i] = new;
            }
            if delta == T::zero() {
                return Ok(x);
            }
            if delta <= opts.eps {
                let ratio = if prev_delta.is_finite() && prev_delta > T::zero() {
                    delta / prev_delta
                } else {
                    T::zero()
                };
                if ratio < T::one() && delta * ratio / (T::one() - ratio) <= opts.eps {
                    return Ok(x);
                }
            }
            prev_delta = delta;
        }
        Err(AnalysisError::Convergence { op, iters: opts.max_iters })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolveOptions<f64> {
        SolveOptions { eps: 1e-12, ..SolveOptions::default() }
    }

    /// Five-state birth–death chain: 0 is a trap, 4 is the goal, interior
    /// states step up with 0.4, down with 0.3, stay with 0.3.
    fn birth_death() -> Dtmc {
        let mut d: Dtmc = Dtmc::new(5, 2);
        d.add(0, 0, 1.0);
        d.add(4, 4, 1.0);
        for i in 1..=3 {
            d.add(i, i + 1, 0.4);
            d.add(i, i - 1, 0.3);
            d.add(i, i, 0.3);
        }
        d
    }

    fn mid_goal() -> (Vec<bool>, Vec<bool>) {
        (
            vec![false, true, true, true, false],
            vec![false, false, false, false, true],
        )
    }

    #[test]
    fn transient_mass_is_conserved() {
        let d = birth_death();
        let mut sweep = TransientSweep::new(&d);
        for _ in 0..200 {
            sweep.step();
            let total: f64 = sweep.dist().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn prob_next_sums_target_mass() {
        let mut d: Dtmc = Dtmc::new(3, 0);
        d.add(0, 1, 0.3);
        d.add(0, 2, 0.7);
        d.add(1, 1, 1.0);
        d.add(2, 2, 1.0);
        let v = prob_next(&d, &[false, true, false]);
        assert!((v[0] - 0.3).abs() < 1e-15);
        assert_eq!(v[2], 0.0);
    }

    #[test]
    fn bounded_until_matches_exact_enumeration() {
        // Exact value computed by full path enumeration with rational
        // arithmetic: 354064981 / 625000000.
        let d = birth_death();
        let (a, b) = mid_goal();
        let v = prob_bounded_until(&d, &a, &b, 10);
        assert!((v[2] - 0.5665039696).abs() < 1e-12);
        // Horizon zero: only goal states satisfy the formula.
        let v0 = prob_bounded_until(&d, &a, &b, 0);
        assert_eq!(v0, vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn until_matches_exact_solution() {
        // Hand-solved linear system: x1 = 64/175, x2 = 16/25, x3 = 148/175.
        let d = birth_death();
        let (a, b) = mid_goal();
        let v = prob_until(&d, &a, &b, &opts()).unwrap();
        assert!((v[1] - 64.0 / 175.0).abs() < 1e-9);
        assert!((v[2] - 0.64).abs() < 1e-9);
        assert!((v[3] - 148.0 / 175.0).abs() < 1e-9);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[4], 1.0);
    }

    #[test]
    fn until_with_goal_at_initial_is_one() {
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 1, 1.0);
        d.add(1, 1, 1.0);
        let v = prob_until(&d, &[false, false], &[true, false], &opts()).unwrap();
        assert_eq!(v[0], 1.0);
    }

    #[test]
    fn instantaneous_reward_alternates_with_the_chain() {
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 1, 1.0);
        d.add(1, 0, 1.0);
        let mut r: RewardStructure = RewardStructure::new(2);
        r.set_state_reward(1, 1.0);
        assert_eq!(reward_instantaneous(&d, &r, 0)[0], 0.0);
        assert_eq!(reward_instantaneous(&d, &r, 1)[0], 1.0);
        assert_eq!(reward_instantaneous(&d, &r, 2)[0], 0.0);
        assert_eq!(reward_instantaneous(&d, &r, 3)[0], 1.0);
    }

    #[test]
    fn cumulative_reward_geometric_transition_example() {
        // One transition worth 5 crossed with chance 1/2 per step: after ten
        // steps the expected total is 5·(1 − 2⁻¹⁰), exactly representable.
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 0, 0.5);
        d.add(0, 1, 0.5);
        d.add(1, 1, 1.0);
        let mut r: RewardStructure = RewardStructure::new(2);
        r.add_transition_reward(0, 1, 5.0);
        let c = reward_cumulative(&d, &r, 10);
        assert!((c[0] - 5.0 * (1.0 - 0.5f64.powi(10))).abs() < 1e-12);
        assert_eq!(reward_cumulative(&d, &r, 0)[0], 0.0);
    }

    #[test]
    fn reachability_reward_inverts_the_exit_probability() {
        for p in [0.5, 0.25, 0.1] {
            let mut d: Dtmc = Dtmc::new(2, 0);
            d.add(0, 0, 1.0 - p);
            d.add(0, 1, p);
            d.add(1, 1, 1.0);
            let mut r: RewardStructure = RewardStructure::new(2);
            r.set_state_reward(0, 1.0);
            let v = reward_reachability(&d, &r, &[false, true], &opts()).unwrap();
            assert!((v[0] - 1.0 / p).abs() < 1e-8, "p = {p}: got {}", v[0]);
            assert_eq!(v[1], 0.0);
        }
    }

    #[test]
    fn reachability_reward_is_infinite_when_goal_is_uncertain() {
        let d = birth_death();
        let mut r: RewardStructure = RewardStructure::new(5);
        for s in 0..5 {
            r.set_state_reward(s, 1.0);
        }
        let v = reward_reachability(&d, &r, &[false, false, false, false, true], &opts()).unwrap();
        assert!(v[2].is_infinite());
        assert_eq!(v[4], 0.0);
    }

    #[test]
    fn reachability_reward_reflected_chain_matches_direct_solve() {
        // Same chain with the trap replaced by a reflecting wall; values per
        // start state solved densely by hand.
        let mut d: Dtmc = Dtmc::new(5, 2);
        d.add(0, 1, 1.0);
        d.add(4, 4, 1.0);
        for i in 1..=3 {
            d.add(i, i + 1, 0.4);
            d.add(i, i - 1, 0.3);
            d.add(i, i, 0.3);
        }
        let mut r: RewardStructure = RewardStructure::new(5);
        for s in 0..4 {
            r.set_state_reward(s, 1.0);
        }
        let v = reward_reachability(&d, &r, &[false, false, false, false, true], &opts()).unwrap();
        assert!((v[0] - 15.390625).abs() < 1e-8);
        assert!((v[1] - 14.390625).abs() < 1e-8);
        assert!((v[2] - 11.140625).abs() < 1e-8);
        assert!((v[3] - 6.203125).abs() < 1e-8);
    }

    #[test]
    fn gamblers_ruin_from_the_middle_is_even() {
        let mut d: Dtmc = Dtmc::new(5, 2);
        d.add(0, 0, 1.0);
        d.add(4, 4, 1.0);
        for i in 1..=3 {
            d.add(i, i + 1, 0.5);
            d.add(i, i - 1, 0.5);
        }
        let a = vec![true; 5];
        let b = vec![false, false, false, false, true];
        let v = prob_until(&d, &a, &b, &opts()).unwrap();
        assert!((v[2] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn steady_state_symmetric_two_state() {
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 0, 0.5);
        d.add(0, 1, 0.5);
        d.add(1, 0, 0.5);
        d.add(1, 1, 0.5);
        let mut r: RewardStructure = RewardStructure::new(2);
        r.set_state_reward(1, 1.0);
        let v = reward_steady_state(&d, &r, &opts()).unwrap();
        assert!((v - 0.5).abs() < 1e-8);
    }

    #[test]
    fn steady_state_three_state_matches_eigenvector() {
        // Stationary vector computed independently: (0.3875, 0.2875, 0.325).
        let mut d: Dtmc = Dtmc::new(3, 0);
        let p = [[0.2, 0.5, 0.3], [0.4, 0.1, 0.5], [0.6, 0.2, 0.2]];
        for (i, row) in p.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                d.add(i, j, v);
            }
        }
        let pi = steady_state(&d, &opts()).unwrap();
        assert!((pi[0] - 0.3875).abs() < 1e-8);
        assert!((pi[1] - 0.2875).abs() < 1e-8);
        assert!((pi[2] - 0.325).abs() < 1e-8);
        let mut r: RewardStructure = RewardStructure::new(3);
        for s in 0..3 {
            r.set_state_reward(s, (s + 1) as f64);
        }
        let v = reward_steady_state(&d, &r, &opts()).unwrap();
        assert!((v - 1.9375).abs() < 1e-8);
    }

    #[test]
    fn steady_state_single_absorbing_state_is_its_reward() {
        let mut d: Dtmc = Dtmc::new(1, 0);
        d.add(0, 0, 1.0);
        let mut r: RewardStructure = RewardStructure::new(1);
        r.set_state_reward(0, 2.5);
        assert_eq!(reward_steady_state(&d, &r, &opts()).unwrap(), 2.5);
    }

    #[test]
    fn steady_state_rejects_reducible_chains_naming_bottoms() {
        let d = birth_death();
        let err = steady_state(&d, &opts()).unwrap_err();
        match err {
            AnalysisError::UnsupportedStructure { reason } => {
                assert!(reason.contains("{0}"), "reason was: {reason}");
                assert!(reason.contains("{4}"), "reason was: {reason}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn steady_state_rejects_periodic_chains() {
        let mut d: Dtmc = Dtmc::new(2, 0);
        d.add(0, 1, 1.0);
        d.add(1, 0, 1.0);
        let err = steady_state(&d, &opts()).unwrap_err();
        assert!(matches!(err, AnalysisError::UnsupportedStructure { .. }));
        assert!(err.to_string().contains("period 2"));
    }

    #[test]
    fn iteration_cap_is_an_explicit_error() {
        let d = birth_death();
        let (a, b) = mid_goal();
        let starved = SolveOptions { eps: 1e-14, max_iters: 2 };
        let err = prob_until(&d, &a, &b, &starved).unwrap_err();
        assert!(matches!(err, AnalysisError::Convergence { iters: 2, .. }));
    }

    #[test]
    fn engines_are_generic_over_f32() {
        let mut d: Dtmc<f32> = Dtmc::new(2, 0);
        d.add(0, 0, 0.75);
        d.add(0, 1, 0.25);
        d.add(1, 1, 1.0);
        let v = prob_until(&d, &[true, true], &[false, true], &SolveOptions::default()).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-4);
        let mut r: RewardStructure<f32> = RewardStructure::new(2);
        r.set_state_reward(0, 1.0);
        let w = reward_reachability(&d, &r, &[false, true], &SolveOptions::default()).unwrap();
        assert!((w[0] - 4.0).abs() < 1e-3);
    }
}
