//! Seeded Monte Carlo estimation: trajectory sampling answers the same
//! `=?` queries as the numerical engines, so the two can cross-check each
//! other. Every run draws from its own generator stream derived from
//! `(seed, run index)`, making reports reproducible bit for bit.

pub mod protocol;

use std::fmt;

use thiserror::Error;

use crate::dtmc::analysis::SolveOptions;
use crate::dtmc::{Dtmc, RewardStructure};
use crate::pctl::{evaluate, Bound, EvalError, Formula, ModelContext, PathFormula, RewardForm, Value};
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Fewest counted steps a long-run-average run may have.
pub const MIN_STEADY_WINDOW: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOptions {
    pub runs: u64,
    pub seed: u64,
    /// Steps after which a run of an unbounded query is abandoned and
    /// counted as truncated.
    pub step_cap: u64,
    /// Steps a long-run-average run discards before counting.
    pub steady_burn_in: u64,
    /// Total steps of a long-run-average run.
    pub steady_horizon: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            runs: 100_000,
            seed: 0,
            step_cap: 1_000_000,
            steady_burn_in: 100,
            steady_horizon: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub estimate: f64,
    /// Standard error of the mean, under the normal approximation.
    pub std_error: f64,
    pub runs: u64,
    pub seed: u64,
    /// Runs the step cap cut off before the query resolved.
    pub truncated_runs: u64,
}

impl SimReport {
    /// An estimate can be trusted only if no run hit the step cap.
    pub fn reliable(&self) -> bool {
        self.truncated_runs == 0
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("only `=?` queries can be simulated")]
    NotAQuery,
    #[error(
        "long-run averages need at least {MIN_STEADY_WINDOW} counted steps, \
         got burn-in {burn_in} with horizon {horizon}"
    )]
    ShortSteadyRun { burn_in: u64, horizon: u64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// What one run has to do, with all state formulas already flattened to
/// satisfying sets.
enum Plan<'a, T: Real> {
    Next { target: Vec<bool> },
    /// For the unbounded form, `dead` marks states that can no longer
    /// reach `b` through `a`, so their runs resolve to 0 immediately
    /// instead of wandering until the step cap.
    Until { a: Vec<bool>, b: Vec<bool>, dead: Vec<bool>, bound: Option<u64> },
    InstantReward { r: &'a RewardStructure<T>, t: u64 },
    CumulativeReward { r: &'a RewardStructure<T>, t: u64 },
    ReachReward { r: &'a RewardStructure<T>, target: Vec<bool> },
    SteadyReward { r: &'a RewardStructure<T> },
}

fn sat_states<T: Real>(
    ctx: &ModelContext<'_, T>,
    f: &Formula,
    solve: &SolveOptions<T>,
) -> Result<Vec<bool>, SimError> {
    match evaluate(ctx, f, solve)? {
        Value::Bool { sat, .. } => Ok(sat),
        Value::Real(_) => Err(EvalError::NestedQuery.into()),
    }
}

impl<'a, T: Real> Plan<'a, T> {
    fn prepare(
        ctx: &ModelContext<'a, T>,
        query: &Formula,
        opts: &SimOptions,
        solve: &SolveOptions<T>,
    ) -> Result<Self, SimError> {
        match query {
            Formula::Prob { bound: Bound::Query, path } => match path {
                PathFormula::Next(f) => {
                    Ok(Plan::Next { target: sat_states(ctx, f, solve)? })
                }
                PathFormula::Until(a, b) => {
                    let sa = sat_states(ctx, a, solve)?;
                    let sb = sat_states(ctx, b, solve)?;
                    let dead = crate::dtmc::graph::can_reach_through(ctx.dtmc, &sa, &sb)
                        .into_iter()
                        .map(|reaches| !reaches)
                        .collect();
                    Ok(Plan::Until { a: sa, b: sb, dead, bound: None })
                }
                PathFormula::BoundedUntil(a, b, t) => Ok(Plan::Until {
                    a: sat_states(ctx, a, solve)?,
                    b: sat_states(ctx, b, solve)?,
                    dead: Vec::new(),
                    bound: Some(*t),
                }),
            },
            Formula::Reward { bound: Bound::Query, name, form } => {
                let r = ctx.resolve_reward(name.as_deref())?;
                match form {
                    RewardForm::Instantaneous(t) => Ok(Plan::InstantReward { r, t: *t }),
                    RewardForm::Cumulative(t) => Ok(Plan::CumulativeReward { r, t: *t }),
                    RewardForm::Reachability(f) => Ok(Plan::ReachReward {
                        r,
                        target: sat_states(ctx, f, solve)?,
                    }),
                    RewardForm::SteadyState => {
                        if opts.steady_horizon < opts.steady_burn_in + MIN_STEADY_WINDOW {
                            return Err(SimError::ShortSteadyRun {
                                burn_in: opts.steady_burn_in,
                                horizon: opts.steady_horizon,
                            });
                        }
                        Ok(Plan::SteadyReward { r })
                    }
                }
            }
            _ => Err(SimError::NotAQuery),
        }
    }

    /// One trajectory's value and whether the step cap cut it short.
    fn sample(&self, d: &Dtmc<T>, opts: &SimOptions, rng: &mut SplitMix64) -> (f64, bool) {
        let mut s = d.initial();
        match self {
            Plan::Next { target } => {
                let s1 = step(d, s, rng);
                (f64::from(u8::from(target[s1])), false)
            }
            Plan::Until { a, b, dead, bound } => {
                let cap = bound.unwrap_or(opts.step_cap);
                for k in 0..=cap {
                    if b[s] {
                        return (1.0, false);
                    }
                    let lost = if bound.is_some() { !a[s] } else { dead[s] };
                    if lost || k == cap {
                        return (0.0, bound.is_none() && k == cap);
                    }
                    s = step(d, s, rng);
                }
                unreachable!("loop always returns")
            }
            Plan::InstantReward { r, t } => {
                for _ in 0..*t {
                    s = step(d, s, rng);
                }
                (to_f64(r.state_reward(s)), false)
            }
            Plan::CumulativeReward { r, t } => {
                let mut acc = 0.0;
                for _ in 0..*t {
                    acc += to_f64(r.state_reward(s));
                    let next = step(d, s, rng);
                    acc += to_f64(r.transition_reward(s, next));
                    s = next;
                }
                (acc, false)
            }
            Plan::ReachReward { r, target } => {
                let mut acc = 0.0;
                for _ in 0..opts.step_cap {
                    if target[s] {
                        return (acc, false);
                    }
                    acc += to_f64(r.state_reward(s));
                    let next = step(d, s, rng);
                    acc += to_f64(r.transition_reward(s, next));
                    s = next;
                }
                (acc, !target[s])
            }
            Plan::SteadyReward { r } => {
                let mut acc = 0.0;
                for k in 0..opts.steady_horizon {
                    let counted = k >= opts.steady_burn_in;
                    if counted {
                        acc += to_f64(r.state_reward(s));
                    }
                    let next = step(d, s, rng);
                    if counted {
                        acc += to_f64(r.transition_reward(s, next));
                    }
                    s = next;
                }
                (acc / (opts.steady_horizon - opts.steady_burn_in) as f64, false)
            }
        }
    }
}

fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().expect("rewards are finite")
}

/// Sample a successor of `s` from its transition row.
fn step<T: Real>(d: &Dtmc<T>, s: usize, rng: &mut SplitMix64) -> usize {
    let draw = T::of(rng.next_f64());
    let row = d.row(s);
    let mut cum = T::zero();
    for &(to, p) in row {
        cum = cum + p;
        if draw < cum {
            return to;
        }
    }
    row.last().expect("validated chains have no empty rows").0
}

/// Estimate a `=?` query by sampling trajectories. Reported mean and
/// standard error are over `opts.runs` independent runs; reruns with the
/// same options give identical reports.
pub fn simulate_dtmc<T: Real>(
    ctx: &ModelContext<'_, T>,
    query: &Formula,
    opts: &SimOptions,
) -> Result<SimReport, SimError> {
    let solve = SolveOptions::default();
    let plan = Plan::prepare(ctx, query, opts, &solve)?;

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut truncated = 0u64;
    for run in 0..opts.runs {
        let mut rng = SplitMix64::stream(opts.seed, run);
        let (x, cut) = plan.sample(ctx.dtmc, opts, &mut rng);
        sum += x;
        sum_sq += x * x;
        truncated += u64::from(cut);
    }

    let n = opts.runs as f64;
    let mean = sum / n;
    let std_error = if opts.runs > 1 {
        (((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(SimReport {
        estimate: mean,
        std_error,
        runs: opts.runs,
        seed: opts.seed,
        truncated_runs: truncated,
    })
}

/// An analytic value against a sampled estimate, at `sigma` standard
/// errors of slack.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub analytic: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub sigma: f64,
    pub pass: bool,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: analytic {:.6} vs estimate {:.6} ± {:.6} at {}σ",
            if self.pass { "pass" } else { "FAIL" },
            self.analytic,
            self.estimate,
            self.std_error,
            self.sigma,
        )
    }
}

pub fn compare(analytic: f64, sim: &SimReport, sigma: f64) -> Comparison {
    assert!(sigma > 0.0, "sigma must be positive");
    Comparison {
        analytic,
        estimate: sim.estimate,
        std_error: sim.std_error,
        sigma,
        pass: (analytic - sim.estimate).abs() <= sigma * sim.std_error,
    }
}
