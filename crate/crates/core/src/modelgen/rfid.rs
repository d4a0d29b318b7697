//! Generator for the multi-session authentication chain.
//!
//! Two groups of tags move through idle → waiting → in service → done
//! counters under a synchronous round update: sessions that finish their
//! last service stage either complete (all their tags count as
//! authenticated) or — with the configured fault probability — lose the
//! final reply and rejoin the waiting pool; each group then admits a batch
//! of idle tags with its arrival probability; finally waiting tags fill
//! the free service slots, group A first, and every in-service cohort
//! advances one stage. Cost structures charge wire weight per stage,
//! server probes and tag operations per finished session; labels mark full
//! authentication, a full service pipeline, and every authenticated-count
//! level.
//!
//! The same round semantics is also available as an explicit per-tag
//! construction for small populations, so the counter chain can be checked
//! against a model without the symmetry reduction.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::dtmc::Dtmc;
use crate::scalar::Real;

use super::{
    build, BuiltModel, Command, Expr, GuardedCommandModule, LabelDecl, ModelError, ModelSystem,
    RewardDecl, StateRewardItem, TransRewardItem, Update, Variable,
};

/// Largest tag group the generator accepts.
pub const GROUP_MAX: u32 = 50;

/// Largest population for the explicit per-tag construction.
pub const PER_TAG_MAX: u32 = 6;

/// Per-event weights behind the cost structures. Wire weight counts
/// transmitted message fields; computation weight counts hash evaluations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthCosts {
    /// Weight of the five wire messages of one session, in send order:
    /// challenge, tag response, reader forward, server reply, relay.
    pub message_weights: [u64; 5],
    /// Server-side weight per database probe (one keyed hash each).
    pub probe_cost: u64,
    /// Tag-side weight for a completed session: the response's keyed hash
    /// plus the two hashes of verify-and-refresh.
    pub tag_success_ops: u64,
    /// Tag-side weight when the reply never arrives; the response's keyed
    /// hash was still spent.
    pub tag_failure_ops: u64,
}

impl Default for AuthCosts {
    fn default() -> Self {
        AuthCosts {
            message_weights: [1, 2, 3, 2, 1],
            probe_cost: 1,
            tag_success_ops: 3,
            tag_failure_ops: 1,
        }
    }
}

impl AuthCosts {
    /// Total wire weight of one session.
    pub fn session_weight(&self) -> u64 {
        self.message_weights.iter().sum()
    }

    /// Wire weight charged in each of `stages` service rounds: the five
    /// messages are split into consecutive runs, as evenly as the stage
    /// count allows, and each stage carries its run's weight.
    pub fn stage_weights(&self, stages: u32) -> Vec<u64> {
        let n = stages as usize;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let from = i * 5 / n;
            let to = (i + 1) * 5 / n;
            out.push(self.message_weights[from..to].iter().sum());
        }
        out
    }
}

/// Population and service parameters of the generated chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RfidModelConfig {
    /// Tags in group A.
    pub n_a: u32,
    /// Tags in group B.
    pub n_b: u32,
    /// Per-round probability that a group admits a batch of idle tags into
    /// the waiting pool.
    pub arrival_prob: f64,
    /// Tags per arrival batch (capped by the group's idle count).
    pub arrival_batch: u32,
    /// Waiting tags admitted into service per round, across both groups.
    pub service_rate: u32,
    /// Service rounds one session occupies.
    pub session_len: u32,
    /// Per-round probability that the cohort finishing its last stage
    /// loses the final reply and returns to the waiting pool.
    pub fault_prob: f64,
    pub costs: AuthCosts,
}

impl Default for RfidModelConfig {
    fn default() -> Self {
        RfidModelConfig {
            n_a: 5,
            n_b: 5,
            arrival_prob: 0.02,
            arrival_batch: 1,
            service_rate: 25,
            session_len: 1,
            fault_prob: 0.0,
            costs: AuthCosts::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("group sizes {n_a}/{n_b} invalid: need at least one tag and at most {GROUP_MAX} per group")]
    BadGroupSizes { n_a: u32, n_b: u32 },
    #[error("{name} = {value} lies outside (0, 1]")]
    BadProbability { name: &'static str, value: f64 },
    #[error("fault_prob = {0} lies outside [0, 1)")]
    BadFaultProb(f64),
    #[error("{0} must be at least 1")]
    BadCount(&'static str),
    #[error("per-tag construction handles at most {PER_TAG_MAX} tags, got {0}")]
    PerTagLimit(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl RfidModelConfig {
    /// Total population.
    pub fn n(&self) -> u32 {
        self.n_a + self.n_b
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n() == 0 || self.n_a > GROUP_MAX || self.n_b > GROUP_MAX {
            return Err(ConfigError::BadGroupSizes { n_a: self.n_a, n_b: self.n_b });
        }
        if !(self.arrival_prob > 0.0 && self.arrival_prob <= 1.0) {
            return Err(ConfigError::BadProbability {
                name: "arrival_prob",
                value: self.arrival_prob,
            });
        }
        if !(self.fault_prob >= 0.0 && self.fault_prob < 1.0) {
            return Err(ConfigError::BadFaultProb(self.fault_prob));
        }
        if self.arrival_batch == 0 {
            return Err(ConfigError::BadCount("arrival_batch"));
        }
        if self.service_rate == 0 {
            return Err(ConfigError::BadCount("service_rate"));
        }
        if self.session_len == 0 {
            return Err(ConfigError::BadCount("session_len"));
        }
        Ok(())
    }
}

/// Read a config from `key = value` lines; `#` starts a comment. Unknown
/// and repeated keys are errors, missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<RfidModelConfig, ConfigError> {
    let mut cfg = RfidModelConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: String| ConfigError::Parse { line, msg };
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(err(format!("key `{key}` given twice")));
        }
        seen.push(key.to_string());

        fn num<V: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<V, ConfigError> {
            value.parse().map_err(|_| ConfigError::Parse {
                line,
                msg: format!("bad value `{value}` for `{key}`"),
            })
        }
        match key {
            "n_a" => cfg.n_a = num(key, value, line)?,
            "n_b" => cfg.n_b = num(key, value, line)?,
            "arrival_prob" => cfg.arrival_prob = num(key, value, line)?,
            "arrival_batch" => cfg.arrival_batch = num(key, value, line)?,
            "service_rate" => cfg.service_rate = num(key, value, line)?,
            "session_len" => cfg.session_len = num(key, value, line)?,
            "fault_prob" => cfg.fault_prob = num(key, value, line)?,
            "message_weights" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 5 {
                    return Err(err(format!(
                        "message_weights needs 5 comma-separated entries, found {}",
                        parts.len()
                    )));
                }
                for (slot, part) in cfg.costs.message_weights.iter_mut().zip(parts) {
                    *slot = num("message_weights", part, line)?;
                }
            }
            "probe_cost" => cfg.costs.probe_cost = num(key, value, line)?,
            "tag_success_ops" => cfg.costs.tag_success_ops = num(key, value, line)?,
            "tag_failure_ops" => cfg.costs.tag_failure_ops = num(key, value, line)?,
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RfidError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Build(#[from] ModelError),
}

const GROUPS: [&str; 2] = ["a", "b"];

fn idle(g: &str) -> Expr {
    Expr::var(format!("idle_{g}"))
}

fn wait(g: &str) -> Expr {
    Expr::var(format!("wait_{g}"))
}

fn auth(g: &str) -> Expr {
    Expr::var(format!("auth_{g}"))
}

fn svc(g: &str, stage: u32) -> Expr {
    Expr::var(format!("svc_{g}_{stage}"))
}

fn group_size(cfg: &RfidModelConfig, g: &str) -> u32 {
    if g == "a" {
        cfg.n_a
    } else {
        cfg.n_b
    }
}

/// Sum of the in-service counters of both groups, one term per stage.
fn svc_total(cfg: &RfidModelConfig) -> Expr {
    let mut total = Expr::int(0);
    for g in GROUPS {
        for stage in 1..=cfg.session_len {
            total = total.add(svc(g, stage));
        }
    }
    total
}

fn auth_total() -> Expr {
    auth("a").add(auth("b"))
}

/// Tags finishing their last service stage this round.
fn completing(cfg: &RfidModelConfig) -> Expr {
    svc("a", cfg.session_len).add(svc("b", cfg.session_len))
}

/// The assignments of one round outcome: `fault` decides whether the
/// completing cohort authenticates or rejoins the queue, `arrive` decides
/// per group whether an arrival batch fires.
fn round_assigns(cfg: &RfidModelConfig, fault: bool, arrive: [bool; 2]) -> Vec<(String, Expr)> {
    let last = cfg.session_len;
    let rate = Expr::int(cfg.service_rate as i64);
    let batch = Expr::int(cfg.arrival_batch as i64);

    let mut assigns = Vec::new();
    let mut wait_pre = Vec::new();
    for (gi, g) in GROUPS.into_iter().enumerate() {
        let arr = if arrive[gi] {
            idle(g).min(batch.clone())
        } else {
            Expr::int(0)
        };
        if arrive[gi] {
            assigns.push((format!("idle_{g}"), idle(g).sub(arr.clone())));
        }
        let returned = if fault { svc(g, last) } else { Expr::int(0) };
        if !fault {
            assigns.push((format!("auth_{g}"), auth(g).add(svc(g, last))));
        }
        wait_pre.push(wait(g).add(returned).add(arr));
    }

    let adm_a = wait_pre[0].clone().min(rate.clone());
    let adm_b = wait_pre[1].clone().min(rate.sub(adm_a.clone()));
    for (g, (pre, adm)) in GROUPS.into_iter().zip(wait_pre.iter().zip([&adm_a, &adm_b])) {
        assigns.push((format!("wait_{g}"), pre.clone().sub(adm.clone())));
        assigns.push((format!("svc_{g}_1"), adm.clone()));
        for stage in 2..=last {
            assigns.push((format!("svc_{g}_{stage}"), svc(g, stage - 1)));
        }
    }
    assigns
}

/// The guarded-command system for `cfg`: modules `MD_TA`/`MD_TB` (group
/// counters), `MD_Medium` (per-stage in-service counters), `MD_S` (the
/// synchronous round command), plus labels and reward declarations.
pub fn model_system(cfg: &RfidModelConfig) -> Result<ModelSystem, ConfigError> {
    cfg.validate()?;
    let n = cfg.n() as i64;
    let last = cfg.session_len;

    let mut tag_modules = Vec::new();
    for (g, name) in GROUPS.into_iter().zip(["MD_TA", "MD_TB"]) {
        let size = group_size(cfg, g) as i64;
        tag_modules.push(GuardedCommandModule {
            name: name.into(),
            vars: vec![
                Variable { name: format!("idle_{g}"), lo: 0, hi: size, init: size },
                Variable { name: format!("wait_{g}"), lo: 0, hi: size, init: 0 },
                Variable { name: format!("auth_{g}"), lo: 0, hi: size, init: 0 },
            ],
            commands: vec![],
        });
    }

    let mut medium_vars = Vec::new();
    for g in GROUPS {
        let cap = group_size(cfg, g).min(cfg.service_rate) as i64;
        for stage in 1..=last {
            medium_vars.push(Variable {
                name: format!("svc_{g}_{stage}"),
                lo: 0,
                hi: cap,
                init: 0,
            });
        }
    }

    // One Bernoulli factor per uncertain event; certain branches are not
    // emitted, so every update probability stays in (0, 1].
    let fault_cases: Vec<(bool, f64)> = if cfg.fault_prob > 0.0 {
        vec![(false, 1.0 - cfg.fault_prob), (true, cfg.fault_prob)]
    } else {
        vec![(false, 1.0)]
    };
    let arrival_cases = |size: u32| -> Vec<(bool, f64)> {
        if size == 0 {
            vec![(false, 1.0)]
        } else if cfg.arrival_prob == 1.0 {
            vec![(true, 1.0)]
        } else {
            vec![(true, cfg.arrival_prob), (false, 1.0 - cfg.arrival_prob)]
        }
    };

    let mut updates = Vec::new();
    for &(fault, pf) in &fault_cases {
        for &(arr_a, pa) in &arrival_cases(cfg.n_a) {
            for &(arr_b, pb) in &arrival_cases(cfg.n_b) {
                updates.push(Update {
                    prob: pf * pa * pb,
                    assigns: round_assigns(cfg, fault, [arr_a, arr_b]),
                });
            }
        }
    }
    let round = Command { guard: Expr::truth(true), updates };

    let mut labels = vec![
        LabelDecl { name: "allauth".into(), expr: auth_total().eq(Expr::int(n)) },
        LabelDecl {
            name: "saturated".into(),
            expr: svc_total(cfg)
                .eq(Expr::int((cfg.service_rate as i64).min(n) * last as i64)),
        },
    ];
    for k in 0..=n {
        labels.push(LabelDecl {
            name: format!("count_eq_{k}"),
            expr: auth_total().eq(Expr::int(k)),
        });
    }

    let stage_weights = cfg.costs.stage_weights(last);
    let mut wire = Expr::int(0);
    for (i, &w) in stage_weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let stage = i as u32 + 1;
        wire = wire.add(svc("a", stage).add(svc("b", stage)).mul(Expr::int(w as i64)));
    }

    let srv_cost = completing(cfg).mul(Expr::int(n * cfg.costs.probe_cost as i64));
    let succ = Expr::primed("auth_a")
        .add(Expr::primed("auth_b"))
        .sub(auth_total());
    let fail = completing(cfg).sub(succ.clone());
    let tag_cost = succ
        .mul(Expr::int(cfg.costs.tag_success_ops as i64))
        .add(fail.mul(Expr::int(cfg.costs.tag_failure_ops as i64)));

    let trans_reward = |name: &str, value: Expr| RewardDecl {
        name: name.into(),
        state_items: vec![],
        trans_items: vec![TransRewardItem { guard: Expr::truth(true), value }],
    };
    let state_reward = |name: &str, value: Expr| RewardDecl {
        name: name.into(),
        state_items: vec![StateRewardItem { guard: Expr::truth(true), value }],
        trans_items: vec![],
    };
    let rewards = vec![
        trans_reward("MD_RT", wire),
        trans_reward("MD_RC", srv_cost.clone().add(tag_cost.clone())),
        trans_reward("MD_RC_srv", srv_cost),
        trans_reward("MD_RC_tag", tag_cost),
        state_reward("count", auth_total()),
        state_reward("underauth", auth_total().add(svc_total(cfg))),
        state_reward("queue", wait("a").add(wait("b"))),
    ];

    Ok(ModelSystem {
        modules: vec![
            tag_modules.remove(0),
            tag_modules.remove(0),
            GuardedCommandModule {
                name: "MD_Medium".into(),
                vars: medium_vars,
                commands: vec![],
            },
            GuardedCommandModule {
                name: "MD_S".into(),
                vars: vec![],
                commands: vec![round],
            },
        ],
        labels,
        rewards,
    })
}

/// Build the counter chain for `cfg`.
pub fn build_rfid_model<T: Real>(cfg: &RfidModelConfig) -> Result<BuiltModel<T>, RfidError> {
    let sys = model_system(cfg)?;
    Ok(build(&sys)?)
}

/// Where one tag stands in its lifecycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TagPhase {
    Idle,
    Waiting,
    /// In service, carrying the 1-based stage.
    InService(u32),
    Done,
}

/// The same round dynamics without the counter reduction: one phase per
/// tag, arrivals and admissions picking lowest-index tags first. Tags
/// `0..n_a` form group A, the rest group B.
#[derive(Debug, Clone, PartialEq)]
pub struct PerTagModel<T: Real> {
    pub dtmc: Dtmc<T>,
    /// `states[s][k]` is the phase of tag `k` in state `s`.
    pub states: Vec<Vec<TagPhase>>,
    n_a: u32,
    session_len: u32,
}

impl<T: Real> PerTagModel<T> {
    /// Group counters of a state, in the counter chain's variable order:
    /// idle/wait/auth of A, the same of B, then per-stage service counts
    /// of A and of B.
    pub fn counter_signature(&self, state: usize) -> Vec<i64> {
        let phases = &self.states[state];
        let groups = [
            &phases[..self.n_a as usize],
            &phases[self.n_a as usize..],
        ];
        let mut sig = Vec::new();
        for g in groups {
            for want in [TagPhase::Idle, TagPhase::Waiting, TagPhase::Done] {
                sig.push(g.iter().filter(|&&p| p == want).count() as i64);
            }
        }
        for g in groups {
            for stage in 1..=self.session_len {
                sig.push(g.iter().filter(|&&p| p == TagPhase::InService(stage)).count() as i64);
            }
        }
        sig
    }
}

fn per_tag_step(
    cfg: &RfidModelConfig,
    state: &[TagPhase],
    fault: bool,
    arrive: [bool; 2],
) -> Vec<TagPhase> {
    let last = cfg.session_len;
    let n_a = cfg.n_a as usize;
    let mut next: Vec<TagPhase> = state
        .iter()
        .map(|&p| match p {
            TagPhase::InService(stage) if stage < last => TagPhase::InService(stage + 1),
            TagPhase::InService(_) => {
                if fault {
                    TagPhase::Waiting
                } else {
                    TagPhase::Done
                }
            }
            other => other,
        })
        .collect();

    for (gi, range) in [0..n_a, n_a..state.len()].into_iter().enumerate() {
        if !arrive[gi] {
            continue;
        }
        let mut budget = cfg.arrival_batch;
        for k in range {
            if budget == 0 {
                break;
            }
            if state[k] == TagPhase::Idle {
                next[k] = TagPhase::Waiting;
                budget -= 1;
            }
        }
    }

    let mut slots = cfg.service_rate;
    for slot in next.iter_mut() {
        if slots == 0 {
            break;
        }
        if *slot == TagPhase::Waiting {
            *slot = TagPhase::InService(1);
            slots -= 1;
        }
    }
    next
}

/// Build the explicit per-tag chain; `cfg.n()` must be at most
/// [`PER_TAG_MAX`].
pub fn build_per_tag_model<T: Real>(cfg: &RfidModelConfig) -> Result<PerTagModel<T>, ConfigError> {
    cfg.validate()?;
    if cfg.n() > PER_TAG_MAX {
        return Err(ConfigError::PerTagLimit(cfg.n()));
    }

    let fault_cases: Vec<(bool, f64)> = if cfg.fault_prob > 0.0 {
        vec![(false, 1.0 - cfg.fault_prob), (true, cfg.fault_prob)]
    } else {
        vec![(false, 1.0)]
    };
    let arrival_cases = |size: u32| -> Vec<(bool, f64)> {
        if size == 0 {
            vec![(false, 1.0)]
        } else if cfg.arrival_prob == 1.0 {
            vec![(true, 1.0)]
        } else {
            vec![(true, cfg.arrival_prob), (false, 1.0 - cfg.arrival_prob)]
        }
    };

    let init = vec![TagPhase::Idle; cfg.n() as usize];
    let mut index: BTreeMap<Vec<TagPhase>, usize> = BTreeMap::new();
    index.insert(init.clone(), 0);
    let mut states = vec![init];
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new()];
    let mut queue = VecDeque::from([0usize]);

    while let Some(s) = queue.pop_front() {
        let here = states[s].clone();
        for &(fault, pf) in &fault_cases {
            for &(arr_a, pa) in &arrival_cases(cfg.n_a) {
                for &(arr_b, pb) in &arrival_cases(cfg.n_b) {
                    let next = per_tag_step(cfg, &here, fault, [arr_a, arr_b]);
                    let t = match index.get(&next) {
                        Some(&t) => t,
                        None => {
                            let t = states.len();
                            index.insert(next.clone(), t);
                            states.push(next);
                            rows.push(BTreeMap::new());
                            queue.push_back(t);
                            t
                        }
                    };
                    *rows[s].entry(t).or_insert(0.0) += pf * pa * pb;
                }
            }
        }
    }

    let mut dtmc: Dtmc<T> = Dtmc::new(states.len(), 0);
    for (s, row) in rows.iter().enumerate() {
        for (&t, &p) in row {
            dtmc.add(s, t, T::of(p));
        }
    }
    Ok(PerTagModel { dtmc, states, n_a: cfg.n_a, session_len: cfg.session_len })
}
