//! Discrete-event execution of a tag fleet against the real protocol.
//!
//! Rounds follow the same regime as the generated counter chain —
//! arrivals, admission up to the service rate, a fixed number of service
//! stages, cohort-level reply loss — but every session that completes runs
//! the actual cryptographic exchange against a live server database, so
//! probe counts, retries after a lost reply, and tag decisions are real
//! rather than modeled.

use crate::modelgen::{RfidModelConfig, TagPhase};
use crate::protocol::{run_session, Fault, ProtocolConfig, ServerDb, TagState};
use crate::rng::SplitMix64;

/// Mean time series and delay metrics over a batch of seeded runs. Series
/// are indexed by time step `0..=horizon`; step 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSeries {
    pub horizon: u64,
    pub runs: u64,
    pub seed: u64,
    /// Tags authenticated so far.
    pub authenticated: Vec<f64>,
    /// Standard error of the authenticated mean at each step.
    pub authenticated_se: Vec<f64>,
    /// Tags currently inside a service session.
    pub in_service: Vec<f64>,
    /// Wire weight transmitted so far.
    pub cum_tx: Vec<f64>,
    /// Server probe weight spent so far.
    pub cum_srv: Vec<f64>,
    /// Tag-side operation weight spent so far.
    pub cum_tag: Vec<f64>,
    /// Per-tag mean delay (completion step − request step) over the runs
    /// in which the tag finished within the horizon.
    pub tag_delays: Vec<f64>,
    /// Runs in which each tag finished.
    pub tag_finished: Vec<u64>,
    /// All finished (tag, run) delays pooled into one mean.
    pub mean_delay: f64,
    /// Completions per step, over the steps that completed anything.
    pub throughput: f64,
}

impl ProtocolSeries {
    /// The time series as CSV, one row per step.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("t,authenticated,in_service,cum_tx,cum_srv,cum_tag\n");
        for t in 0..self.authenticated.len() {
            out.push_str(&format!(
                "{t},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                self.authenticated[t],
                self.in_service[t],
                self.cum_tx[t],
                self.cum_srv[t],
                self.cum_tag[t],
            ));
        }
        out
    }

    /// Per-tag delays as CSV; tags that never finished are left out.
    pub fn delays_csv(&self) -> String {
        let mut out = String::from("tag,mean_delay,finished_runs\n");
        for (tag, (&delay, &finished)) in
            self.tag_delays.iter().zip(&self.tag_finished).enumerate()
        {
            if finished > 0 {
                out.push_str(&format!("{tag},{delay:.6},{finished}\n"));
            }
        }
        out
    }
}

/// Simulate `runs` fleets for `horizon` steps each and average. Tags
/// `0..n_a` form group A, the rest group B; arrivals and admissions pick
/// lowest-index tags first, mirroring the chain's counter dynamics.
pub fn simulate_protocol(
    cfg: &RfidModelConfig,
    pcfg: &ProtocolConfig,
    horizon: u64,
    runs: u64,
    seed: u64,
) -> ProtocolSeries {
    assert!(horizon >= 1, "horizon must be at least 1");
    assert!(runs >= 1, "need at least one run");
    let n = cfg.n() as usize;
    let n_a = cfg.n_a as usize;
    let last = cfg.session_len;
    let stage_weights = cfg.costs.stage_weights(last);
    let steps = horizon as usize + 1;

    let mut authenticated = vec![0.0; steps];
    let mut authenticated_sq = vec![0.0; steps];
    let mut in_service = vec![0.0; steps];
    let mut cum_tx = vec![0.0; steps];
    let mut cum_srv = vec![0.0; steps];
    let mut cum_tag = vec![0.0; steps];
    let mut delay_sum = vec![0.0; n];
    let mut finished = vec![0u64; n];
    let mut pooled_delay = 0.0;
    let mut pooled_finished = 0u64;
    let mut completions = 0u64;
    let mut busy_steps = 0u64;

    for run in 0..runs {
        let mut event_rng = SplitMix64::stream(seed, 2 * run);
        let mut crypto_rng = SplitMix64::stream(seed, 2 * run + 1);

        let mut db = ServerDb::new();
        let mut tags: Vec<TagState> = (0..n)
            .map(|k| {
                let u = pcfg.random_bits(&mut crypto_rng);
                let (_, t) = db.register(pcfg, u, &(k as u64).to_le_bytes());
                TagState::new(t)
            })
            .collect();

        let mut phase = vec![TagPhase::Idle; n];
        let mut requested = vec![0u64; n];
        let mut tx = 0u64;
        let mut srv = 0u64;
        let mut tag_ops = 0u64;

        for t in 1..=horizon {
            // Wire cost first: every in-service cohort transmits its
            // stage's share of the session this round.
            for &p in &phase {
                if let TagPhase::InService(stage) = p {
                    tx += stage_weights[stage as usize - 1];
                }
            }

            let fault = cfg.fault_prob > 0.0 && event_rng.next_f64() < cfg.fault_prob;
            let mut next = phase.clone();
            let mut completed_now = 0u64;
            for k in 0..n {
                match phase[k] {
                    TagPhase::InService(stage) if stage < last => {
                        next[k] = TagPhase::InService(stage + 1);
                    }
                    TagPhase::InService(_) => {
                        let injected = if fault { Fault::DropM3 } else { Fault::None };
                        let transcript =
                            run_session(pcfg, &mut tags[k], &mut db, &mut crypto_rng, injected);
                        srv += transcript.probes() as u64 * cfg.costs.probe_cost;
                        if transcript.mutual() {
                            tag_ops += cfg.costs.tag_success_ops;
                            next[k] = TagPhase::Done;
                            completed_now += 1;
                            let delay = (t - requested[k]) as f64;
                            delay_sum[k] += delay;
                            finished[k] += 1;
                            pooled_delay += delay;
                            pooled_finished += 1;
                        } else {
                            tag_ops += cfg.costs.tag_failure_ops;
                            next[k] = TagPhase::Waiting;
                        }
                    }
                    _ => {}
                }
            }
            if completed_now > 0 {
                completions += completed_now;
                busy_steps += 1;
            }

            for (group, range) in [(cfg.n_a, 0..n_a), (cfg.n_b, n_a..n)] {
                if group == 0 {
                    continue;
                }
                let arrive =
                    cfg.arrival_prob >= 1.0 || event_rng.next_f64() < cfg.arrival_prob;
                if !arrive {
                    continue;
                }
                let mut budget = cfg.arrival_batch;
                for k in range {
                    if budget == 0 {
                        break;
                    }
                    if phase[k] == TagPhase::Idle {
                        next[k] = TagPhase::Waiting;
                        requested[k] = t;
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
            phase = next;

            let i = t as usize;
            let done = phase.iter().filter(|&&p| p == TagPhase::Done).count() as f64;
            authenticated[i] += done;
            authenticated_sq[i] += done * done;
            in_service[i] +=
                phase.iter().filter(|p| matches!(p, TagPhase::InService(_))).count() as f64;
            cum_tx[i] += tx as f64;
            cum_srv[i] += srv as f64;
            cum_tag[i] += tag_ops as f64;
        }
    }

    let scale = 1.0 / runs as f64;
    for series in [
        &mut authenticated,
        &mut in_service,
        &mut cum_tx,
        &mut cum_srv,
        &mut cum_tag,
    ] {
        for v in series.iter_mut() {
            *v *= scale;
        }
    }
    let authenticated_se: Vec<f64> = authenticated
        .iter()
        .zip(&authenticated_sq)
        .map(|(&mean, &sq)| {
            if runs > 1 {
                let n = runs as f64;
                (((sq - n * mean * mean) / (n - 1.0)).max(0.0) / n).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let tag_delays = delay_sum
        .iter()
        .zip(&finished)
        .map(|(&sum, &count)| if count > 0 { sum / count as f64 } else { 0.0 })
        .collect();

    ProtocolSeries {
        horizon,
        runs,
        seed,
        authenticated,
        authenticated_se,
        in_service,
        cum_tx,
        cum_srv,
        cum_tag,
        tag_delays,
        tag_finished: finished,
        mean_delay: if pooled_finished > 0 {
            pooled_delay / pooled_finished as f64
        } else {
            0.0
        },
        throughput: if busy_steps > 0 {
            completions as f64 / busy_steps as f64
        } else {
            0.0
        },
    }
}
