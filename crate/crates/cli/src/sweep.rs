//! `rfid-sweep`: build the fleet chain for a range of tag populations and
//! write four CSV series.
//!
//! Per population N: fig2 holds the expected authenticated count over time,
//! fig3 the cumulative wire cost `MD_RT` over time, fig4 the expected
//! server- and tag-side computation cost until every tag is authenticated,
//! and fig5 the simulator's throughput and mean service delay.

use std::path::PathBuf;

use clap::Args;
use tagchain_core::dtmc::analysis::{reward_reachability, SolveOptions, TransientSweep};
use tagchain_core::modelgen::{build_rfid_model, ModelError, RfidError, RfidModelConfig};
use tagchain_core::protocol::{HashId, ProtocolConfig};
use tagchain_core::sim::protocol::simulate_protocol;
use tagchain_core::{Dtmc64, Rewards64};

use crate::input::{self};
use crate::CliError;

#[derive(Args)]
pub struct SweepArgs {
    /// Fleet configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Population sweep `start:stop:step` over the total tag count, bounds
    /// within 2..=100; defaults to the config's own population.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Steps in the fig2/fig3 time series and the simulated runs.
    #[arg(long, default_value_t = 2000)]
    pub horizon: u64,
    /// Simulation runs behind the fig5 delay metrics.
    #[arg(long, default_value_t = 100)]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Identifier width in bits for the simulated sessions.
    #[arg(long, default_value_t = 64)]
    pub bits: u32,
    /// Output directory for fig2.csv through fig5.csv.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(args: &SweepArgs) -> Result<bool, CliError> {
    let base = input::load_config(&args.config)?;
    let populations = match &args.sweep {
        Some(text) => parse_sweep(text)?,
        None => vec![check_bounds(base.n_a + base.n_b)?],
    };
    let pcfg = ProtocolConfig::new(args.bits, HashId::Sha256)
        .map_err(|e| CliError::Input(e.to_string()))?;

    let rows = args.horizon as usize + 1;
    let mut count_cols: Vec<Vec<f64>> = Vec::new();
    let mut wire_cols: Vec<Vec<f64>> = Vec::new();
    let mut fig4 = String::from("N,server_cost,tag_cost\n");
    let mut fig5 = String::from("N,throughput,mean_delay\n");

    for &n in &populations {
        let cfg = population_config(&base, n);
        let built = build_rfid_model::<f64>(&cfg).map_err(|e| classify_build(n, e))?;
        let d = &built.dtmc;
        println!("N={n}: {} states", d.n_states());

        let (count_col, wire_col) =
            transient_series(d, &built.rewards, args.horizon);
        count_cols.push(count_col);
        wire_cols.push(wire_col);

        let (srv, tag) = costs_to_allauth(d, &built.rewards, n)?;
        fig4.push_str(&format!("{n},{srv:.6},{tag:.6}\n"));

        let series = simulate_protocol(&cfg, &pcfg, args.horizon, args.runs, args.seed);
        fig5.push_str(&format!(
            "{n},{:.6},{:.6}\n",
            series.throughput, series.mean_delay
        ));
    }

    input::write_file(&args.out, "fig2.csv", &series_csv(&populations, &count_cols, rows))?;
    input::write_file(&args.out, "fig3.csv", &series_csv(&populations, &wire_cols, rows))?;
    input::write_file(&args.out, "fig4.csv", &fig4)?;
    input::write_file(&args.out, "fig5.csv", &fig5)?;
    println!("wrote fig2.csv fig3.csv fig4.csv fig5.csv under {}", args.out.display());
    Ok(false)
}

/// Splits a population across the two groups, A taking the larger half.
pub fn population_config(base: &RfidModelConfig, n: u32) -> RfidModelConfig {
    let mut cfg = base.clone();
    cfg.n_a = n - n / 2;
    cfg.n_b = n / 2;
    cfg
}

fn check_bounds(n: u32) -> Result<u32, CliError> {
    if (2..=100).contains(&n) {
        Ok(n)
    } else {
        Err(CliError::Input(format!(
            "population {n} is outside the supported range 2..=100"
        )))
    }
}

fn parse_sweep(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = |msg: &str| CliError::Input(format!("sweep `{text}`: {msg}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:stop:step"));
    }
    let nums: Vec<u32> = parts
        .iter()
        .map(|p| p.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("fields must be nonnegative integers"))?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step == 0 {
        return Err(bad("step must be positive"));
    }
    if start < 2 || stop > 100 || start > stop {
        return Err(bad("bounds must satisfy 2 <= start <= stop <= 100"));
    }
    Ok((start..=stop).step_by(step as usize).collect())
}

fn classify_build(n: u32, e: RfidError) -> CliError {
    match e {
        RfidError::Build(ModelError::StateCap(_)) => CliError::Limit(format!("N={n}: {e}")),
        other => CliError::Input(format!("N={n}: {other}")),
    }
}

/// Expected authenticated count and cumulative wire cost at each step,
/// computed in one forward pass.
fn transient_series(
    d: &Dtmc64,
    rewards: &std::collections::BTreeMap<String, Rewards64>,
    horizon: u64,
) -> (Vec<f64>, Vec<f64>) {
    let count_rho = rewards["count"].state_rewards();
    let wire = &rewards["MD_RT"];
    let gain: Vec<f64> = (0..d.n_states()).map(|s| wire.expected_gain(d, s)).collect();

    let mut sweep = TransientSweep::new(d);
    let mut count_col = Vec::with_capacity(horizon as usize + 1);
    let mut wire_col = Vec::with_capacity(horizon as usize + 1);
    let mut cum = 0.0;
    for _ in 0..=horizon {
        let dist = sweep.dist();
        count_col.push(dot(dist, count_rho));
        wire_col.push(cum);
        cum += dot(dist, &gain);
        sweep.step();
    }
    (count_col, wire_col)
}

/// Expected server and tag computation cost accumulated until the state
/// where every tag is authenticated.
fn costs_to_allauth(
    d: &Dtmc64,
    rewards: &std::collections::BTreeMap<String, Rewards64>,
    n: u32,
) -> Result<(f64, f64), CliError> {
    let mut target = vec![false; d.n_states()];
    for &s in d.label_states("allauth").into_iter().flatten() {
        target[s] = true;
    }
    let opts = SolveOptions::default();
    let limit = |e| CliError::Limit(format!("N={n}: {e}"));
    let srv = reward_reachability(d, &rewards["MD_RC_srv"], &target, &opts).map_err(limit)?;
    let tag = reward_reachability(d, &rewards["MD_RC_tag"], &target, &opts).map_err(limit)?;
    Ok((srv[d.initial()], tag[d.initial()]))
}

fn series_csv(populations: &[u32], cols: &[Vec<f64>], rows: usize) -> String {
    let mut out = String::from("t");
    for n in populations {
        out.push_str(&format!(",n{n}"));
    }
    out.push('\n');
    for t in 0..rows {
        out.push_str(&t.to_string());
        for col in cols {
            out.push_str(&format!(",{:.6}", col[t]));
        }
        out.push('\n');
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
