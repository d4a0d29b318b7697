//! `simulate`: run the discrete-event simulator on a fleet configuration and
//! compare its authenticated-count series against the chain's prediction at
//! five checkpoints.

use std::path::PathBuf;

use clap::Args;
use tagchain_core::dtmc::analysis::TransientSweep;
use tagchain_core::modelgen::{build_rfid_model, ModelError, RfidError};
use tagchain_core::protocol::{HashId, ProtocolConfig};
use tagchain_core::sim::protocol::simulate_protocol;
use tagchain_core::sim::{compare, SimReport};

use crate::input::{self};
use crate::CliError;

#[derive(Args)]
pub struct SimulateArgs {
    /// Fleet configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Steps per simulated run and in the analytic series.
    #[arg(long, default_value_t = 200)]
    pub horizon: u64,
    #[arg(long, default_value_t = 1000)]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Identifier width in bits for the simulated sessions.
    #[arg(long, default_value_t = 64)]
    pub bits: u32,
    /// Allowed gap between analytic and sampled values, in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    /// Output directory for series.csv, delays.csv, and comparison.csv.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Returns `Ok(true)` when any checkpoint comparison fails, which the
/// caller turns into exit code 1.
pub fn run(args: &SimulateArgs) -> Result<bool, CliError> {
    if args.sigma <= 0.0 {
        return Err(CliError::Input("sigma must be positive".into()));
    }
    let cfg = input::load_config(&args.config)?;
    let built = build_rfid_model::<f64>(&cfg).map_err(|e| match e {
        RfidError::Build(ModelError::StateCap(_)) => CliError::Limit(e.to_string()),
        other => CliError::Input(other.to_string()),
    })?;
    let pcfg = ProtocolConfig::new(args.bits, HashId::Sha256)
        .map_err(|e| CliError::Input(e.to_string()))?;

    let series = simulate_protocol(&cfg, &pcfg, args.horizon, args.runs, args.seed);
    let analytic = expected_count_series(&built.dtmc, &built.rewards["count"], args.horizon);

    if args.runs < 30 {
        println!(
            "note: only {} run{}; estimates are low-confidence",
            args.runs,
            if args.runs == 1 { "" } else { "s" }
        );
    }

    let mut csv = String::from("t,analytic,estimate,std_error,sigma,verdict\n");
    let mut any_fail = false;
    println!("{:>6}  {:>12}  {:>12}  {:>12}  verdict", "t", "analytic", "estimate", "std_error");
    for t in checkpoints(args.horizon) {
        // The sampled spread cannot resolve below one deviant run, so the
        // error floor is 1/runs; without it, runs that all agree would
        // demand exact equality against an analytic tail they never saw.
        let report = SimReport {
            estimate: series.authenticated[t],
            std_error: series.authenticated_se[t].max(1.0 / args.runs as f64),
            runs: args.runs,
            seed: args.seed,
            truncated_runs: 0,
        };
        let cmp = compare(analytic[t], &report, args.sigma);
        let verdict = if cmp.pass { "pass" } else { "FAIL" };
        any_fail |= !cmp.pass;
        println!(
            "{t:>6}  {:>12.6}  {:>12.6}  {:>12.6}  {verdict}",
            cmp.analytic, cmp.estimate, cmp.std_error
        );
        csv.push_str(&format!(
            "{t},{:.6},{:.6},{:.6},{:.1},{verdict}\n",
            cmp.analytic, cmp.estimate, cmp.std_error, cmp.sigma
        ));
    }

    input::write_file(&args.out, "series.csv", &series.series_csv())?;
    input::write_file(&args.out, "delays.csv", &series.delays_csv())?;
    input::write_file(&args.out, "comparison.csv", &csv)?;
    println!("wrote series.csv delays.csv comparison.csv under {}", args.out.display());
    Ok(any_fail)
}

/// Expected authenticated count at each step, from the chain.
fn expected_count_series(
    d: &tagchain_core::Dtmc64,
    count: &tagchain_core::Rewards64,
    horizon: u64,
) -> Vec<f64> {
    let rho = count.state_rewards();
    let mut sweep = TransientSweep::new(d);
    let mut out = Vec::with_capacity(horizon as usize + 1);
    for _ in 0..=horizon {
        let dist = sweep.dist();
        out.push(dist.iter().zip(rho).map(|(p, r)| p * r).sum());
        sweep.step();
    }
    out
}

/// Five evenly spaced comparison points over the horizon, deduplicated for
/// short horizons.
fn checkpoints(horizon: u64) -> Vec<usize> {
    let mut pts: Vec<usize> = (1..=5)
        .map(|k| (horizon * k / 5) as usize)
        .filter(|&t| t >= 1)
        .collect();
    pts.dedup();
    pts
}
