//! `check`: evaluate a property file against a model and print a result
//! table, one row per property.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use tagchain_core::dtmc::analysis::SolveOptions;
use tagchain_core::pctl::{self, EvalError, ModelContext, Value};

use crate::input::{self, LoadedModel};
use crate::CliError;

#[derive(Args)]
pub struct CheckArgs {
    /// Model file, either guarded-command text or an explicit chain.
    #[arg(long)]
    pub model: PathBuf,
    /// Property file, one formula per line.
    #[arg(long)]
    pub props: PathBuf,
    /// Reward structure used by unnamed `R` operators.
    #[arg(long)]
    pub reward: Option<String>,
    /// Directory receiving `results.csv` alongside the printed table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Returns `Ok(true)` when some threshold property is false at the initial
/// state, which the caller turns into exit code 1.
pub fn run(args: &CheckArgs) -> Result<bool, CliError> {
    let LoadedModel { dtmc, rewards } = input::load_model(&args.model)?;
    let text = input::read_file(&args.props)?;
    let props = pctl::parse_property_file(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.props.display())))?;

    let ctx = ModelContext {
        dtmc: &dtmc,
        rewards: &rewards,
        default_reward: args.reward.as_deref(),
    };
    let opts = SolveOptions::default();

    let mut csv = String::from("index,property,value,millis\n");
    let mut any_false = false;
    for (i, prop) in props.iter().enumerate() {
        let start = Instant::now();
        let value = pctl::evaluate(&ctx, &prop.formula, &opts).map_err(|e| {
            let msg = format!("{} line {}: {e}", args.props.display(), prop.line);
            match e {
                EvalError::Analysis(_) => CliError::Limit(msg),
                _ => CliError::Input(msg),
            }
        })?;
        let millis = start.elapsed().as_secs_f64() * 1e3;
        let rendered = match value {
            Value::Real(x) => format!("{x:.6}"),
            Value::Bool { at_initial, .. } => {
                if !at_initial {
                    any_false = true;
                }
                at_initial.to_string()
            }
        };
        println!("{i:>3}  {rendered:>14}  {millis:>10.3} ms  {}", prop.source);
        csv.push_str(&format!(
            "{i},{},{rendered},{millis:.3}\n",
            input::csv_field(&prop.source)
        ));
    }
    if let Some(dir) = &args.out {
        input::write_file(dir, "results.csv", &csv)?;
    }
    Ok(any_false)
}
