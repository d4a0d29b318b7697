//! Shared plumbing: loading models and fleet configs off disk, writing
//! result files, and CSV field quoting.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use tagchain_core::modelgen::{self, ModelError, RfidModelConfig};
use tagchain_core::{Dtmc64, Rewards64};

use crate::CliError;

/// A model ready for checking, whichever text format it came from.
pub struct LoadedModel {
    pub dtmc: Dtmc64,
    pub rewards: BTreeMap<String, Rewards64>,
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Loads either model format. A file whose first token is `dtmc` holds an
/// explicit chain; anything else is parsed as guarded-command modules and
/// built into one. The explicit format carries at most one (unnamed) reward
/// structure, registered here as `rewards`.
pub fn load_model(path: &Path) -> Result<LoadedModel, CliError> {
    let text = read_file(path)?;
    if first_token(&text) == Some("dtmc") {
        let (dtmc, rewards) = tagchain_core::dtmc::io::from_text(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let rewards = match rewards {
            Some(r) => BTreeMap::from([("rewards".to_string(), r)]),
            None => BTreeMap::new(),
        };
        Ok(LoadedModel { dtmc, rewards })
    } else {
        let sys = modelgen::text::parse_system(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let built = modelgen::build::<f64>(&sys).map_err(|e| match e {
            ModelError::StateCap(_) => CliError::Limit(format!("{}: {e}", path.display())),
            other => CliError::Input(format!("{}: {other}", path.display())),
        })?;
        Ok(LoadedModel { dtmc: built.dtmc, rewards: built.rewards })
    }
}

pub fn load_config(path: &Path) -> Result<RfidModelConfig, CliError> {
    let text = read_file(path)?;
    modelgen::parse_config(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Quotes a CSV field when it contains a comma, quote, or newline.
pub fn csv_field(text: &str) -> String {
    if text.contains(['"', ',', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn first_token(text: &str) -> Option<&str> {
    for raw in text.lines() {
        let line = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        };
        if let Some(tok) = line.split_whitespace().next() {
            return Some(tok);
        }
    }
    None
}
