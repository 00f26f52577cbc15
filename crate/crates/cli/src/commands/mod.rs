mod aut;
mod construct;
mod cp_bound;
mod optimize;
mod ot;
mod rate;
mod simulate;

use std::path::Path;

use serde::de::DeserializeOwned;

use polar_ot::SessionConfig;

use crate::args::{Command, OtCommand};
use crate::config::FileConfig;
use crate::error::CliError;

pub fn dispatch(command: &Command, file: &FileConfig) -> Result<(), CliError> {
    match command {
        Command::Construct(a) => construct::run(a, file),
        Command::Aut(a) => aut::run(a, file),
        Command::Optimize(a) => optimize::run(a, file),
        Command::Rate(a) => rate::run(a, file),
        Command::Simulate(a) => simulate::run(a, file),
        Command::CpBound(a) => cp_bound::run(a),
        Command::Ot(OtCommand::Run(a)) => ot::run(a),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path, field: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{field}: {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{field}: {}: {e}", path.display())))
}

/// Session config, also accepted in the richer form `optimize --save` writes.
pub fn read_session(path: &Path, field: &str) -> Result<SessionConfig, CliError> {
    read_json(path, field)
}

/// Bit string of '0'/'1' characters.
pub fn bit_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b == 1 { '1' } else { '0' })
        .collect()
}
