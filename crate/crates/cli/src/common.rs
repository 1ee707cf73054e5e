use std::fmt::Display;
use std::path::Path;

use mfw::analysis::AnalysisConfig;
use mfw::dynsys::SystemSpec;
use mfw::io::load_spec;
use mfw::transition::DEFAULT_CELL_CAP;
use sha2::{Digest, Sha256};

use crate::GridArgs;

pub const CELL_CAP_VAR: &str = "MFW_CELL_CAP";

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Verification(String),
}

pub type CliResult = Result<(), CliError>;

pub fn input<E: Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

pub struct LoadedSpec {
    pub spec: SystemSpec,
    pub echo: serde_json::Value,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<LoadedSpec, CliError> {
    let spec = load_spec(path).map_err(input)?;
    let bytes = std::fs::read(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let echo = serde_json::from_slice(&bytes).map_err(input)?;
    let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    Ok(LoadedSpec { spec, echo, sha256 })
}

pub fn cell_cap() -> Result<usize, CliError> {
    match std::env::var(CELL_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| input(format!("{CELL_CAP_VAR} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_CELL_CAP),
    }
}

pub fn config(grid: &GridArgs) -> Result<AnalysisConfig, CliError> {
    Ok(AnalysisConfig {
        depth: grid.depth,
        tau: grid.tau,
        bloat: grid.bloat,
        samples_per_axis: grid.samples,
        cell_cap: cell_cap()?,
        ..Default::default()
    })
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult {
    std::fs::write(path, contents).map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}
