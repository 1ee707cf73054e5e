use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use mfw::analysis::{analyze, ChainChoice};
use mfw::dynsys::SystemSpec;
use mfw::io::{basins_csv, morse_dot, morse_json};
use mfw::morse::chain;
use serde_json::{json, Value};

use crate::common::{config, input, load, write, CliError, CliResult};
use crate::GridArgs;

pub fn run(spec_path: &Path, out: &Path, grid: &GridArgs, chain_arg: &str, reproducible: bool) -> CliResult {
    let loaded = load(spec_path)?;
    let mut cfg = config(grid)?;
    cfg.chain = parse_chain(&loaded.spec, chain_arg)?;
    let analysis = analyze(&loaded.spec, &cfg).map_err(input)?;
    std::fs::create_dir_all(out).map_err(|e| input(format!("cannot create {}: {e}", out.display())))?;

    let mut report = analysis.report_body();
    let obj = report.as_object_mut().expect("report body is an object");
    obj.insert(
        "tool".into(),
        json!({"name": "mfw", "version": env!("CARGO_PKG_VERSION")}),
    );
    obj.insert("spec".into(), json!({"echo": loaded.echo, "sha256": loaded.sha256}));
    if !reproducible {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        obj.insert(
            "timing".into(),
            json!({"timestamp": timestamp, "build_ms": analysis.build_ms}),
        );
    }

    let pretty = |v: &Value| serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n";
    write(&out.join("report.json"), pretty(&report))?;
    write(&out.join("morse.dot"), morse_dot(&analysis.graph))?;
    let mj = serde_json::to_value(morse_json(&analysis.decomposition, &analysis.graph)).expect("serializable");
    write(&out.join("morse.json"), pretty(&mj))?;
    write(&out.join("attractors.json"), pretty(&analysis.attractors_json()))?;
    write(&out.join("basins.csv"), basins_csv(&analysis.basin_assignment()))?;

    eprintln!(
        "{} cells, {} attractors, {} Morse sets, {} connections",
        analysis.ts.n_cells(),
        analysis.lattice.attractors.len(),
        analysis.graph.nodes.len(),
        analysis.graph.edges.len()
    );
    let failed: Vec<&str> = analysis
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

/// A strategy name, or a JSON file holding an array of chain attractors,
/// each an array of cell indices or state names.
pub fn parse_chain(spec: &SystemSpec, arg: &str) -> Result<ChainChoice, CliError> {
    if chain::lookup(arg).is_some() {
        return Ok(ChainChoice::Strategy(arg.to_string()));
    }
    let path = Path::new(arg);
    if !path.is_file() {
        return Err(input(format!(
            "--chain `{arg}` is neither a strategy ({}) nor a readable file",
            chain::names().join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {arg}: {e}")))?;
    let sets: Vec<Vec<Value>> = serde_json::from_str(&text).map_err(|e| input(format!("chain file {arg}: {e}")))?;
    let resolve = |v: &Value| -> Result<usize, CliError> {
        match v {
            Value::Number(n) => n
                .as_u64()
                .map(|i| i as usize)
                .ok_or_else(|| input(format!("chain file {arg}: `{n}` is not a cell index"))),
            Value::String(s) => spec.state_index(s).map_err(|e| input(format!("chain file {arg}: {e}"))),
            other => Err(input(format!("chain file {arg}: unexpected entry `{other}`"))),
        }
    };
    let sets = sets
        .iter()
        .map(|s| s.iter().map(resolve).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChainChoice::Explicit(sets))
}
