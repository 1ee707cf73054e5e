//! The analysis pipeline: transitions, condensation, attractor lattice,
//! Morse decomposition and their checks.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::attractors::{
    attractor_lattice, basin_is_saturated, global_attractor, is_stable, validate_attractor, AttractorLattice,
    DEFAULT_LATTICE_CAP,
};
use crate::cellset::CellSet;
use crate::checks::Check;
use crate::dynsys::SystemSpec;
use crate::morse::{chain, morse_decomposition, morse_graph, verify_morse, MorseDecomposition, MorseError};
use crate::transition::{
    build_transitions, condense, BuildOptions, CondensationGraph, MorseGraph, TransitionError, TransitionSystem,
};

pub const ENCLOSURE_SPOT_CHECKS: usize = 200;
const ENCLOSURE_SEED: u64 = 0x6d66_7700;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error("unknown chain strategy `{name}` (available: {available})")]
    UnknownStrategy { name: String, available: String },
    #[error("chain refers to cell {0}, which is not a cell of the system")]
    ChainCell(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum ChainChoice {
    Strategy(String),
    Explicit(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisConfig {
    pub depth: Option<u32>,
    pub tau: Option<f64>,
    pub bloat: f64,
    pub samples_per_axis: usize,
    pub cell_cap: usize,
    pub lattice_cap: usize,
    pub chain: ChainChoice,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let b = BuildOptions::default();
        AnalysisConfig {
            depth: None,
            tau: None,
            bloat: b.bloat,
            samples_per_axis: b.samples_per_axis,
            cell_cap: b.cell_cap,
            lattice_cap: DEFAULT_LATTICE_CAP,
            chain: ChainChoice::Strategy("sinks-first".into()),
        }
    }
}

impl AnalysisConfig {
    fn build_options(&self) -> BuildOptions {
        BuildOptions {
            depth: self.depth,
            grid_box: None,
            tau: self.tau,
            bloat: self.bloat,
            samples_per_axis: self.samples_per_axis,
            cell_cap: self.cell_cap,
        }
    }
}

pub struct Analysis {
    pub config: AnalysisConfig,
    pub ts: TransitionSystem,
    pub cg: CondensationGraph,
    pub lattice: AttractorLattice,
    pub global: CellSet,
    pub decomposition: MorseDecomposition,
    pub graph: MorseGraph,
    pub checks: Vec<Check>,
    pub build_ms: f64,
}

pub fn analyze(spec: &SystemSpec, config: &AnalysisConfig) -> Result<Analysis, AnalysisError> {
    let started = Instant::now();
    let ts = build_transitions(spec, &config.build_options())?;
    let build_ms = started.elapsed().as_secs_f64() * 1e3;
    let cg = condense(&ts);
    let lattice = attractor_lattice(&ts, &cg, config.lattice_cap);
    let global = global_attractor(&ts, &cg);

    let decomposition = match &config.chain {
        ChainChoice::Strategy(name) => {
            let strategy = chain::lookup(name).ok_or_else(|| AnalysisError::UnknownStrategy {
                name: name.clone(),
                available: chain::names().join(", "),
            })?;
            morse_decomposition(&ts, &global, None, strategy)?
        }
        ChainChoice::Explicit(sets) => {
            let mut chain_sets = Vec::with_capacity(sets.len());
            for s in sets {
                if let Some(&bad) = s.iter().find(|&&c| c >= ts.n_cells()) {
                    return Err(AnalysisError::ChainCell(bad));
                }
                chain_sets.push(ts.set_of(s.iter().copied()));
            }
            morse_decomposition(&ts, &global, Some(chain_sets), &chain::SinksFirst)?
        }
    };
    let graph = morse_graph(&ts, &decomposition);

    let mut checks = Vec::new();
    let recs = &lattice.attractors;
    let detail = format!("{} attractors", recs.len());
    checks.push(Check::new(
        "attractors_validated",
        recs.iter()
            .all(|r| validate_attractor(&ts, &r.cells, false).is_attractor),
        detail.clone(),
    ));
    checks.push(Check::new(
        "attractors_stable",
        recs.iter().all(|r| is_stable(&ts, &r.cells)),
        detail.clone(),
    ));
    checks.push(Check::new(
        "basins_saturated",
        recs.iter().all(|r| basin_is_saturated(&ts, &r.basin)),
        detail,
    ));
    for (name, ok) in verify_morse(&ts, &decomposition).named() {
        checks.push(Check::new(format!("morse_{name}"), ok, ""));
    }
    if let SystemSpec::Ode(_) = spec {
        let misses = enclosure_misses(spec, &ts, ENCLOSURE_SPOT_CHECKS);
        checks.push(Check::new(
            "enclosure_spot_check",
            misses == 0,
            format!("{misses} of {ENCLOSURE_SPOT_CHECKS} sampled images outside the successor cells"),
        ));
    }

    Ok(Analysis {
        config: config.clone(),
        ts,
        cg,
        lattice,
        global,
        decomposition,
        graph,
        checks,
        build_ms,
    })
}

/// Random points of random cells whose time-τ image lands in a cell that
/// is not a successor. Escaping images are not counted.
pub fn enclosure_misses(spec: &SystemSpec, ts: &TransitionSystem, samples: usize) -> usize {
    let (Some(ode), Some(grid)) = (spec.as_ode(), ts.grid()) else {
        return 0;
    };
    let crate::transition::Origin::FromOde { tau, .. } = ts.origin() else {
        return 0;
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ENCLOSURE_SEED);
    let mut misses = 0;
    for _ in 0..samples {
        let c = rng.gen_range(0..ts.n_cells());
        let p: Vec<f64> = grid.cell_box(c).iter().map(|iv| rng.gen_range(iv.lo..=iv.hi)).collect();
        if let Ok(crate::dynsys::EvolveResult::At(y)) = ode.evolve(&p, tau) {
            if let Some(d) = grid.locate(&y) {
                if !ts.successors(c).contains(&d) {
                    misses += 1;
                }
            }
        }
    }
    misses
}

impl Analysis {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// For each cell, the first lattice attractor whose basin contains it.
    pub fn basin_assignment(&self) -> Vec<Option<usize>> {
        (0..self.ts.n_cells())
            .map(|c| self.lattice.attractors.iter().position(|r| r.basin.contains(c)))
            .collect()
    }

    pub fn attractors_json(&self) -> Value {
        Value::Array(
            self.lattice
                .attractors
                .iter()
                .enumerate()
                .map(|(id, r)| {
                    json!({
                        "id": id,
                        "cells": r.cells,
                        "absorbing": r.absorbing,
                        "basin": r.basin,
                        "downset": r.downset,
                    })
                })
                .collect(),
        )
    }

    /// Everything except the spec echo and timing, which the caller adds.
    pub fn report_body(&self) -> Value {
        let ts = &self.ts;
        let cg = &self.cg;
        let grid = ts.grid().map(|g| {
            json!({
                "box": g,
                "cells_per_axis": g.per_axis(),
                "cell_widths": (0..g.dim()).map(|a| g.width(a)).collect::<Vec<_>>(),
            })
        });
        let recurrent: Vec<Value> = cg
            .recurrent_ids()
            .into_iter()
            .map(|i| json!({"id": i, "cells": cg.components[i]}))
            .collect();
        let chain_name = match &self.config.chain {
            ChainChoice::Strategy(s) => s.clone(),
            ChainChoice::Explicit(_) => "file".to_string(),
        };
        let attractors: Vec<Value> = self
            .lattice
            .attractors
            .iter()
            .enumerate()
            .map(|(id, r)| json!({"id": id, "size": r.cells.len(), "basin_size": r.basin.len(), "downset": r.downset}))
            .collect();
        json!({
            "config": self.config,
            "transitions": {
                "origin": ts.origin(),
                "cells": ts.n_cells(),
                "edges": ts.edge_count(),
                "escaping_cells": ts.escaping_cells().len(),
                "deterministic": ts.is_deterministic(),
                "grid": grid,
                "labels": ts.labels(),
            },
            "condensation": {
                "components": cg.n_components(),
                "recurrent": recurrent,
                "dag_edges": cg.dag_edges,
            },
            "attractors": attractors,
            "lattice_truncated": self.lattice.truncated,
            "global_attractor": self.global,
            "chain": {"strategy": chain_name, "sets": self.decomposition.chain},
            "morse_sets": self.decomposition.morse_sets,
            "repellers": self.decomposition.repellers,
            "morse_graph": {
                "nodes": self.graph.nodes.iter().map(|n| n.len()).collect::<Vec<_>>(),
                "edges": self.graph.edges,
            },
            "checks": self.checks,
            "passed": self.passed(),
            "tolerances": {
                "bloat": self.config.bloat,
                "samples_per_axis": self.config.samples_per_axis,
                "enclosure_spot_checks": ENCLOSURE_SPOT_CHECKS,
                "lattice_cap": self.config.lattice_cap,
                "cell_cap": self.config.cell_cap,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{Digraph, FiniteMap};

    #[test]
    fn g1_pipeline() {
        let spec = SystemSpec::Digraph(
            Digraph::new(
                vec!["a".into(), "b".into(), "d".into(), "e".into()],
                &[("a", "a"), ("b", "a"), ("d", "b"), ("e", "e"), ("e", "d")],
            )
            .unwrap(),
        );
        let a = analyze(&spec, &AnalysisConfig::default()).unwrap();
        assert!(a.passed());
        assert_eq!(a.graph.nodes.len(), 2);
        assert_eq!(a.graph.edges, vec![(1, 0)]);
        assert_eq!(a.basin_assignment(), vec![Some(0), Some(0), Some(0), Some(1)]);
    }

    #[test]
    fn explicit_chain_and_unknown_strategy() {
        let spec = SystemSpec::FiniteMap(FiniteMap::from_indices(vec![0, 0, 1, 4, 3, 3]).unwrap());
        let cfg = AnalysisConfig {
            chain: ChainChoice::Explicit(vec![vec![3, 4]]),
            ..Default::default()
        };
        let a = analyze(&spec, &cfg).unwrap();
        assert_eq!(a.decomposition.morse_sets[0].to_vec(), vec![3, 4]);
        let cfg = AnalysisConfig {
            chain: ChainChoice::Strategy("alphabetical".into()),
            ..Default::default()
        };
        assert!(matches!(
            analyze(&spec, &cfg),
            Err(AnalysisError::UnknownStrategy { .. })
        ));
    }
}
