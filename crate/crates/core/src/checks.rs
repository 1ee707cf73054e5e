//! Named property checks over finite transition systems, shared by the
//! `verify` command and the test suites.

use std::collections::HashSet;

use serde::Serialize;

use crate::attractors::{attractor_lattice, basin_is_saturated, global_attractor, is_stable, validate_attractor};
use crate::cellset::CellSet;
use crate::limits::{invariance, omega_intersection_form, omega_limit};
use crate::lyapunov::FiniteLyapunov;
use crate::morse::chain::SinksFirst;
use crate::morse::{morse_decomposition, verify_morse, MorseReport};
use crate::random;
use crate::transition::{condense, TransitionSystem};

pub const BRUTE_FORCE_MAX_CELLS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Both ω forms agree on every singleton and on the full cell set.
pub fn omega_forms_agree(ts: &TransitionSystem) -> bool {
    let mut seeds: Vec<CellSet> = ts.active().iter().map(|c| ts.set_of([c])).collect();
    seeds.push(ts.active().clone());
    seeds
        .iter()
        .filter(|s| !s.is_empty())
        .all(|s| omega_limit(ts, s) == omega_intersection_form(ts, s))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LatticeChecks {
    pub attractors: usize,
    pub validated: bool,
    pub stable: bool,
    pub basins_saturated: bool,
    pub closed_under_union: bool,
}

impl LatticeChecks {
    pub fn all(&self) -> bool {
        self.validated && self.stable && self.basins_saturated && self.closed_under_union
    }
}

const UNION_PAIR_LIMIT: usize = 256;

pub fn lattice_checks(ts: &TransitionSystem) -> LatticeChecks {
    let cg = condense(ts);
    let lat = attractor_lattice(ts, &cg, crate::attractors::DEFAULT_LATTICE_CAP);
    let recs = &lat.attractors;
    let members: HashSet<&CellSet> = recs.iter().map(|r| &r.cells).collect();
    let head = &recs[..recs.len().min(UNION_PAIR_LIMIT)];
    let closed_under_union = lat.truncated
        || head
            .iter()
            .enumerate()
            .all(|(i, a)| head[i + 1..].iter().all(|b| members.contains(&a.cells.union(&b.cells))));
    LatticeChecks {
        attractors: recs.len(),
        validated: recs.iter().all(|r| validate_attractor(ts, &r.cells, true).is_attractor),
        stable: recs.iter().all(|r| is_stable(ts, &r.cells)),
        basins_saturated: recs.iter().all(|r| basin_is_saturated(ts, &r.basin)),
        closed_under_union,
    }
}

/// Exhaustive check that each lattice attractor contains every invariant
/// subset of its witness. `None` when the system is too large to enumerate.
pub fn maximality_brute_force(ts: &TransitionSystem) -> Option<bool> {
    if ts.n_cells() > BRUTE_FORCE_MAX_CELLS {
        return None;
    }
    let cg = condense(ts);
    let lat = attractor_lattice(ts, &cg, crate::attractors::DEFAULT_LATTICE_CAP);
    Some(lat.attractors.iter().all(|r| {
        let witness = validate_attractor(ts, &r.cells, false)
            .witness
            .unwrap_or_else(|| r.absorbing.clone());
        let cells = witness.to_vec();
        (1u32..(1 << cells.len())).all(|mask| {
            let s = ts.set_of(
                cells
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &c)| c),
            );
            !invariance(ts, &s).invariant || s.is_subset(&r.cells)
        })
    }))
}

/// Default decomposition of the global attractor; `None` when it is empty.
pub fn morse_checks(ts: &TransitionSystem) -> Option<MorseReport> {
    let cg = condense(ts);
    let g = global_attractor(ts, &cg);
    if g.is_empty() {
        return None;
    }
    let md = morse_decomposition(ts, &g, None, &SinksFirst).ok()?;
    Some(verify_morse(ts, &md))
}

/// Lyapunov decrease for every lattice attractor of a finite system.
pub fn lyapunov_checks(ts: &TransitionSystem) -> bool {
    let cg = condense(ts);
    let lat = attractor_lattice(ts, &cg, 64);
    lat.attractors.iter().all(|r| {
        FiniteLyapunov::new(ts, &r.cells)
            .is_ok_and(|ly| ly.verify_decrease().passed() && r.cells.iter().all(|c| ly.zeta(c) == 0.0))
    })
}

/// The full suite on one system.
pub fn system_checks(ts: &TransitionSystem) -> Vec<Check> {
    let mut out = vec![Check::new("omega_forms_agree", omega_forms_agree(ts), "")];
    let lat = lattice_checks(ts);
    let detail = format!("{} attractors", lat.attractors);
    out.push(Check::new("lattice_validated", lat.validated, detail.clone()));
    out.push(Check::new("lattice_stable", lat.stable, detail.clone()));
    out.push(Check::new("basins_saturated", lat.basins_saturated, detail.clone()));
    out.push(Check::new("lattice_closed_under_union", lat.closed_under_union, detail));
    if let Some(ok) = maximality_brute_force(ts) {
        out.push(Check::new("maximality_brute_force", ok, ""));
    }
    match morse_checks(ts) {
        Some(r) => {
            for (name, ok) in r.named() {
                out.push(Check::new(format!("morse_{name}"), ok, ""));
            }
        }
        None => out.push(Check::new("morse_decomposition", true, "empty global attractor")),
    }
    out.push(Check::new("lyapunov_decrease", lyapunov_checks(ts), ""));
    out
}

/// The suite over `seeds` random digraphs and maps, one aggregated check
/// per property.
pub fn random_suite(seeds: u64) -> Vec<Check> {
    // name -> (systems checked, failing seeds), in first-seen order
    let mut tally: Vec<(String, usize, Vec<u64>)> = Vec::new();
    for seed in 0..seeds {
        let systems = [
            ("digraph", random::random_digraph(seed)),
            ("map", random::random_map(seed)),
        ];
        for (kind, ts) in systems {
            for c in system_checks(&ts) {
                let name = format!("random_{kind}_{}", c.name);
                let i = match tally.iter().position(|t| t.0 == name) {
                    Some(i) => i,
                    None => {
                        tally.push((name, 0, Vec::new()));
                        tally.len() - 1
                    }
                };
                tally[i].1 += 1;
                if !c.passed {
                    tally[i].2.push(seed);
                }
            }
        }
    }
    tally
        .into_iter()
        .map(|(name, count, bad)| {
            let detail = if bad.is_empty() {
                format!("{count} systems")
            } else {
                format!("failing seeds {bad:?}")
            };
            Check::new(name, bad.is_empty(), detail)
        })
        .collect()
}
