//! Attractors, their basins and the lattice of attractors generated by
//! downward-closed sets of recurrent components.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cellset::{CellId, CellSet};
use crate::limits::{max_invariant, omega_limit};
use crate::transition::{condense, CondensationGraph, Direction, TransitionSystem};

pub const DEFAULT_LATTICE_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttractorError {
    #[error("the candidate set is empty")]
    EmptyInput,
    #[error("set is not absorbing: cell {cell} keeps being revisited outside it")]
    NotAbsorbing { cell: CellId },
    #[error("cell {cell} reachable from the set escapes the domain")]
    EscapesDomain { cell: CellId },
    #[error("set is not forward closed: cell {cell} has a successor outside it or escapes")]
    NotForwardClosed { cell: CellId },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorRecord {
    pub cells: CellSet,
    /// Witness neighborhood whose forward images eventually stay inside it.
    pub absorbing: CellSet,
    pub basin: CellSet,
    /// Recurrent components contained in `cells`.
    pub downset: Vec<usize>,
}

/// `ω(N)` for an absorbing `N`: every set on the eventual cycle of
/// `N, F(N), F²(N), …` lies inside `N`, and no cell reachable from `N`
/// escapes.
pub fn attractor_from_absorbing(ts: &TransitionSystem, n: &CellSet) -> Result<AttractorRecord, AttractorError> {
    let cg = condense(ts);
    from_absorbing_with(ts, &cg, n)
}

fn from_absorbing_with(
    ts: &TransitionSystem,
    cg: &CondensationGraph,
    n: &CellSet,
) -> Result<AttractorRecord, AttractorError> {
    if n.is_empty() {
        return Err(AttractorError::EmptyInput);
    }
    if let Some(cell) = ts.reach(n, Direction::Forward).iter().find(|&c| ts.escapes(c)) {
        return Err(AttractorError::EscapesDomain { cell });
    }
    let cells = omega_limit(ts, n).map_err(|_| AttractorError::EmptyInput)?;
    // ω(N) is the union of the cycle sets, so it bounds every one of them.
    if let Some(cell) = cells.difference(n).first() {
        return Err(AttractorError::NotAbsorbing { cell });
    }
    let basin = basin(ts, &cells)?;
    Ok(AttractorRecord {
        downset: recurrent_within(cg, &cells),
        cells,
        absorbing: n.clone(),
        basin,
    })
}

fn recurrent_within(cg: &CondensationGraph, s: &CellSet) -> Vec<usize> {
    cg.recurrent_ids()
        .into_iter()
        .filter(|&i| cg.components[i].is_subset(s))
        .collect()
}

/// Cells all of whose forward paths end up in `A`. A path avoids `A`
/// forever exactly when it escapes or reaches a cycle outside `A`.
pub fn basin(ts: &TransitionSystem, a: &CellSet) -> Result<CellSet, AttractorError> {
    if let Some(cell) = a
        .iter()
        .find(|&c| ts.escapes(c) || ts.successors(c).iter().any(|&d| !a.contains(d)))
    {
        return Err(AttractorError::NotForwardClosed { cell });
    }
    let outside = ts.active().difference(a);
    let sub = ts.restrict(&outside);
    let cg = condense(&sub);
    let mut bad = ts.set_of(outside.iter().filter(|&c| ts.escapes(c)));
    for i in cg.recurrent_ids() {
        bad.union_with(&cg.components[i]);
    }
    let doomed = ts.reach_within(&bad, Direction::Backward, &outside);
    Ok(ts.active().difference(&doomed))
}

/// Every cell whose successors all lie in the basin is itself in it.
pub fn basin_is_saturated(ts: &TransitionSystem, basin: &CellSet) -> bool {
    ts.active()
        .iter()
        .all(|c| basin.contains(c) || ts.escapes(c) || ts.successors(c).iter().any(|&d| !basin.contains(d)))
}

pub fn is_stable(ts: &TransitionSystem, a: &CellSet) -> bool {
    ts.image(a).is_subset(a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorValidation {
    pub invariant: bool,
    pub absorbing_witness_found: bool,
    pub maximal_in_witness: bool,
    /// Only computed on request.
    pub maximal_in_basin: Option<bool>,
    pub is_attractor: bool,
    pub witness: Option<CellSet>,
}

/// Searches the one-cell collar `A ∪ F⁻¹(A)` and then the basin for an
/// absorbing witness `N` with `ω(N) = A`.
pub fn validate_attractor(ts: &TransitionSystem, a: &CellSet, check_basin_maximality: bool) -> AttractorValidation {
    let fail = |invariant| AttractorValidation {
        invariant,
        absorbing_witness_found: false,
        maximal_in_witness: false,
        maximal_in_basin: None,
        is_attractor: false,
        witness: None,
    };
    if a.is_empty() {
        return fail(false);
    }
    let invariant = crate::limits::invariance(ts, a).invariant;
    if !invariant {
        return fail(false);
    }
    let Ok(basin) = basin(ts, a) else {
        return fail(invariant);
    };
    let collar = a.union(&ts.preimage(a));
    let witness = [collar, basin.clone()].into_iter().find(|n| {
        ts.reach(n, Direction::Forward).iter().all(|c| !ts.escapes(c)) && omega_limit(ts, n).is_ok_and(|w| w == *a)
    });
    let Some(witness) = witness else {
        return fail(invariant);
    };
    let maximal_in_witness = max_invariant(ts, &witness) == *a;
    let maximal_in_basin = check_basin_maximality.then(|| max_invariant(ts, &basin) == *a);
    AttractorValidation {
        invariant,
        absorbing_witness_found: true,
        maximal_in_witness,
        maximal_in_basin,
        is_attractor: maximal_in_witness && maximal_in_basin.unwrap_or(true),
        witness: Some(witness),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractorLattice {
    /// Ordered so that a set never precedes one of its subsets.
    pub attractors: Vec<AttractorRecord>,
    pub truncated: bool,
}

impl AttractorLattice {
    /// The attractor of the full downset, the last entry when not truncated.
    pub fn global(&self) -> Option<&AttractorRecord> {
        if self.truncated {
            None
        } else {
            self.attractors.last()
        }
    }
}

/// Recurrent components that cannot reach the escape sink, with the
/// recurrent components each one reaches (itself included).
struct RecurrentOrder {
    ids: Vec<usize>,
    below: Vec<Vec<usize>>,
    /// Active cells reaching the escape sink.
    leaking: CellSet,
}

impl RecurrentOrder {
    fn new(ts: &TransitionSystem, cg: &CondensationGraph) -> Self {
        let leaking = ts.reach(&ts.escaping_cells(), Direction::Backward);
        // Tarjan ids put sinks first.
        let ids: Vec<usize> = cg
            .recurrent_ids()
            .into_iter()
            .filter(|&i| cg.components[i].is_disjoint(&leaking))
            .collect();
        let below = ids
            .iter()
            .map(|&i| {
                let r = ts.reach(&cg.components[i], Direction::Forward);
                ids.iter()
                    .enumerate()
                    .filter(|&(_, &j)| cg.components[j].first().is_some_and(|c| r.contains(c)))
                    .map(|(k, _)| k)
                    .collect()
            })
            .collect();
        RecurrentOrder { ids, below, leaking }
    }

    /// Downsets as sorted lists of positions in `ids`, at most `cap` of them
    /// (empty set excluded).
    fn downsets(&self, cap: usize) -> (Vec<Vec<usize>>, bool) {
        let mut out = Vec::new();
        let mut chosen = vec![false; self.ids.len()];
        let truncated = self.walk(0, &mut chosen, &mut out, cap);
        (out, truncated)
    }

    fn walk(&self, k: usize, chosen: &mut Vec<bool>, out: &mut Vec<Vec<usize>>, cap: usize) -> bool {
        if k == self.ids.len() {
            let d: Vec<usize> = (0..k).filter(|&i| chosen[i]).collect();
            if d.is_empty() {
                return false;
            }
            if out.len() == cap {
                return true;
            }
            out.push(d);
            return false;
        }
        if self.walk(k + 1, chosen, out, cap) {
            return true;
        }
        if self.below[k].iter().all(|&j| j == k || chosen[j]) {
            chosen[k] = true;
            let stop = self.walk(k + 1, chosen, out, cap);
            chosen[k] = false;
            return stop;
        }
        false
    }

    /// Cells reaching neither the escape sink nor a recurrent component
    /// outside the downset.
    fn neighborhood(&self, ts: &TransitionSystem, cg: &CondensationGraph, d: &[usize]) -> CellSet {
        let mut avoid = self.leaking.clone();
        for i in cg.recurrent_ids() {
            let pos = self.ids.iter().position(|&j| j == i);
            if !pos.is_some_and(|p| d.contains(&p)) {
                avoid.union_with(&cg.components[i]);
            }
        }
        ts.active().difference(&ts.reach(&avoid, Direction::Backward))
    }
}

pub fn attractor_lattice(ts: &TransitionSystem, cg: &CondensationGraph, cap: usize) -> AttractorLattice {
    let order = RecurrentOrder::new(ts, cg);
    let (mut downsets, truncated) = order.downsets(cap.max(1));
    downsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let attractors = downsets
        .par_iter()
        .map(|d| {
            let n = order.neighborhood(ts, cg, d);
            from_absorbing_with(ts, cg, &n).expect("downset neighborhoods are absorbing")
        })
        .collect();
    AttractorLattice { attractors, truncated }
}

/// The attractor generated by a downward-closed set of recurrent
/// components (ids in `cg`): `ω` of the cells that reach neither the escape
/// sink nor any recurrent component outside `comps`.
pub fn downset_attractor(
    ts: &TransitionSystem,
    cg: &CondensationGraph,
    comps: &[usize],
) -> Result<AttractorRecord, AttractorError> {
    let mut avoid = ts.escaping_cells();
    for i in cg.recurrent_ids() {
        if !comps.contains(&i) {
            avoid.union_with(&cg.components[i]);
        }
    }
    let n = ts.active().difference(&ts.reach(&avoid, Direction::Backward));
    from_absorbing_with(ts, cg, &n)
}

/// `ω` of the cells that never reach the escape sink or a leaking recurrent
/// component; empty when no recurrent component is sealed off from escape.
pub fn global_attractor(ts: &TransitionSystem, cg: &CondensationGraph) -> CellSet {
    let order = RecurrentOrder::new(ts, cg);
    if order.ids.is_empty() {
        return ts.empty_set();
    }
    let all: Vec<usize> = (0..order.ids.len()).collect();
    let n = order.neighborhood(ts, cg, &all);
    omega_limit(ts, &n).unwrap_or_else(|_| ts.empty_set())
}
