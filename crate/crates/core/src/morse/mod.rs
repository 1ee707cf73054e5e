//! Attractor-repeller pairs and Morse decompositions of a global attractor.
//!
//! All constructions live in the subsystem obtained by restricting the
//! transition system to the global attractor `𝒜`.

pub mod chain;

use serde::Serialize;
use thiserror::Error;

use crate::attractors::{basin, downset_attractor, validate_attractor};
use crate::cellset::CellSet;
use crate::limits::{backward_viable, is_solution_invariant};
use crate::transition::{condense, Direction, MorseGraph, TransitionSystem};

pub use chain::ChainStrategy;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorseError {
    #[error("set is not an attractor of the subsystem on the global attractor")]
    NotAttractorInSubsystem,
    #[error("chain entry {index} does not strictly contain its predecessor")]
    ChainNotIncreasing { index: usize },
    #[error("chain entry {index} is not an attractor of the subsystem on the global attractor")]
    ChainEntryNotAttractor { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseDecomposition {
    pub global_attractor: CellSet,
    /// `A₀ = ∅ ⊂ A₁ ⊂ … ⊂ Aₙ = 𝒜`.
    pub chain: Vec<CellSet>,
    /// `M₁ … Mₙ`.
    pub morse_sets: Vec<CellSet>,
    /// `A₀* … Aₙ₋₁*`.
    pub repellers: Vec<CellSet>,
}

impl MorseDecomposition {
    pub fn len(&self) -> usize {
        self.morse_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.morse_sets.is_empty()
    }
}

/// `𝒜 ∖ Ω_𝒜(A)`, the cells of the global attractor not attracted to `A`.
pub fn dual_repeller(ts: &TransitionSystem, a_global: &CellSet, a: &CellSet) -> Result<CellSet, MorseError> {
    if a.is_empty() {
        return Ok(a_global.clone());
    }
    let sub = ts.restrict(a_global);
    dual_in(&sub, a_global, a)
}

fn dual_in(sub: &TransitionSystem, a_global: &CellSet, a: &CellSet) -> Result<CellSet, MorseError> {
    if a.is_empty() {
        return Ok(a_global.clone());
    }
    if !validate_attractor(sub, a, false).is_attractor {
        return Err(MorseError::NotAttractorInSubsystem);
    }
    let b = basin(sub, a).map_err(|_| MorseError::NotAttractorInSubsystem)?;
    Ok(a_global.difference(&b))
}

/// Builds `Mₖ = Aₖ ∩ Aₖ₋₁*` from a chain of attractors. Without an explicit
/// chain the strategy picks one. A given chain may omit the leading `∅` and
/// the trailing `𝒜`.
pub fn morse_decomposition(
    ts: &TransitionSystem,
    a_global: &CellSet,
    chain: Option<Vec<CellSet>>,
    strategy: &dyn ChainStrategy,
) -> Result<MorseDecomposition, MorseError> {
    let sub = ts.restrict(a_global);
    let mut entries: Vec<CellSet> = match chain {
        Some(given) => {
            let mut given: Vec<CellSet> = given.into_iter().skip_while(|s| s.is_empty()).collect();
            if !a_global.is_empty() && given.last() != Some(a_global) {
                given.push(a_global.clone());
            }
            for (i, s) in given.iter().enumerate() {
                let prev = if i == 0 { None } else { Some(&given[i - 1]) };
                if prev.is_some_and(|p| !p.is_subset(s) || p == s) {
                    return Err(MorseError::ChainNotIncreasing { index: i + 1 });
                }
                if !validate_attractor(&sub, s, false).is_attractor {
                    return Err(MorseError::ChainEntryNotAttractor { index: i + 1 });
                }
            }
            given
        }
        None => {
            let cg = condense(&sub);
            let order = strategy.order(&cg);
            (1..=order.len())
                .map(|k| {
                    downset_attractor(&sub, &cg, &order[..k])
                        .expect("prefixes of a linear extension are downsets")
                        .cells
                })
                .collect()
        }
    };
    entries.insert(0, sub.empty_set());

    let repellers = entries[..entries.len() - 1]
        .iter()
        .map(|a| dual_in(&sub, a_global, a))
        .collect::<Result<Vec<_>, _>>()?;
    let morse_sets = (1..entries.len())
        .map(|k| entries[k].intersection(&repellers[k - 1]))
        .collect();
    Ok(MorseDecomposition {
        global_attractor: a_global.clone(),
        chain: entries,
        morse_sets,
        repellers,
    })
}

/// Cells of `𝒜` on a full solution inside `𝒜` whose backward tail lies in
/// the invariant set `M`: the forward reach of `M` within `𝒜`, trimmed to
/// cells with an infinite backward path.
pub fn unstable_set(ts: &TransitionSystem, a_global: &CellSet, m: &CellSet) -> CellSet {
    let sub = ts.restrict(a_global);
    unstable_in(&sub, m)
}

fn unstable_in(sub: &TransitionSystem, m: &CellSet) -> CellSet {
    sub.reach(m, Direction::Forward).intersection(&backward_viable(sub))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MorseReport {
    /// `Mₖ` equals the dual repeller of `Aₖ₋₁` inside `Aₖ`, and `Aₖ ∩ Aₖ₋₁*`.
    pub repeller_identity: bool,
    /// Morse sets are pairwise disjoint and invariant.
    pub disjoint_invariant: bool,
    /// No path climbs from a lower to a higher Morse set, and every other
    /// cell of `𝒜` connects a higher set to a lower one.
    pub ordered_connections: bool,
    /// `Aₖ = ⋃_{i≤k} Wᵘ(Mᵢ)`.
    pub unstable_reconstruction: bool,
    /// Every chain attractor is an attractor of the full system.
    pub attractors_in_full_system: bool,
}

impl MorseReport {
    pub fn all(&self) -> bool {
        self.repeller_identity
            && self.disjoint_invariant
            && self.ordered_connections
            && self.unstable_reconstruction
            && self.attractors_in_full_system
    }

    pub fn named(&self) -> [(&'static str, bool); 5] {
        [
            ("repeller_identity", self.repeller_identity),
            ("disjoint_invariant", self.disjoint_invariant),
            ("ordered_connections", self.ordered_connections),
            ("unstable_reconstruction", self.unstable_reconstruction),
            ("attractors_in_full_system", self.attractors_in_full_system),
        ]
    }
}

pub fn verify_morse(ts: &TransitionSystem, md: &MorseDecomposition) -> MorseReport {
    let g = &md.global_attractor;
    let sub = ts.restrict(g);
    let n = md.morse_sets.len();
    let chain = &md.chain;
    let shape_ok = chain.len() == n + 1
        && md.repellers.len() == n
        && chain.first().is_some_and(|a| a.is_empty())
        && chain.last() == Some(g);

    let repeller_identity = shape_ok
        && (1..=n).all(|k| {
            let m = &md.morse_sets[k - 1];
            let inside = ts.restrict(&chain[k]);
            let dual = if chain[k - 1].is_empty() {
                Some(chain[k].clone())
            } else {
                basin(&inside, &chain[k - 1]).ok().map(|b| chain[k].difference(&b))
            };
            dual.as_ref() == Some(m) && *m == chain[k].intersection(&md.repellers[k - 1])
        });

    let disjoint_invariant = (0..n).all(|i| {
        let m = &md.morse_sets[i];
        m.is_subset(g) && is_solution_invariant(&sub, m) && md.morse_sets[i + 1..].iter().all(|o| o.is_disjoint(m))
    });

    let down: Vec<CellSet> = md.morse_sets.iter().map(|m| sub.reach(m, Direction::Forward)).collect();
    let up: Vec<CellSet> = md
        .morse_sets
        .iter()
        .map(|m| sub.reach(m, Direction::Backward))
        .collect();
    let no_climb = (0..n).all(|i| (i + 1..n).all(|j| down[i].is_disjoint(&md.morse_sets[j])));
    let mut in_morse = ts.empty_set();
    for m in &md.morse_sets {
        in_morse.union_with(m);
    }
    let connecting_ok = g.difference(&in_morse).iter().all(|x| {
        let lowest_target = (0..n).find(|&i| up[i].contains(x));
        let highest_source = (0..n).rev().find(|&j| down[j].contains(x));
        matches!((lowest_target, highest_source), (Some(i), Some(j)) if i < j)
    });
    let ordered_connections = no_climb && connecting_ok;

    let unstable: Vec<CellSet> = md.morse_sets.iter().map(|m| unstable_in(&sub, m)).collect();
    let unstable_reconstruction = shape_ok
        && (1..=n).all(|k| {
            let mut u = ts.empty_set();
            for w in &unstable[..k] {
                u.union_with(w);
            }
            u == chain[k]
        });

    let attractors_in_full_system = chain
        .iter()
        .skip(1)
        .all(|a| validate_attractor(ts, a, false).is_attractor);

    MorseReport {
        repeller_identity,
        disjoint_invariant,
        ordered_connections,
        unstable_reconstruction,
        attractors_in_full_system,
    }
}

/// Morse sets as nodes, joined by direct connections inside `𝒜`.
pub fn morse_graph(ts: &TransitionSystem, md: &MorseDecomposition) -> MorseGraph {
    let sub = ts.restrict(&md.global_attractor);
    MorseGraph::build(&sub, md.morse_sets.clone())
}
