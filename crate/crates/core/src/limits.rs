//! Limit sets and invariance predicates on a transition system.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::cellset::CellSet;
use crate::transition::{condense, Direction, TransitionSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LimitError {
    #[error("limit sets need a nonempty input set")]
    EmptyInput,
}

/// Limsup of the image sequence `S, F(S), F²(S), …`: the union of the sets
/// on its eventual cycle.
pub fn omega_limit(ts: &TransitionSystem, s: &CellSet) -> Result<CellSet, LimitError> {
    if s.is_empty() {
        return Err(LimitError::EmptyInput);
    }
    let cap = 4 * ts.n_cells().max(1);
    let mut seen: HashMap<CellSet, usize> = HashMap::new();
    let mut seq: Vec<CellSet> = Vec::new();
    let mut cur = s.clone();
    let mut warned = false;
    loop {
        if let Some(&start) = seen.get(&cur) {
            let mut out = ts.empty_set();
            for set in &seq[start..] {
                out.union_with(set);
            }
            return Ok(out);
        }
        if seq.len() == cap && !warned {
            log::warn!("image sequence has not cycled after {cap} steps; continuing");
            warned = true;
        }
        seen.insert(cur.clone(), seq.len());
        let next = ts.image(&cur);
        seq.push(cur);
        cur = next;
    }
}

/// `⋂_m ⋃_{k≥m} F^k(S)`. The tail unions are `F^m(R)` with `R` the forward
/// reach of `S`, a decreasing sequence whose limit is the intersection.
pub fn omega_intersection_form(ts: &TransitionSystem, s: &CellSet) -> Result<CellSet, LimitError> {
    if s.is_empty() {
        return Err(LimitError::EmptyInput);
    }
    let mut u = ts.reach(s, Direction::Forward);
    loop {
        let next = ts.image(&u);
        if next == u {
            return Ok(u);
        }
        u = next;
    }
}

/// Cells admitting an infinite backward path.
pub fn backward_viable(ts: &TransitionSystem) -> CellSet {
    let cg = condense(ts);
    let mut rec = ts.empty_set();
    for i in cg.recurrent_ids() {
        rec.union_with(&cg.components[i]);
    }
    ts.reach(&rec, Direction::Forward)
}

/// Cells admitting an infinite forward path that never escapes.
pub fn forward_viable(ts: &TransitionSystem) -> CellSet {
    let cg = condense(ts);
    let mut rec = ts.empty_set();
    for i in cg.recurrent_ids() {
        rec.union_with(&cg.components[i]);
    }
    ts.reach(&rec, Direction::Backward)
}

/// Union over all infinite backward paths ending in `S` of the cells each
/// path visits infinitely often. A backward path eventually stays in one
/// recurrent component, and every cell of that component recurs along some
/// such path, so this is the union of the recurrent components that reach `S`.
pub fn alpha_limit(ts: &TransitionSystem, s: &CellSet) -> Result<CellSet, LimitError> {
    if s.is_empty() {
        return Err(LimitError::EmptyInput);
    }
    let cg = condense(ts);
    let upstream = ts.reach(s, Direction::Backward);
    let mut out = ts.empty_set();
    for i in cg.recurrent_ids() {
        if cg.components[i].is_subset(&upstream) {
            out.union_with(&cg.components[i]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Invariance {
    pub positively_invariant: bool,
    pub negatively_invariant: bool,
    pub invariant: bool,
}

pub fn invariance(ts: &TransitionSystem, s: &CellSet) -> Invariance {
    let img = ts.image(s);
    let no_escape = s.iter().all(|c| !ts.escapes(c));
    let positively = no_escape && img.is_subset(s);
    let negatively = s.is_subset(&img);
    Invariance {
        positively_invariant: positively,
        negatively_invariant: negatively,
        invariant: positively && negatively,
    }
}

/// Every cell of `S` has a successor and a predecessor inside `S`, so each
/// cell lies on a full solution contained in `S`. This is invariance for
/// the solution set through `S`; it is weaker than `F(S) = S` on
/// multivalued systems.
pub fn is_solution_invariant(ts: &TransitionSystem, s: &CellSet) -> bool {
    s.iter()
        .all(|c| ts.successors(c).iter().any(|&d| s.contains(d)) && ts.predecessors(c).iter().any(|&d| s.contains(d)))
}

/// Largest `S ⊆ N` with `F(S) = S` and no escape: repeatedly drop cells
/// that leave `N`, escape, or have no predecessor left.
pub fn max_invariant(ts: &TransitionSystem, n: &CellSet) -> CellSet {
    let mut s = n.intersection(ts.active());
    loop {
        let before = s.len();
        let drop: Vec<usize> = s
            .iter()
            .filter(|&c| {
                ts.escapes(c)
                    || ts.successors(c).iter().any(|&d| !s.contains(d))
                    || !ts.predecessors(c).iter().any(|&d| s.contains(d))
            })
            .collect();
        for c in drop {
            s.remove(c);
        }
        if s.len() == before {
            return s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::fixtures::{f1, g1};
    use proptest::prelude::*;

    #[test]
    fn omega_examples() {
        let f = f1();
        assert_eq!(omega_limit(&f, &f.set_of([2])).unwrap().to_vec(), vec![0]);
        assert_eq!(omega_limit(&f, &f.set_of([0])).unwrap().to_vec(), vec![0]);
        assert_eq!(omega_limit(&f, &f.set_of(0..6)).unwrap().to_vec(), vec![0, 3, 4]);
        assert_eq!(omega_limit(&f, &f.empty_set()), Err(LimitError::EmptyInput));
    }

    #[test]
    fn omega_of_e_in_g1_covers_the_whole_graph() {
        let g = g1();
        let w = omega_limit(&g, &g.set_of([3])).unwrap();
        assert_eq!(w.to_vec(), vec![0, 1, 2, 3]);
        assert!(invariance(&g, &w).invariant);
        assert_eq!(omega_intersection_form(&g, &g.set_of([3])).unwrap(), w);
    }

    #[test]
    fn alpha_examples() {
        let g = g1();
        assert_eq!(alpha_limit(&g, &g.set_of([1])).unwrap().to_vec(), vec![3]);
        assert_eq!(alpha_limit(&g, &g.set_of([0])).unwrap().to_vec(), vec![0, 3]);
        let f = f1();
        assert_eq!(alpha_limit(&f, &f.set_of([0])).unwrap().to_vec(), vec![0]);
    }

    #[test]
    fn invariance_examples() {
        let g = g1();
        let inv = |s: &[usize]| {
            let r = invariance(&g, &g.set_of(s.iter().copied()));
            (r.positively_invariant, r.negatively_invariant, r.invariant)
        };
        assert_eq!(inv(&[0]), (true, true, true));
        assert_eq!(inv(&[3]), (false, true, false));
        let f = f1();
        let r = invariance(&f, &f.set_of([0, 1]));
        assert_eq!(
            (r.positively_invariant, r.negatively_invariant, r.invariant),
            (true, false, false)
        );
    }

    #[test]
    fn max_invariant_examples() {
        let g = g1();
        assert_eq!(max_invariant(&g, &g.set_of([0, 1])).to_vec(), vec![0]);
        assert_eq!(max_invariant(&g, &g.set_of(0..4)).to_vec(), vec![0, 1, 2, 3]);
        assert!(max_invariant(&g, &g.set_of([1, 2, 3])).is_empty());
    }

    fn arb_digraph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1usize..30).prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n), 0..3 * n)))
    }

    proptest! {
        #[test]
        fn omega_forms_agree((n, edges) in arb_digraph(), seed in proptest::collection::vec(0usize..30, 1..4)) {
            let t = TransitionSystem::from_digraph_edges(n, &edges);
            let s = t.set_of(seed.into_iter().map(|c| c % n));
            let a = omega_limit(&t, &s).unwrap();
            prop_assert_eq!(&a, &omega_intersection_form(&t, &s).unwrap());
            // without escaping branches the limit set is invariant
            if t.reach(&s, Direction::Forward).iter().all(|c| !t.escapes(c)) {
                prop_assert!(invariance(&t, &a).invariant);
            }
        }

        #[test]
        fn deterministic_orbits_enter_omega(image in proptest::collection::vec(0usize..25, 1..25), x in 0usize..25) {
            let n = image.len();
            let image: Vec<usize> = image.into_iter().map(|t| t % n).collect();
            let t = TransitionSystem::from_map(&image);
            let x = x % n;
            let w = omega_limit(&t, &t.set_of([x])).unwrap();
            let mut c = x;
            let mut entered = w.contains(c);
            for _ in 0..n {
                c = image[c];
                entered |= w.contains(c);
            }
            prop_assert!(entered);
        }

        #[test]
        fn positive_invariance_is_closed_under_closure((n, edges) in arb_digraph(), seed in proptest::collection::vec(0usize..30, 0..6)) {
            // closure is the identity on a finite carrier
            let t = TransitionSystem::from_digraph_edges(n, &edges);
            let s = t.set_of(seed.into_iter().map(|c| c % n));
            let closure = s.clone();
            prop_assert_eq!(invariance(&t, &s).positively_invariant, invariance(&t, &closure).positively_invariant);
        }
    }
}
