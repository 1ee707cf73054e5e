//! The combinatorial enclosure: cells, a multivalued successor relation and
//! an implicit escape sink.
//!
//! A cell *escapes* when it carries the escape flag or has no successors.
//! The sink itself is not a cell; it never appears in successor lists or in
//! any invariant-set computation.

mod build;
mod condense;
mod grid;

use serde::Serialize;

use crate::cellset::{CellId, CellSet};

pub use build::{build_transitions, BuildOptions, TransitionError, DEFAULT_CELL_CAP};
pub use condense::{condense, CondensationGraph, MorseGraph};
pub use grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    FromMap,
    FromDigraph,
    FromOde {
        tau: f64,
        bloat: f64,
        samples_per_axis: usize,
    },
    /// Restriction of another system to a subset of its cells.
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Compressed adjacency lists.
#[derive(Debug, Clone, Default)]
struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<CellId>,
}

impl Adjacency {
    fn from_lists(lists: &[Vec<CellId>]) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            targets.extend_from_slice(l);
            offsets.push(targets.len());
        }
        Adjacency { offsets, targets }
    }

    fn transpose(&self, n: usize) -> Self {
        let mut lists = vec![Vec::new(); n];
        for u in 0..n {
            for &v in self.of(u) {
                lists[v].push(u);
            }
        }
        Adjacency::from_lists(&lists)
    }

    #[inline]
    fn of(&self, c: CellId) -> &[CellId] {
        &self.targets[self.offsets[c]..self.offsets[c + 1]]
    }
}

#[derive(Debug, Clone)]
pub struct TransitionSystem {
    n_cells: usize,
    succ: Adjacency,
    pred: Adjacency,
    escape_flag: CellSet,
    active: CellSet,
    origin: Origin,
    labels: Option<Vec<String>>,
    grid: Option<Grid>,
}

impl TransitionSystem {
    /// Builds a system from per-cell successor lists (sorted and deduplicated
    /// here) and explicit escape flags.
    pub fn from_successors(lists: Vec<Vec<CellId>>, escape_flag: CellSet, origin: Origin) -> Self {
        let n = lists.len();
        assert_eq!(escape_flag.universe(), n);
        let lists: Vec<Vec<CellId>> = lists
            .into_iter()
            .map(|mut l| {
                assert!(l.iter().all(|&c| c < n), "successor out of range");
                l.sort_unstable();
                l.dedup();
                l
            })
            .collect();
        let succ = Adjacency::from_lists(&lists);
        let pred = succ.transpose(n);
        TransitionSystem {
            n_cells: n,
            succ,
            pred,
            escape_flag,
            active: CellSet::full(n),
            origin,
            labels: None,
            grid: None,
        }
    }

    pub fn from_digraph_edges(n: usize, edges: &[(CellId, CellId)]) -> Self {
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in edges {
            lists[u].push(v);
        }
        let escape = CellSet::from_cells(n, (0..n).filter(|&c| lists[c].is_empty()));
        Self::from_successors(lists, escape, Origin::FromDigraph)
    }

    pub fn from_map(image: &[CellId]) -> Self {
        let n = image.len();
        let lists = image.iter().map(|&t| vec![t]).collect();
        Self::from_successors(lists, CellSet::new(n), Origin::FromMap)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n_cells);
        self.labels = Some(labels);
        self
    }

    pub(crate) fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn label(&self, c: CellId) -> String {
        match &self.labels {
            Some(l) => l[c].clone(),
            None => c.to_string(),
        }
    }

    /// Cells taking part in the dynamics (all cells unless restricted).
    pub fn active(&self) -> &CellSet {
        &self.active
    }

    pub fn empty_set(&self) -> CellSet {
        CellSet::new(self.n_cells)
    }

    pub fn set_of<I: IntoIterator<Item = CellId>>(&self, cells: I) -> CellSet {
        CellSet::from_cells(self.n_cells, cells)
    }

    #[inline]
    pub fn successors(&self, c: CellId) -> &[CellId] {
        self.succ.of(c)
    }

    #[inline]
    pub fn predecessors(&self, c: CellId) -> &[CellId] {
        self.pred.of(c)
    }

    pub fn escape_flag(&self, c: CellId) -> bool {
        self.escape_flag.contains(c)
    }

    /// Whether some orbit branch from `c` reaches the escape sink in one step.
    #[inline]
    pub fn escapes(&self, c: CellId) -> bool {
        self.escape_flag.contains(c) || self.succ.of(c).is_empty()
    }

    pub fn escaping_cells(&self) -> CellSet {
        self.set_of(self.active.iter().filter(|&c| self.escapes(c)))
    }

    pub fn edge_count(&self) -> usize {
        self.active.iter().map(|c| self.successors(c).len()).sum()
    }

    /// Every active cell has exactly one successor and none escapes.
    pub fn is_deterministic(&self) -> bool {
        self.active
            .iter()
            .all(|c| self.successors(c).len() == 1 && !self.escape_flag(c))
    }

    /// Forward image `F(S)`; escaping branches contribute nothing.
    pub fn image(&self, s: &CellSet) -> CellSet {
        let mut out = self.empty_set();
        for c in s {
            for &d in self.successors(c) {
                out.insert(d);
            }
        }
        out
    }

    pub fn preimage(&self, s: &CellSet) -> CellSet {
        let mut out = self.empty_set();
        for c in s {
            for &d in self.predecessors(c) {
                out.insert(d);
            }
        }
        out
    }

    /// `F(S) ⊆ S` and no cell of `S` escapes.
    pub fn is_forward_closed(&self, s: &CellSet) -> bool {
        s.iter()
            .all(|c| !self.escapes(c) && self.successors(c).iter().all(|&d| s.contains(d)))
    }

    /// All cells reachable from (forward) or reaching (backward) `s`,
    /// including `s` itself.
    pub fn reach(&self, s: &CellSet, dir: Direction) -> CellSet {
        self.reach_within(s, dir, &self.active)
    }

    /// Like [`reach`](Self::reach) but only walking through cells of `within`.
    pub fn reach_within(&self, s: &CellSet, dir: Direction, within: &CellSet) -> CellSet {
        let mut seen = s.intersection(within);
        let mut stack: Vec<CellId> = seen.to_vec();
        while let Some(c) = stack.pop() {
            let next = match dir {
                Direction::Forward => self.successors(c),
                Direction::Backward => self.predecessors(c),
            };
            for &d in next {
                if within.contains(d) && seen.insert(d) {
                    stack.push(d);
                }
            }
        }
        seen
    }

    /// The subsystem on `keep`. Successors outside `keep` are dropped and
    /// the cells that lose them are flagged as escaping, so the restriction
    /// of a forward-closed set has no new escapes.
    pub fn restrict(&self, keep: &CellSet) -> TransitionSystem {
        let keep = keep.intersection(&self.active);
        let mut escape = self.empty_set();
        let lists: Vec<Vec<CellId>> = (0..self.n_cells)
            .map(|c| {
                if !keep.contains(c) {
                    return Vec::new();
                }
                let all = self.successors(c);
                let kept: Vec<CellId> = all.iter().copied().filter(|&d| keep.contains(d)).collect();
                if self.escape_flag(c) || kept.len() < all.len() || kept.is_empty() {
                    escape.insert(c);
                }
                kept
            })
            .collect();
        let mut sub = TransitionSystem::from_successors(lists, escape, Origin::Restricted);
        sub.active = keep;
        sub.labels = self.labels.clone();
        sub.grid = self.grid.clone();
        sub
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// a→a; b→a; d→b; e→e, e→d with cells indexed a=0, b=1, d=2, e=3.
    pub fn g1() -> TransitionSystem {
        TransitionSystem::from_digraph_edges(4, &[(0, 0), (1, 0), (2, 1), (3, 3), (3, 2)]).with_labels(vec![
            "a".into(),
            "b".into(),
            "d".into(),
            "e".into(),
        ])
    }

    /// 0→0, 1→0, 2→1, 3→4, 4→3, 5→3.
    pub fn f1() -> TransitionSystem {
        TransitionSystem::from_map(&[0, 0, 1, 4, 3, 3])
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn digraph_copy_is_faithful() {
        let g = g1();
        assert_eq!(g.successors(0), &[0]);
        assert_eq!(g.successors(1), &[0]);
        assert_eq!(g.successors(2), &[1]);
        assert_eq!(g.successors(3), &[2, 3]);
        assert!(g.escaping_cells().is_empty());
        assert!(!g.is_deterministic());
        assert!(f1().is_deterministic());
    }

    #[test]
    fn reach_examples() {
        let g = g1();
        let e = g.set_of([3]);
        assert_eq!(g.reach(&e, Direction::Forward).to_vec(), vec![0, 1, 2, 3]);
        let a = g.set_of([0]);
        assert_eq!(g.reach(&a, Direction::Backward).to_vec(), vec![0, 1, 2, 3]);
        assert!(g.reach(&g.empty_set(), Direction::Forward).is_empty());
    }

    #[test]
    fn restriction_flags_lost_branches() {
        let g = g1();
        let sub = g.restrict(&g.set_of([0, 3]));
        assert_eq!(sub.successors(3), &[3]);
        assert!(sub.escape_flag(3));
        assert!(!sub.escape_flag(0));
        assert!(!sub.active().contains(1));
    }

    #[test]
    fn dead_ends_escape() {
        let t = TransitionSystem::from_digraph_edges(2, &[(0, 1)]);
        assert!(t.escapes(1));
        assert!(!t.escapes(0));
    }

    fn arb_digraph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1usize..30).prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n), 0..3 * n)))
    }

    proptest! {
        #[test]
        fn reach_is_idempotent((n, edges) in arb_digraph(), seed in proptest::collection::vec(0usize..30, 0..4)) {
            let t = TransitionSystem::from_digraph_edges(n, &edges);
            let s = t.set_of(seed.into_iter().filter(|&c| c < n));
            for dir in [Direction::Forward, Direction::Backward] {
                let r = t.reach(&s, dir);
                prop_assert!(s.is_subset(&r));
                prop_assert_eq!(t.reach(&r, dir), r);
            }
        }

        #[test]
        fn maps_are_functional(image in proptest::collection::vec(0usize..20, 1..20)) {
            let n = image.len();
            let image: Vec<usize> = image.into_iter().map(|t| t % n).collect();
            let t = TransitionSystem::from_map(&image);
            prop_assert!((0..n).all(|c| t.successors(c).len() == 1));
        }
    }
}
