use serde::Serialize;

use super::TransitionSystem;
use crate::cellset::{CellId, CellSet};

/// Strongly connected components of the active cells. Component ids follow
/// the order in which Tarjan's algorithm closes them, so every DAG edge
/// goes from a higher id to a lower one.
#[derive(Debug, Clone)]
pub struct CondensationGraph {
    pub comp_of: Vec<Option<usize>>,
    pub components: Vec<CellSet>,
    pub recurrent: Vec<bool>,
    pub dag_edges: Vec<(usize, usize)>,
    /// Sources first.
    pub topo_order: Vec<usize>,
}

impl CondensationGraph {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn recurrent_ids(&self) -> Vec<usize> {
        (0..self.components.len()).filter(|&i| self.recurrent[i]).collect()
    }

    /// Recurrent component ids in reverse topological order (sinks first).
    pub fn recurrent_sinks_first(&self) -> Vec<usize> {
        self.topo_order
            .iter()
            .rev()
            .copied()
            .filter(|&i| self.recurrent[i])
            .collect()
    }

    pub fn union_of(&self, ids: &[usize]) -> CellSet {
        let n = self.comp_of.len();
        let mut s = CellSet::new(n);
        for &i in ids {
            s.union_with(&self.components[i]);
        }
        s
    }

    /// Component ids whose cells all lie in `s`, skipping components that
    /// merely touch it.
    pub fn components_within(&self, s: &CellSet) -> Vec<usize> {
        (0..self.components.len())
            .filter(|&i| self.components[i].is_subset(s))
            .collect()
    }

    pub fn successors_of(&self, comp: usize) -> impl Iterator<Item = usize> + '_ {
        self.dag_edges.iter().filter(move |e| e.0 == comp).map(|e| e.1)
    }
}

pub fn condense(ts: &TransitionSystem) -> CondensationGraph {
    let n = ts.n_cells();
    let active = ts.active();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<CellId> = Vec::new();
    let mut comp_of: Vec<Option<usize>> = vec![None; n];
    let mut components: Vec<CellSet> = Vec::new();
    let mut next_index = 0;
    // (cell, position in its successor list)
    let mut call: Vec<(CellId, usize)> = Vec::new();

    for root in active.iter() {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = ts.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if !active.contains(w) {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let id = components.len();
                let mut comp = CellSet::new(n);
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp_of[w] = Some(id);
                    comp.insert(w);
                    if w == v {
                        break;
                    }
                }
                components.push(comp);
            }
        }
    }

    let mut recurrent = vec![false; components.len()];
    let mut dag_edges = Vec::new();
    for u in active.iter() {
        let cu = comp_of[u].expect("active cell without component");
        for &v in ts.successors(u) {
            let Some(cv) = comp_of[v] else { continue };
            if cu == cv {
                recurrent[cu] = true;
            } else {
                dag_edges.push((cu, cv));
            }
        }
    }
    dag_edges.sort_unstable();
    dag_edges.dedup();
    let topo_order = (0..components.len()).rev().collect();

    CondensationGraph {
        comp_of,
        components,
        recurrent,
        dag_edges,
        topo_order,
    }
}

/// Disjoint node sets and the direct connections between them.
#[derive(Debug, Clone, Serialize)]
pub struct MorseGraph {
    pub nodes: Vec<CellSet>,
    pub edges: Vec<(usize, usize)>,
}

impl MorseGraph {
    /// Node `i` connects to node `j` when some path leaves `i` and enters `j`
    /// without passing through any node on the way.
    pub fn build(ts: &TransitionSystem, nodes: Vec<CellSet>) -> MorseGraph {
        let n = ts.n_cells();
        let mut owner: Vec<Option<usize>> = vec![None; n];
        for (i, s) in nodes.iter().enumerate() {
            for c in s {
                owner[c] = Some(i);
            }
        }
        let mut edges = Vec::new();
        for (i, s) in nodes.iter().enumerate() {
            let mut seen = CellSet::new(n);
            let mut stack: Vec<CellId> = Vec::new();
            let mut hit = vec![false; nodes.len()];
            for c in s {
                stack.extend(ts.successors(c).iter().copied());
            }
            while let Some(c) = stack.pop() {
                if !ts.active().contains(c) || !seen.insert(c) {
                    continue;
                }
                match owner[c] {
                    Some(j) if j == i => {}
                    Some(j) => hit[j] = true,
                    None => stack.extend(ts.successors(c).iter().copied()),
                }
            }
            edges.extend((0..nodes.len()).filter(|&j| hit[j]).map(|j| (i, j)));
        }
        MorseGraph { nodes, edges }
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{f1, g1};
    use super::super::Direction;
    use super::*;
    use proptest::prelude::*;

    fn comps_sorted(cg: &CondensationGraph) -> Vec<Vec<usize>> {
        let mut v: Vec<Vec<usize>> = cg.components.iter().map(|c| c.to_vec()).collect();
        v.sort();
        v
    }

    #[test]
    fn g1_components() {
        let cg = condense(&g1());
        assert_eq!(comps_sorted(&cg), vec![vec![0], vec![1], vec![2], vec![3]]);
        let rec: Vec<Vec<usize>> = cg.recurrent_ids().iter().map(|&i| cg.components[i].to_vec()).collect();
        assert_eq!(rec, vec![vec![0], vec![3]]);
        let order: Vec<usize> = cg
            .topo_order
            .iter()
            .map(|&i| cg.components[i].first().unwrap())
            .collect();
        assert_eq!(order, vec![3, 2, 1, 0]);
    }

    #[test]
    fn f1_recurrent() {
        let cg = condense(&f1());
        let mut rec: Vec<Vec<usize>> = cg.recurrent_ids().iter().map(|&i| cg.components[i].to_vec()).collect();
        rec.sort();
        assert_eq!(rec, vec![vec![0], vec![3, 4]]);
    }

    #[test]
    fn lone_cell() {
        let cg = condense(&TransitionSystem::from_digraph_edges(1, &[]));
        assert_eq!(cg.n_components(), 1);
        assert!(!cg.recurrent[0]);
    }

    #[test]
    fn g1_morse_graph() {
        let g = g1();
        let mg = MorseGraph::build(&g, vec![g.set_of([0]), g.set_of([3])]);
        assert_eq!(mg.edges, vec![(1, 0)]);
    }

    #[test]
    fn morse_graph_keeps_only_direct_links() {
        // 0 -> 1 -> 2 with all three as nodes: no 0 -> 2 edge
        let t = TransitionSystem::from_digraph_edges(3, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]);
        let mg = MorseGraph::build(&t, vec![t.set_of([0]), t.set_of([1]), t.set_of([2])]);
        assert_eq!(mg.edges, vec![(0, 1), (1, 2)]);
    }

    fn arb_digraph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1usize..40).prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n), 0..3 * n)))
    }

    proptest! {
        #[test]
        fn matches_pairwise_reachability((n, edges) in arb_digraph()) {
            let t = TransitionSystem::from_digraph_edges(n, &edges);
            let cg = condense(&t);
            let fwd: Vec<CellSet> = (0..n).map(|c| t.reach(&t.set_of([c]), Direction::Forward)).collect();
            for u in 0..n {
                for v in 0..n {
                    let same = fwd[u].contains(v) && fwd[v].contains(u);
                    prop_assert_eq!(same, cg.comp_of[u] == cg.comp_of[v]);
                }
            }
            for &(a, b) in &cg.dag_edges {
                prop_assert!(a > b);
            }
            for (i, comp) in cg.components.iter().enumerate() {
                let internal = comp.iter().any(|u| t.successors(u).iter().any(|&v| comp.contains(v)));
                prop_assert_eq!(internal, cg.recurrent[i]);
            }
        }
    }
}
