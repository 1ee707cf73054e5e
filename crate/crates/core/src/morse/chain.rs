//! Strategies for choosing the increasing chain of attractors behind a
//! Morse decomposition. Each strategy is a linear extension of the
//! reachability order on recurrent components, listed sinks before sources;
//! the k-th chain entry is the attractor of the first k components.

use std::fmt;

use crate::transition::CondensationGraph;

pub trait ChainStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Recurrent component ids of `cg` in chain order. Every component must
    /// come after all recurrent components it reaches.
    fn order(&self, cg: &CondensationGraph) -> Vec<usize>;
}

impl fmt::Debug for dyn ChainStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChainStrategy({})", self.name())
    }
}

/// Reverse topological order of the condensation.
pub struct SinksFirst;

impl ChainStrategy for SinksFirst {
    fn name(&self) -> &'static str {
        "sinks-first"
    }

    fn order(&self, cg: &CondensationGraph) -> Vec<usize> {
        cg.recurrent_sinks_first()
    }
}

/// Among the components whose successors are all placed, take the one with
/// the fewest cells (lowest id on ties).
pub struct SmallestFirst;

impl ChainStrategy for SmallestFirst {
    fn name(&self) -> &'static str {
        "smallest-first"
    }

    fn order(&self, cg: &CondensationGraph) -> Vec<usize> {
        let rec = cg.recurrent_ids();
        let below = recurrent_below(cg, &rec);
        let mut placed = vec![false; rec.len()];
        let mut out = Vec::with_capacity(rec.len());
        while out.len() < rec.len() {
            let next = (0..rec.len())
                .filter(|&k| !placed[k] && below[k].iter().all(|&j| j == k || placed[j]))
                .min_by_key(|&k| (cg.components[rec[k]].len(), rec[k]))
                .expect("reachability order is acyclic");
            placed[next] = true;
            out.push(rec[next]);
        }
        out
    }
}

/// For each position in `rec`, the positions of recurrent components it
/// reaches through the condensation DAG (itself included).
fn recurrent_below(cg: &CondensationGraph, rec: &[usize]) -> Vec<Vec<usize>> {
    let m = cg.n_components();
    let mut succ = vec![Vec::new(); m];
    for &(a, b) in &cg.dag_edges {
        succ[a].push(b);
    }
    rec.iter()
        .map(|&start| {
            let mut seen = vec![false; m];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(c) = stack.pop() {
                for &d in &succ[c] {
                    if !seen[d] {
                        seen[d] = true;
                        stack.push(d);
                    }
                }
            }
            (0..rec.len()).filter(|&k| seen[rec[k]]).collect()
        })
        .collect()
}

static STRATEGIES: &[&dyn ChainStrategy] = &[&SinksFirst, &SmallestFirst];

pub fn lookup(name: &str) -> Option<&'static dyn ChainStrategy> {
    STRATEGIES.iter().copied().find(|s| s.name() == name)
}

pub fn names() -> Vec<&'static str> {
    STRATEGIES.iter().map(|s| s.name()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::{condense, TransitionSystem};

    #[test]
    fn registry() {
        assert_eq!(names(), vec!["sinks-first", "smallest-first"]);
        assert_eq!(lookup("smallest-first").unwrap().name(), "smallest-first");
        assert!(lookup("largest-first").is_none());
    }

    #[test]
    fn smallest_first_respects_reachability() {
        // big sink {0,1}, small sink {2}, source {3} reaching both
        let t = TransitionSystem::from_digraph_edges(4, &[(0, 1), (1, 0), (2, 2), (3, 3), (3, 0), (3, 2)]);
        let cg = condense(&t);
        let order: Vec<Vec<usize>> = SmallestFirst
            .order(&cg)
            .into_iter()
            .map(|i| cg.components[i].to_vec())
            .collect();
        assert_eq!(order, vec![vec![2], vec![0, 1], vec![3]]);
        let sinks: Vec<Vec<usize>> = SinksFirst
            .order(&cg)
            .into_iter()
            .map(|i| cg.components[i].to_vec())
            .collect();
        assert_eq!(sinks.last().unwrap(), &vec![3]);
    }
}
