//! Brute-force reference computations over raw successor lists. Nothing
//! here calls into the library beyond reading a system's edges.

#![allow(dead_code)]

use std::collections::BTreeSet;

use mfw::cellset::CellSet;
use mfw::transition::TransitionSystem;

pub type Set = BTreeSet<usize>;

pub fn set(cells: &[usize]) -> Set {
    cells.iter().copied().collect()
}

pub fn of(s: &CellSet) -> Set {
    s.iter().collect()
}

#[derive(Clone, Debug)]
pub struct Oracle {
    pub succ: Vec<Vec<usize>>,
    pub escape: Vec<bool>,
}

impl Oracle {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut succ = vec![Vec::new(); n];
        for &(u, v) in edges {
            if !succ[u].contains(&v) {
                succ[u].push(v);
            }
        }
        Oracle {
            succ,
            escape: vec![false; n],
        }
    }

    pub fn from_map(image: &[usize]) -> Self {
        let edges: Vec<(usize, usize)> = image.iter().copied().enumerate().collect();
        Self::from_edges(image.len(), &edges)
    }

    pub fn from_system(ts: &TransitionSystem) -> Self {
        let n = ts.n_cells();
        Oracle {
            succ: (0..n).map(|c| ts.successors(c).to_vec()).collect(),
            escape: (0..n).map(|c| ts.escape_flag(c)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.succ.len()
    }

    pub fn all(&self) -> Set {
        (0..self.n()).collect()
    }

    fn dead(&self, c: usize) -> bool {
        self.escape[c] || self.succ[c].is_empty()
    }

    pub fn image(&self, s: &Set) -> Set {
        s.iter().flat_map(|&c| self.succ[c].iter().copied()).collect()
    }

    pub fn preimage(&self, s: &Set) -> Set {
        (0..self.n())
            .filter(|&c| self.succ[c].iter().any(|d| s.contains(d)))
            .collect()
    }

    /// Endpoints of every walk of exactly `len` edges from `s`, by listing
    /// the walks one at a time. Exponential; fixtures only.
    pub fn walk_ends_enumerated(&self, s: &Set, len: usize) -> Set {
        fn go(o: &Oracle, c: usize, left: usize, out: &mut Set) {
            if left == 0 {
                out.insert(c);
                return;
            }
            for &d in &o.succ[c] {
                go(o, d, left - 1, out);
            }
        }
        let mut out = Set::new();
        for &c in s {
            go(self, c, len, &mut out);
        }
        out
    }

    /// Endpoints of walks of exactly `len` edges, by repeated images.
    pub fn walk_ends(&self, s: &Set, len: usize) -> Set {
        (0..len).fold(s.clone(), |acc, _| self.image(&acc))
    }

    /// Cells that are endpoints of arbitrarily long walks from `s`. A walk
    /// of length at least n repeats a cell and can be pumped, and every
    /// pumpable endpoint has such a walk of length below 2n.
    pub fn omega(&self, s: &Set, enumerate: bool) -> Set {
        let n = self.n();
        (n..=2 * n)
            .flat_map(|k| {
                if enumerate {
                    self.walk_ends_enumerated(s, k)
                } else {
                    self.walk_ends(s, k)
                }
            })
            .collect()
    }

    pub fn reach(&self, s: &Set) -> Set {
        (0..=self.n()).flat_map(|k| self.walk_ends(s, k)).collect()
    }

    pub fn reach_backward(&self, s: &Set) -> Set {
        (0..self.n())
            .filter(|&c| !self.reach(&set(&[c])).is_disjoint(s))
            .collect()
    }

    pub fn on_cycle(&self, c: usize) -> bool {
        (1..=self.n()).any(|k| self.walk_ends(&set(&[c]), k).contains(&c))
    }

    /// Cycle cells from which `s` is reachable.
    pub fn alpha(&self, s: &Set) -> Set {
        (0..self.n())
            .filter(|&c| self.on_cycle(c) && !self.reach(&set(&[c])).is_disjoint(s))
            .collect()
    }

    /// Least set containing `a` and every live cell all of whose
    /// successors are already in it.
    pub fn basin(&self, a: &Set) -> Set {
        let mut good = a.clone();
        loop {
            let grown: Set = (0..self.n())
                .filter(|&c| !good.contains(&c) && !self.dead(c) && self.succ[c].iter().all(|d| good.contains(d)))
                .collect();
            if grown.is_empty() {
                return good;
            }
            good.extend(grown);
        }
    }

    /// The system with every cell outside `keep` removed; cells that lose
    /// a successor become dead.
    pub fn restrict(&self, keep: &Set) -> Oracle {
        let mut out = self.clone();
        for c in 0..self.n() {
            if !keep.contains(&c) {
                out.succ[c].clear();
                out.escape[c] = true;
                continue;
            }
            let before = out.succ[c].len();
            out.succ[c].retain(|d| keep.contains(d));
            if out.succ[c].len() < before {
                out.escape[c] = true;
            }
        }
        out
    }

    pub fn forward_closed(&self, s: &Set) -> bool {
        s.iter()
            .all(|&c| !self.dead(c) && self.succ[c].iter().all(|d| s.contains(d)))
    }

    /// Every nonempty ω(N) over forward-closed N, by subset enumeration.
    pub fn attractors(&self) -> BTreeSet<Set> {
        let n = self.n();
        assert!(n <= 16);
        (1u32..(1 << n))
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect::<Set>())
            .filter(|s| self.forward_closed(s))
            .map(|s| self.omega(&s, false))
            .filter(|a| !a.is_empty())
            .collect()
    }

    pub fn dual_repeller(&self, global: &Set, a: &Set) -> Set {
        let inside = self.restrict(global);
        let b = inside.basin(a);
        global.difference(&b).copied().collect()
    }

    /// Cells of `global` reachable from `m` inside `global` that end a
    /// walk of length n inside `global`, hence an infinite backward one.
    pub fn unstable(&self, global: &Set, m: &Set) -> Set {
        let inside = self.restrict(global);
        let viable = inside.walk_ends(global, self.n());
        inside.reach(m).intersection(&viable).copied().collect()
    }

    /// Minimum walk length into `a`; `None` if no walk reaches it.
    pub fn hitting(&self, c: usize, a: &Set) -> Option<usize> {
        (0..=self.n()).find(|&k| !self.walk_ends(&set(&[c]), k).is_disjoint(a))
    }

    /// The orbit of `c` in a map until it first enters `a`.
    pub fn orbit_into(&self, c: usize, a: &Set) -> Vec<usize> {
        let mut orbit = vec![c];
        let mut x = c;
        while !a.contains(&x) {
            assert_eq!(self.succ[x].len(), 1, "orbit needs a map");
            x = self.succ[x][0];
            orbit.push(x);
            assert!(orbit.len() <= self.n() + 1, "orbit never enters the attractor");
        }
        orbit
    }

    /// `ξ(c) + Σ_k e^{−k} ξ(f^k c)` with `ξ` the max of `eta` over the
    /// remaining orbit.
    pub fn lyapunov_sum(&self, c: usize, a: &Set, eta: &dyn Fn(usize) -> f64) -> f64 {
        let xi = |x: usize| self.reach(&set(&[x])).into_iter().map(eta).fold(0.0, f64::max);
        let orbit = self.orbit_into(c, a);
        xi(c)
            + orbit
                .iter()
                .enumerate()
                .map(|(k, &x)| (-(k as f64)).exp() * xi(x))
                .sum::<f64>()
    }
}
