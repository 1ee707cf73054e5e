use super::{DecreaseReport, DecreaseViolation, LyapunovError, LyapunovField, LyapunovRow};
use crate::attractors::basin;
use crate::cellset::{CellId, CellSet};
use crate::transition::{condense, TransitionSystem};

/// Lyapunov data on the cells of a transition system.
#[derive(Debug, Clone)]
pub struct FiniteLyapunov<'a> {
    ts: &'a TransitionSystem,
    attractor: CellSet,
    basin: CellSet,
    zeta: Vec<f64>,
    xi: Vec<f64>,
}

/// Minimal number of steps from each cell into `target`; `None` when no
/// path gets there.
pub fn hitting_distance(ts: &TransitionSystem, target: &CellSet) -> Vec<Option<usize>> {
    let mut dist = vec![None; ts.n_cells()];
    let mut frontier: Vec<CellId> = target.intersection(ts.active()).to_vec();
    for &c in &frontier {
        dist[c] = Some(0);
    }
    let mut d = 0;
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for &c in &frontier {
            for &p in ts.predecessors(c) {
                if dist[p].is_none() && ts.active().contains(p) {
                    dist[p] = Some(d);
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// Max of `values` over the forward reach of each cell.
fn forward_max(ts: &TransitionSystem, values: &[f64]) -> Vec<f64> {
    let cg = condense(ts);
    let mut comp_max = vec![0.0f64; cg.n_components()];
    // component ids increase against the edge direction, so successors
    // are finished first
    for (id, comp) in cg.components.iter().enumerate() {
        let mut m = comp.iter().map(|c| values[c]).fold(0.0, f64::max);
        for c in comp {
            for &d in ts.successors(c) {
                if let Some(j) = cg.comp_of[d] {
                    if j != id {
                        m = m.max(comp_max[j]);
                    }
                }
            }
        }
        comp_max[id] = m;
    }
    (0..ts.n_cells())
        .map(|c| cg.comp_of[c].map_or(0.0, |i| comp_max[i]))
        .collect()
}

impl<'a> FiniteLyapunov<'a> {
    /// `ζ` = forward hitting distance to `A`, `n + 1` off the basin.
    pub fn new(ts: &'a TransitionSystem, attractor: &CellSet) -> Result<Self, LyapunovError> {
        let (basin, zeta) = Self::base(ts, attractor)?;
        Ok(Self::with_zeta(ts, attractor.clone(), basin, zeta))
    }

    /// The same construction from `η = ζ + ψ`, where `ψ = d_A / (d_A + d_K)`
    /// in hitting distances is 0 on `A` and 1 on `K`.
    pub fn separating(ts: &'a TransitionSystem, attractor: &CellSet, k: &CellSet) -> Result<Self, LyapunovError> {
        if let Some(cell) = attractor.intersection(k).first() {
            return Err(LyapunovError::Overlap { cell });
        }
        let (basin, zeta) = Self::base(ts, attractor)?;
        let d_a = hitting_distance(ts, attractor);
        let d_k = hitting_distance(ts, k);
        let eta = (0..ts.n_cells())
            .map(|c| {
                let psi = match (d_a[c], d_k[c]) {
                    (_, None) => 0.0,
                    (None, Some(_)) => 1.0,
                    (Some(a), Some(k)) => a as f64 / (a + k) as f64,
                };
                zeta[c] + psi
            })
            .collect();
        Ok(Self::with_zeta(ts, attractor.clone(), basin, eta))
    }

    fn base(ts: &TransitionSystem, attractor: &CellSet) -> Result<(CellSet, Vec<f64>), LyapunovError> {
        if attractor.is_empty() {
            return Err(LyapunovError::EmptyAttractor);
        }
        let basin = basin(ts, attractor).map_err(|_| LyapunovError::NotInBasin)?;
        let cap = (ts.n_cells() + 1) as f64;
        let zeta = hitting_distance(ts, attractor)
            .into_iter()
            .enumerate()
            .map(|(c, d)| match d {
                Some(d) if basin.contains(c) => d as f64,
                _ => cap,
            })
            .collect();
        Ok((basin, zeta))
    }

    fn with_zeta(ts: &'a TransitionSystem, attractor: CellSet, basin: CellSet, zeta: Vec<f64>) -> Self {
        let xi = forward_max(ts, &zeta);
        FiniteLyapunov {
            ts,
            attractor,
            basin,
            zeta,
            xi,
        }
    }

    pub fn attractor(&self) -> &CellSet {
        &self.attractor
    }

    pub fn basin(&self) -> &CellSet {
        &self.basin
    }

    pub fn zeta(&self, c: CellId) -> f64 {
        self.zeta[c]
    }

    /// Max of `ζ` over everything reachable from `c`; nonincreasing along
    /// every edge.
    pub fn xi(&self, c: CellId) -> f64 {
        self.xi[c]
    }

    /// The orbit of `c` up to and including its first cell in `A`.
    fn orbit(&self, c: CellId) -> Result<Vec<CellId>, LyapunovError> {
        if !self.basin.contains(c) {
            return Err(LyapunovError::NotInBasin);
        }
        let mut orbit = vec![c];
        let mut x = c;
        while !self.attractor.contains(x) {
            let succ = self.ts.successors(x);
            if succ.len() != 1 || self.ts.escape_flag(x) {
                return Err(LyapunovError::NotDeterministic { cell: x });
            }
            x = succ[0];
            orbit.push(x);
        }
        Ok(orbit)
    }

    /// `L(c) = ξ(c) + Σ_{k=0}^{K} e^{−k} ξ(f^k c)` with `K` the entry step
    /// into `A`. Needs a single successor along the orbit.
    pub fn value(&self, c: CellId) -> Result<f64, LyapunovError> {
        let orbit = self.orbit(c)?;
        let tail: f64 = orbit
            .iter()
            .enumerate()
            .map(|(k, &x)| (-(k as f64)).exp() * self.xi[x])
            .sum();
        Ok(self.xi[c] + tail)
    }

    pub fn field(&self, scope: &CellSet) -> LyapunovField {
        let mut out = LyapunovField::default();
        for c in scope {
            match self.value(c) {
                Ok(l) => out.rows.push(LyapunovRow {
                    cell: c,
                    center: None,
                    zeta: self.zeta[c],
                    xi: self.xi[c],
                    l,
                }),
                Err(e) => out.errors.push((c, e)),
            }
        }
        out
    }

    /// Deterministic systems: `L(f(x)) < L(x)` for every basin cell off
    /// `A`. Multivalued systems: `ξ` does not increase along any edge
    /// leaving a basin cell off `A`.
    pub fn verify_decrease(&self) -> DecreaseReport {
        let mut report = DecreaseReport::default();
        let deterministic = self.ts.is_deterministic();
        for c in self.basin.difference(&self.attractor).iter() {
            for &d in self.ts.successors(c) {
                report.checked += 1;
                let (before, after, ok) = if deterministic {
                    let (b, a) = (self.value(c), self.value(d));
                    match (b, a) {
                        (Ok(b), Ok(a)) => (b, a, a < b),
                        _ => (f64::NAN, f64::NAN, false),
                    }
                } else {
                    (self.xi[c], self.xi[d], self.xi[d] <= self.xi[c])
                };
                if !ok {
                    report.violations.push(DecreaseViolation {
                        source: c,
                        t: 1.0,
                        before,
                        after,
                    });
                }
            }
        }
        report.exempt = self.attractor.len();
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::fixtures::{f1, g1};

    const E1: f64 = 0.36787944117144233;

    #[test]
    fn f1_closed_forms() {
        let f = f1();
        let a = f.set_of([0, 3, 4]);
        let ly = FiniteLyapunov::new(&f, &a).unwrap();
        let zeta: Vec<f64> = (0..6).map(|c| ly.zeta(c)).collect();
        assert_eq!(zeta, vec![0.0, 1.0, 2.0, 0.0, 0.0, 1.0]);
        assert_eq!(ly.xi(2), 2.0);
        let l: Vec<f64> = (0..6).map(|c| ly.value(c).unwrap()).collect();
        let want = [0.0, 2.0, 4.0 + E1, 0.0, 0.0, 2.0];
        for (got, want) in l.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(ly.verify_decrease().passed());
        assert_eq!(ly.field(&f.set_of(0..6)).rows.len(), 6);
    }

    #[test]
    fn scope_inside_attractor_is_zero() {
        let f = f1();
        let a = f.set_of([0, 3, 4]);
        let ly = FiniteLyapunov::new(&f, &a).unwrap();
        assert!(ly.field(&a).rows.iter().all(|r| r.l == 0.0 && r.zeta == 0.0));
    }

    #[test]
    fn separating_variant() {
        let f = f1();
        let a = f.set_of([0, 3, 4]);
        let ly = FiniteLyapunov::separating(&f, &a, &f.set_of([2])).unwrap();
        assert_eq!(ly.zeta(2), 3.0);
        let l2 = ly.value(2).unwrap();
        assert!((l2 - (6.0 + E1)).abs() < 1e-12);
        assert!(l2 >= 1.0);
        assert_eq!(ly.value(0).unwrap(), 0.0);
        assert_eq!(
            FiniteLyapunov::separating(&f, &a, &f.set_of([0])).unwrap_err(),
            LyapunovError::Overlap { cell: 0 }
        );
        let plain = FiniteLyapunov::new(&f, &a).unwrap();
        let empty = FiniteLyapunov::separating(&f, &a, &f.empty_set()).unwrap();
        assert!((0..6).all(|c| plain.value(c) == empty.value(c)));
    }

    #[test]
    fn multivalued_systems_get_envelopes_only() {
        let g = g1();
        let ly = FiniteLyapunov::new(&g, &g.set_of([0])).unwrap();
        assert_eq!(ly.zeta(3), 5.0);
        assert_eq!(ly.xi(1), 1.0);
        assert_eq!(ly.xi(2), 2.0);
        assert!(ly.value(2).is_ok());
        assert_eq!(ly.value(3), Err(LyapunovError::NotInBasin));
        assert!(ly.verify_decrease().passed());
        assert_eq!(
            FiniteLyapunov::new(&g, &g.empty_set()).unwrap_err(),
            LyapunovError::EmptyAttractor
        );
    }
}
