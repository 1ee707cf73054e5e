use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use super::{DecreaseReport, DecreaseViolation, LyapunovError, LyapunovField, LyapunovRow};
use crate::cellset::{CellId, CellSet};
use crate::dynsys::{Interval, OdeSystem};
use crate::transition::{Grid, TransitionSystem};

/// A nonnegative function of phase-space points vanishing exactly on the
/// attractor.
pub trait K0Function: Send + Sync {
    fn name(&self) -> &'static str;
    fn value(&self, x: &[f64]) -> f64;
}

/// Euclidean distance to the union of a set of grid cells.
#[derive(Debug, Clone)]
pub struct CellUnionDistance {
    grid: Grid,
    cells: CellSet,
    /// Boxes of cells with a face neighbor outside the set.
    rim: Vec<Vec<Interval>>,
}

impl CellUnionDistance {
    pub fn new(grid: &Grid, cells: &CellSet) -> Result<Self, LyapunovError> {
        if cells.is_empty() {
            return Err(LyapunovError::EmptyAttractor);
        }
        let per = grid.per_axis();
        let rim = cells
            .iter()
            .filter(|&c| {
                let m = grid.multi_index(c);
                (0..grid.dim()).any(|a| {
                    let mut lower = m.clone();
                    let mut upper = m.clone();
                    let open_low = m[a] == 0 || {
                        lower[a] -= 1;
                        !cells.contains(grid.index(&lower))
                    };
                    let open_high = m[a] + 1 == per || {
                        upper[a] += 1;
                        !cells.contains(grid.index(&upper))
                    };
                    open_low || open_high
                })
            })
            .map(|c| grid.cell_box(c))
            .collect();
        Ok(CellUnionDistance {
            grid: grid.clone(),
            cells: cells.clone(),
            rim,
        })
    }
}

fn box_distance(bx: &[Interval], x: &[f64]) -> f64 {
    bx.iter()
        .zip(x)
        .map(|(iv, &v)| {
            let d = (iv.lo - v).max(v - iv.hi).max(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

impl K0Function for CellUnionDistance {
    fn name(&self) -> &'static str {
        "cell-union-distance"
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.grid.locate(x).is_some_and(|c| self.cells.contains(c)) {
            return 0.0;
        }
        self.rim
            .iter()
            .map(|b| box_distance(b, x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `η = ζ + ψ` with the bump `ψ = d_A / (d_A + d_K)`, which is 0 on `A`
/// and 1 on `K`.
pub struct Separated {
    zeta: CellUnionDistance,
    k: Option<CellUnionDistance>,
}

impl Separated {
    pub fn new(grid: &Grid, attractor: &CellSet, k: &CellSet) -> Result<Self, LyapunovError> {
        if let Some(cell) = attractor.intersection(k).first() {
            return Err(LyapunovError::Overlap { cell });
        }
        let zeta = CellUnionDistance::new(grid, attractor)?;
        let k = if k.is_empty() {
            None
        } else {
            Some(CellUnionDistance::new(grid, k)?)
        };
        Ok(Separated { zeta, k })
    }
}

impl K0Function for Separated {
    fn name(&self) -> &'static str {
        "separated"
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d_a = self.zeta.value(x);
        let psi = match &self.k {
            Some(k) if d_a > 0.0 => d_a / (d_a + k.value(x)),
            _ => 0.0,
        };
        d_a + psi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeLyapunovOptions {
    /// Window for the supremum defining `ξ`.
    pub horizon: f64,
    /// Upper limit of the truncated integral.
    pub tmax: f64,
    /// Trapezoid step; the integrator step when `None`.
    pub quad: Option<f64>,
    /// A trajectory has reached the attractor once `ζ ≤ entry_tol`.
    pub entry_tol: f64,
}

impl Default for OdeLyapunovOptions {
    fn default() -> Self {
        OdeLyapunovOptions {
            horizon: 20.0,
            tmax: 20.0,
            quad: None,
            entry_tol: 0.0,
        }
    }
}

/// `ζ`, `ξ` and `L` at successive integrator steps of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSample {
    pub t: f64,
    pub point: Vec<f64>,
    pub zeta: f64,
    pub xi: f64,
    pub l: f64,
}

pub struct OdeLyapunov<'a> {
    ode: &'a OdeSystem,
    k0: &'a dyn K0Function,
    opts: OdeLyapunovOptions,
}

fn steps(t: f64, dt: f64) -> usize {
    (t / dt).round().max(0.0) as usize
}

impl<'a> OdeLyapunov<'a> {
    pub fn new(ode: &'a OdeSystem, k0: &'a dyn K0Function, opts: OdeLyapunovOptions) -> Self {
        OdeLyapunov { ode, k0, opts }
    }

    pub fn options(&self) -> &OdeLyapunovOptions {
        &self.opts
    }

    pub fn zeta(&self, x: &[f64]) -> f64 {
        self.k0.value(x)
    }

    /// Evaluates the orbit of `x` at the integrator steps `0, every, 2·every,
    /// …` up to `t_obs`. All values come from one trajectory; each matches a
    /// fresh evaluation started at the sampled point.
    pub fn along(&self, x: &[f64], t_obs: f64, every: usize) -> Result<Vec<OrbitSample>, LyapunovError> {
        let dt = self.ode.dt();
        let h = steps(self.opts.horizon, dt);
        let q = self.opts.quad.map_or(1, |quad| steps(quad, dt).max(1));
        let m = steps(self.opts.tmax, dt) / q;
        let obs = steps(t_obs, dt);
        let total = obs + m * q + h;

        if x.len() != self.ode.dim() || !self.ode.in_domain(x) {
            return Err(LyapunovError::NotInBasin);
        }
        let mut points = vec![x.to_vec()];
        let mut zeta = vec![self.k0.value(x)];
        if self
            .ode
            .walk(x, total as u64, |_, s| {
                if points.len() <= obs {
                    points.push(s.to_vec());
                }
                zeta.push(self.k0.value(s));
                true
            })
            .is_some()
        {
            return Err(LyapunovError::NotInBasin);
        }

        // every window [j, j + h] used below must reach the attractor
        let mut next_entry = vec![usize::MAX; zeta.len()];
        let mut seen = usize::MAX;
        for j in (0..zeta.len()).rev() {
            if zeta[j] <= self.opts.entry_tol {
                seen = j;
            }
            next_entry[j] = seen;
        }
        let n_xi = obs + m * q + 1;
        if (0..n_xi).any(|j| next_entry[j] > j + h) {
            return Err(LyapunovError::HorizonTooShort {
                horizon: self.opts.horizon,
            });
        }

        let xi = window_max(&zeta, h, n_xi);
        let quad = q as f64 * dt;
        let weights: Vec<f64> = (0..=m)
            .map(|k| {
                let w = if k == 0 || k == m { 0.5 * quad } else { quad };
                w * (-(k as f64) * quad).exp()
            })
            .collect();

        Ok((0..=obs)
            .step_by(every.max(1))
            .map(|i| {
                let integral: f64 = weights.iter().enumerate().map(|(k, w)| w * xi[i + k * q]).sum();
                OrbitSample {
                    t: i as f64 * dt,
                    point: points[i].clone(),
                    zeta: zeta[i],
                    xi: xi[i],
                    l: xi[i] + integral,
                }
            })
            .collect())
    }

    /// `(ζ(x), ξ(x), L(x))`.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, f64, f64), LyapunovError> {
        let s = self.along(x, 0.0, 1)?.remove(0);
        Ok((s.zeta, s.xi, s.l))
    }

    pub fn xi(&self, x: &[f64]) -> Result<f64, LyapunovError> {
        self.evaluate(x).map(|v| v.1)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, LyapunovError> {
        self.evaluate(x).map(|v| v.2)
    }

    /// Values at the centers of the scope cells of a grid system.
    pub fn field(&self, ts: &TransitionSystem, scope: &CellSet) -> Result<LyapunovField, LyapunovError> {
        let grid = ts.grid().ok_or(LyapunovError::MissingGrid)?;
        let cells: Vec<CellId> = scope.to_vec();
        let results: Vec<_> = cells
            .par_iter()
            .map(|&c| {
                let p = grid.center(c);
                let r = self.evaluate(&p);
                (c, p, r)
            })
            .collect();
        let mut out = LyapunovField::default();
        for (cell, center, r) in results {
            match r {
                Ok((zeta, xi, l)) => out.rows.push(LyapunovRow {
                    cell,
                    center: Some(center),
                    zeta,
                    xi,
                    l,
                }),
                Err(e) => out.errors.push((cell, e)),
            }
        }
        Ok(out)
    }

    /// Along each trajectory, consecutive samples (every `every` integrator
    /// steps up to `t_obs`) must satisfy `L(next) < L(cur) + tol`. Pairs
    /// starting inside the band `ζ < zeta_tol` are exempt.
    pub fn verify_decrease(
        &self,
        starts: &[Vec<f64>],
        t_obs: f64,
        every: usize,
        tol: f64,
        zeta_tol: f64,
    ) -> Result<DecreaseReport, LyapunovError> {
        let orbits = starts
            .par_iter()
            .map(|x| self.along(x, t_obs, every))
            .collect::<Result<Vec<_>, _>>()?;
        let mut report = DecreaseReport::default();
        for (source, orbit) in orbits.iter().enumerate() {
            for w in orbit.windows(2) {
                if w[0].zeta < zeta_tol {
                    report.exempt += 1;
                    continue;
                }
                report.checked += 1;
                if w[1].l >= w[0].l + tol {
                    report.violations.push(DecreaseViolation {
                        source,
                        t: w[1].t,
                        before: w[0].l,
                        after: w[1].l,
                    });
                }
            }
        }
        Ok(report)
    }
}

/// `out[j] = max(v[j..=j + h])` for `j < count`.
fn window_max(v: &[f64], h: usize, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut end = 0;
    for j in 0..count {
        while end <= j + h {
            while dq.back().is_some_and(|&b| v[b] <= v[end]) {
                dq.pop_back();
            }
            dq.push_back(end);
            end += 1;
        }
        while dq.front().is_some_and(|&f| f < j) {
            dq.pop_front();
        }
        out.push(v[*dq.front().expect("window is nonempty")]);
    }
    out
}
