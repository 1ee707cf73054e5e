use rayon::prelude::*;
use thiserror::Error;

use super::{Grid, Origin, TransitionSystem};
use crate::cellset::CellSet;
use crate::dynsys::{time_tau_map, DynError, EvolveResult, Interval, SystemSpec};

pub const DEFAULT_CELL_CAP: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransitionError {
    #[error("grid of depth {depth} in dimension {dim} exceeds the cell cap {cap}")]
    GridTooLarge { depth: u32, dim: usize, cap: usize },
    #[error("ode systems need a grid depth")]
    MissingGrid,
    #[error("ode systems need a time step tau")]
    MissingTau,
    #[error("grid box has {got} axes, system dimension is {dim}")]
    GridDimension { got: usize, dim: usize },
    #[error("bloat must be finite and nonnegative, got {0}")]
    Bloat(f64),
    #[error("samples_per_axis must be at least 2, got {0}")]
    Samples(usize),
    #[error(transparent)]
    Dyn(#[from] DynError),
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Per-axis subdivision exponent.
    pub depth: Option<u32>,
    /// Grid box; defaults to the system domain.
    pub grid_box: Option<Vec<Interval>>,
    pub tau: Option<f64>,
    /// Enclosure inflation in cell widths per side.
    pub bloat: f64,
    pub samples_per_axis: usize,
    pub cell_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            depth: None,
            grid_box: None,
            tau: None,
            bloat: 1.0,
            samples_per_axis: 3,
            cell_cap: DEFAULT_CELL_CAP,
        }
    }
}

impl BuildOptions {
    pub fn ode(depth: u32, tau: f64) -> Self {
        BuildOptions {
            depth: Some(depth),
            tau: Some(tau),
            ..Default::default()
        }
    }
}

pub fn build_transitions(spec: &SystemSpec, opts: &BuildOptions) -> Result<TransitionSystem, TransitionError> {
    match spec {
        SystemSpec::FiniteMap(m) => Ok(TransitionSystem::from_map(m.image()).with_labels(m.states().to_vec())),
        SystemSpec::Digraph(g) => {
            Ok(TransitionSystem::from_digraph_edges(g.cells().len(), g.edges()).with_labels(g.cells().to_vec()))
        }
        SystemSpec::Ode(ode) => {
            let depth = opts.depth.ok_or(TransitionError::MissingGrid)?;
            let tau = opts.tau.ok_or(TransitionError::MissingTau)?;
            if !(opts.bloat.is_finite() && opts.bloat >= 0.0) {
                return Err(TransitionError::Bloat(opts.bloat));
            }
            if opts.samples_per_axis < 2 {
                return Err(TransitionError::Samples(opts.samples_per_axis));
            }
            let bounds = opts.grid_box.clone().unwrap_or_else(|| ode.domain().to_vec());
            if bounds.len() != ode.dim() {
                return Err(TransitionError::GridDimension {
                    got: bounds.len(),
                    dim: ode.dim(),
                });
            }
            let too_large = TransitionError::GridTooLarge {
                depth,
                dim: ode.dim(),
                cap: opts.cell_cap,
            };
            let grid = Grid::new(bounds, depth).ok_or_else(|| too_large.clone())?;
            if grid.n_cells() > opts.cell_cap {
                return Err(too_large);
            }
            let phi = time_tau_map(ode, tau)?;
            let dim = grid.dim();
            let pad: Vec<f64> = (0..dim).map(|a| opts.bloat * grid.width(a)).collect();

            let per_cell: Vec<(Vec<usize>, bool)> = (0..grid.n_cells())
                .into_par_iter()
                .map(|c| -> Result<_, DynError> {
                    let mut lo = vec![f64::INFINITY; dim];
                    let mut hi = vec![f64::NEG_INFINITY; dim];
                    let mut escaped = false;
                    for p in grid.sample_points(c, opts.samples_per_axis) {
                        match phi.apply(&p)? {
                            EvolveResult::At(y) if grid.contains(&y) => {
                                for a in 0..dim {
                                    lo[a] = lo[a].min(y[a]);
                                    hi[a] = hi[a].max(y[a]);
                                }
                            }
                            _ => escaped = true,
                        }
                    }
                    if lo[0] > hi[0] {
                        return Ok((Vec::new(), true));
                    }
                    for a in 0..dim {
                        lo[a] -= pad[a];
                        hi[a] += pad[a];
                    }
                    Ok((grid.cells_meeting(&lo, &hi), escaped))
                })
                .collect::<Result<_, _>>()?;

            let n = grid.n_cells();
            let mut escape = CellSet::new(n);
            let mut lists = Vec::with_capacity(n);
            for (c, (succ, esc)) in per_cell.into_iter().enumerate() {
                if esc {
                    escape.insert(c);
                }
                lists.push(succ);
            }
            let origin = Origin::FromOde {
                tau,
                bloat: opts.bloat,
                samples_per_axis: opts.samples_per_axis,
            };
            Ok(TransitionSystem::from_successors(lists, escape, origin).with_grid(grid))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::OdeSystem;

    fn o1() -> SystemSpec {
        SystemSpec::Ode(OdeSystem::new(&["x - x^3"], vec![Interval::new(-2.0, 2.0)], "rk4", 1e-3).unwrap())
    }

    #[test]
    fn bistable_box_has_no_escape() {
        let ts = build_transitions(&o1(), &BuildOptions::ode(7, 0.5)).unwrap();
        assert_eq!(ts.n_cells(), 128);
        assert!(ts.escaping_cells().is_empty());
    }

    #[test]
    fn blow_up_cells_are_flagged() {
        let spec = SystemSpec::Ode(OdeSystem::new(&["x^2"], vec![Interval::new(-1e7, 1e7)], "rk4", 1e-3).unwrap());
        let opts = BuildOptions {
            grid_box: Some(vec![Interval::new(-1.0, 3.0)]),
            ..BuildOptions::ode(7, 0.5)
        };
        let ts = build_transitions(&spec, &opts).unwrap();
        let grid = ts.grid().unwrap();
        for c in 0..ts.n_cells() {
            if grid.center(c)[0] > 1.3 {
                assert!(ts.escape_flag(c), "cell {c}");
            }
        }
        assert!(!ts.escape_flag(0));
    }

    #[test]
    fn cap_and_missing_parameters() {
        let opts = BuildOptions {
            cell_cap: 64,
            ..BuildOptions::ode(7, 0.5)
        };
        assert!(matches!(
            build_transitions(&o1(), &opts),
            Err(TransitionError::GridTooLarge { .. })
        ));
        let opts = BuildOptions {
            depth: Some(4),
            ..Default::default()
        };
        assert_eq!(
            build_transitions(&o1(), &opts).unwrap_err(),
            TransitionError::MissingTau
        );
        let opts = BuildOptions {
            tau: Some(0.5),
            ..Default::default()
        };
        assert_eq!(
            build_transitions(&o1(), &opts).unwrap_err(),
            TransitionError::MissingGrid
        );
    }

    #[test]
    fn enclosure_holds_for_random_points() {
        use rand::{Rng, SeedableRng};
        let spec = o1();
        let ts = build_transitions(&spec, &BuildOptions::ode(6, 0.5)).unwrap();
        let grid = ts.grid().unwrap();
        let ode = spec.as_ode().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let c = rng.gen_range(0..ts.n_cells());
            let b = &grid.cell_box(c)[0];
            let x = rng.gen_range(b.lo..b.hi);
            let y = ode.evolve(&[x], 0.5).unwrap();
            let d = grid.locate(y.state().unwrap()).unwrap();
            assert!(ts.successors(c).contains(&d), "x={x} cell {c} -> {d}");
        }
    }
}
