//! System descriptions and their (local) semiflows.
//!
//! Finite kinds evolve in integer steps. ODE kinds evolve through a
//! fixed-step integrator; a trajectory escapes when it leaves the domain
//! box, exceeds the magnitude cap, or becomes non-finite.

pub mod integrator;

use std::fmt;

use thiserror::Error;

use crate::vfparse::{self, FieldExpr, ParseError};

pub use integrator::Integrator;

pub const DEFAULT_MAGNITUDE_CAP: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("{0}")]
    Schema(String),
    #[error("field component {component}: {source}")]
    Field {
        component: usize,
        #[source]
        source: ParseError,
    },
}

fn schema<T>(msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::Schema(msg.into()))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("initial point {0:?} lies outside the domain")]
    OutOfDomain(Vec<f64>),
    #[error("point has {got} components, system dimension is {dim}")]
    Dimension { got: usize, dim: usize },
    #[error("finite systems evolve in whole steps; got t = {0}")]
    NonIntegerTime(f64),
    #[error("time must be finite and nonnegative; got {0}")]
    NegativeTime(f64),
    #[error("state {state} has {out_degree} successors; evolution needs exactly one")]
    NotDeterministic { state: usize, out_degree: usize },
    #[error("sample step {0} must be a positive multiple of the step size")]
    SampleStep(f64),
    #[error("tau {tau} is shorter than the integrator step {dt}")]
    TauTooShort { tau: f64, dt: f64 },
    #[error("expected a {expected} state")]
    StateKind { expected: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// The right-hand side of an autonomous ODE.
#[derive(Debug, Clone)]
pub struct VectorField {
    components: Vec<FieldExpr>,
}

impl VectorField {
    pub fn parse<S: AsRef<str>>(texts: &[S]) -> Result<Self, SpecError> {
        let dim = texts.len();
        let components = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                vfparse::parse_field(t.as_ref(), dim).map_err(|source| SpecError::Field { component: i, source })
            })
            .collect::<Result<_, _>>()?;
        Ok(VectorField { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FieldExpr] {
        &self.components
    }

    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval_unchecked(x);
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiniteMap {
    states: Vec<String>,
    image: Vec<usize>,
}

impl FiniteMap {
    /// `pairs` maps each state name to its image name.
    pub fn new<S: AsRef<str>>(states: Vec<String>, pairs: &[(S, S)]) -> Result<Self, SpecError> {
        let index = name_index(&states, "state")?;
        let mut image = vec![None; states.len()];
        for (from, to) in pairs {
            let (from, to) = (from.as_ref(), to.as_ref());
            let Some(&f) = index.get(from) else {
                return schema(format!("map: source `{from}` is not a declared state"));
            };
            let Some(&t) = index.get(to) else {
                return schema(format!("map: image `{to}` of `{from}` is not a declared state"));
            };
            if image[f].replace(t).is_some() {
                return schema(format!("map: state `{from}` has more than one image"));
            }
        }
        let image = image
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.ok_or_else(|| SpecError::Schema(format!("map: state `{}` has no image", states[i]))))
            .collect::<Result<_, _>>()?;
        Ok(FiniteMap { states, image })
    }

    pub fn from_indices(image: Vec<usize>) -> Result<Self, SpecError> {
        let n = image.len();
        if let Some(&bad) = image.iter().find(|&&t| t >= n) {
            return schema(format!("map: image {bad} is not a declared state"));
        }
        Ok(FiniteMap {
            states: (0..n).map(|i| i.to_string()).collect(),
            image,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }
}

#[derive(Debug, Clone)]
pub struct Digraph {
    cells: Vec<String>,
    edges: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn new<S: AsRef<str>>(cells: Vec<String>, edges: &[(S, S)]) -> Result<Self, SpecError> {
        let index = name_index(&cells, "cell")?;
        let edges = edges
            .iter()
            .map(|(u, v)| {
                let (u, v) = (u.as_ref(), v.as_ref());
                match (index.get(u), index.get(v)) {
                    (Some(&a), Some(&b)) => Ok((a, b)),
                    (None, _) => schema(format!("edges: endpoint `{u}` is not a declared cell")),
                    (_, None) => schema(format!("edges: endpoint `{v}` is not a declared cell")),
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Digraph { cells, edges })
    }

    pub fn from_indices(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, SpecError> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
            return schema(format!("edges: ({u}, {v}) has an undeclared endpoint"));
        }
        Ok(Digraph {
            cells: (0..n).map(|i| i.to_string()).collect(),
            edges,
        })
    }

    pub fn cells(&self) -> &[String] {
        &self.cells
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn successors_of(&self, c: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.edges.iter().filter(|e| e.0 == c).map(|e| e.1).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

fn name_index(names: &[String], what: &str) -> Result<std::collections::HashMap<String, usize>, SpecError> {
    let mut index = std::collections::HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return schema(format!("{what} `{n}` declared twice"));
        }
    }
    if names.is_empty() {
        return schema(format!("at least one {what} must be declared"));
    }
    Ok(index)
}

#[derive(Clone)]
pub struct OdeSystem {
    field: VectorField,
    sources: Vec<String>,
    domain: Vec<Interval>,
    integrator: &'static dyn Integrator,
    dt: f64,
    magnitude_cap: f64,
}

impl fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSystem")
            .field("field", &self.sources)
            .field("domain", &self.domain)
            .field("integrator", &self.integrator.name())
            .field("dt", &self.dt)
            .field("magnitude_cap", &self.magnitude_cap)
            .finish()
    }
}

impl OdeSystem {
    pub fn new<S: AsRef<str>>(field: &[S], domain: Vec<Interval>, method: &str, dt: f64) -> Result<Self, SpecError> {
        if field.is_empty() {
            return schema("ode: dim must be positive");
        }
        if field.len() != domain.len() {
            return schema(format!(
                "ode: {} field components but {} domain intervals",
                field.len(),
                domain.len()
            ));
        }
        for (i, iv) in domain.iter().enumerate() {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo < iv.hi) {
                return schema(format!(
                    "ode: domain interval {i} [{}, {}] is empty or not finite",
                    iv.lo, iv.hi
                ));
            }
        }
        if !(dt.is_finite() && dt > 0.0) {
            return schema(format!("ode: integrator dt must be positive, got {dt}"));
        }
        let Some(integrator) = integrator::lookup(method) else {
            return schema(format!(
                "ode: unknown integrator method `{method}` (available: {})",
                integrator::names().join(", ")
            ));
        };
        Ok(OdeSystem {
            field: VectorField::parse(field)?,
            sources: field.iter().map(|s| s.as_ref().to_string()).collect(),
            domain,
            integrator,
            dt,
            magnitude_cap: DEFAULT_MAGNITUDE_CAP,
        })
    }

    pub fn with_magnitude_cap(mut self, cap: f64) -> Self {
        self.magnitude_cap = cap;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        assert!(dt > 0.0 && dt.is_finite());
        self.dt = dt;
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn magnitude_cap(&self) -> f64 {
        self.magnitude_cap
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn field_sources(&self) -> &[String] {
        &self.sources
    }

    pub fn integrator(&self) -> &'static dyn Integrator {
        self.integrator
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.domain).all(|(v, iv)| iv.contains(*v))
    }

    fn escaped(&self, x: &[f64]) -> bool {
        if !x.iter().all(|v| v.is_finite()) || !self.in_domain(x) {
            return true;
        }
        x.iter().map(|v| v * v).sum::<f64>().sqrt() > self.magnitude_cap
    }

    fn check_start(&self, x: &[f64]) -> Result<(), DynError> {
        if x.len() != self.dim() {
            return Err(DynError::Dimension {
                got: x.len(),
                dim: self.dim(),
            });
        }
        if !self.in_domain(x) || !x.iter().all(|v| v.is_finite()) {
            return Err(DynError::OutOfDomain(x.to_vec()));
        }
        Ok(())
    }

    /// Splits `t` into whole integrator steps plus a remainder shorter than `dt`.
    fn split_time(&self, t: f64) -> (u64, f64) {
        let r = t / self.dt;
        let near = r.round();
        if (r - near).abs() <= 1e-9 * near.max(1.0) {
            (near as u64, 0.0)
        } else {
            let n = r.floor();
            (n as u64, t - n * self.dt)
        }
    }

    /// Runs `steps` integrator steps from `x`, calling `visit(k, state)` after
    /// each one. Stops early when `visit` returns `false`. Returns the step
    /// index at which the orbit escaped, if it did.
    pub fn walk(&self, x: &[f64], steps: u64, mut visit: impl FnMut(u64, &[f64]) -> bool) -> Option<u64> {
        let n = x.len();
        let mut cur = x.to_vec();
        let mut next = vec![0.0; n];
        let mut scratch = vec![0.0; self.integrator.scratch_len(n)];
        for k in 1..=steps {
            self.integrator
                .step(&self.field, &cur, self.dt, &mut next, &mut scratch);
            if self.escaped(&next) {
                return Some(k);
            }
            std::mem::swap(&mut cur, &mut next);
            if !visit(k, &cur) {
                return None;
            }
        }
        None
    }

    pub fn evolve(&self, x: &[f64], t: f64) -> Result<EvolveResult<Vec<f64>>, DynError> {
        self.check_start(x)?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(DynError::NegativeTime(t));
        }
        let (steps, rem) = self.split_time(t);
        let mut last = x.to_vec();
        if let Some(k) = self.walk(x, steps, |_, s| {
            last.copy_from_slice(s);
            true
        }) {
            return Ok(EvolveResult::Escaped {
                t_escape: k as f64 * self.dt,
            });
        }
        if rem > 0.0 {
            let mut out = vec![0.0; x.len()];
            let mut scratch = vec![0.0; self.integrator.scratch_len(x.len())];
            self.integrator.step(&self.field, &last, rem, &mut out, &mut scratch);
            if self.escaped(&out) {
                return Ok(EvolveResult::Escaped { t_escape: t });
            }
            last = out;
        }
        Ok(EvolveResult::At(last))
    }
}

#[derive(Debug, Clone)]
pub enum SystemSpec {
    FiniteMap(FiniteMap),
    Digraph(Digraph),
    Ode(OdeSystem),
}

impl SystemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SystemSpec::FiniteMap(_) => "finite_map",
            SystemSpec::Digraph(_) => "digraph",
            SystemSpec::Ode(_) => "ode",
        }
    }

    /// Names of the states of a finite system.
    pub fn labels(&self) -> Option<&[String]> {
        match self {
            SystemSpec::FiniteMap(m) => Some(m.states()),
            SystemSpec::Digraph(g) => Some(g.cells()),
            SystemSpec::Ode(_) => None,
        }
    }

    pub fn state_index(&self, name: &str) -> Result<usize, DynError> {
        self.labels()
            .and_then(|l| l.iter().position(|s| s == name))
            .ok_or_else(|| DynError::UnknownState(name.to_string()))
    }

    pub fn as_ode(&self) -> Option<&OdeSystem> {
        match self {
            SystemSpec::Ode(o) => Some(o),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Discrete(usize),
    Point(Vec<f64>),
}

impl State {
    pub fn as_discrete(&self) -> Option<usize> {
        match self {
            State::Discrete(s) => Some(*s),
            State::Point(_) => None,
        }
    }

    pub fn as_point(&self) -> Option<&[f64]> {
        match self {
            State::Point(p) => Some(p),
            State::Discrete(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolveResult<S> {
    At(S),
    Escaped { t_escape: f64 },
}

impl<S> EvolveResult<S> {
    pub fn state(&self) -> Option<&S> {
        match self {
            EvolveResult::At(s) => Some(s),
            EvolveResult::Escaped { .. } => None,
        }
    }

    pub fn is_escaped(&self) -> bool {
        matches!(self, EvolveResult::Escaped { .. })
    }

    fn map<T>(self, f: impl FnOnce(S) -> T) -> EvolveResult<T> {
        match self {
            EvolveResult::At(s) => EvolveResult::At(f(s)),
            EvolveResult::Escaped { t_escape } => EvolveResult::Escaped { t_escape },
        }
    }
}

fn whole_steps(t: f64) -> Result<u64, DynError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(DynError::NegativeTime(t));
    }
    if t.fract() != 0.0 {
        return Err(DynError::NonIntegerTime(t));
    }
    Ok(t as u64)
}

/// One application of a finite system's map. `Ok(None)` means the state
/// escapes (a digraph cell with no successors).
fn finite_step(spec: &SystemSpec, s: usize) -> Result<Option<usize>, DynError> {
    match spec {
        SystemSpec::FiniteMap(m) => Ok(Some(m.image[s])),
        SystemSpec::Digraph(g) => {
            let succ = g.successors_of(s);
            match succ.len() {
                0 => Ok(None),
                1 => Ok(Some(succ[0])),
                d => Err(DynError::NotDeterministic {
                    state: s,
                    out_degree: d,
                }),
            }
        }
        SystemSpec::Ode(_) => unreachable!("finite_step on an ode system"),
    }
}

fn check_discrete(spec: &SystemSpec, x: &State) -> Result<usize, DynError> {
    let s = x.as_discrete().ok_or(DynError::StateKind { expected: "discrete" })?;
    let n = spec.labels().map_or(0, |l| l.len());
    if s >= n {
        return Err(DynError::StateOutOfRange(s));
    }
    Ok(s)
}

pub fn evolve(spec: &SystemSpec, x: &State, t: f64) -> Result<EvolveResult<State>, DynError> {
    match spec {
        SystemSpec::Ode(ode) => {
            let p = x.as_point().ok_or(DynError::StateKind { expected: "point" })?;
            Ok(ode.evolve(p, t)?.map(State::Point))
        }
        _ => {
            let mut s = check_discrete(spec, x)?;
            let steps = whole_steps(t)?;
            for k in 1..=steps {
                match finite_step(spec, s)? {
                    Some(next) => s = next,
                    None => return Ok(EvolveResult::Escaped { t_escape: k as f64 }),
                }
            }
            Ok(EvolveResult::At(State::Discrete(s)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    Horizon,
    Escaped(f64),
    EnteredTarget(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<State>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.points
            .last()
            .expect("trajectories hold at least the initial state")
    }
}

/// Samples the orbit of `x` every `sample_dt` up to `t_max`, stopping early
/// on escape or on the first sample satisfying `stop`.
pub fn trajectory(
    spec: &SystemSpec,
    x: &State,
    t_max: f64,
    sample_dt: f64,
    stop: Option<&dyn Fn(&State) -> bool>,
) -> Result<Trajectory, DynError> {
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(DynError::NegativeTime(t_max));
    }
    let hit = |s: &State| stop.is_some_and(|f| f(s));
    let mut times = vec![0.0];
    let mut points = vec![x.clone()];

    match spec {
        SystemSpec::Ode(ode) => {
            let p = x.as_point().ok_or(DynError::StateKind { expected: "point" })?;
            ode.check_start(p)?;
            let ratio = sample_dt / ode.dt;
            let every = ratio.round();
            if !(sample_dt > 0.0 && every >= 1.0 && (ratio - every).abs() <= 1e-9 * every) {
                return Err(DynError::SampleStep(sample_dt));
            }
            let every = every as u64;
            if hit(x) {
                return Ok(Trajectory {
                    times,
                    points,
                    terminal: Terminal::EnteredTarget(0.0),
                });
            }
            let (steps, _) = ode.split_time(t_max);
            let mut terminal = Terminal::Horizon;
            let escaped = ode.walk(p, steps, |k, s| {
                if k % every == 0 {
                    let t = k as f64 * ode.dt;
                    let st = State::Point(s.to_vec());
                    let stop_here = hit(&st);
                    times.push(t);
                    points.push(st);
                    if stop_here {
                        terminal = Terminal::EnteredTarget(t);
                        return false;
                    }
                }
                true
            });
            if let Some(k) = escaped {
                terminal = Terminal::Escaped(k as f64 * ode.dt);
            }
            Ok(Trajectory {
                times,
                points,
                terminal,
            })
        }
        _ => {
            let mut s = check_discrete(spec, x)?;
            let every = whole_steps(sample_dt)?;
            if every == 0 {
                return Err(DynError::SampleStep(sample_dt));
            }
            if hit(x) {
                return Ok(Trajectory {
                    times,
                    points,
                    terminal: Terminal::EnteredTarget(0.0),
                });
            }
            let steps = t_max.floor() as u64;
            for k in 1..=steps {
                match finite_step(spec, s)? {
                    Some(next) => s = next,
                    None => {
                        return Ok(Trajectory {
                            times,
                            points,
                            terminal: Terminal::Escaped(k as f64),
                        });
                    }
                }
                if k % every == 0 {
                    let st = State::Discrete(s);
                    let stop_here = hit(&st);
                    times.push(k as f64);
                    points.push(st);
                    if stop_here {
                        return Ok(Trajectory {
                            times,
                            points,
                            terminal: Terminal::EnteredTarget(k as f64),
                        });
                    }
                }
            }
            Ok(Trajectory {
                times,
                points,
                terminal: Terminal::Horizon,
            })
        }
    }
}

/// The time-`tau` map of an ODE system.
#[derive(Debug, Clone)]
pub struct TimeTauMap<'a> {
    ode: &'a OdeSystem,
    tau: f64,
}

impl TimeTauMap<'_> {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn apply(&self, x: &[f64]) -> Result<EvolveResult<Vec<f64>>, DynError> {
        self.ode.evolve(x, self.tau)
    }
}

pub fn time_tau_map(ode: &OdeSystem, tau: f64) -> Result<TimeTauMap<'_>, DynError> {
    if !(tau.is_finite() && tau >= ode.dt) {
        return Err(DynError::TauTooShort { tau, dt: ode.dt });
    }
    Ok(TimeTauMap { ode, tau })
}
