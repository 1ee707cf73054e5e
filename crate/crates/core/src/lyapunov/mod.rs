//! Converse Lyapunov functions built from a K₀ function `ζ` (nonnegative,
//! zero exactly on the attractor): the envelope `ξ(x) = sup_{t≥0} ζ(Φ(t)x)`
//! and `L(x) = ξ(x) + ∫₀^∞ e^{−t} ξ(Φ(t)x) dt`.
//!
//! Finite systems use forward hitting distances for `ζ` and a unit-step sum
//! with weights `e^{−k}` in place of the integral.

pub mod finite;
pub mod ode;

use serde::Serialize;
use thiserror::Error;

use crate::cellset::CellId;
use crate::dynsys::DynError;

pub use finite::FiniteLyapunov;
pub use ode::{CellUnionDistance, K0Function, OdeLyapunov, OdeLyapunovOptions, Separated};

pub const DEFAULT_ZETA_TOL: f64 = 1e-3;
pub const DEFAULT_DECREASE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error("attractor is empty")]
    EmptyAttractor,
    #[error("point is not in the basin of the attractor")]
    NotInBasin,
    #[error("trajectory did not reach the attractor within the horizon {horizon}")]
    HorizonTooShort { horizon: f64 },
    #[error("cell {cell} has several successors; the Lyapunov sum needs a single orbit")]
    NotDeterministic { cell: CellId },
    #[error("cell {cell} lies in both the attractor and the separated set")]
    Overlap { cell: CellId },
    #[error("the system has no grid; build its transitions from an ode first")]
    MissingGrid,
    #[error(transparent)]
    Dyn(#[from] DynError),
}

/// One evaluated cell: `center` is set for grid cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovRow {
    pub cell: CellId,
    pub center: Option<Vec<f64>>,
    pub zeta: f64,
    pub xi: f64,
    pub l: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LyapunovField {
    pub rows: Vec<LyapunovRow>,
    /// Cells of the scope that could not be evaluated.
    pub errors: Vec<(CellId, LyapunovError)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecreaseViolation {
    /// Cell or trajectory index.
    pub source: usize,
    pub t: f64,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DecreaseReport {
    pub checked: usize,
    pub exempt: usize,
    pub violations: Vec<DecreaseViolation>,
}

impl DecreaseReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}
