//! Attractors, attractor-repeller pairs, Morse decompositions and converse
//! Lyapunov functions for finite maps, digraphs and grid-discretized ODEs.

pub mod analysis;
pub mod attractors;
pub mod cellset;
pub mod checks;
pub mod dynsys;
pub mod io;
pub mod limits;
pub mod lyapunov;
pub mod morse;
pub mod random;
pub mod transition;
pub mod vfparse;
