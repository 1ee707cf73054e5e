//! Fixed-step integrators, looked up by the `method` name in a system file.

use std::fmt;

use super::VectorField;

pub trait Integrator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Scratch length needed for a system of dimension `dim`.
    fn scratch_len(&self, dim: usize) -> usize;

    /// Advances `x` by one step of size `h`, writing the result to `out`.
    fn step(&self, field: &VectorField, x: &[f64], h: f64, out: &mut [f64], scratch: &mut [f64]);
}

impl fmt::Debug for dyn Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Integrator({})", self.name())
    }
}

/// Classical fourth-order Runge-Kutta.
pub struct Rk4;

impl Integrator for Rk4 {
    fn name(&self) -> &'static str {
        "rk4"
    }

    fn scratch_len(&self, dim: usize) -> usize {
        5 * dim
    }

    fn step(&self, field: &VectorField, x: &[f64], h: f64, out: &mut [f64], scratch: &mut [f64]) {
        let n = x.len();
        let (k1, rest) = scratch.split_at_mut(n);
        let (k2, rest) = rest.split_at_mut(n);
        let (k3, rest) = rest.split_at_mut(n);
        let (k4, tmp) = rest.split_at_mut(n);
        let tmp = &mut tmp[..n];

        field.eval_into(x, k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        field.eval_into(tmp, k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        field.eval_into(tmp, k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        field.eval_into(tmp, k4);
        for i in 0..n {
            out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

static INTEGRATORS: &[&dyn Integrator] = &[&Rk4];

pub fn lookup(name: &str) -> Option<&'static dyn Integrator> {
    INTEGRATORS.iter().copied().find(|i| i.name() == name)
}

pub fn names() -> Vec<&'static str> {
    INTEGRATORS.iter().map(|i| i.name()).collect()
}
