//! Seeded random finite systems for the property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::transition::TransitionSystem;

pub const MAX_CELLS: usize = 50;
pub const EDGE_DENSITY: f64 = 0.1;

/// Digraph on `1..=50` cells where each ordered pair, self-loops included,
/// is an edge with probability 0.1.
pub fn random_digraph(seed: u64) -> TransitionSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=MAX_CELLS);
    digraph_with(&mut rng, n, EDGE_DENSITY)
}

pub fn random_digraph_sized(seed: u64, n: usize, density: f64) -> TransitionSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    digraph_with(&mut rng, n, density)
}

fn digraph_with(rng: &mut ChaCha8Rng, n: usize, density: f64) -> TransitionSystem {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    TransitionSystem::from_digraph_edges(n, &edges)
}

/// Self-map of `1..=50` states with uniform images.
pub fn random_map(seed: u64) -> TransitionSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=MAX_CELLS);
    let image: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    TransitionSystem::from_map(&image)
}

/// Maps on even seeds, digraphs on odd ones.
pub fn random_finite_system(seed: u64) -> TransitionSystem {
    if seed.is_multiple_of(2) {
        random_map(seed)
    } else {
        random_digraph(seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_bounded() {
        for seed in 0..20 {
            let a = random_digraph(seed);
            let b = random_digraph(seed);
            assert_eq!(a.n_cells(), b.n_cells());
            assert!((1..=MAX_CELLS).contains(&a.n_cells()));
            assert!((0..a.n_cells()).all(|c| a.successors(c) == b.successors(c)));
            assert!(random_map(seed).is_deterministic());
        }
    }
}
