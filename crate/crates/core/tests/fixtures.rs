//! The two finite fixtures against the brute-force oracle.
//!
//! F1 is the map 0→0, 1→0, 2→1, 3→4, 4→3, 5→3; G1 the digraph a→a, b→a,
//! d→b, e→e, e→d with a, b, d, e numbered 0..4.

#![allow(clippy::type_complexity)]

mod oracle;

use mfw::attractors::{
    attractor_from_absorbing, attractor_lattice, basin, is_stable, validate_attractor, AttractorError,
};
use mfw::limits::{alpha_limit, invariance, omega_intersection_form, omega_limit};
use mfw::lyapunov::FiniteLyapunov;
use mfw::morse::chain::SinksFirst;
use mfw::morse::{dual_repeller, morse_decomposition, unstable_set, verify_morse};
use mfw::transition::{condense, Direction, TransitionSystem};
use oracle::{of, set, Oracle, Set};

const F1: [usize; 6] = [0, 0, 1, 4, 3, 3];
const G1: [(usize, usize); 5] = [(0, 0), (1, 0), (2, 1), (3, 3), (3, 2)];
const A: usize = 0;
const B: usize = 1;
const D: usize = 2;
const E: usize = 3;

fn f1() -> (TransitionSystem, Oracle) {
    (TransitionSystem::from_map(&F1), Oracle::from_map(&F1))
}

fn g1() -> (TransitionSystem, Oracle) {
    (TransitionSystem::from_digraph_edges(4, &G1), Oracle::from_edges(4, &G1))
}

fn cs(ts: &TransitionSystem, cells: &[usize]) -> mfw::cellset::CellSet {
    ts.set_of(cells.iter().copied())
}

#[test]
fn omega_limits() {
    let (f, fo) = f1();
    let (g, go) = g1();
    let cases: [(&TransitionSystem, &Oracle, &[usize], &[usize]); 5] = [
        (&f, &fo, &[2], &[0]),
        (&f, &fo, &[0], &[0]),
        (&f, &fo, &[0, 1, 2, 3, 4, 5], &[0, 3, 4]),
        (&g, &go, &[E], &[A, B, D, E]),
        (&g, &go, &[B], &[A]),
    ];
    for (ts, o, s, want) in cases {
        let truth = o.omega(&set(s), true);
        assert_eq!(truth, set(want), "oracle on {s:?}");
        let s = cs(ts, s);
        assert_eq!(of(&omega_limit(ts, &s).unwrap()), truth);
        assert_eq!(of(&omega_intersection_form(ts, &s).unwrap()), truth);
    }
}

#[test]
fn alpha_limits() {
    let (f, fo) = f1();
    let (g, go) = g1();
    let cases: [(&TransitionSystem, &Oracle, &[usize], &[usize]); 3] =
        [(&g, &go, &[B], &[E]), (&g, &go, &[A], &[A, E]), (&f, &fo, &[0], &[0])];
    for (ts, o, s, want) in cases {
        let truth = o.alpha(&set(s));
        assert_eq!(truth, set(want));
        assert_eq!(of(&alpha_limit(ts, &cs(ts, s)).unwrap()), truth);
    }
}

#[test]
fn invariance_flags() {
    let (f, fo) = f1();
    let (g, go) = g1();
    let cases: [(&TransitionSystem, &Oracle, &[usize], (bool, bool, bool)); 3] = [
        (&g, &go, &[A], (true, true, true)),
        (&g, &go, &[E], (false, true, false)),
        (&f, &fo, &[0, 1], (true, false, false)),
    ];
    for (ts, o, s, want) in cases {
        let img = o.image(&set(s));
        let truth = (img.is_subset(&set(s)), set(s).is_subset(&img), img == set(s));
        assert_eq!(truth, want);
        let inv = invariance(ts, &cs(ts, s));
        assert_eq!(
            (inv.positively_invariant, inv.negatively_invariant, inv.invariant),
            truth
        );
    }
}

#[test]
fn reach_and_condensation() {
    let (g, go) = g1();
    assert_eq!(of(&g.reach(&cs(&g, &[E]), Direction::Forward)), go.reach(&set(&[E])));
    assert_eq!(go.reach(&set(&[E])), set(&[A, B, D, E]));
    assert_eq!(
        of(&g.reach(&cs(&g, &[A]), Direction::Backward)),
        go.reach_backward(&set(&[A]))
    );
    assert!(g.reach(&g.empty_set(), Direction::Forward).is_empty());

    for (ts, o) in [f1(), g1()] {
        let cg = condense(&ts);
        let mut got: Vec<Set> = cg.recurrent_ids().into_iter().map(|i| of(&cg.components[i])).collect();
        got.sort();
        // recurrent components: cycle cells grouped by mutual reachability
        let mut want: Vec<Set> = Vec::new();
        for c in (0..o.n()).filter(|&c| o.on_cycle(c)) {
            let comp: Set = o
                .reach(&set(&[c]))
                .intersection(&o.reach_backward(&set(&[c])))
                .copied()
                .collect();
            if !want.contains(&comp) {
                want.push(comp);
            }
        }
        want.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn attractors_from_absorbing_sets() {
    let (f, _) = f1();
    let (g, _) = g1();
    assert_eq!(
        attractor_from_absorbing(&g, &cs(&g, &[A, B])).unwrap().cells.to_vec(),
        vec![A]
    );
    assert_eq!(
        attractor_from_absorbing(&f, &cs(&f, &[0, 1, 2, 3, 4, 5]))
            .unwrap()
            .cells
            .to_vec(),
        vec![0, 3, 4]
    );
    assert!(matches!(
        attractor_from_absorbing(&g, &cs(&g, &[E])),
        Err(AttractorError::NotAbsorbing { .. })
    ));
}

#[test]
fn validation_and_stability() {
    let (f, _) = f1();
    let (g, _) = g1();
    let v = validate_attractor(&g, &cs(&g, &[A]), true);
    assert!(v.invariant && v.absorbing_witness_found && v.maximal_in_witness && v.is_attractor);
    assert_eq!(v.maximal_in_basin, Some(true));
    assert!(!validate_attractor(&g, &cs(&g, &[E]), false).invariant);
    assert!(validate_attractor(&f, &cs(&f, &[3, 4]), true).is_attractor);

    assert!(is_stable(&g, &cs(&g, &[A])));
    assert!(!is_stable(&g, &cs(&g, &[E])));
    assert!(is_stable(&f, &cs(&f, &[0, 3, 4])));
}

#[test]
fn basins() {
    let (f, fo) = f1();
    let (g, go) = g1();
    let cases: [(&TransitionSystem, &Oracle, &[usize], &[usize]); 3] = [
        (&g, &go, &[A], &[A, B, D]),
        (&f, &fo, &[0], &[0, 1, 2]),
        (&f, &fo, &[0, 3, 4], &[0, 1, 2, 3, 4, 5]),
    ];
    for (ts, o, a, want) in cases {
        let truth = o.basin(&set(a));
        assert_eq!(truth, set(want));
        assert_eq!(of(&basin(ts, &cs(ts, a)).unwrap()), truth);
    }
}

#[test]
fn lattices_match_subset_enumeration() {
    for (ts, o) in [f1(), g1()] {
        let cg = condense(&ts);
        let got: std::collections::BTreeSet<Set> = attractor_lattice(&ts, &cg, 4096)
            .attractors
            .iter()
            .map(|r| of(&r.cells))
            .collect();
        assert_eq!(got, o.attractors());
    }
    assert_eq!(
        g1().1.attractors().into_iter().collect::<Vec<_>>(),
        vec![set(&[A]), set(&[A, B, D, E])]
    );
    assert_eq!(f1().1.attractors().len(), 3);
}

#[test]
fn dual_repellers() {
    let (f, fo) = f1();
    let (g, go) = g1();
    let cases: [(&TransitionSystem, &Oracle, &[usize], &[usize], &[usize]); 2] = [
        (&g, &go, &[A, B, D, E], &[A], &[E]),
        (&f, &fo, &[0, 3, 4], &[0], &[3, 4]),
    ];
    for (ts, o, global, a, want) in cases {
        let truth = o.dual_repeller(&set(global), &set(a));
        assert_eq!(truth, set(want));
        assert_eq!(of(&dual_repeller(ts, &cs(ts, global), &cs(ts, a)).unwrap()), truth);
    }
}

#[test]
fn morse_sets_and_unstable_sets() {
    let (g, go) = g1();
    let global = cs(&g, &[A, B, D, E]);
    let md = morse_decomposition(&g, &global, None, &SinksFirst).unwrap();
    let sets: Vec<Set> = md.morse_sets.iter().map(of).collect();
    assert_eq!(sets, vec![set(&[A]), set(&[E])]);
    for k in 1..md.chain.len() {
        let want: Set = of(&md.chain[k])
            .intersection(&go.dual_repeller(&of(&global), &of(&md.chain[k - 1])))
            .copied()
            .collect();
        assert_eq!(sets[k - 1], want);
    }
    for (m, want) in [(&[E][..], &[A, B, D, E][..]), (&[A], &[A])] {
        let truth = go.unstable(&of(&global), &set(m));
        assert_eq!(truth, set(want));
        assert_eq!(of(&unstable_set(&g, &global, &cs(&g, m))), truth);
    }

    let (f, fo) = f1();
    let global = cs(&f, &[0, 3, 4]);
    let md = morse_decomposition(&f, &global, Some(vec![cs(&f, &[0])]), &SinksFirst).unwrap();
    let sets: Vec<Set> = md.morse_sets.iter().map(of).collect();
    assert_eq!(sets, vec![set(&[0]), set(&[3, 4])]);
    let truth = fo.unstable(&of(&global), &set(&[3, 4]));
    assert_eq!(truth, set(&[3, 4]));
    assert_eq!(of(&unstable_set(&f, &global, &cs(&f, &[3, 4]))), truth);
}

#[test]
fn morse_verification() {
    let (g, _) = g1();
    let global = cs(&g, &[A, B, D, E]);
    let md = morse_decomposition(&g, &global, None, &SinksFirst).unwrap();
    assert!(verify_morse(&g, &md).all());
    let mut swapped = md.clone();
    swapped.morse_sets.swap(0, 1);
    assert!(!verify_morse(&g, &swapped).ordered_connections);

    let (f, _) = f1();
    let global = cs(&f, &[0, 3, 4]);
    let md = morse_decomposition(&f, &global, Some(vec![cs(&f, &[0])]), &SinksFirst).unwrap();
    assert!(verify_morse(&f, &md).all());
}

#[test]
fn lyapunov_closed_forms() {
    let (f, fo) = f1();
    let a = set(&[0, 3, 4]);
    let ly = FiniteLyapunov::new(&f, &cs(&f, &[0, 3, 4])).unwrap();
    let zeta: Vec<f64> = (0..6).map(|c| fo.hitting(c, &a).unwrap() as f64).collect();
    assert_eq!(zeta, vec![0.0, 1.0, 2.0, 0.0, 0.0, 1.0]);
    let e1 = (-1f64).exp();
    let closed = [0.0, 2.0, 4.0 + e1, 0.0, 0.0, 2.0];
    for c in 0..6 {
        assert_eq!(ly.zeta(c), zeta[c]);
        let sum = fo.lyapunov_sum(c, &a, &|x| zeta[x]);
        assert!((sum - closed[c]).abs() <= 1e-12, "oracle at {c}");
        assert!((ly.value(c).unwrap() - sum).abs() <= 1e-12, "cell {c}");
    }
    assert_eq!(ly.xi(2), 2.0);
    let field = ly.field(ly.basin());
    assert_eq!(field.rows.len(), 6);
    assert!(field.errors.is_empty());
    assert!(ly.verify_decrease().passed());

    let k = set(&[2]);
    let sep = FiniteLyapunov::separating(&f, &cs(&f, &[0, 3, 4]), &cs(&f, &[2])).unwrap();
    let eta = |x: usize| {
        let psi = match (fo.hitting(x, &a), fo.hitting(x, &k)) {
            (_, None) => 0.0,
            (None, Some(_)) => 1.0,
            (Some(da), Some(dk)) => da as f64 / (da + dk) as f64,
        };
        zeta[x] + psi
    };
    assert_eq!(eta(2), 3.0);
    let want = fo.lyapunov_sum(2, &a, &eta);
    assert!((sep.value(2).unwrap() - want).abs() <= 1e-12);
    assert!(sep.value(2).unwrap() >= 1.0);
    assert!(sep.verify_decrease().passed());
    for c in [0, 3, 4] {
        assert_eq!(sep.value(c).unwrap(), 0.0);
    }
}
