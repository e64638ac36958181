use std::collections::HashSet;

use cubic_core::cubic::verify_axioms_v1;
use cubic_core::host_kra::{
    compose, cube_group_generators, generated_group, host_kra_coupling, inverse, FilteredAction, Perm,
};
use cubic_core::measure::FiniteProbSpace;

fn d4() -> FilteredAction {
    FilteredAction::new(
        FiniteProbSpace::uniform(4),
        vec![vec![vec![1, 2, 3, 0], vec![0, 3, 2, 1]], vec![vec![2, 3, 0, 1]]],
    )
    .unwrap()
}

fn actions() -> Vec<(&'static str, FilteredAction)> {
    vec![("Z3", FilteredAction::cyclic_shift(3)), ("D4", d4())]
}

fn full_generators(action: &FilteredAction, n: usize, k: usize) -> Vec<Perm> {
    let omega = action.space().len();
    cube_group_generators(action, n, k).unwrap().full_permutations(omega).unwrap()
}

fn full_group(action: &FilteredAction, n: usize, k: usize) -> HashSet<Perm> {
    let omega = action.space().len();
    let gens = full_generators(action, n, k);
    generated_group(&gens, omega.pow(1 << n), 1_000_000).unwrap()
}

/// Generators, their inverses, and products of two of these.
fn short_words(gens: &[Perm]) -> Vec<Perm> {
    let mut letters: Vec<Perm> = gens.to_vec();
    letters.extend(gens.iter().map(inverse));
    let mut out = letters.clone();
    for a in &letters {
        for b in &letters {
            out.push(compose(a, b));
        }
    }
    out
}

#[test]
fn commutators_raise_the_level() {
    for (name, action) in actions() {
        for n in 0..=2 {
            for j in 0..=2 {
                for k in 0..=2 {
                    let target = full_group(&action, n, j + k);
                    let gj = full_generators(&action, n, j);
                    let uj: Vec<Perm> = gj.iter().cloned().chain(gj.iter().map(inverse)).collect();
                    let uk = short_words(&full_generators(&action, n, k));
                    for a in &uj {
                        for b in &uk {
                            let c = compose(&compose(&inverse(a), &inverse(b)), &compose(a, b));
                            assert!(target.contains(&c), "{name} n={n} j={j} k={k}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn next_level_group_is_diagonal_extension() {
    for (name, action) in actions() {
        let omega = action.space().len();
        for n in 0..=1 {
            let half = omega.pow(1 << n);
            for k in 0..=2 {
                let lower = full_group(&action, n, k);
                let upper = full_group(&action, n, k + 1);
                let mut expected: HashSet<Perm> = HashSet::new();
                for g in &lower {
                    for a in &upper {
                        let ga = compose(g, a);
                        for b in &upper {
                            let gb = compose(g, b);
                            let perm: Perm = (0..half * half)
                                .map(|c| ga[c % half] + half as u32 * gb[c / half])
                                .collect();
                            expected.insert(perm);
                        }
                    }
                }
                assert_eq!(full_group(&action, n + 1, k), expected, "{name} n={n} k={k}");
            }
        }
    }
}

#[test]
fn host_kra_couplings_are_cubic_and_invariant() {
    for (name, action) in actions() {
        assert!(action.is_ergodic());
        let cc = host_kra_coupling(&action, 3).unwrap();
        let report = verify_axioms_v1(&cc, 3).unwrap();
        assert!(report.passed(), "{name}: {:?}", report.first_failure());
        for n in 0..=3 {
            let mu = cc.level(n).unwrap();
            for g in cube_group_generators(&action, n, 0).unwrap().generators {
                for (t, m) in mu.iter() {
                    assert_eq!(&mu.mass(&g.apply(t)), m, "{name} n={n} face {}", g.face);
                }
            }
        }
    }
}
