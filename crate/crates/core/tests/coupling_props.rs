mod common;

use std::collections::BTreeMap;

use common::{random_function, random_partition, random_space, rng};
use cubic_core::abelian::{standard_cube_coupling, FiniteAbelianGroup};
use cubic_core::coupling::{
    glue, index_cond_independent, is_idempotent, recover_factor, relative_square, Coupling, Label,
};
use cubic_core::measure::FiniteProbSpace;
use cubic_core::scalar::Q;
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

/// A random measure on `k`-tuples over `n` atoms, symmetrised over coordinate
/// permutations so that every marginal agrees; the base is that marginal.
fn random_symmetric(r: &mut impl Rng, n: usize, k: usize) -> Coupling {
    let mut raw: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    for _ in 0..r.random_range(1..=5) {
        let t: Vec<u32> = (0..k).map(|_| r.random_range(0..n as u32)).collect();
        *raw.entry(t).or_insert_with(Q::zero) += Q::from_integer(r.random_range(1..=3).into());
    }
    let perms = permutations(k);
    let total: Q = raw.values().sum::<Q>() * Q::from_integer((perms.len() as i64).into());
    let mut map: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    for (t, m) in &raw {
        for p in &perms {
            let u: Vec<u32> = p.iter().map(|&i| t[i]).collect();
            *map.entry(u).or_insert_with(Q::zero) += m / &total;
        }
    }
    let mut marg = vec![Q::zero(); n];
    for (t, m) in &map {
        marg[t[0] as usize] += m;
    }
    let base = FiniteProbSpace::new(marg).unwrap();
    let labels = (0..k).map(|i| Label::name(&format!("x{i}"))).collect();
    Coupling::new(base, labels, map).unwrap()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

fn subsets(k: usize) -> Vec<Vec<usize>> {
    (0..1usize << k).map(|m| (0..k).filter(|i| m >> i & 1 == 1).collect()).collect()
}

fn inter(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().filter(|x| b.contains(x)).copied().collect()
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Counts the triples meeting the hypotheses; panics if a conclusion fails.
fn check_three_set_lemma(mu: &Coupling) -> usize {
    let sets = subsets(mu.arity());
    let indep = |a: &[usize], b: &[usize]| index_cond_independent(mu, a, b).unwrap();
    let mut hits = 0;
    for a in &sets {
        for b in &sets {
            if !indep(a, b) {
                continue;
            }
            for c in &sets {
                let bc = inter(b, c);
                if !bc.iter().all(|x| a.contains(x)) {
                    continue;
                }
                if indep(&inter(a, b), c) && indep(&union(a, b), c) {
                    hits += 1;
                    assert!(indep(b, c), "B ⊥ C for {a:?} {b:?} {c:?}");
                    assert!(indep(a, &union(b, c)), "A ⊥ B∪C for {a:?} {b:?} {c:?}");
                    assert!(indep(&union(a, c), b), "A∪C ⊥ B for {a:?} {b:?} {c:?}");
                }
            }
        }
    }
    hits
}

#[test]
fn three_set_lemma_on_cube_couplings() {
    for group in [FiniteAbelianGroup::cyclic(2), FiniteAbelianGroup::cyclic(3)] {
        let mu = standard_cube_coupling(&group, 2).unwrap();
        assert!(check_three_set_lemma(&mu) > 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn three_set_lemma_on_glued_couplings(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mu = random_symmetric(&mut r, 3, 2);
        let glued = glue(&mu, &mu, &[(1, 1)]).unwrap();
        let glued = glue(&glued, &mu, &[(2, 0)]).unwrap();
        prop_assert!(check_three_set_lemma(&glued) > 0);
    }

    #[test]
    fn glue_keeps_both_sides_and_is_conditionally_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mu = random_symmetric(&mut r, 3, 3);
        let p = random_partition(&mut r, mu.base());
        let nu = relative_square(mu.base(), &p).unwrap();
        let g = glue(&mu, &nu, &[(2, 0)]).unwrap();
        prop_assert!(g.restrict(&[0, 1, 2]).unwrap().same_measure(&mu));
        prop_assert!(g.subcoupling(&[2, 3], nu.labels().to_vec()).unwrap().same_measure(&nu));
        let overlap = mu.restrict(&[2]).unwrap();
        for (t, m) in g.iter() {
            let lhs = m * overlap.mass(&[t[2]]);
            let rhs = mu.mass(&t[..3]) * nu.mass(&[t[2], t[3]]);
            prop_assert_eq!(lhs, rhs);
        }
        prop_assert!(index_cond_independent(&g, &[0, 1, 2], &[2, 3]).unwrap());
    }

    #[test]
    fn relative_squares_are_idempotent(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let space = random_space(&mut r, n);
        let p = random_partition(&mut r, &space);
        let mu = relative_square(&space, &p).unwrap();
        prop_assert!(is_idempotent(&mu).unwrap());
        prop_assert_eq!(recover_factor(&mu).unwrap(), p);
        let f = random_function(&mut r, n);
        let xi = mu.xi(&[f.clone(), f.conj()]).unwrap();
        let mean = space.integral(&f).unwrap();
        prop_assert!(xi.im.is_zero());
        prop_assert!(mean.norm_sqr() <= xi.re);
    }

    #[test]
    fn idempotent_exactly_when_relative_square(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let mu = random_symmetric(&mut r, n, 2);
        let mu = if r.random_bool(0.5) {
            let p = random_partition(&mut r, mu.base());
            relative_square(mu.base(), &p).unwrap()
        } else {
            mu.with_labels(vec![Label::name("a"), Label::name("b")]).unwrap()
        };
        let square = {
            let space = mu.base();
            let m = mu.cylinder_partition(&[0]).meet(&mu.cylinder_partition(&[1])).unwrap();
            let p = m.push_forward(space, |i| mu.tuples()[i][0] as usize);
            relative_square(space, &p).unwrap()
        };
        prop_assert_eq!(is_idempotent(&mu).unwrap(), square.same_measure(&mu));
    }
}
