mod common;

use common::{random_function, rng};
use cubic_core::abelian::FiniteAbelianGroup;
use cubic_core::cube::{SimplicialSet, Vertex};
use cubic_core::cubic::{verify_automorphism_invariance, verify_axioms_v1, CubicCoupling};
use cubic_core::host_kra::{host_kra_coupling, FilteredAction};
use cubic_core::measure::{cond_expect, FiniteProbSpace, FunctionOnSpace};
use cubic_core::scalar::{ExactComplex, Scalar};
use cubic_core::uniformity::{fourier_factor, u_convolution, u_product, u_seminorm_pow};
use proptest::prelude::*;

fn systems() -> Vec<(&'static str, CubicCoupling)> {
    let d4 = FilteredAction::new(
        FiniteProbSpace::uniform(4),
        vec![vec![vec![1, 2, 3, 0], vec![0, 3, 2, 1]], vec![vec![2, 3, 0, 1]]],
    )
    .unwrap();
    vec![
        ("Z2", CubicCoupling::standard(&FiniteAbelianGroup::cyclic(2), 3)),
        ("Z3", CubicCoupling::standard(&FiniteAbelianGroup::cyclic(3), 3)),
        ("Z4", CubicCoupling::standard(&FiniteAbelianGroup::cyclic(4), 3)),
        ("Z2xZ2", CubicCoupling::standard(&FiniteAbelianGroup::new(vec![2, 2]).unwrap(), 3)),
        ("D4", host_kra_coupling(&d4, 3).unwrap()),
    ]
}

#[test]
fn factors_are_nested() {
    for (name, cc) in systems() {
        for d in 1..3 {
            let lower = fourier_factor(&cc, d).unwrap();
            let upper = fourier_factor(&cc, d + 1).unwrap();
            assert!(upper.is_finer_than(&lower).unwrap(), "{name} d={d}");
        }
        assert!(fourier_factor(&cc, 1).unwrap().is_trivial(), "{name}");
    }
}

#[test]
fn factor_couplings_satisfy_the_axioms() {
    for (name, cc) in systems() {
        for d in 1..=2 {
            let p = fourier_factor(&cc, d).unwrap();
            let quotient = cc.factor(&p).unwrap();
            let report = verify_axioms_v1(&quotient, 3).unwrap();
            assert!(report.passed(), "{name} d={d}: {:?}", report.first_failure());
        }
    }
}

#[test]
fn automorphism_invariance() {
    for (name, cc) in systems() {
        for n in 1..=3 {
            assert!(verify_automorphism_invariance(&cc, n).unwrap().passed(), "{name} n={n}");
        }
    }
}

/// Splits `f` into its `F_{d-1}` projection and a remainder of zero `U^d` seminorm.
fn split(cc: &CubicCoupling, d: usize, f: &FunctionOnSpace<ExactComplex>) -> (FunctionOnSpace<ExactComplex>, FunctionOnSpace<ExactComplex>) {
    let p = fourier_factor(cc, d).unwrap();
    let g = cond_expect(cc.base(), f, &p).unwrap();
    let rest = f.sub(&g);
    (g, rest)
}

fn one(n: usize) -> FunctionOnSpace<ExactComplex> {
    FunctionOnSpace::constant(n, <ExactComplex as Scalar>::one())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn zero_seminorm_is_a_module_over_the_factor(seed in any::<u64>(), which in 0usize..5, d in 1usize..=2) {
        let (_, cc) = systems().swap_remove(which);
        let n = cc.base().len();
        let mut r = rng(seed);
        let (_, f) = split(&cc, d, &random_function(&mut r, n));
        let (g, _) = split(&cc, d, &random_function(&mut r, n));
        prop_assert!(Scalar::is_zero(&u_seminorm_pow(&cc, d, &f).unwrap()));
        prop_assert!(Scalar::is_zero(&u_seminorm_pow(&cc, d, &f.mul(&g)).unwrap()));
    }

    #[test]
    fn zero_seminorm_vertex_in_a_simplicial_set_kills_the_product(seed in any::<u64>(), which in 0usize..5, top in 1u32..8) {
        let (_, cc) = systems().swap_remove(which);
        let n = cc.base().len();
        let mut r = rng(seed);
        let s = SimplicialSet::closure(3, &[Vertex::new(top, 3)]).unwrap();
        let u = Vertex::root(3);
        let d = s.degree(&u).unwrap();
        let mut fs: Vec<FunctionOnSpace<ExactComplex>> = (0..8).map(|_| one(n)).collect();
        for v in s.vertex_list() {
            fs[v.index()] = random_function(&mut r, n);
        }
        fs[u.index()] = split(&cc, d, &random_function(&mut r, n)).1;
        prop_assert!(Scalar::is_zero(&u_product(&cc, 3, &fs).unwrap()));
    }

    #[test]
    fn projection_preserves_products_on_low_simplicial_sets(seed in any::<u64>(), which in 0usize..5, tops in proptest::collection::vec(1u32..8, 1..3)) {
        let (_, cc) = systems().swap_remove(which);
        let n = cc.base().len();
        let mut r = rng(seed);
        let verts: Vec<Vertex> = tops.iter().map(|&b| Vertex::new(b, 3)).collect();
        let s = SimplicialSet::closure(3, &verts).unwrap();
        let d = s.height();
        let mut fs: Vec<FunctionOnSpace<ExactComplex>> = (0..8).map(|_| one(n)).collect();
        for v in s.vertex_list() {
            fs[v.index()] = random_function(&mut r, n);
        }
        let gs: Vec<FunctionOnSpace<ExactComplex>> = fs.iter().map(|f| split(&cc, d, f).0).collect();
        prop_assert_eq!(u_product(&cc, 3, &fs).unwrap(), u_product(&cc, 3, &gs).unwrap());
    }

    #[test]
    fn convolution_of_projections_is_projected_convolution(seed in any::<u64>(), which in 0usize..5, d in 1usize..=2) {
        let (_, cc) = systems().swap_remove(which);
        let n = cc.base().len();
        let mut r = rng(seed);
        let corner: Vec<FunctionOnSpace<ExactComplex>> = (0..(1 << (d + 1)) - 1).map(|_| random_function(&mut r, n)).collect();
        let projected: Vec<FunctionOnSpace<ExactComplex>> = corner.iter().map(|f| split(&cc, d, f).0).collect();
        let lhs = u_convolution(&cc, d + 1, &projected).unwrap();
        let p = fourier_factor(&cc, d).unwrap();
        let rhs = cond_expect(cc.base(), &u_convolution(&cc, d + 1, &corner).unwrap(), &p).unwrap();
        prop_assert!(lhs.eq_on(&rhs, cc.base()));
    }
}
