//! Cubic couplings `(μ^⟦n⟧)_n` and their axiom and structure verifiers.

use crate::abelian::{standard_cube_coupling, FiniteAbelianGroup};
use crate::coupling::{index_cond_independent, is_idempotent, Coupling, Label, Tuple};
use crate::cube::{
    enumerate_morphisms, outer_point, s3_elements, tricube_action, tricube_embed, tricube_vertices, Face, MorphismFilter,
    SimplicialSet, Vertex, MAX_BLOWUP_DIM,
};
use crate::error::{cap, Error, Result};
use crate::measure::{cond_independent_pair, independent, FiniteProbSpace, Partition};
use crate::report::{Check, Report, Verdict};
use crate::scalar::Q;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

type Provider = Arc<dyn Fn(usize) -> Result<Coupling> + Send + Sync>;

/// A memoized sequence of cube couplings up to a horizon.
#[derive(Clone)]
pub struct CubicCoupling {
    base: FiniteProbSpace,
    horizon: usize,
    levels: Arc<Vec<OnceLock<Result<Arc<Coupling>>>>>,
    provider: Provider,
}

impl fmt::Debug for CubicCoupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CubicCoupling").field("atoms", &self.base.len()).field("horizon", &self.horizon).finish()
    }
}

impl CubicCoupling {
    /// Levels computed on demand by `provider` and cached.
    pub fn lazy(base: FiniteProbSpace, horizon: usize, provider: impl Fn(usize) -> Result<Coupling> + Send + Sync + 'static) -> Self {
        let levels = Arc::new((0..=horizon).map(|_| OnceLock::new()).collect());
        CubicCoupling { base, horizon, levels, provider: Arc::new(provider) }
    }

    /// Precomputed levels `μ^⟦0⟧, …, μ^⟦horizon⟧`.
    pub fn from_levels(base: FiniteProbSpace, levels: Vec<Coupling>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidEntry("at least the level 0 coupling is required".into()));
        }
        for (n, mu) in levels.iter().enumerate() {
            if mu.base() != &base || mu.arity() != 1 << n {
                return Err(Error::DimensionMismatch(format!("level {} is not a coupling of the base on ⟦{}⟧", n, n)));
            }
        }
        let horizon = levels.len() - 1;
        let cells: Vec<OnceLock<Result<Arc<Coupling>>>> = levels
            .into_iter()
            .map(|mu| {
                let cell = OnceLock::new();
                let _ = cell.set(Ok(Arc::new(mu)));
                cell
            })
            .collect();
        Ok(CubicCoupling {
            base,
            horizon,
            levels: Arc::new(cells),
            provider: Arc::new(move |n| Err(Error::HorizonExceeded { requested: n, horizon })),
        })
    }

    /// The standard cube coupling of a finite abelian group.
    pub fn standard(group: &FiniteAbelianGroup, horizon: usize) -> Self {
        let g = group.clone();
        CubicCoupling::lazy(group.space(), horizon, move |n| standard_cube_coupling(&g, n))
    }

    pub fn base(&self) -> &FiniteProbSpace {
        &self.base
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `μ^⟦n⟧`.
    pub fn level(&self, n: usize) -> Result<Arc<Coupling>> {
        if n > self.horizon {
            return Err(Error::HorizonExceeded { requested: n, horizon: self.horizon });
        }
        self.levels[n]
            .get_or_init(|| {
                let mu = (self.provider)(n)?;
                let mu = mu.with_labels(Label::cube(n)?)?;
                Ok(Arc::new(mu))
            })
            .clone()
    }

    /// Every level pushed through the partition `p` of the base.
    pub fn factor(&self, p: &Partition) -> Result<CubicCoupling> {
        let levels = (0..=self.horizon).map(|n| self.level(n)?.factor(p)).collect::<Result<Vec<_>>>()?;
        CubicCoupling::from_levels(levels[0].base().clone(), levels)
    }
}

fn positions_of(vs: &[Vertex]) -> Vec<usize> {
    vs.iter().map(|v| v.index()).collect()
}

fn fmt_vertices(vs: &[Vertex]) -> String {
    let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn check_budget(n_max: usize) -> Result<()> {
    cap("verification dimension", MAX_BLOWUP_DIM as u64, n_max as u64)
}

fn consistency_check(cc: &CubicCoupling, n: usize, filter: MorphismFilter, id: &str) -> Result<Check> {
    let mu = cc.level(n)?;
    let mut witness = None;
    'outer: for m in 0..=n {
        let target = cc.level(m)?;
        for phi in enumerate_morphisms(m, n, filter)? {
            let sub = mu.subcoupling(&phi.position_map(), Label::cube(m)?)?;
            if !sub.same_measure(&target) {
                witness = Some(format!("morphism {} from ⟦{}⟧", phi, m));
                break 'outer;
            }
        }
    }
    Ok(Check::from_witness(id, witness).param("n", n))
}

fn base_check(cc: &CubicCoupling) -> Result<Check> {
    let mu0 = cc.level(0)?;
    let ok = mu0.same_measure(&Coupling::base_coupling(cc.base(), Label::name("x")));
    Ok(Check::from_witness("base", if ok { None } else { Some("μ^⟦0⟧ differs from λ".into()) }))
}

fn ergodicity_check(cc: &CubicCoupling) -> Result<Check> {
    let mu1 = cc.level(1)?;
    let product = Coupling::product(cc.base(), Label::cube(1)?);
    let witness = if mu1.same_measure(&product) {
        None
    } else {
        let mut keys: Vec<&Tuple> = mu1.tuples().iter().chain(product.tuples()).collect();
        keys.sort();
        keys.into_iter().find(|t| mu1.mass(t) != product.mass(t)).map(|t| format!("ergodicity: cylinder {:?}", t))
    };
    Ok(Check::from_witness("ergodicity", witness).param("n", 1))
}

fn cond_independence_check(cc: &CubicCoupling, n: usize) -> Result<Check> {
    let mu = cc.level(n)?;
    let mut witness = None;
    'outer: for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let f0 = Face::hyperplane(n, i, a);
                    let f1 = Face::hyperplane(n, j, b);
                    if !index_cond_independent(&mu, &positions_of(&f0.vertices()), &positions_of(&f1.vertices()))? {
                        witness = Some(format!("faces {} and {}", f0, f1));
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(Check::from_witness("conditional_independence", witness).param("n", n))
}

/// `μ^⟦n⟧` viewed as a coupling of `μ_{F0}` with itself along `β`, where
/// `F0 = {v_i = 0}`; `None` when the two face marginals differ.
pub fn face_pair_coupling(mu: &Coupling, n: usize, i: usize) -> Result<Option<Coupling>> {
    let f0 = Face::hyperplane(n, i, 0).vertices();
    let p0 = positions_of(&f0);
    let p1: Vec<usize> = f0.iter().map(|v| v.flip(i).index()).collect();
    let m0 = mu.marginal_map(&p0);
    if m0 != mu.marginal_map(&p1) {
        return Ok(None);
    }
    let atoms: Vec<&Tuple> = m0.keys().collect();
    let index: BTreeMap<&Tuple, u32> = atoms.iter().enumerate().map(|(k, t)| (*t, k as u32)).collect();
    let space = FiniteProbSpace::new(m0.values().cloned().collect())?;
    let mut map: BTreeMap<Tuple, Q> = BTreeMap::new();
    for (t, m) in mu.iter() {
        let a: Tuple = p0.iter().map(|&p| t[p]).collect();
        let b: Tuple = p1.iter().map(|&p| t[p]).collect();
        *map.entry(vec![index[&a], index[&b]]).or_insert_with(Q::zero) += m;
    }
    Ok(Some(Coupling::from_map(space, vec![Label::name("F0"), Label::name("F1")], map)))
}

fn idempotence_check(cc: &CubicCoupling, n: usize) -> Result<Check> {
    let mu = cc.level(n)?;
    let mut witness = None;
    for i in 0..n {
        match face_pair_coupling(&mu, n, i)? {
            None => {
                witness = Some(format!("faces v{}=0 and v{}=1 have different marginals", i + 1, i + 1));
                break;
            }
            Some(pair) if !is_idempotent(&pair)? => {
                witness = Some(format!("not idempotent along the flip of v{}", i + 1));
                break;
            }
            Some(_) => {}
        }
    }
    Ok(Check::from_witness("idempotence", witness).param("n", n))
}

/// Consistency, ergodicity and conditional independence for `n ≤ n_max`.
pub fn verify_axioms_v1(cc: &CubicCoupling, n_max: usize) -> Result<Report> {
    check_budget(n_max)?;
    let mut r = Report::new();
    r.push(base_check(cc)?);
    for n in 0..=n_max {
        r.push(consistency_check(cc, n, MorphismFilter::Injective, "consistency")?);
    }
    if n_max >= 1 {
        r.push(ergodicity_check(cc)?);
    }
    for n in 2..=n_max {
        r.push(cond_independence_check(cc, n)?);
    }
    Ok(r)
}

/// Face consistency, ergodicity and idempotence for `n ≤ n_max`.
pub fn verify_axioms_v2(cc: &CubicCoupling, n_max: usize) -> Result<Report> {
    check_budget(n_max)?;
    let mut r = Report::new();
    r.push(base_check(cc)?);
    for n in 0..=n_max {
        r.push(consistency_check(cc, n, MorphismFilter::FaceMap, "face_consistency")?);
    }
    if n_max >= 1 {
        r.push(ergodicity_check(cc)?);
    }
    for n in 1..=n_max {
        r.push(idempotence_check(cc, n)?);
    }
    Ok(r)
}

/// `H1 ⊥ H2` in `μ^⟦n⟧` for every pair of nonempty simplicial sets.
pub fn verify_simplicial_cis(cc: &CubicCoupling, n: usize) -> Result<Report> {
    cap("simplicial lattice dimension", 3, n as u64)?;
    let mu = cc.level(n)?;
    let sets: Vec<SimplicialSet> = SimplicialSet::all(n)?.into_iter().filter(|s| !s.vertices.is_empty()).collect();
    let mut witness = None;
    let mut pairs = 0u64;
    'outer: for h1 in &sets {
        for h2 in &sets {
            pairs += 1;
            if !index_cond_independent(&mu, &positions_of(&h1.vertex_list()), &positions_of(&h2.vertex_list()))? {
                witness = Some(format!("{} vs {}", fmt_vertices(&h1.vertex_list()), fmt_vertices(&h2.vertex_list())));
                break 'outer;
            }
        }
    }
    let mut r = Report::new();
    r.push(Check::from_witness("simplicial_cis", witness).param("n", n).value("pairs", pairs));
    Ok(r)
}

/// Invariance of the tricube subcoupling under the coordinatewise `S_3^n` action.
pub fn verify_tricube_symmetry(cc: &CubicCoupling, n: usize) -> Result<Report> {
    cap("tricube dimension", 2, n as u64)?;
    if n == 2 {
        cap("tricube base size", 3, cc.base().len() as u64)?;
    }
    let mu = cc.level(2 * n)?;
    let verts = tricube_vertices(n)?;
    let labels: Vec<Label> = verts.iter().map(|v| Label::Vertex(*v)).collect();
    let reference = mu.subcoupling(&positions_of(&verts), labels.clone())?;
    let s3 = s3_elements();
    let mut witness = None;
    let total = s3.len().pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let perms: Vec<[i8; 3]> = (0..n)
            .map(|_| {
                let p = s3[c % s3.len()];
                c /= s3.len();
                p
            })
            .collect();
        let moved = verts.iter().map(|v| tricube_action(&perms, v).map(|w| w.index())).collect::<Result<Vec<_>>>()?;
        if !mu.subcoupling(&moved, labels.clone())?.same_measure(&reference) {
            witness = Some(format!("permutations {:?}", perms));
            break;
        }
    }
    let mut r = Report::new();
    r.push(Check::from_witness("tricube_symmetry", witness).param("n", n).value("actions", total as u64));
    Ok(r)
}

/// The subcoupling along `q_n ∘ ω_n` equals `μ^⟦n⟧`.
pub fn verify_outer_point(cc: &CubicCoupling, n: usize) -> Result<Report> {
    cap("tricube dimension", 2, n as u64)?;
    let big = cc.level(2 * n)?;
    let small = cc.level(n)?;
    let positions = Vertex::all(n)?.iter().map(|v| tricube_embed(&outer_point(v)).map(|w| w.index())).collect::<Result<Vec<_>>>()?;
    let ok = big.subcoupling(&positions, Label::cube(n)?)?.same_measure(&small);
    let mut r = Report::new();
    r.push(Check::from_witness("outer_point", if ok { None } else { Some(format!("outer points of T_{}", n)) }).param("n", n));
    Ok(r)
}

/// `A_F` independent of `A_w` for every proper face `F` and vertex `w ∉ F`.
pub fn verify_face_locality(cc: &CubicCoupling, m: usize) -> Result<Report> {
    check_budget(m)?;
    let mu = cc.level(m)?;
    let space = mu.support_space();
    let mut witness = None;
    'outer: for f in Face::all(m)? {
        let fv = f.vertices();
        let pf = mu.cylinder_partition(&positions_of(&fv));
        for w in Vertex::all(m)?.into_iter().filter(|w| !f.contains(w)) {
            let pw = mu.cylinder_partition(&[w.index()]);
            if !independent(&space, &pf, &pw)? {
                witness = Some(format!("face {} and vertex {}", f, w));
                break 'outer;
            }
        }
    }
    let mut r = Report::new();
    r.push(Check::from_witness("face_locality", witness).param("m", m));
    Ok(r)
}

/// `A_{0^d} ⫫ A_{K_d}` in `μ^⟦d⟧` through the operator identity.
pub fn verify_keybot(cc: &CubicCoupling, d: usize) -> Result<Report> {
    cap("keybot dimension", 3, d as u64)?;
    let mu = cc.level(d)?;
    let space = mu.support_space();
    let root = mu.cylinder_partition(&[0]);
    let corner = mu.cylinder_partition(&positions_of(&Vertex::corner(d)?));
    let ok = cond_independent_pair(&space, &root, &corner)?;
    let mut r = Report::new();
    r.push(Check::from_witness("keybot", if ok { None } else { Some(format!("root and corner of ⟦{}⟧", d)) }).param("d", d));
    Ok(r)
}

/// `μ^⟦n⟧` is invariant under every automorphism of `⟦n⟧`.
pub fn verify_automorphism_invariance(cc: &CubicCoupling, n: usize) -> Result<Report> {
    check_budget(n)?;
    let mu = cc.level(n)?;
    let witness = enumerate_morphisms(n, n, MorphismFilter::Automorphism)?
        .into_iter()
        .find(|phi| !mu.subcoupling(&phi.position_map(), Label::cube(n).unwrap()).map(|s| s.same_measure(&mu)).unwrap_or(false))
        .map(|phi| format!("automorphism {}", phi));
    let mut r = Report::new();
    r.push(Check::from_witness("automorphism_invariance", witness).param("n", n));
    Ok(r)
}

/// Marks a report's ergodicity-dependent checks as not applicable.
pub fn downgrade_non_ergodic(report: &mut Report) {
    for c in &mut report.checks {
        if c.check_id != "ergodicity" && c.verdict == Verdict::Fail {
            c.verdict = Verdict::NotApplicable;
        }
    }
}
