//! Filtered permutation actions, the face-generated cube groups `H_{n,k}`,
//! invariant σ-algebras and the Host–Kra recursion.

use crate::coupling::{Coupling, Label, Tuple};
use crate::cube::Face;
use crate::cubic::CubicCoupling;
use crate::error::{cap, Error, Result};
use crate::measure::{FiniteProbSpace, FunctionOnSpace, Partition};
use crate::scalar::{Scalar, Q};
use crate::uniformity::{fourier_factor, u_seminorm_pow};
use petgraph::unionfind::UnionFind;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

/// A permutation of atoms, `p[x]` being the image of `x`.
pub type Perm = Vec<u32>;

/// Largest group closure computed while checking the filtration law.
pub const MAX_CLOSURE: usize = 100_000;

pub fn identity_perm(n: usize) -> Perm {
    (0..n as u32).collect()
}

/// `a ∘ b`: apply `b`, then `a`.
pub fn compose(a: &Perm, b: &Perm) -> Perm {
    b.iter().map(|&x| a[x as usize]).collect()
}

pub fn inverse(a: &Perm) -> Perm {
    let mut out = vec![0; a.len()];
    for (x, &y) in a.iter().enumerate() {
        out[y as usize] = x as u32;
    }
    out
}

fn is_permutation(p: &Perm, n: usize) -> bool {
    p.len() == n && p.iter().map(|&x| x as usize).collect::<BTreeSet<_>>() == (0..n).collect()
}

/// Elements of the group generated by `gens` acting on `n` points.
pub fn generated_group(gens: &[Perm], n: usize, limit: usize) -> Result<HashSet<Perm>> {
    let id = identity_perm(n);
    let mut seen: HashSet<Perm> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in gens {
            let h = compose(s, &g);
            if !seen.contains(&h) {
                cap("generated group size", limit as u64, seen.len() as u64 + 1)?;
                seen.insert(h.clone());
                queue.push_back(h);
            }
        }
    }
    Ok(seen)
}

/// A filtered group given by generators acting on a finite space.
///
/// `levels[j]` holds generators of `G_{j+1}`; `G_i` is generated by all
/// levels from `i-1` on, and `G_0 = G_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredAction {
    space: FiniteProbSpace,
    levels: Vec<Vec<Perm>>,
}

impl FilteredAction {
    pub fn new(space: FiniteProbSpace, levels: Vec<Vec<Perm>>) -> Result<Self> {
        let n = space.len();
        for (j, lvl) in levels.iter().enumerate() {
            for (k, g) in lvl.iter().enumerate() {
                if !is_permutation(g, n) {
                    return Err(Error::InvalidEntry(format!("level {} generator {} is not a permutation of {} atoms", j, k, n)));
                }
                if (0..n).any(|x| space.weight(x) != space.weight(g[x] as usize)) {
                    return Err(Error::WeightDistorting(format!("level {} generator {}", j, k)));
                }
            }
        }
        let action = FilteredAction { space, levels };
        action.check_filtration()?;
        Ok(action)
    }

    /// `Z` acting on `Z_N` by `x ↦ x + 1`, lower central series.
    pub fn cyclic_shift(n: u32) -> Self {
        let shift: Perm = (0..n).map(|x| (x + 1) % n).collect();
        FilteredAction { space: FiniteProbSpace::uniform(n as usize), levels: vec![vec![shift]] }
    }

    pub fn space(&self) -> &FiniteProbSpace {
        &self.space
    }

    pub fn levels(&self) -> &[Vec<Perm>] {
        &self.levels
    }

    /// Index of the last nonempty level.
    pub fn degree(&self) -> usize {
        self.levels.iter().rposition(|l| !l.is_empty()).map_or(0, |j| j + 1)
    }

    /// Generators of `G_i`.
    pub fn generators(&self, i: usize) -> Vec<&Perm> {
        let start = i.max(1) - 1;
        self.levels.iter().skip(start).flatten().collect()
    }

    /// `[G_i, G_j] ⊆ G_{i+j}` on commutators of words of length at most two.
    fn check_filtration(&self) -> Result<()> {
        let n = self.space.len();
        let deg = self.degree();
        let words = |i: usize| -> Vec<Perm> {
            let mut letters: Vec<Perm> = self.generators(i).into_iter().cloned().collect();
            letters.extend(letters.clone().iter().map(inverse));
            let mut out = letters.clone();
            for a in &letters {
                for b in &letters {
                    out.push(compose(a, b));
                }
            }
            out
        };
        for i in 1..=deg {
            for j in i..=deg {
                let target: Vec<Perm> = self.generators(i + j).into_iter().cloned().collect();
                let group = generated_group(&target, n, MAX_CLOSURE)?;
                for u in words(i) {
                    for w in words(j) {
                        let c = compose(&compose(&inverse(&u), &inverse(&w)), &compose(&u, &w));
                        if !group.contains(&c) {
                            return Err(Error::FiltrationViolation(format!("[G_{}, G_{}] leaves G_{}", i, j, i + j)));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Transitivity of `G_1` on the support.
    pub fn is_ergodic(&self) -> bool {
        let supp = self.space.support();
        if supp.is_empty() {
            return true;
        }
        let mut uf = UnionFind::<usize>::new(self.space.len());
        for g in self.generators(1) {
            for &x in &supp {
                uf.union(x, g[x] as usize);
            }
        }
        supp.iter().all(|&x| uf.equiv(x, supp[0]))
    }
}

/// `g^F`: `g` applied at the coordinates of face `F`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeGenerator {
    pub face: Face,
    pub perm: Perm,
}

impl CubeGenerator {
    pub fn apply(&self, t: &[u32]) -> Tuple {
        t.iter()
            .enumerate()
            .map(|(v, &x)| if self.face.contains(&crate::cube::Vertex::new(v as u32, self.face.ambient_dim())) { self.perm[x as usize] } else { x })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubePermutationGroup {
    pub n: usize,
    pub k: usize,
    pub generators: Vec<CubeGenerator>,
}

impl CubePermutationGroup {
    /// The generators as permutations of all of `Ω^⟦n⟧`, tuples coded in base `|Ω|`
    /// with vertex 0 least significant.
    pub fn full_permutations(&self, omega: usize) -> Result<Vec<Perm>> {
        let verts = 1usize << self.n;
        let size = (omega as u64).checked_pow(verts as u32).unwrap_or(u64::MAX);
        cap("cube configuration space", 100_000, size)?;
        let decode = |mut c: usize| -> Tuple {
            (0..verts)
                .map(|_| {
                    let d = c % omega;
                    c /= omega;
                    d as u32
                })
                .collect()
        };
        let encode = |t: &[u32]| t.iter().rev().fold(0usize, |acc, &x| acc * omega + x as usize) as u32;
        Ok(self.generators.iter().map(|g| (0..size as usize).map(|c| encode(&g.apply(&decode(c)))).collect()).collect())
    }
}

/// Generators `g^F` of `H_{n,k}`: faces of dimension `d` carry generators of `G_{n-d+k}`.
pub fn cube_group_generators(action: &FilteredAction, n: usize, k: usize) -> Result<CubePermutationGroup> {
    let mut seen = BTreeSet::new();
    let mut generators = Vec::new();
    for face in Face::all(n)? {
        let level = n - face.dim() + k;
        for g in action.generators(level) {
            let gen = CubeGenerator { face: face.clone(), perm: g.clone() };
            if seen.insert(gen.clone()) {
                generators.push(gen);
            }
        }
    }
    Ok(CubePermutationGroup { n, k, generators })
}

/// Orbits of the generated group on the support tuples of `mu`, on its support space.
pub fn invariant_partition(group: &CubePermutationGroup, mu: &Coupling) -> Result<Partition> {
    let mut uf = UnionFind::<usize>::new(mu.support_size());
    for (i, t) in mu.tuples().iter().enumerate() {
        for g in &group.generators {
            let image = g.apply(t);
            let j = mu.index_of(&image).ok_or_else(|| Error::OffSupport(format!("{:?}", t)))?;
            if mu.masses()[i] != mu.masses()[j] {
                return Err(Error::WeightDistorting(format!("cube generator on face {}", g.face)));
            }
            uf.union(i, j);
        }
    }
    Ok(Partition::from_keys(&mu.support_space(), |i| uf.find(i)))
}

/// From `μ^⟦n⟧` and `I_n` to `μ^⟦n+1⟧`: the relative square over `I_n`,
/// the second copy sitting on the face `v_{n+1} = 1`.
fn next_level(mu: &Coupling, inv: &Partition, n: usize) -> Result<Coupling> {
    let space = mu.support_space();
    let bw = inv.block_weights(&space);
    let mut map: BTreeMap<Tuple, Q> = BTreeMap::new();
    for (b, blk) in inv.blocks().iter().enumerate() {
        for &i in blk {
            for &j in blk {
                let mut t = mu.tuples()[i].clone();
                t.extend_from_slice(&mu.tuples()[j]);
                map.insert(t, &mu.masses()[i] * &mu.masses()[j] / &bw[b]);
            }
        }
    }
    Coupling::new(mu.base().clone(), Label::cube(n + 1)?, map)
}

/// Host–Kra couplings `μ^⟦0⟧, …, μ^⟦n_max⟧` of a filtered action.
pub fn host_kra_coupling(action: &FilteredAction, n_max: usize) -> Result<CubicCoupling> {
    let mut levels = vec![Coupling::base_coupling(&action.space, Label::cube(0)?.remove(0))];
    for n in 0..n_max {
        let group = cube_group_generators(action, n, 1)?;
        let inv = invariant_partition(&group, &levels[n])?;
        let next = next_level(&levels[n], &inv, n)?;
        levels.push(next);
    }
    CubicCoupling::from_levels(action.space.clone(), levels)
}

/// `‖f‖_{U^d}^{2^d}` of the action.
pub fn hk_seminorm<S: Scalar>(action: &FilteredAction, d: usize, f: &FunctionOnSpace<S>) -> Result<S> {
    u_seminorm_pow(&host_kra_coupling(action, d)?, d, f)
}

/// `k`-th Host–Kra factor, checked to be preserved by every generator of `G_1`.
pub fn hk_factor(action: &FilteredAction, k: usize) -> Result<Partition> {
    let p = fourier_factor(&host_kra_coupling(action, k + 1)?, k + 1)?;
    for g in action.generators(1) {
        for blk in p.blocks() {
            let target = p.block_of(g[blk[0]] as usize);
            if blk.iter().any(|&x| p.block_of(g[x] as usize) != target) {
                return Err(Error::NotInvariant(format!("block containing atom {} is split by a generator", blk[0])));
            }
        }
    }
    Ok(p)
}
