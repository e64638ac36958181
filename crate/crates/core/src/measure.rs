//! Finite probability spaces, functions on them, and partitions as σ-algebras.
//!
//! Zero-weight atoms never belong to a partition block, so every mod-null
//! relation becomes an exact set relation on the support.

use crate::error::{Error, Result};
use crate::scalar::{fmt_q, ExactComplex, Scalar, Q};
use num_traits::{One, Signed, Zero};
use petgraph::unionfind::UnionFind;
use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteProbSpace {
    weights: Vec<Q>,
}

impl FiniteProbSpace {
    pub fn new(weights: Vec<Q>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::NotProbability(format!("negative weight {}", fmt_q(w))));
        }
        let total: Q = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::NotProbability(format!("weights sum to {}", fmt_q(&total))));
        }
        Ok(FiniteProbSpace { weights })
    }

    pub fn uniform(n: usize) -> Self {
        let w = Q::new(1.into(), (n as i64).into());
        FiniteProbSpace { weights: vec![w; n] }
    }

    pub(crate) fn from_weights_unchecked(weights: Vec<Q>) -> Self {
        FiniteProbSpace { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, atom: usize) -> &Q {
        &self.weights[atom]
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.weights[a].is_positive()).collect()
    }

    pub fn in_support(&self, atom: usize) -> bool {
        self.weights[atom].is_positive()
    }

    pub fn integral<S: Scalar>(&self, f: &FunctionOnSpace<S>) -> Result<S> {
        self.check_fn(f)?;
        Ok(self
            .weights
            .iter()
            .zip(&f.values)
            .filter(|(w, _)| w.is_positive())
            .fold(S::zero(), |acc, (w, v)| acc.add(&v.scale(w))))
    }

    /// `‖f‖₂²`.
    pub fn norm_sqr<S: Scalar>(&self, f: &FunctionOnSpace<S>) -> Result<S> {
        self.integral(&f.map(|v| v.norm_sqr()))
    }

    fn check_fn<S: Scalar>(&self, f: &FunctionOnSpace<S>) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}

/// A complex-valued function on the atoms of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionOnSpace<S = ExactComplex> {
    pub values: Vec<S>,
}

impl<S: Scalar> FunctionOnSpace<S> {
    pub fn new(values: Vec<S>) -> Self {
        FunctionOnSpace { values }
    }

    pub fn constant(n: usize, c: S) -> Self {
        FunctionOnSpace { values: vec![c; n] }
    }

    pub fn from_rationals(values: &[Q]) -> Self {
        FunctionOnSpace { values: values.iter().map(S::from_q).collect() }
    }

    pub fn indicator(n: usize, atoms: &[usize]) -> Self {
        let mut values = vec![S::zero(); n];
        for &a in atoms {
            values[a] = S::one();
        }
        FunctionOnSpace { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, op: impl Fn(&S) -> S) -> Self {
        FunctionOnSpace { values: self.values.iter().map(op).collect() }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn mul(&self, other: &Self) -> Self {
        FunctionOnSpace { values: self.values.iter().zip(&other.values).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        FunctionOnSpace { values: self.values.iter().zip(&other.values).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        FunctionOnSpace { values: self.values.iter().zip(&other.values).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|v| v.mul(c))
    }

    /// Equality on the support of `space`.
    pub fn eq_on(&self, other: &Self, space: &FiniteProbSpace) -> bool {
        self.len() == other.len()
            && space.support().into_iter().all(|a| self.values[a].approx_eq(&other.values[a]))
    }

    /// True when the function vanishes on the support of `space`.
    pub fn is_null(&self, space: &FiniteProbSpace) -> bool {
        space.support().into_iter().all(|a| self.values[a].is_zero())
    }
}

/// A partition of the support atoms, standing for a σ-algebra mod null sets.
///
/// Blocks are sorted internally and ordered by their smallest atom, so equal
/// partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: Vec<Option<usize>>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Groups support atoms by key.
    pub fn from_keys<K: Eq + Hash>(space: &FiniteProbSpace, key: impl Fn(usize) -> K) -> Partition {
        let mut seen: HashMap<K, usize> = HashMap::new();
        let mut block_of = vec![None; space.len()];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for a in space.support() {
            let next = blocks.len();
            let b = *seen.entry(key(a)).or_insert(next);
            if b == next {
                blocks.push(Vec::new());
            }
            blocks[b].push(a);
            block_of[a] = Some(b);
        }
        Partition { block_of, blocks }
    }

    /// Builds a partition from explicit blocks; zero-weight atoms are dropped.
    pub fn from_blocks(space: &FiniteProbSpace, blocks: &[Vec<usize>]) -> Result<Partition> {
        let mut label = vec![None; space.len()];
        for (i, b) in blocks.iter().enumerate() {
            for &a in b {
                if a >= space.len() {
                    return Err(Error::InvalidEntry(format!("atom {} outside a space of {} atoms", a, space.len())));
                }
                if label[a].is_some() {
                    return Err(Error::InvalidEntry(format!("atom {} appears in two blocks", a)));
                }
                label[a] = Some(i);
            }
        }
        if let Some(a) = space.support().into_iter().find(|&a| label[a].is_none()) {
            return Err(Error::InvalidEntry(format!("support atom {} is in no block", a)));
        }
        Ok(Partition::from_keys(space, |a| label[a]))
    }

    pub fn discrete(space: &FiniteProbSpace) -> Partition {
        Partition::from_keys(space, |a| a)
    }

    pub fn trivial(space: &FiniteProbSpace) -> Partition {
        Partition::from_keys(space, |_| ())
    }

    pub fn num_atoms(&self) -> usize {
        self.block_of.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, atom: usize) -> Option<usize> {
        self.block_of[atom]
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() <= 1
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }

    pub fn block_weights(&self, space: &FiniteProbSpace) -> Vec<Q> {
        self.blocks.iter().map(|b| b.iter().map(|&a| space.weight(a)).sum()).collect()
    }

    fn compatible(&self, other: &Partition) -> Result<()> {
        if self.block_of.len() != other.block_of.len()
            || self.block_of.iter().zip(&other.block_of).any(|(a, b)| a.is_some() != b.is_some())
        {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    fn check_space(&self, space: &FiniteProbSpace) -> Result<()> {
        if self.block_of.len() != space.len()
            || (0..space.len()).any(|a| self.block_of[a].is_some() != space.in_support(a))
        {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// Refinement order: every block of `self` sits inside a block of `other`.
    pub fn is_finer_than(&self, other: &Partition) -> Result<bool> {
        self.compatible(other)?;
        Ok(self.blocks.iter().all(|b| b.iter().all(|&a| other.block_of[a] == other.block_of[b[0]])))
    }

    /// Common refinement.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.compatible(other)?;
        Ok(self.rebuild(|a| (self.block_of[a], other.block_of[a])))
    }

    /// Finest partition coarser than both.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.compatible(other)?;
        let mut uf = UnionFind::<usize>::new(self.block_of.len());
        for p in [self, other] {
            for b in &p.blocks {
                for &a in &b[1..] {
                    uf.union(b[0], a);
                }
            }
        }
        Ok(self.rebuild(|a| uf.find(a)))
    }

    fn rebuild<K: Eq + Hash>(&self, key: impl Fn(usize) -> K) -> Partition {
        let mut seen: HashMap<K, usize> = HashMap::new();
        let mut block_of = vec![None; self.block_of.len()];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for a in 0..self.block_of.len() {
            if self.block_of[a].is_none() {
                continue;
            }
            let next = blocks.len();
            let b = *seen.entry(key(a)).or_insert(next);
            if b == next {
                blocks.push(Vec::new());
            }
            blocks[b].push(a);
            block_of[a] = Some(b);
        }
        Partition { block_of, blocks }
    }

    /// Whether `f` is constant on every block (on the support).
    pub fn measurable<S: Scalar>(&self, f: &FunctionOnSpace<S>) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|&a| f.values[a].approx_eq(&f.values[b[0]])))
    }

    /// Pushes the partition through `map : atoms → target atoms`; blocks whose
    /// images overlap are merged.
    pub fn push_forward(&self, target: &FiniteProbSpace, map: impl Fn(usize) -> usize) -> Partition {
        let mut uf = UnionFind::<usize>::new(target.len());
        for b in &self.blocks {
            let first = map(b[0]);
            for &a in &b[1..] {
                uf.union(first, map(a));
            }
        }
        Partition::from_keys(target, |a| uf.find(a))
    }
}

/// `E(f | P)`, zero off the support.
pub fn cond_expect<S: Scalar>(space: &FiniteProbSpace, f: &FunctionOnSpace<S>, p: &Partition) -> Result<FunctionOnSpace<S>> {
    space.check_fn(f)?;
    p.check_space(space)?;
    let mut out = vec![S::zero(); space.len()];
    for b in p.blocks() {
        let w: Q = b.iter().map(|&a| space.weight(a)).sum();
        let s = b.iter().fold(S::zero(), |acc, &a| acc.add(&f.values[a].scale(space.weight(a))));
        let avg = s.div_q(&w);
        for &a in b {
            out[a] = avg.clone();
        }
    }
    Ok(FunctionOnSpace::new(out))
}

/// Joint block weights `w(b ∩ c)` keyed by block pair.
fn joint_weights(space: &FiniteProbSpace, p: &Partition, r: &Partition) -> BTreeMap<(usize, usize), Q> {
    let mut out: BTreeMap<(usize, usize), Q> = BTreeMap::new();
    for a in space.support() {
        let key = (p.block_of[a].unwrap(), r.block_of[a].unwrap());
        *out.entry(key).or_insert_with(Q::zero) += space.weight(a);
    }
    out
}

/// `P0 ⫫ P1` relative to `B`, via `E(f | P0 ∨ B) = E(f | B)` for every
/// indicator `f` of a `P1` block.
pub fn cond_independent(space: &FiniteProbSpace, p0: &Partition, p1: &Partition, b: &Partition) -> Result<bool> {
    p0.check_space(space)?;
    p1.check_space(space)?;
    b.check_space(space)?;
    let j = p0.join(b)?;
    let wj = j.block_weights(space);
    let wb = b.block_weights(space);
    let cj = joint_weights(space, p1, &j);
    let cb = joint_weights(space, p1, b);
    let parent: Vec<usize> = j.blocks().iter().map(|blk| b.block_of[blk[0]].unwrap()).collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); b.num_blocks()];
    for (ji, &bi) in parent.iter().enumerate() {
        children[bi].push(ji);
    }
    let zero = Q::zero();
    for (&(c, bi), w_cb) in &cb {
        for &ji in &children[bi] {
            let w_cj = cj.get(&(c, ji)).unwrap_or(&zero);
            if w_cj * &wb[bi] != w_cb * &wj[ji] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Plain independence `P0 ⫫ P1`.
pub fn independent(space: &FiniteProbSpace, p0: &Partition, p1: &Partition) -> Result<bool> {
    cond_independent(space, p0, p1, &Partition::trivial(space))
}

/// Checks `E(E(1_b | P_other) | ·) = E(1_b | M)` for every block `b` of `pi`,
/// where `M` is the meet: on each `c ⊂ M`, `w(b∩c)·w(M) = w(b)·w(c)`.
fn operator_identity(space: &FiniteProbSpace, pi: &Partition, other: &Partition, meet: &Partition) -> bool {
    let wi = pi.block_weights(space);
    let wo = other.block_weights(space);
    let wm = meet.block_weights(space);
    let joint = joint_weights(space, pi, other);
    let zero = Q::zero();
    let mut other_in_meet: Vec<Vec<usize>> = vec![Vec::new(); meet.num_blocks()];
    for (c, blk) in other.blocks().iter().enumerate() {
        other_in_meet[meet.block_of[blk[0]].unwrap()].push(c);
    }
    pi.blocks().iter().enumerate().all(|(b, blk)| {
        let m = meet.block_of[blk[0]].unwrap();
        other_in_meet[m].iter().all(|&c| {
            let w_bc = joint.get(&(b, c)).unwrap_or(&zero);
            w_bc * &wm[m] == &wi[b] * &wo[c]
        })
    })
}

/// `P0 ⫫ P1` in the sense of commuting conditional expectations; both
/// directions of the operator identity are checked.
pub fn cond_independent_pair(space: &FiniteProbSpace, p0: &Partition, p1: &Partition) -> Result<bool> {
    p0.check_space(space)?;
    p1.check_space(space)?;
    let m = p0.meet(p1)?;
    Ok(operator_identity(space, p0, p1, &m) && operator_identity(space, p1, p0, &m))
}

/// One-sided criterion: every `P0`-measurable `f` with `E(f | P0∧P1) = 0`
/// has `E(f | P1) = 0`. Evaluated on a spanning family of such `f`.
pub fn cond_independent_one_sided(space: &FiniteProbSpace, p0: &Partition, p1: &Partition) -> Result<bool> {
    p0.check_space(space)?;
    p1.check_space(space)?;
    let m = p0.meet(p1)?;
    let n = space.len();
    for blk in p0.blocks() {
        let f = FunctionOnSpace::<ExactComplex>::indicator(n, blk);
        let g = f.sub(&cond_expect(space, &f, &m)?);
        if !cond_expect(space, &g, p1)?.is_null(space) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn three() -> FiniteProbSpace {
        FiniteProbSpace::uniform(3)
    }

    #[test]
    fn join_and_meet_examples() {
        let s = three();
        let p = Partition::from_blocks(&s, &[vec![0], vec![1, 2]]).unwrap();
        let r = Partition::from_blocks(&s, &[vec![0, 1], vec![2]]).unwrap();
        assert!(p.join(&r).unwrap().is_discrete());
        assert!(p.meet(&r).unwrap().is_trivial());
        assert_eq!(p.join(&Partition::trivial(&s)).unwrap(), p);
        assert_eq!(p.join(&p).unwrap(), p);
        assert_eq!(p.meet(&p).unwrap(), p);
        assert_eq!(p.meet(&Partition::discrete(&s)).unwrap(), p);
    }

    #[test]
    fn space_mismatch_is_reported() {
        let p = Partition::trivial(&three());
        let r = Partition::trivial(&FiniteProbSpace::uniform(4));
        assert_eq!(p.join(&r), Err(Error::SpaceMismatch));
        let skewed = FiniteProbSpace::new(vec![q(1, 2), q(1, 2), q(0, 1)]).unwrap();
        assert_eq!(p.meet(&Partition::trivial(&skewed)), Err(Error::SpaceMismatch));
    }

    #[test]
    fn cond_expect_examples() {
        let s = three();
        let f = FunctionOnSpace::<ExactComplex>::from_rationals(&[q(1, 1), q(0, 1), q(0, 1)]);
        let p = Partition::from_blocks(&s, &[vec![0, 1], vec![2]]).unwrap();
        let e = cond_expect(&s, &f, &p).unwrap();
        assert_eq!(e, FunctionOnSpace::from_rationals(&[q(1, 2), q(1, 2), q(0, 1)]));
        assert_eq!(cond_expect(&s, &f, &Partition::discrete(&s)).unwrap(), f);
        let t = cond_expect(&s, &f, &Partition::trivial(&s)).unwrap();
        assert_eq!(t, FunctionOnSpace::from_rationals(&[q(1, 3), q(1, 3), q(1, 3)]));
    }

    #[test]
    fn cond_expect_is_zero_off_support() {
        let s = FiniteProbSpace::new(vec![q(1, 2), q(0, 1), q(1, 2)]).unwrap();
        let f = FunctionOnSpace::<ExactComplex>::from_rationals(&[q(1, 1), q(5, 1), q(3, 1)]);
        let e = cond_expect(&s, &f, &Partition::trivial(&s)).unwrap();
        assert_eq!(e, FunctionOnSpace::from_rationals(&[q(2, 1), q(0, 1), q(2, 1)]));
    }

    #[test]
    fn coin_coordinates() {
        let s = FiniteProbSpace::uniform(4);
        let first = Partition::from_keys(&s, |a| a & 1);
        let second = Partition::from_keys(&s, |a| a >> 1);
        let triv = Partition::trivial(&s);
        assert!(cond_independent(&s, &first, &second, &triv).unwrap());
        assert!(!cond_independent(&s, &first, &first, &triv).unwrap());
        let j = first.join(&second).unwrap();
        assert!(cond_independent(&s, &first, &first, &j).unwrap());
        assert!(cond_independent_pair(&s, &first, &second).unwrap());
        assert!(cond_independent_one_sided(&s, &first, &second).unwrap());
    }

    #[test]
    fn appendix_partitions_are_dependent_under_uniform() {
        let s = three();
        let p = Partition::from_blocks(&s, &[vec![0], vec![1, 2]]).unwrap();
        let r = Partition::from_blocks(&s, &[vec![0, 1], vec![2]]).unwrap();
        assert!(!cond_independent_pair(&s, &p, &r).unwrap());
        assert!(!cond_independent_one_sided(&s, &p, &r).unwrap());
        let coarse = Partition::from_blocks(&s, &[vec![0, 1, 2]]).unwrap();
        assert!(cond_independent_pair(&s, &p, &coarse).unwrap());
    }

    #[test]
    fn push_forward_merges_images() {
        let s = FiniteProbSpace::uniform(4);
        let target = FiniteProbSpace::uniform(2);
        let p = Partition::from_blocks(&s, &[vec![0, 1], vec![2], vec![3]]).unwrap();
        let pushed = p.push_forward(&target, |a| if a == 1 { 1 } else { 0 });
        assert!(pushed.is_trivial());
    }
}
