//! Couplings: probability measures on label-indexed tuples whose every
//! coordinate marginal is the base measure.

use crate::cube::Vertex;
use crate::error::{Error, Result};
use crate::measure::{FiniteProbSpace, FunctionOnSpace, Partition};
use crate::scalar::{fmt_q, Scalar, Q};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub type Tuple = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Vertex(Vertex),
    Name(String),
}

impl Label {
    pub fn name(s: &str) -> Label {
        Label::Name(s.to_string())
    }

    /// Labels `⟦n⟧` in mask order.
    pub fn cube(n: usize) -> Result<Vec<Label>> {
        Ok(Vertex::all(n)?.into_iter().map(Label::Vertex).collect())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Vertex(v) => write!(f, "{}", v),
            Label::Name(s) => write!(f, "{}", s),
        }
    }
}

fn fmt_tuple(t: &[u32]) -> String {
    let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    base: FiniteProbSpace,
    labels: Vec<Label>,
    tuples: Vec<Tuple>,
    masses: Vec<Q>,
}

impl Coupling {
    /// Validates total mass and the marginal law.
    pub fn new(
        base: FiniteProbSpace,
        labels: Vec<Label>,
        entries: impl IntoIterator<Item = (Tuple, Q)>,
    ) -> Result<Coupling> {
        let distinct: BTreeSet<&Label> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::InvalidEntry("repeated label".into()));
        }
        let mut map: BTreeMap<Tuple, Q> = BTreeMap::new();
        for (t, m) in entries {
            if t.len() != labels.len() {
                return Err(Error::DimensionMismatch(format!(
                    "tuple {} has {} entries for {} labels",
                    fmt_tuple(&t),
                    t.len(),
                    labels.len()
                )));
            }
            if let Some(x) = t.iter().find(|&&x| x as usize >= base.len()) {
                return Err(Error::InvalidEntry(format!("atom {} outside the base", x)));
            }
            if m.is_negative() {
                return Err(Error::NotProbability(format!("negative mass at {}", fmt_tuple(&t))));
            }
            *map.entry(t).or_insert_with(Q::zero) += m;
        }
        let c = Coupling::from_map(base, labels, map);
        let total: Q = c.masses.iter().sum();
        if !total.is_one() {
            return Err(Error::NotProbability(format!("total mass {}", fmt_q(&total))));
        }
        for (i, l) in c.labels.iter().enumerate() {
            let mut marg = vec![Q::zero(); c.base.len()];
            for (t, m) in c.iter() {
                marg[t[i] as usize] += m;
            }
            if marg.as_slice() != c.base.weights() {
                return Err(Error::MarginalMismatch { label: l.to_string() });
            }
        }
        Ok(c)
    }

    pub(crate) fn from_map(base: FiniteProbSpace, labels: Vec<Label>, map: BTreeMap<Tuple, Q>) -> Coupling {
        let (tuples, masses) = map.into_iter().filter(|(_, m)| !m.is_zero()).unzip();
        Coupling { base, labels, tuples, masses }
    }

    /// One coordinate distributed as the base.
    pub fn base_coupling(base: &FiniteProbSpace, label: Label) -> Coupling {
        let map = base.support().into_iter().map(|a| (vec![a as u32], base.weight(a).clone())).collect();
        Coupling::from_map(base.clone(), vec![label], map)
    }

    /// Independent coupling `λ^S`.
    pub fn product(base: &FiniteProbSpace, labels: Vec<Label>) -> Coupling {
        let supp = base.support();
        let mut map = BTreeMap::new();
        let k = labels.len();
        let mut idx = vec![0usize; k];
        if supp.is_empty() {
            return Coupling::from_map(base.clone(), labels, map);
        }
        loop {
            let t: Tuple = idx.iter().map(|&i| supp[i] as u32).collect();
            let m: Q = t.iter().map(|&a| base.weight(a as usize)).product();
            map.insert(t, m);
            let mut j = 0;
            loop {
                if j == k {
                    return Coupling::from_map(base.clone(), labels, map);
                }
                idx[j] += 1;
                if idx[j] < supp.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    /// Every coordinate equal.
    pub fn diagonal(base: &FiniteProbSpace, labels: Vec<Label>) -> Coupling {
        let k = labels.len();
        let map = base.support().into_iter().map(|a| (vec![a as u32; k], base.weight(a).clone())).collect();
        Coupling::from_map(base.clone(), labels, map)
    }

    pub fn base(&self) -> &FiniteProbSpace {
        &self.base
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn arity(&self) -> usize {
        self.labels.len()
    }

    pub fn support_size(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn masses(&self) -> &[Q] {
        &self.masses
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &Q)> {
        self.tuples.iter().zip(&self.masses)
    }

    pub fn mass(&self, t: &[u32]) -> Q {
        match self.tuples.binary_search_by(|x| x.as_slice().cmp(t)) {
            Ok(i) => self.masses[i].clone(),
            Err(_) => Q::zero(),
        }
    }

    pub fn index_of(&self, t: &[u32]) -> Option<usize> {
        self.tuples.binary_search_by(|x| x.as_slice().cmp(t)).ok()
    }

    pub fn position(&self, label: &Label) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn positions(&self, labels: &[Label]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.position(l)).collect()
    }

    /// Same base, arity and sparse measure; labels are ignored.
    pub fn same_measure(&self, other: &Coupling) -> bool {
        self.base == other.base && self.arity() == other.arity() && self.tuples == other.tuples && self.masses == other.masses
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Coupling> {
        if labels.len() != self.labels.len() {
            return Err(Error::DimensionMismatch("relabeling with the wrong number of labels".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    /// `ξ(μ, F) = ∫ ∏ f_v ∘ p_v dμ`.
    pub fn xi<S: Scalar>(&self, fs: &[FunctionOnSpace<S>]) -> Result<S> {
        if fs.len() != self.arity() {
            return Err(Error::Misaligned(format!("{} functions for {} labels", fs.len(), self.arity())));
        }
        if let Some(f) = fs.iter().find(|f| f.len() != self.base.len()) {
            return Err(Error::Misaligned(format!("function with {} values on a {}-atom base", f.len(), self.base.len())));
        }
        Ok(self.iter().fold(S::zero(), |acc, (t, m)| {
            let prod = t.iter().zip(fs).fold(S::one(), |p, (&x, f)| p.mul(&f.values[x as usize]));
            acc.add(&prod.scale(m))
        }))
    }

    pub(crate) fn marginal_map(&self, positions: &[usize]) -> BTreeMap<Tuple, Q> {
        let mut map: BTreeMap<Tuple, Q> = BTreeMap::new();
        for (t, m) in self.iter() {
            let key: Tuple = positions.iter().map(|&p| t[p]).collect();
            *map.entry(key).or_insert_with(Q::zero) += m;
        }
        map
    }

    /// Image under coordinate selection: label `labels[i]` reads position `positions[i]`.
    pub fn subcoupling(&self, positions: &[usize], labels: Vec<Label>) -> Result<Coupling> {
        if labels.len() != positions.len() {
            return Err(Error::DimensionMismatch("one label per selected position".into()));
        }
        if let Some(&p) = positions.iter().find(|&&p| p >= self.arity()) {
            return Err(Error::UnknownLabel(format!("position {}", p)));
        }
        let distinct: BTreeSet<usize> = positions.iter().copied().collect();
        if distinct.len() != positions.len() {
            return Err(Error::NotInjective(format!("{:?}", positions)));
        }
        Ok(Coupling::from_map(self.base.clone(), labels, self.marginal_map(positions)))
    }

    /// Subcoupling keeping the selected labels' names.
    pub fn restrict(&self, positions: &[usize]) -> Result<Coupling> {
        let labels = positions.iter().map(|&p| self.labels.get(p).cloned().ok_or_else(|| Error::UnknownLabel(format!("position {}", p)))).collect::<Result<Vec<_>>>()?;
        self.subcoupling(positions, labels)
    }

    /// Factor coupling: every coordinate pushed to its block of `p`.
    pub fn factor(&self, p: &Partition) -> Result<Coupling> {
        if p.num_atoms() != self.base.len() {
            return Err(Error::SpaceMismatch);
        }
        let quotient = FiniteProbSpace::from_weights_unchecked(p.block_weights(&self.base));
        let mut map: BTreeMap<Tuple, Q> = BTreeMap::new();
        for (t, m) in self.iter() {
            let key = t
                .iter()
                .map(|&x| p.block_of(x as usize).map(|b| b as u32).ok_or(Error::SpaceMismatch))
                .collect::<Result<Tuple>>()?;
            *map.entry(key).or_insert_with(Q::zero) += m;
        }
        Ok(Coupling::from_map(quotient, self.labels.clone(), map))
    }

    /// The space whose atoms are the support tuples, weighted by mass.
    pub fn support_space(&self) -> FiniteProbSpace {
        FiniteProbSpace::from_weights_unchecked(self.masses.clone())
    }

    /// `A^S_T` on the support space: tuples grouped by their projection to `positions`.
    pub fn cylinder_partition(&self, positions: &[usize]) -> Partition {
        let space = self.support_space();
        Partition::from_keys(&space, |i| positions.iter().map(|&p| self.tuples[i][p]).collect::<Tuple>())
    }

    /// Conditions on `values` at `positions` and keeps the remaining labels.
    pub fn condition(&self, positions: &[usize], values: &[u32]) -> Result<ConditionalMeasure> {
        if positions.len() != values.len() {
            return Err(Error::DimensionMismatch("one value per conditioned position".into()));
        }
        let rest: Vec<usize> = (0..self.arity()).filter(|p| !positions.contains(p)).collect();
        let mut map: BTreeMap<Tuple, Q> = BTreeMap::new();
        for (t, m) in self.iter() {
            if positions.iter().zip(values).all(|(&p, &v)| t[p] == v) {
                let key: Tuple = rest.iter().map(|&p| t[p]).collect();
                *map.entry(key).or_insert_with(Q::zero) += m;
            }
        }
        let total: Q = map.values().sum();
        if total.is_zero() {
            return Err(Error::NotProbability("conditioning on a null cylinder".into()));
        }
        for m in map.values_mut() {
            *m = &*m / &total;
        }
        Ok(ConditionalMeasure {
            base: self.base.clone(),
            labels: rest.iter().map(|&p| self.labels[p].clone()).collect(),
            masses: map,
        })
    }

    pub fn completely_dependent(&self) -> bool {
        tuples_completely_dependent(self.tuples.iter(), self.arity())
    }
}

/// A fibre measure obtained by conditioning a coupling; marginals are free.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalMeasure {
    pub base: FiniteProbSpace,
    pub labels: Vec<Label>,
    pub masses: BTreeMap<Tuple, Q>,
}

impl ConditionalMeasure {
    pub fn completely_dependent(&self) -> bool {
        tuples_completely_dependent(self.masses.keys(), self.labels.len())
    }

    /// Succeeds when the fibre measure satisfies the marginal law.
    pub fn into_coupling(self) -> Result<Coupling> {
        Coupling::new(self.base, self.labels, self.masses)
    }
}

fn tuples_completely_dependent<'a>(tuples: impl Iterator<Item = &'a Tuple> + Clone, arity: usize) -> bool {
    (0..arity).all(|v| {
        let mut seen: HashMap<Tuple, u32> = HashMap::new();
        tuples.clone().all(|t| {
            let rest: Tuple = t.iter().enumerate().filter(|&(i, _)| i != v).map(|(_, &x)| x).collect();
            *seen.entry(rest).or_insert(t[v]) == t[v]
        })
    })
}

/// Lemma-style Markov criterion for `T1 ⊥ T2` in one orientation: for each
/// `T1`-cylinder `b`, `E(1_b | A_{T2})` is `A_{T1∩T2}`-measurable.
fn one_sided(mu: &Coupling, t1: &[usize], t2: &[usize]) -> bool {
    let common: Vec<usize> = t1.iter().filter(|p| t2.contains(p)).copied().collect();
    let p1 = mu.cylinder_partition(t1);
    let p2 = mu.cylinder_partition(t2);
    let p12 = mu.cylinder_partition(&common);
    let space = mu.support_space();
    let w2 = p2.block_weights(&space);
    let mut c_in_d: Vec<usize> = vec![0; p12.num_blocks()];
    let d_of_c: Vec<usize> = p2.blocks().iter().map(|blk| p12.block_of(blk[0]).unwrap()).collect();
    for &d in &d_of_c {
        c_in_d[d] += 1;
    }
    let mut joint: BTreeMap<(usize, usize), Q> = BTreeMap::new();
    for i in 0..mu.support_size() {
        let key = (p1.block_of(i).unwrap(), p2.block_of(i).unwrap());
        *joint.entry(key).or_insert_with(Q::zero) += &mu.masses[i];
    }
    let mut ratio: BTreeMap<(usize, usize), (Q, usize)> = BTreeMap::new();
    for (&(b, c), w) in &joint {
        let r = w / &w2[c];
        let d = d_of_c[c];
        match ratio.get_mut(&(b, d)) {
            Some((r0, count)) => {
                if *r0 != r {
                    return false;
                }
                *count += 1;
            }
            None => {
                ratio.insert((b, d), (r, 1));
            }
        }
    }
    ratio.iter().all(|(&(_, d), &(_, count))| count == c_in_d[d])
}

/// Both orientations of the criterion, in order `(T1→T2, T2→T1)`.
pub fn index_cond_independent_detail(mu: &Coupling, t1: &[usize], t2: &[usize]) -> Result<(bool, bool)> {
    if let Some(&p) = t1.iter().chain(t2).find(|&&p| p >= mu.arity()) {
        return Err(Error::UnknownLabel(format!("position {}", p)));
    }
    Ok((one_sided(mu, t1, t2), one_sided(mu, t2, t1)))
}

/// `T1 ⊥_μ T2`.
pub fn index_cond_independent(mu: &Coupling, t1: &[usize], t2: &[usize]) -> Result<bool> {
    let (a, b) = index_cond_independent_detail(mu, t1, t2)?;
    Ok(a && b)
}

/// Square of `λ` relative to `p`, on labels `a`, `b`.
pub fn relative_square(space: &FiniteProbSpace, p: &Partition) -> Result<Coupling> {
    if p.num_atoms() != space.len() {
        return Err(Error::SpaceMismatch);
    }
    let bw = p.block_weights(space);
    let mut map = BTreeMap::new();
    for (bi, blk) in p.blocks().iter().enumerate() {
        for &x in blk {
            for &y in blk {
                map.insert(vec![x as u32, y as u32], space.weight(x) * space.weight(y) / &bw[bi]);
            }
        }
    }
    Ok(Coupling::from_map(space.clone(), vec![Label::name("a"), Label::name("b")], map))
}

fn fresh_label(taken: &BTreeSet<Label>, l: &Label) -> Label {
    let mut name = format!("{}′", l);
    while taken.contains(&Label::Name(name.clone())) {
        name.push('′');
    }
    Label::Name(name)
}

/// Conditionally independent gluing of `mu` and `nu` along the identified
/// position pairs `sigma = [(i in mu, j in nu)]`.
///
/// Output labels are those of `mu` followed by the unidentified labels of
/// `nu`, primed on collision.
pub fn glue(mu: &Coupling, nu: &Coupling, sigma: &[(usize, usize)]) -> Result<Coupling> {
    if mu.base != nu.base {
        return Err(Error::SpaceMismatch);
    }
    let t: Vec<usize> = sigma.iter().map(|&(i, _)| i).collect();
    let t2: Vec<usize> = sigma.iter().map(|&(_, j)| j).collect();
    for (set, arity) in [(&t, mu.arity()), (&t2, nu.arity())] {
        if let Some(&p) = set.iter().find(|&&p| p >= arity) {
            return Err(Error::UnknownLabel(format!("position {}", p)));
        }
        if set.iter().collect::<BTreeSet<_>>().len() != set.len() {
            return Err(Error::NotInjective(format!("{:?}", set)));
        }
    }
    let overlap = mu.marginal_map(&t);
    let overlap2 = nu.marginal_map(&t2);
    if overlap != overlap2 {
        let keys: BTreeSet<&Tuple> = overlap.keys().chain(overlap2.keys()).collect();
        let bad = keys.into_iter().find(|k| overlap.get(*k) != overlap2.get(*k)).unwrap();
        return Err(Error::OverlapMismatch { witness: fmt_tuple(bad) });
    }
    let rest: Vec<usize> = (0..nu.arity()).filter(|j| !t2.contains(j)).collect();
    let mut taken: BTreeSet<Label> = mu.labels.iter().cloned().collect();
    let mut labels = mu.labels.clone();
    for &j in &rest {
        let l = &nu.labels[j];
        let l = if taken.contains(l) { fresh_label(&taken, l) } else { l.clone() };
        taken.insert(l.clone());
        labels.push(l);
    }
    let mut by_key: HashMap<Tuple, Vec<usize>> = HashMap::new();
    for (i, tu) in nu.tuples.iter().enumerate() {
        by_key.entry(t2.iter().map(|&j| tu[j]).collect()).or_default().push(i);
    }
    let mut map: BTreeMap<Tuple, Q> = BTreeMap::new();
    for (tu, m) in mu.iter() {
        let key: Tuple = t.iter().map(|&i| tu[i]).collect();
        let denom = &overlap[&key];
        for &k in by_key.get(&key).into_iter().flatten() {
            let mut out = tu.clone();
            out.extend(rest.iter().map(|&j| nu.tuples[k][j]));
            *map.entry(out).or_insert_with(Q::zero) += m * &nu.masses[k] / denom;
        }
    }
    Ok(Coupling::from_map(mu.base.clone(), labels, map))
}

fn check_two_label(mu: &Coupling) -> Result<()> {
    if mu.arity() != 2 {
        return Err(Error::Misaligned(format!("expected a two-label coupling, got {} labels", mu.arity())));
    }
    Ok(())
}

/// Glues `mu` on `{a,b}` to a copy on `{a′,b}` and returns the triple on `(a, b, a′)`.
pub fn idempotence_triple(mu: &Coupling) -> Result<Coupling> {
    check_two_label(mu)?;
    glue(mu, mu, &[(1, 1)])
}

/// Whether the `{a, a′}` subcoupling of the glued triple reproduces `mu`.
pub fn is_idempotent(mu: &Coupling) -> Result<bool> {
    let triple = idempotence_triple(mu)?;
    Ok(triple.subcoupling(&[0, 2], mu.labels.clone())?.same_measure(mu))
}

/// `A_a ∧ A_b` pushed down to the base.
pub fn recover_factor(mu: &Coupling) -> Result<Partition> {
    if !is_idempotent(mu)? {
        return Err(Error::NotIdempotent);
    }
    let m = mu.cylinder_partition(&[0]).meet(&mu.cylinder_partition(&[1]))?;
    Ok(m.push_forward(&mu.base, |i| mu.tuples[i][0] as usize))
}
