//! Cubic pattern densities and the `ζ` exchangeable laws on finite windows `⟦n⟧`.

use crate::abelian::{standard_cube_coupling, FiniteAbelianGroup, MAX_CUBE_PARAMS};
use crate::coupling::{Coupling, Label, Tuple};
use crate::cube::{enumerate_morphisms, CubeMorphism, Face, MorphismFilter, Vertex};
use crate::error::{cap, Error, Result};
use crate::measure::{FiniteProbSpace, FunctionOnSpace};
use crate::report::{Check, Report};
use crate::scalar::{float_value, fmt_q, q_to_f64, Scalar, Q};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::{BTreeMap, HashMap};

/// Samples drawn per seeded stream.
pub const CHUNK: usize = 4096;
/// Quantile used by the chi-square independence test.
pub const CHI_SQUARE_LEVEL: f64 = 0.99;

/// Multisets of plain and conjugated vertices of `⟦k⟧`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub k: usize,
    pub plain: Vec<Vertex>,
    pub conjugated: Vec<Vertex>,
}

impl Pattern {
    pub fn new(k: usize, plain: Vec<Vertex>, conjugated: Vec<Vertex>) -> Result<Self> {
        if plain.iter().chain(&conjugated).any(|v| v.dim != k) {
            return Err(Error::DimensionMismatch(format!("pattern vertices must lie in ⟦{}⟧", k)));
        }
        Ok(Pattern { k, plain, conjugated })
    }

    /// Even-height vertices plain, odd-height ones conjugated.
    pub fn even_odd(k: usize) -> Result<Self> {
        let (even, odd) = Vertex::all(k)?.into_iter().partition(|v| v.height() % 2 == 0);
        Ok(Pattern { k, plain: even, conjugated: odd })
    }
}

/// `t(S1, S2, f)`: the cube-group average of the pattern product.
pub fn pattern_density<S: Scalar>(group: &FiniteAbelianGroup, f: &FunctionOnSpace<S>, pattern: &Pattern) -> Result<S> {
    if f.len() != group.order() as usize {
        return Err(Error::Misaligned("function and group differ in size".into()));
    }
    let cubes = standard_cube_coupling(group, pattern.k)?;
    Ok(cubes.iter().fold(S::zero(), |acc, (t, m)| {
        let p = pattern.plain.iter().fold(S::one(), |p, v| p.mul(&f.values[t[v.index()] as usize]));
        let p = pattern.conjugated.iter().fold(p, |p, v| p.mul(&f.values[t[v.index()] as usize].conj()));
        acc.add(&p.scale(m))
    }))
}

/// Cauchy test on the tail (last half) of each pattern's density sequence.
pub fn is_cubic_convergent<S: Scalar>(
    seq: &[(FiniteAbelianGroup, FunctionOnSpace<S>)],
    patterns: &[Pattern],
    eps: &Q,
) -> Result<Report> {
    let mut r = Report::new();
    let eps_sq = S::from_q(&(eps * eps));
    for (pi, pat) in patterns.iter().enumerate() {
        let dens = seq.iter().map(|(g, f)| pattern_density(g, f, pat)).collect::<Result<Vec<S>>>()?;
        let tail = &dens[dens.len() - dens.len().div_ceil(2)..];
        let mut worst = S::zero();
        for a in tail {
            for b in tail {
                let gap = a.sub(b).norm_sqr();
                if worst.real_le(&gap) {
                    worst = gap;
                }
            }
        }
        let gaps: Vec<f64> = dens.windows(2).map(|w| w[1].sub(&w[0]).to_c64().norm()).collect();
        let ok = worst.real_le(&eps_sq);
        let last = gaps.last().copied().unwrap_or(0.0);
        let check = Check::from_witness("cubic_convergence", if ok { None } else { Some(format!("tail oscillation above {}", fmt_q(eps))) })
            .param("pattern", pi)
            .value("densities", dens.iter().map(|d| d.to_value()).collect::<Vec<_>>())
            .value("gaps", gaps.iter().map(|&g| float_value(g)).collect::<Vec<_>>())
            .value("last_gap", float_value(last))
            .value("tail_gap", float_value(worst.to_c64().re.max(0.0).sqrt()));
        r.push(check);
    }
    Ok(r)
}

/// A kernel `m : Z → P(B)` given by rational probability rows.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMap {
    group: FiniteAbelianGroup,
    table: Vec<Vec<Q>>,
}

impl KernelMap {
    pub fn new(group: FiniteAbelianGroup, table: Vec<Vec<Q>>) -> Result<Self> {
        if table.len() != group.order() as usize {
            return Err(Error::DimensionMismatch(format!("{} rows for a group of order {}", table.len(), group.order())));
        }
        let width = table.first().map_or(0, |r| r.len());
        for (x, row) in table.iter().enumerate() {
            if row.len() != width || width == 0 {
                return Err(Error::DimensionMismatch(format!("row {} has {} symbols, expected {}", x, row.len(), width)));
            }
            if row.iter().any(|p| p.is_negative()) || !row.iter().sum::<Q>().is_one() {
                return Err(Error::NotProbability(format!("row {}", x)));
            }
        }
        Ok(KernelMap { group, table })
    }

    /// `m(x) = δ_x`.
    pub fn identity(group: FiniteAbelianGroup) -> Self {
        let n = group.order() as usize;
        let table = (0..n).map(|x| (0..n).map(|b| if b == x { Q::one() } else { Q::zero() }).collect()).collect();
        KernelMap { group, table }
    }

    /// `m(x) = δ_b` for every `x`.
    pub fn constant(group: FiniteAbelianGroup, alphabet: usize, b: usize) -> Self {
        let row: Vec<Q> = (0..alphabet).map(|s| if s == b { Q::one() } else { Q::zero() }).collect();
        KernelMap { table: vec![row; group.order() as usize], group }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn alphabet(&self) -> usize {
        self.table[0].len()
    }

    pub fn row(&self, x: usize) -> &[Q] {
        &self.table[x]
    }

    /// Law of a single symbol: `avg_x m(x)`.
    pub fn symbol_law(&self) -> FiniteProbSpace {
        let n = Q::from_integer((self.table.len() as i64).into());
        let w = (0..self.alphabet()).map(|b| self.table.iter().map(|r| &r[b]).sum::<Q>() / &n).collect();
        FiniteProbSpace::new(w).expect("rows are distributions")
    }
}

/// Exact law of `(Y_v)_{v ∈ ⟦n⟧}` under `ζ`, as a coupling of the symbol law.
pub fn zeta_window_law(kernel: &KernelMap, n: usize) -> Result<Coupling> {
    let b = kernel.alphabet() as u64;
    let states = b.checked_pow(1 << n).unwrap_or(u64::MAX);
    cap("window state count", MAX_CUBE_PARAMS, states)?;
    let cubes = standard_cube_coupling(kernel.group(), n)?;
    let mut law: BTreeMap<Tuple, Q> = BTreeMap::new();
    for (z, m) in cubes.iter() {
        let mut partial: Vec<(Tuple, Q)> = vec![(Vec::new(), m.clone())];
        for &zv in z {
            let row = kernel.row(zv as usize);
            partial = partial
                .into_iter()
                .flat_map(|(t, p)| {
                    row.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(move |(s, w)| {
                        let mut t2 = t.clone();
                        t2.push(s as u32);
                        (t2, &p * w)
                    })
                })
                .collect();
        }
        for (t, p) in partial {
            *law.entry(t).or_insert_with(Q::zero) += p;
        }
    }
    Coupling::new(kernel.symbol_law(), Label::cube(n)?, law)
}

/// Convex combination `t·a + (1-t)·b` of two laws with the same labels.
pub fn mixture(a: &Coupling, b: &Coupling, t: &Q) -> Result<Coupling> {
    if a.labels() != b.labels() || a.base().len() != b.base().len() {
        return Err(Error::Misaligned("mixture components differ in shape".into()));
    }
    let s = Q::one() - t;
    let base = FiniteProbSpace::new(a.base().weights().iter().zip(b.base().weights()).map(|(x, y)| t * x + &s * y).collect())?;
    let entries = a.iter().map(|(k, m)| (k.clone(), t * m)).chain(b.iter().map(|(k, m)| (k.clone(), &s * m)));
    Coupling::new(base, a.labels().to_vec(), entries)
}

/// Pairs of faces with disjoint free coordinates and empty intersection.
pub fn independent_face_pairs(n: usize) -> Result<Vec<(Face, Face)>> {
    let faces = Face::all(n)?;
    let mut out = Vec::new();
    for (i, f1) in faces.iter().enumerate() {
        for f2 in &faces[i + 1..] {
            let disjoint_free = f1.free_coords().iter().all(|c| !f2.free_coords().contains(c));
            let meet = f1.vertices().iter().any(|v| f2.contains(v));
            if disjoint_free && !meet {
                out.push((f1.clone(), f2.clone()));
            }
        }
    }
    Ok(out)
}

/// Every injective marginal of `levels[n]` agrees with `levels[m]`.
pub fn exact_consistency(levels: &[Coupling]) -> Result<Report> {
    let mut r = Report::new();
    for (n, mu) in levels.iter().enumerate() {
        let mut witness = None;
        'outer: for (m, lower) in levels.iter().enumerate().take(n + 1) {
            for phi in enumerate_morphisms(m, n, MorphismFilter::Injective)? {
                if !mu.subcoupling(&phi.position_map(), Label::cube(m)?)?.same_measure(lower) {
                    witness = Some(format!("morphism {}", phi));
                    break 'outer;
                }
            }
        }
        r.push(Check::from_witness("exact_consistency", witness).param("n", n));
    }
    Ok(r)
}

/// Exact independence of the symbols on every pair of independent faces.
pub fn exact_face_independence(mu: &Coupling, n: usize) -> Result<Report> {
    let mut r = Report::new();
    let mut witness = None;
    let pairs = independent_face_pairs(n)?;
    for (f1, f2) in &pairs {
        let p1: Vec<usize> = f1.vertices().iter().map(|v| v.index()).collect();
        let p2: Vec<usize> = f2.vertices().iter().map(|v| v.index()).collect();
        let joint = mu.marginal_map(&[p1.clone(), p2.clone()].concat());
        let m1 = mu.marginal_map(&p1);
        let m2 = mu.marginal_map(&p2);
        let mut product: BTreeMap<Tuple, Q> = BTreeMap::new();
        for (a, pa) in &m1 {
            for (b, pb) in &m2 {
                product.insert([a.clone(), b.clone()].concat(), pa * pb);
            }
        }
        if joint != product {
            witness = Some(format!("faces {} and {}", f1, f2));
            break;
        }
    }
    r.push(Check::from_witness("exact_face_independence", witness).param("n", n).value("pairs", pairs.len() as u64));
    Ok(r)
}

/// Reproducible samples of `(Y_v)_{v ∈ ⟦n⟧}`, symbols in vertex mask order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBatch {
    pub seed: u64,
    pub n: usize,
    pub alphabet: usize,
    pub samples: Vec<Vec<u32>>,
}

/// How directions are drawn in the sampler.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerVariant {
    Faithful,
    /// Every direction reuses `h_1`.
    SharedDirection,
}

fn cumulative(row: &[Q]) -> Vec<f64> {
    let mut acc = 0.0;
    row.iter()
        .map(|p| {
            acc += q_to_f64(p);
            acc
        })
        .collect()
}

fn draw(cum: &[f64], u: f64) -> u32 {
    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1) as u32
}

/// Samples a mixture of `ζ` laws; each sample first picks a component.
pub fn sample_zeta_mixture(
    components: &[(Q, KernelMap)],
    n: usize,
    n_samples: usize,
    seed: u64,
    variant: SamplerVariant,
) -> Result<SampleBatch> {
    cap("window dimension", 4, n as u64)?;
    let alphabet = components.first().map(|(_, k)| k.alphabet()).ok_or_else(|| Error::InvalidEntry("no components".into()))?;
    if components.iter().any(|(_, k)| k.alphabet() != alphabet) {
        return Err(Error::Misaligned("components use different alphabets".into()));
    }
    let weights = cumulative(&components.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>());
    let tables: Vec<Vec<Vec<f64>>> =
        components.iter().map(|(_, k)| (0..k.group().order() as usize).map(|x| cumulative(k.row(x))).collect()).collect();
    let verts = Vertex::all(n)?;
    let n_chunks = n_samples.div_ceil(CHUNK);
    let chunks: Vec<Vec<Vec<u32>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n_samples - c * CHUNK);
            (0..len)
                .map(|_| {
                    let comp = draw(&weights, rng.random::<f64>()) as usize;
                    let g = components[comp].1.group();
                    let x = rng.random_range(0..g.order());
                    let mut h: Vec<u32> = (0..n).map(|_| rng.random_range(0..g.order())).collect();
                    if variant == SamplerVariant::SharedDirection && n > 0 {
                        let first = h[0];
                        h.iter_mut().for_each(|hi| *hi = first);
                    }
                    verts
                        .iter()
                        .map(|v| {
                            let z = (0..n).filter(|&i| v.coord(i) == 1).fold(x, |acc, i| g.add(acc, h[i]));
                            draw(&tables[comp][z as usize], rng.random::<f64>())
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(SampleBatch { seed, n, alphabet, samples: chunks.into_iter().flatten().collect() })
}

/// `n_samples` draws from `ζ` on the window `⟦n⟧`.
pub fn sample_zeta(kernel: &KernelMap, n: usize, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    sample_zeta_mixture(&[(Q::one(), kernel.clone())], n, n_samples, seed, SamplerVariant::Faithful)
}

fn code(batch: &SampleBatch, sample: &[u32], positions: &[usize]) -> u64 {
    positions.iter().fold(0u64, |acc, &p| acc * batch.alphabet as u64 + u64::from(sample[p]))
}

fn min_batch(states: u64) -> usize {
    (10 * states) as usize
}

/// Total-variation comparison of the marginals along two injective morphisms.
pub fn test_consistency(batch: &SampleBatch, phi1: &CubeMorphism, phi2: &CubeMorphism) -> Result<Check> {
    if phi1.domain_dim != phi2.domain_dim || phi1.codomain_dim() != batch.n || phi2.codomain_dim() != batch.n {
        return Err(Error::DimensionMismatch("morphisms must map the same cube into the window".into()));
    }
    if !phi1.is_injective() || !phi2.is_injective() {
        return Err(Error::NotInjective("consistency morphisms must be injective".into()));
    }
    let states = (batch.alphabet as u64).pow(1 << phi1.domain_dim);
    let need = min_batch(states);
    if batch.samples.len() < need {
        return Err(Error::UndersizedBatch { got: batch.samples.len(), need });
    }
    let (p1, p2) = (phi1.position_map(), phi2.position_map());
    let mut diff: HashMap<u64, i64> = HashMap::new();
    for s in &batch.samples {
        *diff.entry(code(batch, s, &p1)).or_insert(0) += 1;
        *diff.entry(code(batch, s, &p2)).or_insert(0) -= 1;
    }
    let n = batch.samples.len() as f64;
    let tv = diff.values().map(|&d| d.unsigned_abs() as f64).sum::<f64>() / (2.0 * n);
    let threshold = 3.0 * (states as f64 / n).sqrt();
    let witness = if tv <= threshold { None } else { Some(format!("{} vs {}", phi1, phi2)) };
    Ok(Check::from_witness("consistency_tv", witness)
        .param("phi1", phi1.to_string())
        .param("phi2", phi2.to_string())
        .param("seed", batch.seed)
        .value("tv", float_value(tv))
        .value("threshold", float_value(threshold))
        .value("samples", batch.samples.len() as u64))
}

/// Chi-square test of independence between the symbols on two faces.
pub fn test_face_independence(batch: &SampleBatch, f1: &Face, f2: &Face) -> Result<Check> {
    if f1.ambient_dim() != batch.n || f2.ambient_dim() != batch.n {
        return Err(Error::DimensionMismatch("faces must lie in the window".into()));
    }
    let p1: Vec<usize> = f1.vertices().iter().map(|v| v.index()).collect();
    let p2: Vec<usize> = f2.vertices().iter().map(|v| v.index()).collect();
    let states = (batch.alphabet as u64).pow((p1.len() + p2.len()) as u32);
    let need = min_batch(states);
    if batch.samples.len() < need {
        return Err(Error::UndersizedBatch { got: batch.samples.len(), need });
    }
    let mut table: HashMap<(u64, u64), f64> = HashMap::new();
    let mut rows: BTreeMap<u64, f64> = BTreeMap::new();
    let mut cols: BTreeMap<u64, f64> = BTreeMap::new();
    for s in &batch.samples {
        let (a, b) = (code(batch, s, &p1), code(batch, s, &p2));
        *table.entry((a, b)).or_insert(0.0) += 1.0;
        *rows.entry(a).or_insert(0.0) += 1.0;
        *cols.entry(b).or_insert(0.0) += 1.0;
    }
    let n = batch.samples.len() as f64;
    let mut stat = 0.0;
    for (a, ra) in &rows {
        for (b, cb) in &cols {
            let expected = ra * cb / n;
            let observed = table.get(&(*a, *b)).copied().unwrap_or(0.0);
            stat += (observed - expected).powi(2) / expected;
        }
    }
    let df = (rows.len().saturating_sub(1) * cols.len().saturating_sub(1)) as f64;
    let threshold = if df > 0.0 {
        ChiSquared::new(df).map_err(|e| Error::InvalidEntry(e.to_string()))?.inverse_cdf(CHI_SQUARE_LEVEL)
    } else {
        0.0
    };
    let witness = if stat <= threshold { None } else { Some(format!("faces {} and {}", f1, f2)) };
    Ok(Check::from_witness("face_independence_chi2", witness)
        .param("f1", f1.to_string())
        .param("f2", f2.to_string())
        .param("seed", batch.seed)
        .value("statistic", float_value(stat))
        .value("threshold", float_value(threshold))
        .value("df", df as u64))
}

/// Consistency of every injective `⟦k⟧ → ⟦n⟧` marginal against the first face map.
pub fn consistency_report(batch: &SampleBatch, k: usize) -> Result<Report> {
    let maps = enumerate_morphisms(k, batch.n, MorphismFilter::Injective)?;
    let reference = enumerate_morphisms(k, batch.n, MorphismFilter::FaceMap)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::DimensionMismatch(format!("no face map from ⟦{}⟧ into ⟦{}⟧", k, batch.n)))?;
    let mut r = Report::new();
    for phi in maps.iter().filter(|m| **m != reference) {
        r.push(test_consistency(batch, &reference, phi)?);
    }
    Ok(r)
}

/// Chi-square tests over every independent face pair of the window.
pub fn independence_report(batch: &SampleBatch) -> Result<Report> {
    let mut r = Report::new();
    for (f1, f2) in independent_face_pairs(batch.n)? {
        r.push(test_face_independence(batch, &f1, &f2)?);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, ExactComplex};

    #[test]
    fn pattern_density_examples() {
        let z2 = FiniteAbelianGroup::cyclic(2);
        let f = FunctionOnSpace::<ExactComplex>::indicator(2, &[0]);
        let p = Pattern::new(1, vec![Vertex::from_coords(&[0])], vec![Vertex::from_coords(&[1])]).unwrap();
        assert_eq!(pattern_density(&z2, &f, &p).unwrap(), ExactComplex::from_q(&q(1, 4)));
        let one = FunctionOnSpace::constant(2, <ExactComplex as Scalar>::one());
        assert_eq!(pattern_density(&z2, &one, &Pattern::even_odd(3).unwrap()).unwrap(), <ExactComplex as Scalar>::one());
    }

    #[test]
    fn independent_pairs_in_the_square() {
        let pairs = independent_face_pairs(2).unwrap();
        assert_eq!(pairs.len(), 14);
        assert!(pairs.iter().all(|(a, b)| a.dim() + b.dim() <= 1));
    }

    #[test]
    fn identity_kernel_window_of_z2() {
        let law = zeta_window_law(&KernelMap::identity(FiniteAbelianGroup::cyclic(2)), 1).unwrap();
        assert!(law.same_measure(&Coupling::product(&FiniteProbSpace::uniform(2), Label::cube(1).unwrap())));
    }

    #[test]
    fn constant_kernel_samples_are_constant() {
        let k = KernelMap::constant(FiniteAbelianGroup::cyclic(3), 2, 1);
        let b = sample_zeta(&k, 2, 100, 7).unwrap();
        assert!(b.samples.iter().all(|s| s.iter().all(|&y| y == 1)));
    }

    #[test]
    fn sampler_is_reproducible() {
        let k = KernelMap::identity(FiniteAbelianGroup::cyclic(3));
        let a = sample_zeta(&k, 2, 5000, 3).unwrap();
        assert_eq!(a, sample_zeta(&k, 2, 5000, 3).unwrap());
        assert_ne!(a, sample_zeta(&k, 2, 5000, 4).unwrap());
    }

    #[test]
    fn undersized_batches_are_rejected() {
        let k = KernelMap::identity(FiniteAbelianGroup::cyclic(2));
        let b = sample_zeta(&k, 1, 10, 0).unwrap();
        let id = CubeMorphism::identity(1);
        assert!(matches!(test_consistency(&b, &id, &id), Err(Error::UndersizedBatch { .. })));
    }

    #[test]
    fn constant_sequence_converges() {
        let z3 = FiniteAbelianGroup::cyclic(3);
        let f = FunctionOnSpace::<ExactComplex>::from_rationals(&[q(1, 1), q(0, 1), q(1, 2)]);
        let seq = vec![(z3.clone(), f.clone()); 4];
        let r = is_cubic_convergent(&seq, &[Pattern::even_odd(2).unwrap()], &q(0, 1)).unwrap();
        assert!(r.passed());
    }
}
