#![allow(dead_code)]

use cubic_core::measure::{FiniteProbSpace, FunctionOnSpace, Partition};
use cubic_core::scalar::{ExactComplex, Q};
use num_bigint::BigInt;
use rand::Rng;

/// Restricted growth strings of length `n`.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            prefix.push(b);
            rec(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

pub fn partitions_of(space: &FiniteProbSpace) -> Vec<Partition> {
    set_partitions(space.len()).into_iter().map(|rg| Partition::from_keys(space, |a| rg[a])).collect()
}

pub fn random_partition(rng: &mut impl Rng, space: &FiniteProbSpace) -> Partition {
    let k = rng.random_range(1..=space.len());
    let keys: Vec<usize> = (0..space.len()).map(|_| rng.random_range(0..k)).collect();
    Partition::from_keys(space, |a| keys[a])
}

pub fn random_q(rng: &mut impl Rng) -> Q {
    Q::new(BigInt::from(rng.random_range(-5i64..=5)), BigInt::from(rng.random_range(1i64..=4)))
}

pub fn random_complex(rng: &mut impl Rng) -> ExactComplex {
    ExactComplex::new(random_q(rng), random_q(rng))
}

pub fn random_function(rng: &mut impl Rng, n: usize) -> FunctionOnSpace<ExactComplex> {
    FunctionOnSpace::new((0..n).map(|_| random_complex(rng)).collect())
}

pub fn random_real_function(rng: &mut impl Rng, n: usize) -> FunctionOnSpace<ExactComplex> {
    FunctionOnSpace::from_rationals(&(0..n).map(|_| random_q(rng)).collect::<Vec<_>>())
}

/// Weights on `n` atoms, some possibly null.
pub fn random_space(rng: &mut impl Rng, n: usize) -> FiniteProbSpace {
    let mut raw: Vec<i64> = (0..n).map(|_| rng.random_range(0..=4)).collect();
    if raw.iter().all(|&w| w == 0) {
        raw[0] = 1;
    }
    let total: i64 = raw.iter().sum();
    FiniteProbSpace::new(raw.iter().map(|&w| Q::new(w.into(), total.into())).collect()).unwrap()
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Rank over `Q` by Gaussian elimination.
pub fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    use num_traits::Zero;
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = &row[c] / &pivot[c];
                for (x, y) in row.iter_mut().zip(&pivot).skip(c) {
                    *x -= &factor * y;
                }
            }
        }
        r += 1;
    }
    r
}

/// Block indicators of `p` restricted to the support.
pub fn indicator_rows(space: &FiniteProbSpace, p: &Partition) -> Vec<Vec<Q>> {
    use num_traits::{One, Zero};
    let supp = space.support();
    p.blocks()
        .iter()
        .map(|b| supp.iter().map(|a| if b.contains(a) { Q::one() } else { Q::zero() }).collect())
        .collect()
}
