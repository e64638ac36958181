//! Finite abelian groups `Z_{N_1} × … × Z_{N_r}`, their cube couplings,
//! degree-k cube groups and the character annihilation criteria.

use crate::coupling::{Coupling, Label, Tuple};
use crate::cube::{Face, Vertex};
use crate::error::{cap, Error, Result};
use crate::measure::{FiniteProbSpace, FunctionOnSpace};
use crate::scalar::{Scalar, Q};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Limit on `|Z|^{n+1}` for standard cube couplings.
pub const MAX_CUBE_PARAMS: u64 = 10_000_000;
/// Limit on the number of elements an enumerated cube group may have.
pub const MAX_CUBE_GROUP: u64 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    orders: Vec<u32>,
}

impl FiniteAbelianGroup {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        if orders.contains(&0) {
            return Err(Error::InvalidEntry("cyclic orders must be positive".into()));
        }
        let total = orders.iter().try_fold(1u64, |acc, &n| acc.checked_mul(u64::from(n)));
        match total {
            Some(t) if t <= u64::from(u32::MAX) => Ok(FiniteAbelianGroup { orders }),
            _ => Err(Error::CapExceeded { what: "group order".into(), limit: u64::from(u32::MAX), got: u64::MAX }),
        }
    }

    pub fn cyclic(n: u32) -> Self {
        FiniteAbelianGroup::new(vec![n]).expect("positive order")
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn order(&self) -> u32 {
        self.orders.iter().product()
    }

    /// Mixed-radix code with the first factor least significant.
    pub fn encode(&self, x: &[u32]) -> u32 {
        x.iter().zip(&self.orders).rev().fold(0, |acc, (&xi, &n)| acc * n + xi % n)
    }

    pub fn decode(&self, mut code: u32) -> Vec<u32> {
        self.orders
            .iter()
            .map(|&n| {
                let d = code % n;
                code /= n;
                d
            })
            .collect()
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let (x, y) = (self.decode(a), self.decode(b));
        let s: Vec<u32> = x.iter().zip(&y).zip(&self.orders).map(|((&p, &q), &n)| ((u64::from(p) + u64::from(q)) % u64::from(n)) as u32).collect();
        self.encode(&s)
    }

    pub fn neg(&self, a: u32) -> u32 {
        let x = self.decode(a);
        let s: Vec<u32> = x.iter().zip(&self.orders).map(|(&p, &n)| (n - p) % n).collect();
        self.encode(&s)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    /// Signed sum `Σ s_i a_i` with signs `±1`.
    pub fn signed_sum(&self, terms: impl IntoIterator<Item = (bool, u32)>) -> u32 {
        terms.into_iter().fold(0, |acc, (negate, a)| if negate { self.sub(acc, a) } else { self.add(acc, a) })
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.order()
    }

    /// Uniform Haar measure.
    pub fn space(&self) -> FiniteProbSpace {
        FiniteProbSpace::uniform(self.order() as usize)
    }

    /// Dual group, isomorphic and encoded the same way.
    pub fn dual(&self) -> FiniteAbelianGroup {
        self.clone()
    }

    /// Rotation number `Σ k_j x_j / N_j mod 1` of character `chi` at `x`.
    pub fn phase(&self, chi: u32, x: u32) -> Q {
        let (k, y) = (self.decode(chi), self.decode(x));
        let mut p = Q::zero();
        for ((&kj, &xj), &n) in k.iter().zip(&y).zip(&self.orders) {
            let num = (u64::from(kj) * u64::from(xj)) % u64::from(n);
            p += Q::new(BigInt::from(num), BigInt::from(n));
        }
        p.clone() - p.floor()
    }

    /// The character with frequency code `chi` as a function on the group.
    pub fn character<S: Scalar>(&self, chi: u32) -> Option<FunctionOnSpace<S>> {
        self.elements().map(|x| S::root_of_unity(&self.phase(chi, x))).collect::<Option<Vec<S>>>().map(FunctionOnSpace::new)
    }
}

/// A function on the group given by its values in code order.
pub fn function_from_values<S: Scalar>(group: &FiniteAbelianGroup, values: Vec<S>) -> Result<FunctionOnSpace<S>> {
    if values.len() != group.order() as usize {
        return Err(Error::DimensionMismatch(format!("{} values for a group of order {}", values.len(), group.order())));
    }
    Ok(FunctionOnSpace::new(values))
}

/// Uniform measure on cubes `(x + Σ v_i h_i)_{v ∈ ⟦n⟧}`.
pub fn standard_cube_coupling(group: &FiniteAbelianGroup, n: usize) -> Result<Coupling> {
    let order = u64::from(group.order());
    let params = order.checked_pow(n as u32 + 1).unwrap_or(u64::MAX);
    cap("cube parameter count", MAX_CUBE_PARAMS, params)?;
    let verts = Vertex::all(n)?;
    let mut counts: BTreeMap<Tuple, u64> = BTreeMap::new();
    let mut idx = vec![0u32; n + 1];
    loop {
        let t: Tuple = verts
            .iter()
            .map(|v| (0..n).filter(|&i| v.coord(i) == 1).fold(idx[0], |acc, i| group.add(acc, idx[i + 1])))
            .collect();
        *counts.entry(t).or_insert(0) += 1;
        let mut j = 0;
        loop {
            if j == n + 1 {
                let denom = BigInt::from(params);
                let map = counts.into_iter().map(|(t, c)| (t, Q::new(BigInt::from(c), denom.clone()))).collect();
                return Ok(Coupling::from_map(group.space(), Label::cube(n)?, map));
            }
            idx[j] += 1;
            if idx[j] < group.order() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeGroupSpec {
    pub group: FiniteAbelianGroup,
    pub n: usize,
    pub k: i64,
    pub rooted: bool,
}

/// Vertex lists of the faces of dimension `d` in `⟦n⟧`.
fn faces_of_dim(n: usize, d: usize) -> Result<Vec<Vec<Vertex>>> {
    Ok(Face::all(n)?.into_iter().filter(|f| f.dim() == d).map(|f| f.vertices()).collect())
}

fn alternating_sum(group: &FiniteAbelianGroup, face: &[Vertex], value: impl Fn(&Vertex) -> u32) -> u32 {
    group.signed_sum(face.iter().map(|v| (v.height() % 2 == 1, value(v))))
}

impl CubeGroupSpec {
    pub fn new(group: FiniteAbelianGroup, n: usize, k: i64, rooted: bool) -> Self {
        CubeGroupSpec { group, n, k, rooted }
    }

    fn condition_faces(&self) -> Result<Vec<Vec<Vertex>>> {
        if self.k < 0 || self.k as usize >= self.n {
            return Ok(Vec::new());
        }
        faces_of_dim(self.n, self.k as usize + 1)
    }

    /// Membership of `q : ⟦n⟧ → Z` (values in mask order).
    pub fn contains(&self, q: &[u32]) -> Result<bool> {
        if q.len() != 1 << self.n {
            return Err(Error::DimensionMismatch(format!("{} values for a {}-cube", q.len(), self.n)));
        }
        if self.k < 0 {
            return Ok(q.iter().all(|&x| x == 0));
        }
        if self.rooted && q[0] != 0 {
            return Ok(false);
        }
        Ok(self.condition_faces()?.iter().all(|f| alternating_sum(&self.group, f, |v| q[v.index()]) == 0))
    }
}

/// Enumerates `C^n(D_k(Z))`, or its rooted subgroup, in lexicographic order.
pub fn degree_cube_group(spec: &CubeGroupSpec) -> Result<Vec<Vec<u32>>> {
    let n_verts = 1usize << spec.n;
    if spec.k < 0 {
        return Ok(vec![vec![0; n_verts]]);
    }
    let order = spec.group.order();
    let faces = spec.condition_faces()?;
    if faces.is_empty() {
        let free = if spec.rooted { n_verts - 1 } else { n_verts };
        cap("cube group size", MAX_CUBE_GROUP, u64::from(order).checked_pow(free as u32).unwrap_or(u64::MAX))?;
    }
    // Each face is checked once its last vertex in mask order is assigned.
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n_verts];
    for (i, f) in faces.iter().enumerate() {
        closing[f.iter().map(|v| v.index()).max().unwrap()].push(i);
    }
    let mut out = Vec::new();
    let mut q = vec![0u32; n_verts];
    let mut explored = 0u64;
    fn rec(
        pos: usize,
        q: &mut Vec<u32>,
        spec: &CubeGroupSpec,
        faces: &[Vec<Vertex>],
        closing: &[Vec<usize>],
        out: &mut Vec<Vec<u32>>,
        explored: &mut u64,
    ) -> Result<()> {
        if pos == q.len() {
            cap("cube group size", MAX_CUBE_GROUP, out.len() as u64 + 1)?;
            out.push(q.clone());
            return Ok(());
        }
        let range = if spec.rooted && pos == 0 { 0..1 } else { 0..spec.group.order() };
        for x in range {
            *explored += 1;
            cap("cube group search steps", 50 * MAX_CUBE_GROUP, *explored)?;
            q[pos] = x;
            let ok = closing[pos].iter().all(|&i| alternating_sum(&spec.group, &faces[i], |v| q[v.index()]) == 0);
            if ok {
                rec(pos + 1, q, spec, faces, closing, out, explored)?;
            }
        }
        q[pos] = 0;
        Ok(())
    }
    rec(0, &mut q, spec, &faces, &closing, &mut out, &mut explored)?;
    Ok(out)
}

/// Total rotation of `∏ C^{|v|} η_v(q(v))` over the vertices listed in `verts`.
fn character_phase(group: &FiniteAbelianGroup, eta: &[u32], verts: &[Vertex], q: &[u32]) -> Q {
    let mut p = Q::zero();
    for (e, v) in eta.iter().zip(verts) {
        let ph = group.phase(*e, q[v.index()]);
        if v.height() % 2 == 1 {
            p -= ph;
        } else {
            p += ph;
        }
    }
    p.clone() - p.floor()
}

fn eta_vertices(spec: &CubeGroupSpec, eta: &[u32]) -> Result<Vec<Vertex>> {
    let verts = if spec.rooted { Vertex::corner(spec.n)? } else { Vertex::all(spec.n)? };
    if eta.len() != verts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} characters given, {} needed",
            eta.len(),
            verts.len()
        )));
    }
    Ok(verts)
}

/// Whether `∏ C^{|v|} η_v ∘ p_v` is trivial on the cube group of `spec`.
/// Rooted specs take `η` on the corner `K_n`.
pub fn annihilates(eta: &[u32], spec: &CubeGroupSpec) -> Result<bool> {
    let verts = eta_vertices(spec, eta)?;
    Ok(degree_cube_group(spec)?.iter().all(|q| character_phase(&spec.group, eta, &verts, q).is_zero()))
}

/// `η ∈ C^n(D_{n-k-1}(Ẑ))`, or `η ∈ hom(K_n, D_{n-k-1}(Ẑ))` for rooted specs.
pub fn dual_criterion(eta: &[u32], spec: &CubeGroupSpec) -> Result<bool> {
    let verts = eta_vertices(spec, eta)?;
    let j = spec.n as i64 - spec.k - 1;
    let dual = spec.group.dual();
    if !spec.rooted {
        return CubeGroupSpec::new(dual, spec.n, j, false).contains(eta);
    }
    if j < 0 {
        return Ok(eta.iter().all(|&e| e == 0));
    }
    let value = |v: &Vertex| eta[verts.iter().position(|w| w == v).unwrap()];
    if j as usize >= spec.n {
        return Ok(true);
    }
    Ok(faces_of_dim(spec.n, j as usize + 1)?
        .iter()
        .filter(|f| f.iter().all(|v| v.bits != 0))
        .all(|f| alternating_sum(&dual, f, value) == 0))
}
