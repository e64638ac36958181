//! Discrete cubes `{0,1}^n`: vertices, morphisms, faces, simplicial sets and tricubes.
//!
//! Coordinate `i` of a vertex is bit `i` of its mask, so the vertex index used
//! to position cube couplings is simply the mask.

use crate::error::{cap, Error, Result};
use std::collections::BTreeSet;
use std::fmt;

/// Vertex iteration limit.
pub const MAX_VERTEX_DIM: usize = 12;
/// Limit for enumerations that are doubly exponential in the dimension.
pub const MAX_BLOWUP_DIM: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub bits: u32,
    pub dim: usize,
}

impl Vertex {
    pub fn new(bits: u32, dim: usize) -> Self {
        debug_assert!(dim <= 31 && (dim == 31 || bits >> dim == 0));
        Vertex { bits, dim }
    }

    pub fn from_coords(coords: &[u8]) -> Self {
        let bits = coords.iter().enumerate().fold(0u32, |acc, (i, &c)| acc | (u32::from(c & 1) << i));
        Vertex { bits, dim: coords.len() }
    }

    pub fn root(dim: usize) -> Self {
        Vertex { bits: 0, dim }
    }

    pub fn top(dim: usize) -> Self {
        Vertex { bits: (1u32 << dim) - 1, dim }
    }

    pub fn coord(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    pub fn coords(&self) -> Vec<u8> {
        (0..self.dim).map(|i| self.coord(i)).collect()
    }

    pub fn height(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// Coordinatewise order `self ≤ other`.
    pub fn le(&self, other: &Vertex) -> bool {
        self.dim == other.dim && self.bits & !other.bits == 0
    }

    pub fn flip(&self, i: usize) -> Vertex {
        Vertex { bits: self.bits ^ (1 << i), dim: self.dim }
    }

    /// All vertices of `⟦n⟧` in mask order.
    pub fn all(n: usize) -> Result<Vec<Vertex>> {
        cap("cube dimension", MAX_VERTEX_DIM as u64, n as u64)?;
        Ok((0..1u32 << n).map(|b| Vertex::new(b, n)).collect())
    }

    /// The corner `K_n`: every vertex except the root.
    pub fn corner(n: usize) -> Result<Vec<Vertex>> {
        Ok(Vertex::all(n)?.into_iter().skip(1).collect())
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 0 {
            return write!(f, "∅");
        }
        for i in 0..self.dim {
            write!(f, "{}", self.coord(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Const0,
    Const1,
    Id(usize),
    Neg(usize),
}

impl Coord {
    fn eval(&self, v: &Vertex) -> u8 {
        match *self {
            Coord::Const0 => 0,
            Coord::Const1 => 1,
            Coord::Id(i) => v.coord(i),
            Coord::Neg(i) => 1 - v.coord(i),
        }
    }

    fn input(&self) -> Option<usize> {
        match *self {
            Coord::Id(i) | Coord::Neg(i) => Some(i),
            _ => None,
        }
    }
}

/// A cube morphism `⟦m⟧ → ⟦n⟧` in coordinate normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeMorphism {
    pub domain_dim: usize,
    pub coords: Vec<Coord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphismFilter {
    All,
    Injective,
    FaceMap,
    Automorphism,
}

impl CubeMorphism {
    pub fn new(domain_dim: usize, coords: Vec<Coord>) -> Result<Self> {
        for c in &coords {
            if let Some(i) = c.input() {
                if i >= domain_dim {
                    return Err(Error::DimensionMismatch(format!(
                        "coordinate reads input {} of a {}-cube",
                        i, domain_dim
                    )));
                }
            }
        }
        Ok(CubeMorphism { domain_dim, coords })
    }

    pub fn identity(n: usize) -> Self {
        CubeMorphism { domain_dim: n, coords: (0..n).map(Coord::Id).collect() }
    }

    pub fn codomain_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn apply(&self, v: &Vertex) -> Result<Vertex> {
        if v.dim != self.domain_dim {
            return Err(Error::DimensionMismatch(format!(
                "vertex of dimension {} fed to morphism from dimension {}",
                v.dim, self.domain_dim
            )));
        }
        Ok(self.eval(v))
    }

    pub(crate) fn eval(&self, v: &Vertex) -> Vertex {
        let bits = self
            .coords
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, c)| acc | (u32::from(c.eval(v)) << j));
        Vertex::new(bits, self.coords.len())
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &CubeMorphism) -> Result<CubeMorphism> {
        if inner.codomain_dim() != self.domain_dim {
            return Err(Error::DimensionMismatch("composition of incompatible morphisms".into()));
        }
        let coords = self
            .coords
            .iter()
            .map(|c| match *c {
                Coord::Const0 => Coord::Const0,
                Coord::Const1 => Coord::Const1,
                Coord::Id(i) => inner.coords[i],
                Coord::Neg(i) => match inner.coords[i] {
                    Coord::Const0 => Coord::Const1,
                    Coord::Const1 => Coord::Const0,
                    Coord::Id(k) => Coord::Neg(k),
                    Coord::Neg(k) => Coord::Id(k),
                },
            })
            .collect();
        Ok(CubeMorphism { domain_dim: inner.domain_dim, coords })
    }

    fn input_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.domain_dim];
        for c in &self.coords {
            if let Some(i) = c.input() {
                counts[i] += 1;
            }
        }
        counts
    }

    pub fn is_injective(&self) -> bool {
        self.input_counts().iter().all(|&c| c >= 1)
    }

    pub fn is_face_map(&self) -> bool {
        self.input_counts().iter().all(|&c| c == 1)
    }

    pub fn is_automorphism(&self) -> bool {
        self.domain_dim == self.codomain_dim() && self.is_face_map()
    }

    /// Checks that the vertex map extends to an affine map `Z^m → Z^n`.
    pub fn has_affine_extension(&self) -> bool {
        let m = self.domain_dim;
        let base = self.eval(&Vertex::root(m));
        let steps: Vec<Vec<i64>> = (0..m)
            .map(|i| {
                let e = self.eval(&Vertex::new(1 << i, m));
                (0..self.codomain_dim()).map(|j| i64::from(e.coord(j)) - i64::from(base.coord(j))).collect()
            })
            .collect();
        (0..1u32 << m).all(|b| {
            let v = Vertex::new(b, m);
            let image = self.eval(&v);
            (0..self.codomain_dim()).all(|j| {
                let affine: i64 = i64::from(base.coord(j))
                    + (0..m).filter(|&i| v.coord(i) == 1).map(|i| steps[i][j]).sum::<i64>();
                affine == i64::from(image.coord(j))
            })
        })
    }

    /// Image index of every domain vertex, in domain mask order.
    pub fn position_map(&self) -> Vec<usize> {
        (0..1u32 << self.domain_dim)
            .map(|b| self.eval(&Vertex::new(b, self.domain_dim)).index())
            .collect()
    }
}

impl fmt::Display for CubeMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .map(|c| match c {
                Coord::Const0 => "0".to_string(),
                Coord::Const1 => "1".to_string(),
                Coord::Id(i) => format!("v{}", i + 1),
                Coord::Neg(i) => format!("1-v{}", i + 1),
            })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Lists every morphism `⟦m⟧ → ⟦n⟧` passing `filter`, without duplicates.
pub fn enumerate_morphisms(m: usize, n: usize, filter: MorphismFilter) -> Result<Vec<CubeMorphism>> {
    if filter == MorphismFilter::Automorphism && m != n {
        return Err(Error::DimensionMismatch(format!("automorphisms need m = n, got {} and {}", m, n)));
    }
    if matches!(filter, MorphismFilter::Injective | MorphismFilter::FaceMap) && m > n {
        return Ok(Vec::new());
    }
    let choices: Vec<Coord> = [Coord::Const0, Coord::Const1]
        .into_iter()
        .chain((0..m).flat_map(|i| [Coord::Id(i), Coord::Neg(i)]))
        .collect();
    let total = (choices.len() as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    cap("morphism enumeration size", 1_000_000, total)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let phi = CubeMorphism { domain_dim: m, coords: idx.iter().map(|&k| choices[k]).collect() };
        let keep = match filter {
            MorphismFilter::All => true,
            MorphismFilter::Injective => phi.is_injective(),
            MorphismFilter::FaceMap => phi.is_face_map(),
            MorphismFilter::Automorphism => phi.is_automorphism(),
        };
        if keep {
            out.push(phi);
        }
        let mut j = 0;
        loop {
            if j == n {
                return Ok(out);
            }
            idx[j] += 1;
            if idx[j] < choices.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// A face of `⟦n⟧`: fixed coordinates carry their bit, free ones are `None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub fixed: Vec<Option<u8>>,
}

impl Face {
    pub fn whole(n: usize) -> Face {
        Face { fixed: vec![None; n] }
    }

    /// The codimension-one face `{v : v_i = b}`.
    pub fn hyperplane(n: usize, i: usize, b: u8) -> Face {
        let mut fixed = vec![None; n];
        fixed[i] = Some(b);
        Face { fixed }
    }

    pub fn ambient_dim(&self) -> usize {
        self.fixed.len()
    }

    pub fn dim(&self) -> usize {
        self.fixed.iter().filter(|c| c.is_none()).count()
    }

    pub fn free_coords(&self) -> Vec<usize> {
        (0..self.fixed.len()).filter(|&i| self.fixed[i].is_none()).collect()
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.fixed.iter().enumerate().all(|(i, c)| c.is_none_or(|b| v.coord(i) == b))
    }

    /// Vertices in the order induced by the canonical face map.
    pub fn vertices(&self) -> Vec<Vertex> {
        self.as_morphism().position_map().into_iter().map(|b| Vertex::new(b as u32, self.fixed.len())).collect()
    }

    /// The order-preserving face map `⟦dim⟧ → ⟦n⟧` onto this face.
    pub fn as_morphism(&self) -> CubeMorphism {
        let mut next = 0;
        let coords = self
            .fixed
            .iter()
            .map(|c| match c {
                Some(0) => Coord::Const0,
                Some(_) => Coord::Const1,
                None => {
                    next += 1;
                    Coord::Id(next - 1)
                }
            })
            .collect();
        CubeMorphism { domain_dim: next, coords }
    }

    /// All faces of `⟦n⟧`, ordered by dimension then lexicographically.
    pub fn all(n: usize) -> Result<Vec<Face>> {
        cap("cube dimension", MAX_VERTEX_DIM as u64, n as u64)?;
        let mut out = Vec::new();
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let fixed = (0..n)
                .map(|_| {
                    let t = c % 3;
                    c /= 3;
                    match t {
                        0 => Some(0),
                        1 => Some(1),
                        _ => None,
                    }
                })
                .collect();
            out.push(Face { fixed });
        }
        out.sort_by_key(|f| f.dim());
        Ok(out)
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.fixed {
            match c {
                Some(b) => write!(f, "{}", b)?,
                None => write!(f, "*")?,
            }
        }
        Ok(())
    }
}

/// A down-closed set of vertices of `⟦n⟧`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimplicialSet {
    pub dim: usize,
    pub vertices: BTreeSet<Vertex>,
}

impl SimplicialSet {
    /// Smallest down-closed superset of `vs`.
    pub fn closure(dim: usize, vs: &[Vertex]) -> Result<SimplicialSet> {
        cap("cube dimension", MAX_VERTEX_DIM as u64, dim as u64)?;
        let mut vertices = BTreeSet::new();
        for v in vs {
            if v.dim != dim {
                return Err(Error::DimensionMismatch(format!("vertex {} not in a {}-cube", v, dim)));
            }
            let mut sub = v.bits;
            loop {
                vertices.insert(Vertex::new(sub, dim));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & v.bits;
            }
        }
        Ok(SimplicialSet { dim, vertices })
    }

    pub fn is_simplicial(dim: usize, vs: &[Vertex]) -> bool {
        let set: BTreeSet<Vertex> = vs.iter().copied().collect();
        set.iter().all(|v| v.dim == dim && (0..dim).all(|i| v.coord(i) == 0 || set.contains(&v.flip(i))))
    }

    pub fn maximal_vertices(&self) -> Vec<Vertex> {
        self.vertices
            .iter()
            .filter(|&v| !self.vertices.iter().any(|w| w != v && v.le(w)))
            .copied()
            .collect()
    }

    pub fn height(&self) -> usize {
        self.vertices.iter().map(|v| v.height()).max().unwrap_or(0)
    }

    /// Largest height of a member above `u`.
    pub fn degree(&self, u: &Vertex) -> Option<usize> {
        if !self.vertices.contains(u) {
            return None;
        }
        self.vertices.iter().filter(|w| u.le(w)).map(|w| w.height()).max()
    }

    pub fn union(&self, other: &SimplicialSet) -> SimplicialSet {
        SimplicialSet { dim: self.dim, vertices: self.vertices.union(&other.vertices).copied().collect() }
    }

    pub fn intersection(&self, other: &SimplicialSet) -> SimplicialSet {
        SimplicialSet { dim: self.dim, vertices: self.vertices.intersection(&other.vertices).copied().collect() }
    }

    pub fn vertex_list(&self) -> Vec<Vertex> {
        self.vertices.iter().copied().collect()
    }

    /// Every simplicial subset of `⟦n⟧`, the empty set included.
    pub fn all(n: usize) -> Result<Vec<SimplicialSet>> {
        cap("simplicial lattice dimension", MAX_BLOWUP_DIM as u64, n as u64)?;
        let verts = Vertex::all(n)?;
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << verts.len()) {
            let chosen: Vec<Vertex> = verts.iter().filter(|v| mask >> v.bits & 1 == 1).copied().collect();
            if SimplicialSet::is_simplicial(n, &chosen) {
                out.push(SimplicialSet { dim: n, vertices: chosen.into_iter().collect() });
            }
        }
        Ok(out)
    }
}

/// The tricube embedding `q_n : {-1,0,1}^n → ⟦2n⟧`.
pub fn tricube_embed(t: &[i8]) -> Result<Vertex> {
    let n = t.len();
    cap("tricube dimension", (MAX_VERTEX_DIM / 2) as u64, n as u64)?;
    let mut bits = 0u32;
    for (i, &ti) in t.iter().enumerate() {
        match ti {
            1 => bits |= 1 << i,
            -1 => bits |= 1 << (n + i),
            0 => {}
            other => return Err(Error::InvalidEntry(format!("tricube coordinate {} not in {{-1,0,1}}", other))),
        }
    }
    Ok(Vertex::new(bits, 2 * n))
}

/// Inverse of [`tricube_embed`] on its image: `t_i = v_i - v_{i+n}`.
pub fn tricube_coords(v: &Vertex) -> Result<Vec<i8>> {
    if !v.dim.is_multiple_of(2) {
        return Err(Error::DimensionMismatch("tricube vertices live in even dimension".into()));
    }
    let n = v.dim / 2;
    (0..n)
        .map(|i| match (v.coord(i), v.coord(n + i)) {
            (1, 1) => Err(Error::InvalidEntry(format!("{} is not in the tricube image", v))),
            (a, b) => Ok(a as i8 - b as i8),
        })
        .collect()
}

/// Image of the tricube in `⟦2n⟧`, in mask order.
pub fn tricube_vertices(n: usize) -> Result<Vec<Vertex>> {
    cap("tricube dimension", (MAX_VERTEX_DIM / 2) as u64, n as u64)?;
    Ok(Vertex::all(2 * n)?
        .into_iter()
        .filter(|v| (0..n).all(|i| v.coord(i) & v.coord(n + i) == 0))
        .collect())
}

/// Outer point map `ω_n : ⟦n⟧ → {-1,1}^n ⊂ {-1,0,1}^n`.
pub fn outer_point(v: &Vertex) -> Vec<i8> {
    (0..v.dim).map(|i| if v.coord(i) == 1 { 1 } else { -1 }).collect()
}

/// The six permutations of `{-1,0,1}`, as lookup tables indexed by `t + 1`.
pub fn s3_elements() -> Vec<[i8; 3]> {
    vec![[-1, 0, 1], [-1, 1, 0], [0, -1, 1], [0, 1, -1], [1, -1, 0], [1, 0, -1]]
}

/// Coordinatewise action of `(π_1,…,π_n) ∈ S_3^n` on tricube vertices of `⟦2n⟧`.
pub fn tricube_action(perms: &[[i8; 3]], v: &Vertex) -> Result<Vertex> {
    let t = tricube_coords(v)?;
    if t.len() != perms.len() {
        return Err(Error::DimensionMismatch("one permutation per tricube coordinate".into()));
    }
    let moved: Vec<i8> = t.iter().zip(perms).map(|(&ti, p)| p[(ti + 1) as usize]).collect();
    tricube_embed(&moved)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn automorphism_counts() {
        assert_eq!(enumerate_morphisms(1, 1, MorphismFilter::Automorphism).unwrap().len(), 2);
        for (n, expected) in [(0, 1), (1, 2), (2, 8), (3, 48)] {
            assert_eq!(enumerate_morphisms(n, n, MorphismFilter::Automorphism).unwrap().len(), expected);
        }
        assert_eq!(enumerate_morphisms(2, 2, MorphismFilter::FaceMap).unwrap().len(), 8);
        assert!(enumerate_morphisms(1, 2, MorphismFilter::Automorphism).is_err());
    }

    #[test]
    fn apply_examples() {
        let v = Vertex::from_coords(&[1, 0]);
        assert_eq!(CubeMorphism::identity(2).apply(&v).unwrap(), v);
        let dup = CubeMorphism::new(1, vec![Coord::Id(0), Coord::Id(0)]).unwrap();
        assert_eq!(dup.apply(&Vertex::from_coords(&[1])).unwrap(), Vertex::from_coords(&[1, 1]));
        let neg = CubeMorphism::new(1, vec![Coord::Neg(0)]).unwrap();
        assert_eq!(neg.apply(&Vertex::from_coords(&[0])).unwrap(), Vertex::from_coords(&[1]));
        assert!(neg.apply(&v).is_err());
    }

    #[test]
    fn tricube_examples() {
        assert_eq!(tricube_embed(&[-1]).unwrap(), Vertex::from_coords(&[0, 1]));
        assert_eq!(tricube_embed(&[0]).unwrap(), Vertex::from_coords(&[0, 0]));
        assert_eq!(tricube_embed(&[1]).unwrap(), Vertex::from_coords(&[1, 0]));
        assert_eq!(tricube_embed(&[1, -1]).unwrap(), Vertex::from_coords(&[1, 0, 0, 1]));
        assert!(tricube_embed(&[2]).is_err());
        assert_eq!(tricube_coords(&Vertex::from_coords(&[1, 0, 0, 1])).unwrap(), vec![1, -1]);
    }

    #[test]
    fn closure_examples() {
        let top = SimplicialSet::closure(2, &[Vertex::from_coords(&[1, 1])]).unwrap();
        assert_eq!(top.vertices.len(), 4);
        let s = SimplicialSet::closure(2, &[Vertex::from_coords(&[1, 0]), Vertex::from_coords(&[0, 1])]).unwrap();
        assert_eq!(s.vertices.len(), 3);
        assert!(!s.vertices.contains(&Vertex::from_coords(&[1, 1])));
        assert_eq!(s.maximal_vertices(), vec![Vertex::from_coords(&[1, 0]), Vertex::from_coords(&[0, 1])]);
        assert!(SimplicialSet::is_simplicial(2, &tricube_vertices(1).unwrap()));
    }

    #[test]
    fn degree_of_vertices() {
        let s = SimplicialSet::closure(3, &[Vertex::from_coords(&[1, 1, 0]), Vertex::from_coords(&[0, 0, 1])]).unwrap();
        assert_eq!(s.degree(&Vertex::root(3)), Some(2));
        assert_eq!(s.degree(&Vertex::from_coords(&[0, 0, 1])), Some(1));
        assert_eq!(s.degree(&Vertex::from_coords(&[1, 1, 1])), None);
    }

    #[test]
    fn simplicial_lattice_sizes() {
        // Down-sets of the Boolean lattice (Dedekind numbers).
        let sizes: Vec<usize> = (0..=3).map(|n| SimplicialSet::all(n).unwrap().len()).collect();
        assert_eq!(sizes, vec![2, 3, 6, 20]);
    }

    #[test]
    fn faces_of_square() {
        let faces = Face::all(2).unwrap();
        assert_eq!(faces.len(), 9);
        let f = Face::hyperplane(2, 1, 0);
        assert_eq!(f.vertices(), vec![Vertex::from_coords(&[0, 0]), Vertex::from_coords(&[1, 0])]);
        assert!(f.as_morphism().is_face_map());
    }
}
