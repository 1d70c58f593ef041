//! The 22-facet polytope P: the union of the 24 images of Q under the finite
//! group G_I generated by the reflections in the walls i0, i1, i2.
//!
//! Facets come in five families. The images of `t` and `b` are the top and
//! bottom extremal facets E_i and E'_i, those of `c` the six central facets
//! C_ij. The images of `u` and `l` are the half-height facets; H_i are the
//! ones meeting the top facets and H'_i the ones meeting the bottom.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lorentz::{
    classify_pair, orthogonal_complement_of_four, reflection_in, Causal, LorentzVector, NamedVector, PairClass, DIM,
};
use crate::scalar::{Scalar, Sign};
use crate::{FieldElement, Isometry, Vector};

pub const FACETS: usize = 22;

const C_PAIRS: [(u8, u8); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    E,
    EPrime,
    H,
    HPrime,
    C,
}

impl Family {
    pub fn is_extremal(self) -> bool {
        matches!(self, Family::E | Family::EPrime)
    }

    pub fn is_half_height(self) -> bool {
        matches!(self, Family::H | Family::HPrime)
    }

    pub fn is_central(self) -> bool {
        self == Family::C
    }

    /// Index of the Isom(P)-orbit: extremal, half-height, central.
    pub fn orbit(self) -> usize {
        match self {
            Family::E | Family::EPrime => 0,
            Family::H | Family::HPrime => 1,
            Family::C => 2,
        }
    }
}

/// One of the 22 facet labels, stored as its index in the order
/// E1..E4, E'1..E'4, H1..H4, H'1..H'4, C12, C13, C14, C23, C24, C34.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FacetLabel(u8);

impl FacetLabel {
    pub fn from_index(i: usize) -> Self {
        assert!(i < FACETS, "facet index {i} out of range");
        FacetLabel(i as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = FacetLabel> {
        (0..FACETS).map(FacetLabel::from_index)
    }

    pub fn e(i: u8) -> Self {
        Self::indexed(Family::E, i)
    }

    pub fn e_prime(i: u8) -> Self {
        Self::indexed(Family::EPrime, i)
    }

    pub fn h(i: u8) -> Self {
        Self::indexed(Family::H, i)
    }

    pub fn h_prime(i: u8) -> Self {
        Self::indexed(Family::HPrime, i)
    }

    pub fn indexed(family: Family, i: u8) -> Self {
        assert!((1..=4).contains(&i));
        let base = match family {
            Family::E => 0,
            Family::EPrime => 4,
            Family::H => 8,
            Family::HPrime => 12,
            Family::C => panic!("central facets are indexed by pairs"),
        };
        FacetLabel(base + i - 1)
    }

    pub fn c(i: u8, j: u8) -> Self {
        let key = (i.min(j), i.max(j));
        let k = C_PAIRS.iter().position(|&p| p == key).expect("distinct indices in 1..=4");
        FacetLabel(16 + k as u8)
    }

    pub fn family(self) -> Family {
        match self.0 {
            0..=3 => Family::E,
            4..=7 => Family::EPrime,
            8..=11 => Family::H,
            12..=15 => Family::HPrime,
            _ => Family::C,
        }
    }

    /// Index set in {1..4}: one index, or two for central facets.
    pub fn indices(self) -> Vec<u8> {
        match self.family() {
            Family::C => {
                let (i, j) = C_PAIRS[self.0 as usize - 16];
                vec![i, j]
            }
            _ => vec![self.0 % 4 + 1],
        }
    }

    /// Relabels indices by `perm` (1-based, `perm[i-1]` is the image of `i`)
    /// and optionally swaps top and bottom.
    pub fn permuted(self, perm: &[u8; 4], swap_sides: bool) -> Self {
        let p = |i: u8| perm[i as usize - 1];
        match self.family() {
            Family::C => {
                let ij = self.indices();
                let (i, j) = (p(ij[0]), p(ij[1]));
                if swap_sides {
                    let rest: Vec<u8> = (1..=4).filter(|k| *k != i && *k != j).collect();
                    FacetLabel::c(rest[0], rest[1])
                } else {
                    FacetLabel::c(i, j)
                }
            }
            f => {
                let fam = match (f, swap_sides) {
                    (Family::E, true) => Family::EPrime,
                    (Family::EPrime, true) => Family::E,
                    (Family::H, true) => Family::HPrime,
                    (Family::HPrime, true) => Family::H,
                    (f, _) => f,
                };
                FacetLabel::indexed(fam, p(self.indices()[0]))
            }
        }
    }
}

impl fmt::Display for FacetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ix = self.indices();
        match self.family() {
            Family::E => write!(f, "E{}", ix[0]),
            Family::EPrime => write!(f, "E'{}", ix[0]),
            Family::H => write!(f, "H{}", ix[0]),
            Family::HPrime => write!(f, "H'{}", ix[0]),
            Family::C => write!(f, "C{}{}", ix[0], ix[1]),
        }
    }
}

impl fmt::Debug for FacetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for FacetLabel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().replace('′', "'");
        let bad = || format!("unknown facet label `{s}`");
        let digit = |c: char| c.to_digit(10).filter(|d| (1..=4).contains(d)).map(|d| d as u8);
        let chars: Vec<char> = s.chars().collect();
        match chars.as_slice() {
            ['E', '\'', d] => digit(*d).map(FacetLabel::e_prime),
            ['H', '\'', d] => digit(*d).map(FacetLabel::h_prime),
            ['E', d] => digit(*d).map(FacetLabel::e),
            ['H', d] => digit(*d).map(FacetLabel::h),
            ['C', a, b] => match (digit(*a), digit(*b)) {
                (Some(i), Some(j)) if i != j => Some(FacetLabel::c(i, j)),
                _ => None,
            },
            _ => None,
        }
        .ok_or_else(bad)
    }
}

impl Serialize for FacetLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Labels of the facets in a bitmask.
pub fn labels_of(mask: u32) -> Vec<FacetLabel> {
    (0..FACETS).filter(|i| mask >> i & 1 == 1).map(FacetLabel::from_index).collect()
}

pub fn mask_of(labels: &[FacetLabel]) -> u32 {
    labels.iter().fold(0, |m, l| m | 1 << l.index())
}

/// Closure of a set of isometries under composition, deduplicated by exact
/// matrix equality. Fails once more than `bound` elements appear.
pub fn enumerate_group(generators: &[Isometry], bound: usize) -> Result<Vec<Isometry>> {
    let id = Isometry::identity();
    let mut seen: HashSet<Isometry> = HashSet::from([id.clone()]);
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = g.compose(&x);
            if seen.insert(y.clone()) {
                if out.len() == bound {
                    return Err(Error::GroupBound(bound));
                }
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}

/// Whether `v = λ w` for some λ > 0.
fn same_ray(v: &Vector, w: &Vector) -> bool {
    v.proportionality(w) == Some(Sign::Positive)
}

/// Checks pairwise acute orientation of the walls, flipping normals so that
/// every off-diagonal inner product is ≤ 0, then fixes the global sign by
/// requiring a nonempty region on the future sheet.
pub fn orient_walls(walls: &[NamedVector]) -> Result<OrientedWalls> {
    let n = walls.len();
    let mut sign: Vec<Option<bool>> = vec![None; n];
    for start in 0..n {
        if sign[start].is_some() {
            continue;
        }
        sign[start] = Some(false);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let ip = walls[i].vector.inner(&walls[j].vector);
                if i == j || ip.sign() == Sign::Zero {
                    continue;
                }
                let want = sign[i].unwrap() ^ (ip.sign() == Sign::Positive);
                match sign[j] {
                    None => {
                        sign[j] = Some(want);
                        stack.push(j);
                    }
                    Some(s) if s != want => {
                        return Err(Error::Construction(format!(
                            "walls {} and {} cannot be oriented acutely",
                            walls[i].name, walls[j].name
                        )))
                    }
                    _ => {}
                }
            }
        }
    }
    let apply = |global: bool| -> Vec<NamedVector> {
        walls
            .iter()
            .zip(&sign)
            .map(|(w, s)| NamedVector {
                name: w.name.clone(),
                vector: if s.unwrap() ^ global { -w.vector.clone() } else { w.vector.clone() },
            })
            .collect()
    };
    for global in [false, true] {
        let oriented = apply(global);
        let normals: Vec<Vector> = oriented.iter().map(|w| w.vector.clone()).collect();
        let verts = enumerate_vertices_of(&normals, true);
        let finite: Vec<&RawVertex> = verts.iter().filter(|v| !v.ideal).collect();
        if finite.is_empty() {
            continue;
        }
        let interior = finite.iter().fold(Vector::zero(), |acc, v| acc + v.point.clone());
        if normals.iter().all(|n| interior.inner(n).sign() == Sign::Negative) {
            let flipped = oriented
                .iter()
                .zip(walls)
                .filter(|(o, w)| o.vector != w.vector)
                .map(|(o, _)| o.name.clone())
                .collect();
            return Ok(OrientedWalls {
                walls: oriented,
                flipped,
                interior,
                vertices: verts,
            });
        }
    }
    Err(Error::Construction("walls bound no region of finite volume".into()))
}

/// Q's walls after orientation normalization.
#[derive(Clone, Debug)]
pub struct OrientedWalls {
    pub walls: Vec<NamedVector>,
    /// Names of walls whose normal was negated.
    pub flipped: Vec<String>,
    /// Sum of the finite vertices; strictly inside every wall.
    pub interior: Vector,
    vertices: Vec<RawVertex>,
}

impl OrientedWalls {
    /// Vertices of Q as (wall names, ideal).
    pub fn vertex_walls(&self) -> Vec<(Vec<String>, bool)> {
        self.vertices
            .iter()
            .map(|v| {
                let names = (0..self.walls.len())
                    .filter(|i| v.facets >> i & 1 == 1)
                    .map(|i| self.walls[i].name.clone())
                    .collect();
                (names, v.ideal)
            })
            .collect()
    }

    /// Number of finite and ideal vertices of Q.
    pub fn vertex_counts(&self) -> (usize, usize) {
        let ideal = self.vertices.iter().filter(|v| v.ideal).count();
        (self.vertices.len() - ideal, ideal)
    }
}

#[derive(Clone, Debug)]
struct RawVertex {
    point: Vector,
    facets: u32,
    ideal: bool,
}

/// Floating-point screen for a 4-subset of normals. Only answers true when
/// the subset fails by a wide margin, so the exact test still decides every
/// borderline case.
fn clearly_not_a_vertex(normals: &[LorentzVector<f64>], quad: &[usize; 4]) -> bool {
    const MARGIN: f64 = 1e-6;
    let w = orthogonal_complement_of_four(quad.map(|i| &normals[i]));
    let scale = w.coords().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale < MARGIN {
        return false;
    }
    let w = w.map(|x| x / scale);
    if w.inner(&w) > MARGIN {
        return true;
    }
    let w = if w.coords()[0] < 0.0 { w.map(|x| -x) } else { w };
    normals.iter().any(|n| w.inner(n) > MARGIN)
}

/// Vertices of `{x : ⟨x, n⟩ ≤ 0 for all n}` in the closure of the future
/// sheet, from all 4-subsets of the normals.
fn enumerate_vertices_of(normals: &[Vector], screen: bool) -> Vec<RawVertex> {
    let m = normals.len();
    let mut quads = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                for d in c + 1..m {
                    quads.push([a, b, c, d]);
                }
            }
        }
    }
    let approx: Vec<LorentzVector<f64>> = normals
        .iter()
        .map(|n| {
            let v = n.map(|x| x.to_f64());
            let scale = v.coords().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            v.map(|x| x / scale)
        })
        .collect();
    let found: Vec<RawVertex> = quads
        .par_iter()
        .filter(|q| !screen || !clearly_not_a_vertex(&approx, q))
        .filter_map(|q| {
            let w = orthogonal_complement_of_four(q.map(|i| &normals[i]));
            if w.is_zero() || w.causal() == Causal::Spacelike {
                return None;
            }
            let w = w.future();
            let mut facets = 0u32;
            for (i, n) in normals.iter().enumerate() {
                match w.inner(n).sign() {
                    Sign::Positive => return None,
                    Sign::Zero => facets |= 1 << i,
                    Sign::Negative => {}
                }
            }
            Some(RawVertex {
                ideal: w.causal() == Causal::Lightlike,
                point: w.projective_normal_form(),
                facets,
            })
        })
        .collect();
    // a vertex is determined by its incidence set; merge duplicates deterministically
    let mut merged: BTreeMap<u32, RawVertex> = BTreeMap::new();
    for v in found {
        merged.entry(v.facets).or_insert(v);
    }
    merged.into_values().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum VertexKind {
    Type1,
    Type2,
    Type3,
    Ideal,
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VertexKind::Type1 => "type 1",
            VertexKind::Type2 => "type 2",
            VertexKind::Type3 => "type 3",
            VertexKind::Ideal => "ideal",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Top,
    Bottom,
}

#[derive(Clone, Debug)]
pub struct VertexRecord {
    /// Future-pointing representative, first nonzero coordinate one.
    pub point: Vector,
    pub facets: u32,
    pub kind: VertexKind,
    /// Top or bottom half for finite vertices.
    pub side: Option<Side>,
}

impl VertexRecord {
    pub fn is_ideal(&self) -> bool {
        self.kind == VertexKind::Ideal
    }

    pub fn labels(&self) -> Vec<FacetLabel> {
        labels_of(self.facets)
    }
}

fn classify_vertex(facets: u32, ideal: bool) -> Result<(VertexKind, Option<Side>)> {
    let mut count = [0usize; 5];
    for l in labels_of(facets) {
        count[l.family() as usize] += 1;
    }
    let kind = match (ideal, count) {
        (true, [1, 1, 1, 1, 2]) => return Ok((VertexKind::Ideal, None)),
        (false, [4, 0, 0, 0, 0]) => (VertexKind::Type1, Side::Top),
        (false, [0, 4, 0, 0, 0]) => (VertexKind::Type1, Side::Bottom),
        (false, [3, 0, 1, 0, 0]) => (VertexKind::Type2, Side::Top),
        (false, [0, 3, 0, 1, 0]) => (VertexKind::Type2, Side::Bottom),
        (false, [2, 0, 1, 0, 1]) => (VertexKind::Type3, Side::Top),
        (false, [0, 2, 0, 1, 1]) => (VertexKind::Type3, Side::Bottom),
        _ => {
            return Err(Error::Construction(format!(
                "vertex with facets {:?} matches no link pattern",
                labels_of(facets)
            )))
        }
    };
    Ok((kind.0, Some(kind.1)))
}

/// A face of P: its vertex set (finite and ideal) and the facets containing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub vertices: u64,
    pub facets: u32,
    pub dim: usize,
    /// A single ideal vertex.
    pub ideal: bool,
}

/// An element of Isom(P).
#[derive(Clone, Debug)]
pub struct Symmetry {
    pub matrix: Isometry,
    /// Image of facet `f` is `facet_perm[f]`.
    pub facet_perm: [u8; FACETS],
    pub vertex_perm: Vec<usize>,
    pub orientation: Sign,
    /// Permutation of the indices 1..4 (`index_perm[i-1]` is the image of `i`).
    pub index_perm: [u8; 4],
    pub swaps_sides: bool,
    pub word: String,
}

impl Symmetry {
    pub fn apply_facet(&self, f: usize) -> usize {
        self.facet_perm[f] as usize
    }

    pub fn apply_label(&self, l: FacetLabel) -> FacetLabel {
        FacetLabel::from_index(self.apply_facet(l.index()))
    }

    pub fn apply_vertices(&self, mask: u64) -> u64 {
        (0..self.vertex_perm.len())
            .filter(|v| mask >> v & 1 == 1)
            .fold(0, |m, v| m | 1 << self.vertex_perm[v])
    }

    pub fn apply_facet_mask(&self, mask: u32) -> u32 {
        (0..FACETS)
            .filter(|f| mask >> f & 1 == 1)
            .fold(0, |m, f| m | 1 << self.facet_perm[f])
    }
}

/// Isom(P) with its multiplication table.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    pub elements: Vec<Symmetry>,
    mult: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    lookup: HashMap<[u8; FACETS], usize>,
}

impl SymmetryGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn get(&self, i: usize) -> &Symmetry {
        &self.elements[i]
    }

    /// Index of `x ∘ y` (apply `y` first).
    pub fn compose(&self, x: usize, y: usize) -> usize {
        self.mult[x][y]
    }

    pub fn inverse(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn find_by_facets(&self, perm: &[u8; FACETS]) -> Option<usize> {
        self.lookup.get(perm).copied()
    }

    pub fn is_central(&self, x: usize) -> bool {
        (0..self.len()).all(|y| self.mult[x][y] == self.mult[y][x])
    }

    pub fn order_of(&self, x: usize) -> usize {
        let mut k = 1;
        let mut y = x;
        while y != 0 {
            y = self.mult[x][y];
            k += 1;
        }
        k
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitInfo {
    pub wall: String,
    pub family: Family,
    pub orbit: usize,
    pub stabilizer: usize,
}

/// The polytope P with labels, symmetries, vertices and faces.
#[derive(Clone, Debug)]
pub struct PolytopeP {
    /// Q's walls after orientation normalization.
    pub walls: Vec<NamedVector>,
    pub flipped_walls: Vec<String>,
    pub q_interior: Vector,
    /// Finite and ideal vertex counts of Q.
    pub q_vertex_counts: (usize, usize),
    /// Wall of Q whose images are the upper facets H_i (`u` or `l`).
    pub upper_wall: String,
    pub normals: Vec<Vector>,
    pub orbits: Vec<OrbitInfo>,
    pub group: SymmetryGroup,
    /// Indices in `group` of the 24 elements of G_I.
    pub g_i: Vec<usize>,
    /// Index of the antipodal map `a`.
    pub a: usize,
    /// The symmetry of Q swapping t/b, u/l, i1/i2 (as a matrix).
    pub q_symmetry: Isometry,
    /// Index of the transposition `r_ij` for `i < j`.
    pub r: BTreeMap<(u8, u8), usize>,
    /// Indices of the wall reflections `i0, i1, i2`.
    pub wall_reflections: BTreeMap<String, usize>,
    pub vertices: Vec<VertexRecord>,
    pub faces: Vec<Face>,
    face_lookup: HashMap<u64, usize>,
}

fn wall<'a>(walls: &'a [NamedVector], name: &str) -> Result<&'a Vector> {
    walls
        .iter()
        .find(|w| w.name == name)
        .map(|w| &w.vector)
        .ok_or_else(|| Error::Construction(format!("missing wall `{name}`")))
}

/// Outer walls of Q and the facet family their images form; the half-height
/// walls are assigned after checking which side they lie on.
const WALL_FAMILIES: [(&str, Family, usize); 5] = [
    ("t", Family::E, 4),
    ("b", Family::EPrime, 4),
    ("", Family::H, 4),
    ("", Family::HPrime, 4),
    ("c", Family::C, 6),
];

fn index_word(perm: &[u8; 4]) -> String {
    let mut seen = [false; 4];
    let mut parts = Vec::new();
    for s in 1..=4u8 {
        if seen[s as usize - 1] {
            continue;
        }
        let mut cycle = vec![s];
        seen[s as usize - 1] = true;
        let mut x = perm[s as usize - 1];
        while x != s {
            seen[x as usize - 1] = true;
            cycle.push(x);
            x = perm[x as usize - 1];
        }
        // (c0 c1 ... ck) = (c0 ck) ... (c0 c1), rightmost applied first
        for k in (1..cycle.len()).rev() {
            let (i, j) = (cycle[0].min(cycle[k]), cycle[0].max(cycle[k]));
            parts.push(format!("r{i}{j}"));
        }
    }
    if parts.is_empty() {
        "id".into()
    } else {
        parts.join("*")
    }
}

impl PolytopeP {
    /// Builds P from Q's eight walls (named t, b, u, l, c, i0, i1, i2).
    pub fn build(walls: &[NamedVector]) -> Result<Self> {
        let oriented = orient_walls(walls)?;
        let walls = oriented.walls.clone();
        let refl = |n: &str| reflection_in(wall(&walls, n)?);
        let gens = [refl("i0")?, refl("i1")?, refl("i2")?];
        let g_i = enumerate_group(&gens, 10_000)?;

        // the upper half-height facets H_k are the ones meeting the top facets
        let mut assembled = None;
        for (upper, lower) in [("u", "l"), ("l", "u")] {
            let asm = assemble(&walls, &g_i, &gens, upper, lower)?;
            let meets = |lo: usize| {
                asm.raw.iter().any(|v| !v.ideal && v.facets & 0xf != 0 && v.facets >> lo & 0xf != 0)
            };
            if meets(8) && !meets(12) {
                assembled = Some((upper, asm));
                break;
            }
        }
        let (upper, Assembly { orbits, a, q_symmetry, normals, raw, relabel }) = assembled
            .ok_or_else(|| Error::Construction("no half-height orbit lies on the top side".into()))?;
        let remap = |mask: u32| -> u32 {
            (0..FACETS).filter(|&new| mask >> relabel[new] & 1 == 1).fold(0, |m, f| m | 1 << f)
        };
        let mut vertices = Vec::new();
        for v in raw {
            let facets = remap(v.facets);
            let (kind, side) = classify_vertex(facets, v.ideal)?;
            vertices.push(VertexRecord {
                point: v.point,
                facets,
                kind,
                side,
            });
        }
        vertices.sort_by_key(|v| (v.kind, v.facets));
        if vertices.len() > 64 {
            return Err(Error::Construction(format!("{} vertices exceed the bitmask width", vertices.len())));
        }

        // Isom(P) from the wall reflections of G_I and a
        let mut named = vec![("i0".to_string(), gens[0].clone()), ("i1".to_string(), gens[1].clone())];
        named.push(("i2".to_string(), gens[2].clone()));
        named.push(("a".to_string(), a.clone()));
        let group = build_group(&named, &normals, &vertices)?;
        let a_idx = group
            .elements
            .iter()
            .position(|s| s.matrix == a)
            .expect("generator present");
        let g_i_idx: Vec<usize> = g_i
            .iter()
            .map(|g| group.elements.iter().position(|s| &s.matrix == g))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Construction("G_I element missing from Isom(P)".into()))?;
        let mut r = BTreeMap::new();
        for &(i, j) in &C_PAIRS {
            let mut t = [1, 2, 3, 4];
            t.swap(i as usize - 1, j as usize - 1);
            let k = g_i_idx
                .iter()
                .copied()
                .find(|&k| group.elements[k].index_perm == t && !group.elements[k].swaps_sides)
                .ok_or_else(|| Error::Construction(format!("no transposition r{i}{j} in G_I")))?;
            r.insert((i, j), k);
        }
        let wall_reflections = ["i0", "i1", "i2"]
            .iter()
            .zip(&gens)
            .map(|(n, g)| {
                let k = group.elements.iter().position(|s| &s.matrix == g).expect("generator present");
                (n.to_string(), k)
            })
            .collect();

        let (faces, face_lookup) = face_lattice(&normals, &vertices)?;
        Ok(PolytopeP {
            walls,
            flipped_walls: oriented.flipped.clone(),
            q_interior: oriented.interior.clone(),
            q_vertex_counts: oriented.vertex_counts(),
            upper_wall: upper.to_string(),
            normals,
            orbits,
            group,
            g_i: g_i_idx,
            a: a_idx,
            q_symmetry,
            r,
            wall_reflections,
            vertices,
            faces,
            face_lookup,
        })
    }

    pub fn normal(&self, l: FacetLabel) -> &Vector {
        &self.normals[l.index()]
    }

    pub fn antipodal_map(&self) -> &Symmetry {
        self.group.get(self.a)
    }

    /// Index of `r_ij` (either order).
    pub fn r(&self, i: u8, j: u8) -> usize {
        self.r[&(i.min(j), i.max(j))]
    }

    pub fn face_index(&self, vertices: u64) -> Option<usize> {
        self.face_lookup.get(&vertices).copied()
    }

    /// Faces of a given dimension, as indices into `faces`.
    pub fn faces_of_dim(&self, dim: usize) -> Vec<usize> {
        (0..self.faces.len()).filter(|&i| self.faces[i].dim == dim && !self.faces[i].ideal).collect()
    }

    /// Index of the facet's own face.
    pub fn facet_face(&self, f: usize) -> usize {
        let mask = self.facet_vertices(f);
        self.face_lookup[&mask]
    }

    pub fn facet_vertices(&self, f: usize) -> u64 {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.facets >> f & 1 == 1)
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    /// Image of a face under a symmetry.
    pub fn map_face(&self, s: &Symmetry, face: usize) -> usize {
        self.face_lookup[&s.apply_vertices(self.faces[face].vertices)]
    }

    /// Evaluates a product word over `a, i0, i1, i2, r12, …, r34` (and `id`),
    /// separated by `*`; the rightmost factor is applied first.
    pub fn evaluate_word(&self, word: &str) -> Result<usize> {
        let mut acc = self.group.identity();
        for tok in word.split(['*', '·']).map(str::trim) {
            let k = match tok {
                "id" | "1" => self.group.identity(),
                "a" => self.a,
                t if self.wall_reflections.contains_key(t) => self.wall_reflections[t],
                t if t.len() == 3 && t.starts_with('r') => {
                    let d: Vec<u8> = t[1..].bytes().map(|b| b.wrapping_sub(b'0')).collect();
                    if d[0] == d[1] || !(1..=4).contains(&d[0]) || !(1..=4).contains(&d[1]) {
                        return Err(Error::Data(format!("bad symmetry `{t}`")));
                    }
                    self.r(d[0], d[1])
                }
                t => return Err(Error::Data(format!("unknown symmetry `{t}` in `{word}`"))),
            };
            acc = self.group.compose(acc, k);
        }
        Ok(acc)
    }

    pub fn vertex_counts(&self) -> BTreeMap<VertexKind, usize> {
        let mut out = BTreeMap::new();
        for v in &self.vertices {
            *out.entry(v.kind).or_insert(0) += 1;
        }
        out
    }

    /// Vertex with exactly this incidence set.
    pub fn vertex_with_facets(&self, labels: &[FacetLabel]) -> Option<usize> {
        let m = mask_of(labels);
        self.vertices.iter().position(|v| v.facets == m)
    }

    /// Spacelike `w` orthogonal to every ideal vertex, when one exists.
    pub fn ideal_hyperplane(&self) -> Option<Vector> {
        let rows: Vec<Vec<FieldElement>> = self
            .vertices
            .iter()
            .filter(|v| v.is_ideal())
            .map(|v| v.point.lowered().to_vec())
            .collect();
        Matrix::from_rows(rows)
            .kernel()
            .into_iter()
            .map(|k| Vector::from_slice(&k))
            .find(|w| w.causal() == Causal::Spacelike)
    }

    /// Relative position of every pair of facets.
    pub fn facet_adjacency(&self) -> Vec<FacetPair> {
        let mut out = Vec::new();
        for i in 0..FACETS {
            for j in i + 1..FACETS {
                let class = classify_pair(&self.normals[i], &self.normals[j]).expect("facet normals are spacelike");
                let common = self.facet_vertices(i) & self.facet_vertices(j);
                let meet = if common == 0 {
                    Meet::Disjoint
                } else {
                    let f = &self.faces[self.face_lookup[&common]];
                    match (f.dim, f.ideal) {
                        (_, true) => Meet::IdealPoint,
                        (2, _) => Meet::Ridge {
                            dihedral: class.dihedral_angle().unwrap_or_else(|| Ratio::new(0, 1)),
                        },
                        (d, _) => Meet::Lower(d),
                    }
                };
                out.push(FacetPair {
                    a: FacetLabel::from_index(i),
                    b: FacetLabel::from_index(j),
                    class,
                    meet,
                });
            }
        }
        out
    }

    /// Dihedral angle (as a multiple of π) between two adjacent facets.
    pub fn dihedral(&self, i: usize, j: usize) -> Option<Ratio<i64>> {
        classify_pair(&self.normals[i], &self.normals[j]).ok()?.dihedral_angle()
    }

    /// Machine-readable description of P.
    pub fn description(&self) -> PDescription {
        let text = |v: &Vector| v.coords().iter().map(FieldElement::to_text).collect();
        PDescription {
            facets: FacetLabel::all()
                .map(|l| FacetOut {
                    label: l,
                    family: l.family(),
                    normal: text(self.normal(l)),
                })
                .collect(),
            symmetries: self
                .group
                .elements
                .iter()
                .map(|s| SymmetryOut {
                    word: s.word.clone(),
                    orientation: s.orientation.to_i32(),
                    facets: FacetLabel::all().map(|l| s.apply_label(l)).collect(),
                })
                .collect(),
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexOut {
                    kind: v.kind,
                    side: v.side,
                    facets: v.labels(),
                    point: text(&v.point),
                })
                .collect(),
        }
    }
}

/// The linear map sending each wall to its partner, fixing the listed walls.
struct Assembly {
    orbits: Vec<OrbitInfo>,
    a: Isometry,
    q_symmetry: Isometry,
    normals: Vec<Vector>,
    raw: Vec<RawVertex>,
    relabel: Vec<usize>,
}

/// Orders the 22 facet normals with `upper` and `lower` taken as the walls
/// behind H and H', and finds the antipodal map.
fn assemble(walls: &[NamedVector], g_i: &[Isometry], gens: &[Isometry], upper: &str, lower: &str) -> Result<Assembly> {
    // orbits of the five outer walls, deduplicated as oriented hyperplanes
    let mut orbit_vecs: Vec<Vec<Vector>> = Vec::new();
    let mut orbits = Vec::new();
    for (name, family, expected) in WALL_FAMILIES {
        let name = match family {
            Family::H => upper,
            Family::HPrime => lower,
            _ => name,
        };
        let w = wall(walls, name)?;
        let mut orbit: Vec<Vector> = Vec::new();
        let mut stabilizer = 0;
        for g in g_i {
            let gw = g.apply(w);
            if same_ray(&gw, w) {
                stabilizer += 1;
            }
            if orbit.iter().any(|o| same_ray(o, &gw)) {
                continue;
            }
            if orbit.iter().any(|o| o.proportionality(&gw).is_some()) {
                return Err(Error::Construction(format!(
                    "orbit of {name} contains a hyperplane with both orientations"
                )));
            }
            orbit.push(gw);
        }
        if orbit.len() != expected {
            return Err(Error::Construction(format!(
                "orbit of {name} has {} hyperplanes, expected {expected}",
                orbit.len()
            )));
        }
        orbits.push(OrbitInfo {
            wall: name.to_string(),
            family,
            orbit: orbit.len(),
            stabilizer,
        });
        orbit_vecs.push(orbit);
    }
    let position = |orbit: &[Vector], v: &Vector| orbit.iter().position(|o| same_ray(o, v));

    // G_I acting on E_1..E_4 (t-orbit in discovery order)
    let e = &orbit_vecs[0];
    let e_perm = |g: &Isometry| -> Result<[u8; 4]> {
        let mut p = [0u8; 4];
        for (k, ek) in e.iter().enumerate() {
            let img = position(e, &g.apply(ek))
                .ok_or_else(|| Error::Construction("G_I does not preserve the E facets".into()))?;
            p[k] = img as u8 + 1;
        }
        Ok(p)
    };
    let perms: Vec<[u8; 4]> = g_i.iter().map(e_perm).collect::<Result<_>>()?;
    if perms.iter().collect::<HashSet<_>>().len() != g_i.len() {
        return Err(Error::Construction("G_I does not act faithfully on the E facets".into()));
    }

    // symmetry of Q swapping the paired walls, then the antipodal map
    let q_symmetry = wall_swap(walls, &[("t", "b"), ("u", "l"), ("i1", "i2")], &["c", "i0"])?;
    let central: Vec<Isometry> = g_i
        .iter()
        .map(|g| q_symmetry.compose(g))
        .filter(|cand| gens.iter().all(|h| cand.commutes_with(h)))
        .collect();
    let a = match central.as_slice() {
        [a] => a.clone(),
        _ => {
            return Err(Error::Construction(format!(
                "expected one central element in the coset of the Q symmetry, found {}",
                central.len()
            )))
        }
    };

    // E'_k = a(E_k); H_k fixed by Stab(E_k); H'_k = a(H_k)
    let mut normals: Vec<Vector> = e.clone();
    for ek in e {
        let img = a.apply(ek);
        let k = position(&orbit_vecs[1], &img)
            .ok_or_else(|| Error::Construction("a does not map E facets to E' facets".into()))?;
        normals.push(orbit_vecs[1][k].clone());
    }
    let mut h = Vec::new();
    for k in 0..4 {
        let stab: Vec<&Isometry> = g_i.iter().zip(&perms).filter(|(_, p)| p[k] == k as u8 + 1).map(|(g, _)| g).collect();
        let fixed: Vec<&Vector> = orbit_vecs[2]
            .iter()
            .filter(|hv| stab.iter().all(|g| same_ray(&g.apply(hv), hv)))
            .collect();
        match fixed.as_slice() {
            [hv] => h.push((*hv).clone()),
            _ => {
                return Err(Error::Construction(format!(
                    "stabilizer of E{} fixes {} half-height facets",
                    k + 1,
                    fixed.len()
                )))
            }
        }
    }
    normals.extend(h.iter().cloned());
    for hk in &h {
        let img = a.apply(hk);
        let k = position(&orbit_vecs[3], &img)
            .ok_or_else(|| Error::Construction("a does not map H facets to H' facets".into()))?;
        normals.push(orbit_vecs[3][k].clone());
    }
    normals.extend(orbit_vecs[4].iter().cloned());

    // C_ij is the central facet sharing vertices with exactly E_i and E_j
    let raw = enumerate_vertices_of(&normals, true);
    let mut c_order = [usize::MAX; 6];
    for m in 0..6 {
        let cf = 16 + m;
        let touching: Vec<u8> = (0..4u8)
            .filter(|&k| raw.iter().any(|v| v.facets >> cf & 1 == 1 && v.facets >> k & 1 == 1))
            .map(|k| k + 1)
            .collect();
        let [i, j] = touching.as_slice() else {
            return Err(Error::Construction(format!(
                "a central facet meets {} extremal top facets",
                touching.len()
            )));
        };
        let slot = FacetLabel::c(*i, *j).index() - 16;
        if c_order[slot] != usize::MAX {
            return Err(Error::Construction(format!("two central facets meet E{i} and E{j}")));
        }
        c_order[slot] = cf;
    }
    let mut relabel: Vec<usize> = (0..16).collect();
    relabel.extend(c_order);
    let normals: Vec<Vector> = relabel.iter().map(|&i| normals[i].clone()).collect();
    Ok(Assembly {
        orbits,
        a,
        q_symmetry,
        normals,
        raw,
        relabel,
    })
}

fn wall_swap(walls: &[NamedVector], swaps: &[(&str, &str)], fixed: &[&str]) -> Result<Isometry> {
    let mut src = Vec::new();
    let mut dst = Vec::new();
    for &(x, y) in swaps {
        src.push(wall(walls, x)?.clone());
        dst.push(wall(walls, y)?.clone());
        src.push(wall(walls, y)?.clone());
        dst.push(wall(walls, x)?.clone());
    }
    for &x in fixed {
        src.push(wall(walls, x)?.clone());
        dst.push(wall(walls, x)?.clone());
    }
    // pick a basis among the sources
    let mut basis: Vec<usize> = Vec::new();
    for i in 0..src.len() {
        let mut trial = basis.clone();
        trial.push(i);
        let m = Matrix::from_rows(trial.iter().map(|&k| src[k].coords().to_vec()).collect());
        if m.rank() == trial.len() {
            basis = trial;
        }
        if basis.len() == DIM {
            break;
        }
    }
    if basis.len() < DIM {
        return Err(Error::Construction("walls do not span R^{1,4}".into()));
    }
    let cols = |vs: &[Vector]| Matrix::from_rows(basis.iter().map(|&k| vs[k].coords().to_vec()).collect()).transpose();
    let b_inv = cols(&src).inverse().expect("basis is invertible");
    let m = &cols(&dst) * &b_inv;
    let iso = Isometry::new(m).map_err(|_| Error::Construction("the wall swap is not an isometry".into()))?;
    for (s, d) in src.iter().zip(&dst) {
        if &iso.apply(s) != d {
            return Err(Error::Construction("no linear map realizes the wall swap".into()));
        }
    }
    Ok(iso)
}

fn facet_perm_of(m: &Isometry, normals: &[Vector]) -> Result<[u8; FACETS]> {
    let mut p = [0u8; FACETS];
    for (i, n) in normals.iter().enumerate() {
        let img = m.apply(n);
        p[i] = normals
            .iter()
            .position(|o| same_ray(o, &img))
            .ok_or_else(|| Error::Construction("symmetry does not permute the facets".into()))? as u8;
    }
    Ok(p)
}

fn build_group(named: &[(String, Isometry)], normals: &[Vector], vertices: &[VertexRecord]) -> Result<SymmetryGroup> {
    let gens: Vec<(Isometry, [u8; FACETS])> = named
        .iter()
        .map(|(_, m)| Ok((m.clone(), facet_perm_of(m, normals)?)))
        .collect::<Result<_>>()?;
    let id_perm: [u8; FACETS] = std::array::from_fn(|i| i as u8);
    let mut mats = vec![Isometry::identity()];
    let mut perms = vec![id_perm];
    let mut lookup = HashMap::from([(id_perm, 0usize)]);
    let mut k = 0;
    while k < mats.len() {
        for (gm, gp) in &gens {
            let p: [u8; FACETS] = std::array::from_fn(|f| gp[perms[k][f] as usize]);
            if lookup.contains_key(&p) {
                continue;
            }
            if mats.len() >= 1000 {
                return Err(Error::GroupBound(1000));
            }
            let m = gm.compose(&mats[k]);
            if facet_perm_of(&m, normals)? != p {
                return Err(Error::Construction("facet action is not a homomorphism".into()));
            }
            lookup.insert(p, mats.len());
            mats.push(m);
            perms.push(p);
        }
        k += 1;
    }
    let n = mats.len();
    let mut mult = vec![vec![0; n]; n];
    for x in 0..n {
        for y in 0..n {
            let p: [u8; FACETS] = std::array::from_fn(|f| perms[x][perms[y][f] as usize]);
            mult[x][y] = *lookup
                .get(&p)
                .ok_or_else(|| Error::Construction("Isom(P) is not closed".into()))?;
        }
    }
    let inverse = (0..n).map(|x| (0..n).find(|&y| mult[x][y] == 0).expect("group inverse")).collect();
    let vertex_lookup: HashMap<u32, usize> = vertices.iter().enumerate().map(|(i, v)| (v.facets, i)).collect();
    let elements = mats
        .into_iter()
        .zip(perms)
        .map(|(matrix, facet_perm)| {
            let map_mask = |m: u32| (0..FACETS).filter(|f| m >> f & 1 == 1).fold(0u32, |a, f| a | 1 << facet_perm[f]);
            let vertex_perm = vertices
                .iter()
                .map(|v| {
                    vertex_lookup
                        .get(&map_mask(v.facets))
                        .copied()
                        .ok_or_else(|| Error::Construction("symmetry does not permute vertices".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            let swaps_sides = facet_perm[0] >= 4;
            let index_perm: [u8; 4] = std::array::from_fn(|k| facet_perm[k] % 4 + 1);
            let word = match (swaps_sides, index_word(&index_perm)) {
                (false, w) => w,
                (true, w) if w == "id" => "a".to_string(),
                (true, w) => format!("a*{w}"),
            };
            Ok(Symmetry {
                orientation: matrix.orientation(),
                matrix,
                facet_perm,
                vertex_perm,
                index_perm,
                swaps_sides,
                word,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymmetryGroup {
        elements,
        mult,
        inverse,
        lookup,
    })
}

fn face_lattice(normals: &[Vector], vertices: &[VertexRecord]) -> Result<(Vec<Face>, HashMap<u64, usize>)> {
    let facet_masks: Vec<u64> = (0..FACETS)
        .map(|f| {
            vertices
                .iter()
                .enumerate()
                .filter(|(_, v)| v.facets >> f & 1 == 1)
                .fold(0u64, |m, (i, _)| m | 1 << i)
        })
        .collect();
    let mut all: BTreeSet<u64> = facet_masks.iter().copied().collect();
    let mut frontier: Vec<u64> = all.iter().copied().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &m in &frontier {
            for &f in &facet_masks {
                let x = m & f;
                if x != 0 && all.insert(x) {
                    next.push(x);
                }
            }
        }
        frontier = next;
    }
    let full = if vertices.len() == 64 { u64::MAX } else { (1u64 << vertices.len()) - 1 };
    all.insert(full);
    let mut faces: Vec<Face> = all
        .into_iter()
        .map(|m| {
            let facets = (0..FACETS).filter(|&f| facet_masks[f] & m == m).fold(0u32, |a, f| a | 1 << f);
            let rows: Vec<Vec<FieldElement>> = labels_of(facets).iter().map(|l| normals[l.index()].coords().to_vec()).collect();
            let rank = if rows.is_empty() { 0 } else { Matrix::from_rows(rows).rank() };
            let single = m.count_ones() == 1;
            let ideal = single && vertices[m.trailing_zeros() as usize].is_ideal();
            Face {
                vertices: m,
                facets,
                dim: DIM - 1 - rank,
                ideal,
            }
        })
        .collect();
    faces.sort_by_key(|f| (f.dim, f.vertices));
    for f in &faces {
        if f.vertices.count_ones() == 1 && f.dim != 0 {
            return Err(Error::Construction("single-vertex face of positive dimension".into()));
        }
    }
    let lookup = faces.iter().enumerate().map(|(i, f)| (f.vertices, i)).collect();
    Ok((faces, lookup))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Meet {
    /// Share a 2-face; dihedral angle as a multiple of π.
    Ridge {
        #[serde(serialize_with = "ser_ratio")]
        dihedral: Ratio<i64>,
    },
    /// Share only a face of this dimension (0 or 1).
    Lower(usize),
    /// Share only an ideal vertex.
    IdealPoint,
    Disjoint,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Clone, Debug)]
pub struct FacetPair {
    pub a: FacetLabel,
    pub b: FacetLabel,
    pub class: PairClass<FieldElement>,
    pub meet: Meet,
}

impl FacetPair {
    /// No common point in H^4 (tangency at an ideal point is allowed).
    pub fn disjoint_in_h4(&self) -> bool {
        matches!(self.meet, Meet::Disjoint | Meet::IdealPoint)
    }
}

#[derive(Serialize)]
pub struct FacetOut {
    pub label: FacetLabel,
    pub family: Family,
    pub normal: Vec<String>,
}

#[derive(Serialize)]
pub struct SymmetryOut {
    pub word: String,
    pub orientation: i32,
    pub facets: Vec<FacetLabel>,
}

#[derive(Serialize)]
pub struct VertexOut {
    pub kind: VertexKind,
    pub side: Option<Side>,
    pub facets: Vec<FacetLabel>,
    pub point: Vec<String>,
}

#[derive(Serialize)]
pub struct PDescription {
    pub facets: Vec<FacetOut>,
    pub symmetries: Vec<SymmetryOut>,
    pub vertices: Vec<VertexOut>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_round_trip() {
        for l in FacetLabel::all() {
            assert_eq!(l.to_string().parse::<FacetLabel>().unwrap(), l);
        }
        assert_eq!("C31".parse::<FacetLabel>().unwrap(), FacetLabel::c(1, 3));
        assert_eq!("E′2".parse::<FacetLabel>().unwrap(), FacetLabel::e_prime(2));
        assert!("C11".parse::<FacetLabel>().is_err());
        assert!("E5".parse::<FacetLabel>().is_err());
    }

    #[test]
    fn label_permutation() {
        let swap12 = [2, 1, 3, 4];
        assert_eq!(FacetLabel::c(1, 3).permuted(&swap12, false), FacetLabel::c(2, 3));
        assert_eq!(FacetLabel::c(1, 2).permuted(&[1, 2, 3, 4], true), FacetLabel::c(3, 4));
        assert_eq!(FacetLabel::h(3).permuted(&swap12, true), FacetLabel::h_prime(3));
    }

    #[test]
    fn words_for_index_permutations() {
        assert_eq!(index_word(&[1, 2, 3, 4]), "id");
        assert_eq!(index_word(&[2, 1, 3, 4]), "r12");
        assert_eq!(index_word(&[2, 3, 1, 4]), "r13*r12");
    }

    #[test]
    fn screen_keeps_every_vertex() {
        let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/vectors.txt")).unwrap();
        let p = PolytopeP::build(&crate::lorentz::parse_vectors(&text).unwrap()).unwrap();
        let exact: Vec<u32> = enumerate_vertices_of(&p.normals, false).iter().map(|v| v.facets).collect();
        let screened: Vec<u32> = enumerate_vertices_of(&p.normals, true).iter().map(|v| v.facets).collect();
        assert_eq!(exact, screened);
        assert_eq!(exact.len(), 46);
    }
}
