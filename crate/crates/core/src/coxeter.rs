//! Coxeter diagrams: `.cox` text format, extraction from wall normals,
//! recognition of finite parabolic subgroups, orbifold Euler characteristic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::FieldElement;
use crate::linalg::Matrix;
use crate::lorentz::{classify_pair, NamedVector, PairKind};
use crate::scalar::{Scalar, Sign};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    /// Walls meeting at angle π/m, m ≥ 3.
    Angle(u32),
    Tangent,
    /// Disjoint walls; the weight is cosh² of their distance.
    Ultraparallel(FieldElement),
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Angle(m) => write!(f, "{m}"),
            EdgeLabel::Tangent => f.write_str("inf"),
            EdgeLabel::Ultraparallel(w) => write!(f, "ultra {}", w.to_text()),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CoxeterDiagram {
    nodes: Vec<String>,
    edges: BTreeMap<(usize, usize), EdgeLabel>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl CoxeterDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str) -> Result<usize> {
        if self.index_of(name).is_some() {
            return Err(Error::Data(format!("duplicate node `{name}`")));
        }
        self.nodes.push(name.to_string());
        Ok(self.nodes.len() - 1)
    }

    pub fn add_edge(&mut self, a: usize, b: usize, label: EdgeLabel) -> Result<()> {
        if a == b {
            return Err(Error::Data(format!("self-loop at `{}`", self.nodes[a])));
        }
        match &label {
            EdgeLabel::Angle(m) if *m < 3 => {
                return Err(Error::Data(format!("edge label {m} is not ≥ 3")));
            }
            EdgeLabel::Ultraparallel(w) if (w.clone() - FieldElement::one()).sign() != Sign::Positive => {
                return Err(Error::Data("ultraparallel weight must exceed 1".into()));
            }
            _ => {}
        }
        if self.edges.insert(key(a, b), label).is_some() {
            return Err(Error::Data(format!(
                "duplicate edge {} {}",
                self.nodes[a], self.nodes[b]
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&EdgeLabel> {
        self.edges.get(&key(a, b))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &EdgeLabel)> {
        self.edges.iter().map(|(&(a, b), l)| (a, b, l))
    }

    /// Edges keyed by node names, independent of node order.
    fn named_edges(&self) -> BTreeMap<(String, String), &EdgeLabel> {
        self.edges
            .iter()
            .map(|(&(a, b), l)| {
                let (x, y) = (&self.nodes[a], &self.nodes[b]);
                let k = if x <= y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) };
                (k, l)
            })
            .collect()
    }

    /// Human-readable differences with another diagram; empty iff equal.
    pub fn differences(&self, other: &Self) -> Vec<String> {
        let mut out = Vec::new();
        let mine: BTreeSet<&String> = self.nodes.iter().collect();
        let theirs: BTreeSet<&String> = other.nodes.iter().collect();
        for n in mine.symmetric_difference(&theirs) {
            out.push(format!("node `{n}` present in only one diagram"));
        }
        let (e1, e2) = (self.named_edges(), other.named_edges());
        let pairs: BTreeSet<&(String, String)> = e1.keys().chain(e2.keys()).collect();
        let show = |l: Option<&&EdgeLabel>| l.map_or("none (right angle)".to_string(), |l| l.to_string());
        for p in pairs {
            let (a, b) = (e1.get(p), e2.get(p));
            if a != b {
                out.push(format!("edge {}–{}: {} vs {}", p.0, p.1, show(a), show(b)));
            }
        }
        out
    }

    /// Parses the `.cox` format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut d = CoxeterDiagram::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |m: String| Error::parse("diagram", ln, m);
            match toks[0] {
                "node" if toks.len() == 2 => {
                    d.add_node(toks[1]).map_err(|e| err(e.to_string()))?;
                }
                "edge" if toks.len() >= 4 => {
                    let idx = |n: &str| d.index_of(n).ok_or_else(|| err(format!("unknown node `{n}`")));
                    let (a, b) = (idx(toks[1])?, idx(toks[2])?);
                    let label = match (toks[3], toks.len()) {
                        ("inf", 4) => EdgeLabel::Tangent,
                        ("ultra", 8) => EdgeLabel::Ultraparallel(FieldElement::from_tokens(&toks[4..]).map_err(err)?),
                        (m, 4) => EdgeLabel::Angle(m.parse().map_err(|_| err(format!("bad edge label `{m}`")))?),
                        _ => return Err(err(format!("malformed edge `{line}`"))),
                    };
                    d.add_edge(a, b, label).map_err(|e| err(e.to_string()))?;
                }
                _ => return Err(err(format!("unrecognized line `{line}`"))),
            }
        }
        Ok(d)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for n in &self.nodes {
            s.push_str(&format!("node {n}\n"));
        }
        for (a, b, l) in self.edges() {
            s.push_str(&format!("edge {} {} {l}\n", self.nodes[a], self.nodes[b]));
        }
        s
    }

    /// Disjoint union; node names of `other` must not clash.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        let mut d = self.clone();
        let off = d.len();
        for n in &other.nodes {
            d.add_node(n)?;
        }
        for (a, b, l) in other.edges() {
            d.add_edge(a + off, b + off, l.clone())?;
        }
        Ok(d)
    }

    pub fn subset_by_names(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.index_of(n).ok_or_else(|| Error::Data(format!("unknown node `{n}`"))))
            .collect()
    }

    fn connected_components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = BTreeSet::new();
        let mut comps = Vec::new();
        for &s in subset {
            if !seen.insert(s) {
                continue;
            }
            let mut comp = vec![s];
            let mut k = 0;
            while k < comp.len() {
                let v = comp[k];
                for &w in subset {
                    if self.edge(v, w).is_some() && seen.insert(w) {
                        comp.push(w);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Classifies the parabolic subgroup on `subset`; `None` when infinite.
    pub fn finite_type(&self, subset: &[usize]) -> Option<FiniteTypeReport> {
        let mut components = Vec::new();
        let mut order = BigUint::one();
        for comp in self.connected_components(subset) {
            let kind = self.classify_component(&comp)?;
            let o = kind.order();
            order *= &o;
            components.push(FiniteComponent {
                kind,
                nodes: comp.iter().map(|&i| self.nodes[i].clone()).collect(),
                order: o,
            });
        }
        Some(FiniteTypeReport { components, order })
    }

    fn classify_component(&self, comp: &[usize]) -> Option<FiniteKind> {
        let n = comp.len();
        let mut edges = Vec::new();
        for (i, &a) in comp.iter().enumerate() {
            for &b in &comp[i + 1..] {
                match self.edge(a, b) {
                    None => {}
                    Some(EdgeLabel::Angle(m)) => edges.push((a, b, *m)),
                    Some(_) => return None,
                }
            }
        }
        if n == 1 {
            return Some(FiniteKind::A(1));
        }
        if edges.len() != n - 1 {
            // connected with a cycle
            return None;
        }
        if n == 2 {
            return Some(match edges[0].2 {
                3 => FiniteKind::A(2),
                4 => FiniteKind::B(2),
                m => FiniteKind::I2(m),
            });
        }
        let degree = |v: usize| edges.iter().filter(|e| e.0 == v || e.1 == v).count();
        let heavy: Vec<&(usize, usize, u32)> = edges.iter().filter(|e| e.2 > 3).collect();
        let max_deg = comp.iter().map(|&v| degree(v)).max().unwrap_or(0);
        match heavy.len() {
            0 if max_deg <= 2 => Some(FiniteKind::A(n)),
            0 => {
                let branch: Vec<usize> = comp.iter().copied().filter(|&v| degree(v) >= 3).collect();
                if branch.len() != 1 || degree(branch[0]) != 3 {
                    return None;
                }
                let mut arms = self.arm_lengths(branch[0], &edges);
                arms.sort_unstable();
                match arms.as_slice() {
                    [1, 1, k] => Some(FiniteKind::D(k + 3)),
                    [1, 2, 2] => Some(FiniteKind::E(6)),
                    [1, 2, 3] => Some(FiniteKind::E(7)),
                    [1, 2, 4] => Some(FiniteKind::E(8)),
                    _ => None,
                }
            }
            1 if max_deg <= 2 => {
                let &&(a, b, m) = heavy.first()?;
                let at_end = degree(a) == 1 || degree(b) == 1;
                match (m, n) {
                    (4, _) if at_end => Some(FiniteKind::B(n)),
                    (4, 4) => Some(FiniteKind::F4),
                    (5, 3) if at_end => Some(FiniteKind::H3),
                    (5, 4) if at_end => Some(FiniteKind::H4),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn arm_lengths(&self, centre: usize, edges: &[(usize, usize, u32)]) -> Vec<usize> {
        let nbrs = |v: usize| -> Vec<usize> {
            edges
                .iter()
                .filter_map(|e| match (e.0 == v, e.1 == v) {
                    (true, _) => Some(e.1),
                    (_, true) => Some(e.0),
                    _ => None,
                })
                .collect()
        };
        nbrs(centre)
            .into_iter()
            .map(|start| {
                let (mut prev, mut cur, mut len) = (centre, start, 1);
                loop {
                    let next: Vec<usize> = nbrs(cur).into_iter().filter(|&w| w != prev).collect();
                    match next.as_slice() {
                        [w] => {
                            prev = cur;
                            cur = *w;
                            len += 1;
                        }
                        _ => return len,
                    }
                }
            })
            .collect()
    }

    /// Gram matrix of unit normals on `subset`: `−cos(π/m)` for angles, `−1`
    /// for tangent walls and `−cosh d` for ultraparallel ones. `None` when an
    /// entry falls outside Q(√2,√7), e.g. for labels other than 3 and 4.
    pub fn cosine_matrix(&self, subset: &[usize]) -> Option<Matrix<FieldElement>> {
        let half = FieldElement::rational(BigRational::new(1.into(), 2.into()));
        let rows = subset
            .iter()
            .map(|&a| {
                subset
                    .iter()
                    .map(|&b| {
                        if a == b {
                            return Some(FieldElement::one());
                        }
                        match self.edge(a, b) {
                            None => Some(FieldElement::zero()),
                            Some(EdgeLabel::Angle(3)) => Some(-half.clone()),
                            Some(EdgeLabel::Angle(4)) => Some(-(FieldElement::sqrt2() * half.clone())),
                            Some(EdgeLabel::Angle(_)) => None,
                            Some(EdgeLabel::Tangent) => Some(-FieldElement::one()),
                            Some(EdgeLabel::Ultraparallel(w)) => w.sqrt_of_rational().map(|c| -c),
                        }
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Matrix::from_rows(rows))
    }

    /// Positive-definiteness of the cosine matrix by leading minors, when
    /// decidable in the field (see [`Self::cosine_matrix`]).
    pub fn cosine_matrix_positive_definite(&self, subset: &[usize]) -> Option<bool> {
        let g = self.cosine_matrix(subset)?;
        Some(g.leading_minors().iter().all(|m| m.sign() == Sign::Positive))
    }

    /// `Σ_T (−1)^|T| / |W_T|` over subsets `T` generating finite groups.
    pub fn orbifold_euler_characteristic(&self) -> Result<BigRational> {
        let n = self.len();
        if n > 24 {
            return Err(Error::Data(format!("{n} nodes is too many for subset enumeration")));
        }
        let mut sum = BigRational::zero();
        for mask in 0u32..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if let Some(rep) = self.finite_type(&subset) {
                let term = BigRational::new(BigInt::one(), BigInt::from(rep.order));
                if subset.len().is_multiple_of(2) {
                    sum += term;
                } else {
                    sum -= term;
                }
            }
        }
        Ok(sum)
    }
}

impl PartialEq for CoxeterDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.differences(other).is_empty()
    }
}

/// Irreducible finite Coxeter types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FiniteKind {
    A(usize),
    B(usize),
    D(usize),
    E(usize),
    F4,
    H3,
    H4,
    I2(u32),
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

impl FiniteKind {
    pub fn order(&self) -> BigUint {
        match self {
            FiniteKind::A(n) => factorial(n + 1),
            FiniteKind::B(n) => (BigUint::one() << *n) * factorial(*n),
            FiniteKind::D(n) => (BigUint::one() << (n - 1)) * factorial(*n),
            FiniteKind::E(6) => BigUint::from(51_840u32),
            FiniteKind::E(7) => BigUint::from(2_903_040u32),
            FiniteKind::E(_) => BigUint::from(696_729_600u32),
            FiniteKind::F4 => BigUint::from(1152u32),
            FiniteKind::H3 => BigUint::from(120u32),
            FiniteKind::H4 => BigUint::from(14_400u32),
            FiniteKind::I2(m) => BigUint::from(2 * m),
        }
    }
}

impl fmt::Display for FiniteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiniteKind::A(n) => write!(f, "A{n}"),
            FiniteKind::B(n) => write!(f, "B{n}"),
            FiniteKind::D(n) => write!(f, "D{n}"),
            FiniteKind::E(n) => write!(f, "E{n}"),
            FiniteKind::F4 => f.write_str("F4"),
            FiniteKind::H3 => f.write_str("H3"),
            FiniteKind::H4 => f.write_str("H4"),
            FiniteKind::I2(m) => write!(f, "I2({m})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteComponent {
    pub kind: FiniteKind,
    pub nodes: Vec<String>,
    pub order: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTypeReport {
    pub components: Vec<FiniteComponent>,
    pub order: BigUint,
}

impl FiniteTypeReport {
    /// E.g. `A3 × A1`, or `trivial` for the empty subset.
    pub fn type_string(&self) -> String {
        if self.components.is_empty() {
            return "trivial".into();
        }
        self.components
            .iter()
            .map(|c| c.kind.to_string())
            .collect::<Vec<_>>()
            .join(" × ")
    }
}

/// The m with cos²(π/m) = `cos_sq`, for the values representable in Q(√2,√7).
fn coxeter_order_of(cos_sq: &FieldElement) -> Option<u32> {
    let r = |n: i64, d: i64| FieldElement::rational(BigRational::new(n.into(), d.into()));
    let eighth = (FieldElement::integer(2) + FieldElement::sqrt2()) * r(1, 4);
    [(2, r(0, 1)), (3, r(1, 4)), (4, r(1, 2)), (6, r(3, 4)), (8, eighth)]
        .into_iter()
        .find(|(_, c)| c == cos_sq)
        .map(|(m, _)| m)
}

/// Builds the diagram of the reflection group generated by the walls dual to
/// the given (outward) vectors.
pub fn diagram_from_vectors(vs: &[NamedVector]) -> Result<CoxeterDiagram> {
    let mut d = CoxeterDiagram::new();
    for v in vs {
        d.add_node(&v.name)?;
    }
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let pc = classify_pair(&vs[i].vector, &vs[j].vector)?;
            let label = match pc.kind {
                PairKind::Angle { cos_sq } => {
                    let bad = || Error::NonCoxeterAngle(vs[i].name.clone(), vs[j].name.clone());
                    // outward normals of walls meeting at π/m have ⟨n_i,n_j⟩ = −cos(π/m)
                    if pc.inner_sign == Sign::Positive {
                        return Err(bad());
                    }
                    match coxeter_order_of(&cos_sq).ok_or_else(bad)? {
                        2 => continue,
                        m => EdgeLabel::Angle(m),
                    }
                }
                PairKind::Tangent => EdgeLabel::Tangent,
                PairKind::Ultraparallel { cosh_sq } => EdgeLabel::Ultraparallel(cosh_sq),
            };
            d.add_edge(i, j, label)?;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(labels: &[u32]) -> CoxeterDiagram {
        let mut d = CoxeterDiagram::new();
        for i in 0..=labels.len() {
            d.add_node(&format!("v{i}")).unwrap();
        }
        for (i, &m) in labels.iter().enumerate() {
            d.add_edge(i, i + 1, EdgeLabel::Angle(m)).unwrap();
        }
        d
    }

    fn all(d: &CoxeterDiagram) -> Vec<usize> {
        (0..d.len()).collect()
    }

    #[test]
    fn classification_table() {
        let cases: Vec<(Vec<u32>, &str, u64)> = vec![
            (vec![3, 3], "A3", 24),
            (vec![3, 3, 3], "A4", 120),
            (vec![4, 3, 3], "B4", 384),
            (vec![3, 4, 3], "F4", 1152),
            (vec![5, 3], "H3", 120),
            (vec![5, 3, 3], "H4", 14400),
            (vec![6], "I2(6)", 12),
            (vec![4], "B2", 8),
        ];
        for (labels, name, order) in cases {
            let d = path(&labels);
            let rep = d.finite_type(&all(&d)).unwrap();
            assert_eq!(rep.type_string(), name);
            assert_eq!(rep.order, BigUint::from(order));
        }
        assert!(path(&[3, 5, 3]).finite_type(&[0, 1, 2, 3]).is_none());
        assert!(path(&[4, 3, 4]).finite_type(&[0, 1, 2, 3]).is_none());
    }

    #[test]
    fn branched_types() {
        // D4 and E6
        let d = CoxeterDiagram::parse(
            "node a\nnode b\nnode c\nnode d\nedge a b 3\nedge a c 3\nedge a d 3\n",
        )
        .unwrap();
        assert_eq!(d.finite_type(&all(&d)).unwrap().type_string(), "D4");
        let e6 = CoxeterDiagram::parse(
            "node a\nnode b\nnode c\nnode d\nnode e\nnode f\n\
             edge a b 3\nedge b c 3\nedge c d 3\nedge d e 3\nedge c f 3\n",
        )
        .unwrap();
        let rep = e6.finite_type(&all(&e6)).unwrap();
        assert_eq!(rep.type_string(), "E6");
        assert_eq!(rep.order, BigUint::from(51_840u32));
    }

    #[test]
    fn euler_characteristics() {
        assert!(CoxeterDiagram::new().orbifold_euler_characteristic().unwrap().is_one());
        let one = CoxeterDiagram::parse("node x").unwrap();
        assert_eq!(
            one.orbifold_euler_characteristic().unwrap(),
            BigRational::new(1.into(), 2.into())
        );
    }

    #[test]
    fn parse_errors() {
        assert!(CoxeterDiagram::parse("").unwrap().is_empty());
        let e = CoxeterDiagram::parse("node a\nedge a b 3\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(CoxeterDiagram::parse("node a\nedge a a 3\n").is_err());
        assert!(CoxeterDiagram::parse("node a\nnode b\nedge a b 3\nedge b a 4\n").is_err());
        assert!(CoxeterDiagram::parse("node a\nnode b\nedge a b 2\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let src = "node a\nnode b\nnode c\nedge a b inf\nedge b c ultra 7/4 0 0 0\n";
        let d = CoxeterDiagram::parse(src).unwrap();
        assert_eq!(d.to_text(), src);
        assert_eq!(CoxeterDiagram::parse(&d.to_text()).unwrap(), d);
        assert!(d.finite_type(&[0, 1]).is_none());
    }

    #[test]
    fn cosine_matrix_agrees_on_small_types() {
        let d = path(&[4, 3, 3]);
        assert_eq!(d.cosine_matrix_positive_definite(&all(&d)), Some(true));
        let affine = path(&[4, 3, 4]);
        assert_eq!(affine.cosine_matrix_positive_definite(&all(&affine)), Some(false));
        assert_eq!(path(&[5]).cosine_matrix_positive_definite(&[0, 1]), None);
    }
}
