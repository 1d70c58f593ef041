//! Facet-pairing complexes built from abstract copies of P.
//!
//! A complex is a number of copies of P together with an involution on
//! (copy, facet) slots. Each pairing carries an element τ of Isom(P) with
//! τ(F) = G: the point p of facet F in one copy is identified with τ(p) in
//! the other. Everything downstream (ridge cycles, cell classes, vertex
//! links, orientations, induced isometries) is derived from that data.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lorentz::{fixed_subspace, reflection_in, restricted_signature};
use crate::polytope::{labels_of, FacetLabel, PolytopeP, VertexKind, FACETS};
use crate::{Isometry, Sign};

/// Angle as a rational multiple of π.
pub type Angle = Ratio<i64>;

fn ser_angle<S: Serializer>(a: &Angle, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&a.to_string())
}

fn ser_rational<S: Serializer>(a: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&a.to_string())
}

/// A facet of one copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub copy: usize,
    pub facet: FacetLabel,
}

impl Slot {
    pub fn new(copy: usize, facet: FacetLabel) -> Self {
        Slot { copy, facet }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.copy, self.facet)
    }
}

impl FromStr for Slot {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (c, l) = s.split_once(':').ok_or_else(|| format!("expected copy:facet, got `{s}`"))?;
        let copy = c.trim().parse().map_err(|_| format!("bad copy index `{c}`"))?;
        Ok(Slot::new(copy, l.parse()?))
    }
}

impl Serialize for Slot {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// One line of a gluing file.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PairingRule {
    pub from: Slot,
    pub to: Slot,
    pub word: String,
}

/// Parses `pair <copy>:<facet> <copy>:<facet> <word>` lines.
pub fn parse_gluing(text: &str) -> Result<Vec<PairingRule>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::parse("gluing", k + 1, m);
        let toks: Vec<&str> = line.split_whitespace().collect();
        let ["pair", a, b, word] = toks.as_slice() else {
            return Err(err(format!("expected `pair x:F y:G word`, got `{line}`")));
        };
        out.push(PairingRule {
            from: a.parse().map_err(err)?,
            to: b.parse().map_err(err)?,
            word: word.to_string(),
        });
    }
    Ok(out)
}

pub fn format_gluing(rules: &[PairingRule]) -> String {
    rules
        .iter()
        .map(|r| format!("pair {} {} {}\n", r.from, r.to, r.word))
        .collect()
}

/// Pairings of the five copies along the complete graph K5: the extremal
/// facets with index j of copy 0 go to copy j by the identity, and for
/// 0 < i < j the facet E_j of copy i goes to E_i of copy j by r_ij (same for
/// the bottom facets).
pub fn k5_rules() -> Vec<PairingRule> {
    let mut out = Vec::new();
    for j in 1..=4u8 {
        for f in [FacetLabel::e(j), FacetLabel::e_prime(j)] {
            out.push(PairingRule {
                from: Slot::new(0, f),
                to: Slot::new(j as usize, f),
                word: "id".into(),
            });
        }
    }
    for i in 1..=4u8 {
        for j in i + 1..=4u8 {
            for (fi, fj) in [
                (FacetLabel::e(i), FacetLabel::e(j)),
                (FacetLabel::e_prime(i), FacetLabel::e_prime(j)),
            ] {
                out.push(PairingRule {
                    from: Slot::new(i as usize, fj),
                    to: Slot::new(j as usize, fi),
                    word: format!("r{i}{j}"),
                });
            }
        }
    }
    out
}

/// Where a slot is glued to, and by which element of Isom(P).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub to: Slot,
    pub symmetry: usize,
}

/// The three parts a boundary facet can belong to, by Isom(P)-orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BoundaryPart {
    Extremal,
    HalfHeight,
    Central,
}

impl BoundaryPart {
    pub fn of(l: FacetLabel) -> Self {
        match l.family().orbit() {
            0 => BoundaryPart::Extremal,
            1 => BoundaryPart::HalfHeight,
            _ => BoundaryPart::Central,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GluedComplex<'p> {
    p: &'p PolytopeP,
    pairing: Vec<[Option<Gluing>; FACETS]>,
    reflections: Vec<Isometry>,
}

impl<'p> GluedComplex<'p> {
    /// `copies` copies of P with nothing glued.
    pub fn new(p: &'p PolytopeP, copies: usize) -> Self {
        let reflections = p
            .normals
            .iter()
            .map(|n| reflection_in(n).expect("facet normals are spacelike"))
            .collect();
        GluedComplex {
            p,
            pairing: vec![[None; FACETS]; copies],
            reflections,
        }
    }

    pub fn from_rules(p: &'p PolytopeP, copies: usize, rules: &[PairingRule]) -> Result<Self> {
        let mut k = GluedComplex::new(p, copies);
        for r in rules {
            let s = p.evaluate_word(&r.word)?;
            k.pair(r.from, r.to, s)?;
        }
        Ok(k)
    }

    pub fn polytope(&self) -> &'p PolytopeP {
        self.p
    }

    pub fn copies(&self) -> usize {
        self.pairing.len()
    }

    /// Glues `from` to `to` by the symmetry with index `symmetry`, which must
    /// carry the first facet onto the second.
    pub fn pair(&mut self, from: Slot, to: Slot, symmetry: usize) -> Result<()> {
        for s in [from, to] {
            if s.copy >= self.copies() {
                return Err(Error::Gluing(format!("slot {s} refers to a missing copy")));
            }
            if let Some(g) = self.partner(s) {
                return Err(Error::Gluing(format!("slot {s} is already glued to {}", g.to)));
            }
        }
        if from == to {
            return Err(Error::Gluing(format!("slot {from} glued to itself")));
        }
        let sym = self.p.group.get(symmetry);
        if sym.apply_label(from.facet) != to.facet {
            return Err(Error::Gluing(format!(
                "{} maps {} to {}, not {}",
                sym.word,
                from.facet,
                sym.apply_label(from.facet),
                to.facet
            )));
        }
        self.pairing[from.copy][from.facet.index()] = Some(Gluing { to, symmetry });
        self.pairing[to.copy][to.facet.index()] = Some(Gluing {
            to: from,
            symmetry: self.p.group.inverse(symmetry),
        });
        Ok(())
    }

    pub fn partner(&self, s: Slot) -> Option<Gluing> {
        self.pairing[s.copy][s.facet.index()]
    }

    fn partner_ix(&self, copy: usize, facet: usize) -> Option<Gluing> {
        self.pairing[copy][facet]
    }

    /// Each pairing once, from its smaller slot.
    pub fn pairings(&self) -> Vec<(Slot, Slot, usize)> {
        let mut out = Vec::new();
        for x in 0..self.copies() {
            for l in FacetLabel::all() {
                let s = Slot::new(x, l);
                if let Some(g) = self.partner(s) {
                    if s < g.to {
                        out.push((s, g.to, g.symmetry));
                    }
                }
            }
        }
        out
    }

    pub fn boundary(&self) -> Vec<Slot> {
        (0..self.copies())
            .flat_map(|x| FacetLabel::all().map(move |l| Slot::new(x, l)))
            .filter(|s| self.partner(*s).is_none())
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary().is_empty()
    }

    /// The pairing map is a fixed-point-free involution that matches labels.
    pub fn pairing_is_involution(&self) -> bool {
        (0..self.copies()).all(|x| {
            FacetLabel::all().all(|l| {
                let s = Slot::new(x, l);
                match self.partner(s) {
                    None => true,
                    Some(g) => {
                        let back = self.partner(g.to);
                        g.to != s
                            && self.p.group.get(g.symmetry).apply_label(l) == g.to.facet
                            && back == Some(Gluing { to: s, symmetry: self.p.group.inverse(g.symmetry) })
                    }
                }
            })
        })
    }

    /// Chart change across a pairing: maps the partner copy's coordinates
    /// into this copy's, placing it on the far side of the facet.
    fn chart(&self, facet: usize, g: &Gluing) -> Isometry {
        let tau_inv = self.p.group.get(self.p.group.inverse(g.symmetry)).matrix.clone();
        self.reflections[facet].compose(&tau_inv)
    }

    fn ridge_facets(&self, ridge: usize) -> [usize; 2] {
        let fs = labels_of(self.p.faces[ridge].facets);
        assert_eq!(fs.len(), 2, "ridges lie in exactly two facets");
        [fs[0].index(), fs[1].index()]
    }

    /// Walks around every ridge of every copy.
    pub fn ridge_classes(&self) -> Vec<RidgeClass> {
        let p = self.p;
        let ridges = p.faces_of_dim(2);
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut out = Vec::new();
        for x in 0..self.copies() {
            for &r in &ridges {
                if seen.contains(&(x, r)) {
                    continue;
                }
                let [f1, f2] = self.ridge_facets(r);
                let fwd = self.walk(x, r, f1);
                let class = if fwd.closed {
                    fwd
                } else {
                    let back = self.walk(x, r, f2);
                    let mut visits: Vec<(usize, usize)> = back.visits.iter().rev().copied().collect();
                    visits.extend(fwd.visits.iter().skip(1));
                    let ends = vec![back.end.expect("open walk"), fwd.end.expect("open walk")];
                    Walk {
                        visits,
                        closed: false,
                        holonomy_trivial: None,
                        end: None,
                        ends,
                    }
                };
                for v in &class.visits {
                    seen.insert(*v);
                }
                out.push(self.finish_ridge(class));
            }
        }
        out
    }

    fn walk(&self, x0: usize, r0: usize, f0: usize) -> Walk {
        let p = self.p;
        let (mut x, mut r, mut f) = (x0, r0, f0);
        let mut visits = vec![(x0, r0)];
        let mut chart = Isometry::identity();
        loop {
            let Some(g) = self.partner_ix(x, f) else {
                return Walk {
                    visits,
                    closed: false,
                    holonomy_trivial: None,
                    end: Some(Slot::new(x, FacetLabel::from_index(f))),
                    ends: Vec::new(),
                };
            };
            chart = chart.compose(&self.chart(f, &g));
            let sym = p.group.get(g.symmetry);
            let (y, r2, entered) = (g.to.copy, p.map_face(sym, r), g.to.facet.index());
            let [a, b] = self.ridge_facets(r2);
            let next = if a == entered { b } else { a };
            if (y, r2, next) == (x0, r0, f0) {
                return Walk {
                    visits,
                    closed: true,
                    holonomy_trivial: Some(chart.is_identity()),
                    end: None,
                    ends: Vec::new(),
                };
            }
            visits.push((y, r2));
            (x, r, f) = (y, r2, next);
        }
    }

    fn finish_ridge(&self, w: Walk) -> RidgeClass {
        let angle: Angle = w
            .visits
            .iter()
            .map(|&(_, r)| {
                let [a, b] = self.ridge_facets(r);
                self.p.dihedral(a, b).unwrap_or_else(Angle::zero)
            })
            .sum();
        let verdict = if w.closed {
            if angle == Angle::from_integer(2) && w.holonomy_trivial == Some(true) {
                RidgeVerdict::Interior
            } else {
                RidgeVerdict::Invalid
            }
        } else if angle == Angle::one() {
            RidgeVerdict::FacetInterior
        } else if angle == Angle::new(1, 2) {
            RidgeVerdict::Corner
        } else {
            RidgeVerdict::Invalid
        };
        let bicoloured = match verdict {
            RidgeVerdict::Corner => {
                let parts: BTreeSet<BoundaryPart> = w.ends.iter().map(|s| BoundaryPart::of(s.facet)).collect();
                parts == BTreeSet::from([BoundaryPart::HalfHeight, BoundaryPart::Central])
            }
            _ => true,
        };
        RidgeClass {
            ridge: FacetLabelPair::of(self.p, w.visits[0].1),
            length: w.visits.len(),
            visits: w.visits,
            angle,
            closed: w.closed,
            holonomy_trivial: w.holonomy_trivial,
            ends: w.ends,
            verdict,
            bicoloured,
        }
    }

    /// Classes of (copy, face) cells under the gluing, including ideal vertices.
    pub fn cell_classes(&self) -> CellComplex {
        let p = self.p;
        let nf = p.faces.len();
        let id = |x: usize, f: usize| x * nf + f;
        let mut uf = UnionFind::new(self.copies() * nf);
        let in_facet: Vec<Vec<usize>> = (0..FACETS)
            .map(|fa| (0..nf).filter(|&f| p.faces[f].facets >> fa & 1 == 1).collect())
            .collect();
        for (s, t, sym) in self.pairings() {
            let sym = p.group.get(sym);
            for &f in &in_facet[s.facet.index()] {
                uf.union(id(s.copy, f), id(t.copy, p.map_face(sym, f)));
            }
        }
        let mut by_root: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for x in 0..self.copies() {
            for f in 0..nf {
                by_root.entry(uf.find(id(x, f))).or_default().push((x, f));
            }
        }
        let mut classes: Vec<CellClass> = by_root
            .into_values()
            .map(|members| {
                let face = &p.faces[members[0].1];
                let mut parts = BTreeSet::new();
                for &(x, f) in &members {
                    for l in labels_of(p.faces[f].facets) {
                        if self.partner(Slot::new(x, l)).is_none() {
                            parts.insert(BoundaryPart::of(l));
                        }
                    }
                }
                let vertex_kind = (face.dim == 0).then(|| p.vertices[face.vertices.trailing_zeros() as usize].kind);
                CellClass {
                    dim: face.dim,
                    ideal: face.ideal,
                    vertex_kind,
                    members,
                    parts,
                }
            })
            .collect();
        classes.sort_by(|a, b| (a.dim, &a.members).cmp(&(b.dim, &b.members)));
        let mut index = vec![0; self.copies() * nf];
        for (k, c) in classes.iter().enumerate() {
            for &(x, f) in &c.members {
                index[id(x, f)] = k;
            }
        }
        CellComplex { classes, index, faces: nf }
    }

    /// Link of a cell class: the cells (member, face ⊋ member face), glued
    /// through the pairings of facets containing both.
    pub fn link(&self, cells: &CellComplex, class: usize) -> LinkComplex {
        let p = self.p;
        let c = &cells.classes[class];
        let mut nodes: Vec<(usize, usize, usize)> = Vec::new();
        let mut lookup: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
        for (m, &(x, f)) in c.members.iter().enumerate() {
            let fv = p.faces[f].vertices;
            for (g, face) in p.faces.iter().enumerate() {
                if g != f && face.vertices & fv == fv {
                    lookup.insert((x, f, g), nodes.len());
                    nodes.push((m, f, g));
                }
            }
        }
        let mut uf = UnionFind::new(nodes.len());
        let mut keys: Vec<(usize, usize, usize)> = lookup.keys().copied().collect();
        keys.sort();
        for &(x, f, g) in &keys {
            for l in labels_of(p.faces[g].facets) {
                if let Some(gl) = self.partner(Slot::new(x, l)) {
                    let sym = p.group.get(gl.symmetry);
                    let key = (gl.to.copy, p.map_face(sym, f), p.map_face(sym, g));
                    let j = lookup[&key];
                    uf.union(lookup[&(x, f, g)], j);
                }
            }
        }
        let base = p.faces[c.members[0].1].dim;
        let top = 3 - base as i64;
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..nodes.len() {
            classes.entry(uf.find(i)).or_default().push(i);
        }
        let mut counts = [0usize; 5];
        let mut facet_class_sizes = BTreeMap::new();
        let mut edge_class_sizes = BTreeMap::new();
        let mut dual_edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for members in classes.values() {
            let (m0, _, g0) = nodes[members[0]];
            let dim = p.faces[g0].dim - base - 1;
            counts[dim] += 1;
            if dim as i64 + 1 == top {
                *facet_class_sizes.entry(members.len()).or_insert(0) += 1;
                if members.len() == 2 {
                    let m1 = nodes[members[1]].0;
                    *dual_edges.entry((m0.min(m1), m0.max(m1))).or_insert(0) += 1;
                }
            }
            if dim as i64 + 2 == top {
                *edge_class_sizes.entry(members.len()).or_insert(0) += 1;
            }
        }
        let chi = counts.iter().enumerate().map(|(d, &n)| if d % 2 == 0 { n as i64 } else { -(n as i64) }).sum();
        // the link of a facet is one point per side
        let (boundary_faces, closed) = if base == 3 {
            (2 - counts[0].min(2), counts[0] == 2)
        } else {
            (
                facet_class_sizes.get(&1).copied().unwrap_or(0),
                facet_class_sizes.keys().all(|&k| k == 2),
            )
        };
        LinkComplex {
            dim: top,
            pieces: c.members.len(),
            counts,
            chi,
            boundary_faces,
            closed,
            facet_class_sizes,
            ridge_class_sizes: edge_class_sizes,
            dual_edges,
        }
    }

    /// Consistent ±1 per copy with ε_y = −det(τ) ε_x for every pairing.
    pub fn orientability(&self) -> OrientationReport {
        let n = self.copies();
        let mut eps: Vec<Option<i32>> = vec![None; n];
        let mut consistent = true;
        for root in 0..n {
            if eps[root].is_some() {
                continue;
            }
            eps[root] = Some(1);
            let mut queue = VecDeque::from([root]);
            while let Some(x) = queue.pop_front() {
                let ex = eps[x].expect("assigned");
                for f in 0..FACETS {
                    if let Some(g) = self.partner_ix(x, f) {
                        let det = self.p.group.get(g.symmetry).orientation.to_i32();
                        let want = -det * ex;
                        match eps[g.to.copy] {
                            None => {
                                eps[g.to.copy] = Some(want);
                                queue.push_back(g.to.copy);
                            }
                            Some(e) if e != want => consistent = false,
                            _ => {}
                        }
                    }
                }
            }
        }
        OrientationReport {
            orientable: consistent,
            cocycle: if consistent { eps.into_iter().map(|e| e.unwrap_or(1)).collect() } else { Vec::new() },
        }
    }

    /// Number of copies of Q tessellating the complex.
    pub fn q_copies(&self) -> usize {
        self.copies() * self.p.g_i.len()
    }

    /// Euler characteristic from the Q-tessellation, cross-checked against
    /// the alternating count of cell classes (ideal vertices excluded).
    ///
    /// Cells on the boundary are weighted by 1/2 per boundary part they lie
    /// in, which is the Euler characteristic of the closed manifold obtained
    /// by gluing the boundary with free involutions; for a closed complex the
    /// weights are all one.
    pub fn euler_characteristic(&self, q_orbifold_euler: &BigRational) -> EulerReport {
        let cells = self.cell_classes();
        let mut plain = 0i64;
        let mut interior = 0i64;
        let mut weighted = BigRational::zero();
        for c in cells.classes.iter().filter(|c| !c.ideal) {
            let sign = if c.dim % 2 == 0 { 1 } else { -1 };
            plain += sign;
            if c.parts.is_empty() {
                interior += sign;
            }
            let w = BigRational::new(BigInt::from(sign), BigInt::from(1u64 << c.parts.len()));
            weighted += w;
        }
        let orbifold = BigRational::from_integer(BigInt::from(self.q_copies())) * q_orbifold_euler;
        EulerReport {
            q_copies: self.q_copies(),
            agree: orbifold == weighted,
            orbifold,
            cells: plain,
            interior,
            weighted,
        }
    }

    /// Isometry of the complex induced by a symmetry `g` of P acting on copy 0.
    pub fn induce_isometry(&self, g: usize) -> Result<GlobalIsometry> {
        let p = self.p;
        let n = self.copies();
        let mut copy_map: Vec<Option<usize>> = vec![None; n];
        let mut local: Vec<usize> = vec![0; n];
        copy_map[0] = Some(0);
        local[0] = g;
        let mut queue = VecDeque::from([0usize]);
        let fail = |m: String| Error::Gluing(format!("{} does not extend: {m}", p.group.get(g).word));
        while let Some(x) = queue.pop_front() {
            let px = copy_map[x].expect("assigned");
            let sx = p.group.get(local[x]);
            for l in FacetLabel::all() {
                let image = Slot::new(px, sx.apply_label(l));
                match (self.partner(Slot::new(x, l)), self.partner(image)) {
                    (None, None) => {}
                    (Some(gl), Some(gl2)) => {
                        // σ_y = τ' σ_x τ⁻¹
                        let sy = p.group.compose(gl2.symmetry, p.group.compose(local[x], p.group.inverse(gl.symmetry)));
                        let y = gl.to.copy;
                        match copy_map[y] {
                            None => {
                                copy_map[y] = Some(gl2.to.copy);
                                local[y] = sy;
                                queue.push_back(y);
                            }
                            Some(py) if py != gl2.to.copy || local[y] != sy => {
                                return Err(fail(format!("inconsistent image of copy {y}")));
                            }
                            _ => {}
                        }
                    }
                    _ => return Err(fail(format!("{} is glued but its image {image} is not, or vice versa", Slot::new(x, l)))),
                }
            }
        }
        let copy_map: Vec<usize> = copy_map
            .into_iter()
            .collect::<Option<_>>()
            .ok_or_else(|| fail("complex is not connected".into()))?;
        if copy_map.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(fail("copies are not permuted".into()));
        }
        Ok(GlobalIsometry {
            word: p.group.get(g).word.clone(),
            copy_map,
            local,
        })
    }

    /// Checks that `phi` is an involution carrying the `part` boundary to
    /// itself without fixed points, and describes its fixed loci in each
    /// copy it preserves.
    pub fn verify_free_boundary_involution(&self, phi: &GlobalIsometry, part: BoundaryPart) -> FreeInvolutionReport {
        let p = self.p;
        let involution = phi.is_involution(self);
        let slots: Vec<Slot> = self.boundary().into_iter().filter(|s| BoundaryPart::of(s.facet) == part).collect();
        let preserves_part = slots.iter().all(|s| {
            let t = phi.apply_slot(self, *s);
            self.partner(t).is_none() && BoundaryPart::of(t.facet) == part
        });
        let cells = self.cell_classes();
        let mut fixed_cells = Vec::new();
        for (k, c) in cells.classes.iter().enumerate() {
            if c.ideal || !c.parts.contains(&part) {
                continue;
            }
            let (x, f) = c.members[0];
            let image = (phi.copy_map[x], p.map_face(p.group.get(phi.local[x]), f));
            if cells.class_of(image.0, image.1) == k {
                fixed_cells.push(CellRef::of(p, x, f));
            }
        }
        let boundary: Vec<Slot> = self.boundary();
        let mut fixed_loci = Vec::new();
        for x in 0..self.copies() {
            if phi.copy_map[x] != x || phi.local[x] == p.group.identity() {
                continue;
            }
            let m = &p.group.get(phi.local[x]).matrix;
            let basis = fixed_subspace(m);
            let signature = restricted_signature(&basis);
            let ideal_endpoints: Vec<Vec<FacetLabel>> = p
                .vertices
                .iter()
                .filter(|v| v.is_ideal() && m.apply(&v.point) == v.point)
                .map(|v| v.labels())
                .collect();
            let copy_boundary: Vec<FacetLabel> = boundary.iter().filter(|s| s.copy == x).map(|s| s.facet).collect();
            let is_line = basis.len() == 2 && signature == (1, 1, 0) && ideal_endpoints.len() == 2;
            // the open segment between the endpoints lies on a facet only if both do
            let misses_boundary = is_line
                && copy_boundary
                    .iter()
                    .all(|l| !(ideal_endpoints[0].contains(l) && ideal_endpoints[1].contains(l)));
            fixed_loci.push(FixedLocus {
                copy: x,
                dim: basis.len(),
                signature: [signature.0, signature.1, signature.2],
                is_line,
                ideal_endpoints,
                misses_boundary,
            });
        }
        let free = involution && preserves_part && fixed_cells.is_empty();
        FreeInvolutionReport {
            word: phi.word.clone(),
            part,
            involution,
            preserves_part,
            fixed_cells,
            fixed_loci,
            free,
        }
    }

    /// Closes the boundary: half-height facets are glued by `h`, central
    /// facets by `c`.
    pub fn close_with(&self, h: &GlobalIsometry, c: &GlobalIsometry) -> Result<GluedComplex<'p>> {
        let mut m = self.clone();
        for s in self.boundary() {
            if m.partner(s).is_some() {
                continue;
            }
            let phi = match BoundaryPart::of(s.facet) {
                BoundaryPart::HalfHeight => h,
                BoundaryPart::Central => c,
                BoundaryPart::Extremal => {
                    return Err(Error::Gluing(format!("extremal facet {s} is unglued")));
                }
            };
            let t = phi.apply_slot(self, s);
            if t == s {
                return Err(Error::Gluing(format!("{} maps {s} to itself", phi.word)));
            }
            let back = phi.apply_slot(self, t);
            if back != s {
                return Err(Error::Gluing(format!("{} does not swap {s} and {t}", phi.word)));
            }
            m.pair(s, t, phi.local[s.copy])?;
        }
        Ok(m)
    }

    /// Ridge, link, cusp and orientation checks, with the expectations of a
    /// manifold with corners (or a closed manifold if nothing is unglued).
    pub fn verify_manifold(&self) -> ManifoldReport {
        let ridges = self.ridge_classes();
        let mut ridge_census: BTreeMap<String, usize> = BTreeMap::new();
        let mut cycle_lengths: BTreeMap<usize, usize> = BTreeMap::new();
        for r in &ridges {
            *ridge_census.entry(format!("{:?}", r.verdict)).or_insert(0) += 1;
            if r.closed {
                *cycle_lengths.entry(r.length).or_insert(0) += 1;
            }
        }
        let ridges_ok = ridges.iter().all(|r| r.verdict != RidgeVerdict::Invalid);
        let corners_bicoloured = ridges.iter().all(|r| r.bicoloured);

        let cells = self.cell_classes();
        let mut links = Vec::new();
        for (k, c) in cells.classes.iter().enumerate() {
            let link = self.link(&cells, k);
            let expected = if c.ideal {
                0
            } else if !c.parts.is_empty() {
                1
            } else {
                1 + if (3 - c.dim as i64) % 2 == 0 { 1 } else { -1 }
            };
            let ok = link.chi == expected && (c.parts.is_empty() == link.closed);
            links.push(LinkReport {
                class: k,
                dim: c.dim,
                vertex_kind: c.vertex_kind,
                parts: c.parts.iter().copied().collect(),
                cell: CellRef::of(self.p, c.members[0].0, c.members[0].1),
                link,
                expected_chi: expected,
                ok,
            });
        }
        let links_ok = links.iter().all(|l| l.ok);
        let type1: Vec<Type1Link> = links
            .iter()
            .filter(|l| l.vertex_kind == Some(VertexKind::Type1))
            .map(|l| Type1Link::of(&l.link))
            .collect();
        let cusps = cells
            .classes
            .iter()
            .filter(|c| c.ideal)
            .map(|c| self.cusp(c))
            .collect::<Vec<_>>();
        let cusps_ok = cusps.iter().all(|c| c.preserves_parts);

        let mut boundary_components: BTreeMap<BoundaryPart, usize> = BTreeMap::new();
        {
            let b = self.boundary();
            let idx: BTreeMap<Slot, usize> = b.iter().enumerate().map(|(i, s)| (*s, i)).collect();
            let mut uf = UnionFind::new(b.len());
            for r in ridges.iter().filter(|r| r.verdict == RidgeVerdict::FacetInterior) {
                uf.union(idx[&r.ends[0]], idx[&r.ends[1]]);
            }
            let mut roots: BTreeMap<BoundaryPart, BTreeSet<usize>> = BTreeMap::new();
            for (i, s) in b.iter().enumerate() {
                roots.entry(BoundaryPart::of(s.facet)).or_default().insert(uf.find(i));
            }
            for (part, r) in roots {
                boundary_components.insert(part, r.len());
            }
        }
        let mut boundary_instances: BTreeMap<BoundaryPart, usize> = BTreeMap::new();
        for s in self.boundary() {
            *boundary_instances.entry(BoundaryPart::of(s.facet)).or_insert(0) += 1;
        }
        let orientation = self.orientability();
        let ok = self.pairing_is_involution() && ridges_ok && corners_bicoloured && links_ok && cusps_ok;
        ManifoldReport {
            copies: self.copies(),
            pairings: self.pairings().len(),
            closed: self.is_closed(),
            boundary_instances,
            boundary_components,
            ridge_census,
            cycle_lengths,
            ridges_ok,
            corners_bicoloured,
            type1_links: type1,
            link_census: link_census(&links),
            links_ok,
            cusps,
            orientation,
            ok,
            ridges,
            links,
        }
    }

    /// Walks the cusp cross-section cubes of an ideal vertex class through
    /// their glued faces and reports the monodromy on the unglued faces.
    fn cusp(&self, c: &CellClass) -> CuspReport {
        let p = self.p;
        let (x0, f0) = c.members[0];
        let labels0 = labels_of(p.faces[f0].facets);
        let glued0: Vec<FacetLabel> = labels0.iter().copied().filter(|l| self.partner(Slot::new(x0, *l)).is_some()).collect();
        let free0: Vec<FacetLabel> = labels0.iter().copied().filter(|l| self.partner(Slot::new(x0, *l)).is_none()).collect();
        let mut length = 1;
        let mut monodromy = p.group.identity();
        let mut closes = false;
        if let Some(&start) = glued0.first() {
            let (mut x, mut f, mut cross) = (x0, f0, start);
            length = 0;
            for _ in 0..=c.members.len() {
                length += 1;
                let gl = self.partner(Slot::new(x, cross)).expect("glued");
                let sym = p.group.get(gl.symmetry);
                monodromy = p.group.compose(gl.symmetry, monodromy);
                let (y, fy, entered) = (gl.to.copy, p.map_face(sym, f), gl.to.facet);
                if (y, fy) == (x0, f0) && entered != start {
                    closes = true;
                    break;
                }
                let next = labels_of(p.faces[fy].facets)
                    .into_iter()
                    .find(|l| *l != entered && self.partner(Slot::new(y, *l)).is_some());
                match next {
                    Some(n) => (x, f, cross) = (y, fy, n),
                    None => break,
                }
            }
        }
        let mono = p.group.get(monodromy);
        let monodromy_map: Vec<(FacetLabel, FacetLabel)> = free0.iter().map(|l| (*l, mono.apply_label(*l))).collect();
        let preserves_parts = monodromy_map.iter().all(|(a, b)| BoundaryPart::of(*a) == BoundaryPart::of(*b));
        CuspReport {
            vertex: labels0,
            cubes: c.members.len(),
            cycle_length: if closes { length } else { 0 },
            closes,
            monodromy: mono.word.clone(),
            monodromy_map,
            preserves_parts,
        }
    }
}

struct Walk {
    visits: Vec<(usize, usize)>,
    closed: bool,
    holonomy_trivial: Option<bool>,
    end: Option<Slot>,
    ends: Vec<Slot>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A face of a copy, named by the facets containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellRef {
    pub copy: usize,
    pub dim: usize,
    pub facets: Vec<FacetLabel>,
}

impl CellRef {
    fn of(p: &PolytopeP, copy: usize, face: usize) -> Self {
        CellRef {
            copy,
            dim: p.faces[face].dim,
            facets: labels_of(p.faces[face].facets),
        }
    }
}

/// The two facets through a ridge of P.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FacetLabelPair(pub FacetLabel, pub FacetLabel);

impl FacetLabelPair {
    fn of(p: &PolytopeP, ridge: usize) -> Self {
        let l = labels_of(p.faces[ridge].facets);
        FacetLabelPair(l[0], l[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RidgeVerdict {
    /// A cycle with angle sum 2π and trivial return map.
    Interior,
    /// A chain between two unglued facets with angle sum π.
    FacetInterior,
    /// A chain with angle sum π/2.
    Corner,
    Invalid,
}

#[derive(Clone, Debug, Serialize)]
pub struct RidgeClass {
    /// Facets through the first ridge visited.
    pub ridge: FacetLabelPair,
    /// (copy, face index) in walking order.
    pub visits: Vec<(usize, usize)>,
    pub length: usize,
    #[serde(serialize_with = "ser_angle")]
    pub angle: Angle,
    pub closed: bool,
    pub holonomy_trivial: Option<bool>,
    /// Unglued facets at the two ends of an open chain.
    pub ends: Vec<Slot>,
    pub verdict: RidgeVerdict,
    /// For corners: one end half-height and the other central.
    pub bicoloured: bool,
}

#[derive(Clone, Debug)]
pub struct CellClass {
    pub dim: usize,
    pub ideal: bool,
    pub vertex_kind: Option<VertexKind>,
    /// (copy, face index), sorted.
    pub members: Vec<(usize, usize)>,
    /// Boundary parts of the unglued facets containing the class.
    pub parts: BTreeSet<BoundaryPart>,
}

#[derive(Clone, Debug)]
pub struct CellComplex {
    pub classes: Vec<CellClass>,
    index: Vec<usize>,
    faces: usize,
}

impl CellComplex {
    pub fn class_of(&self, copy: usize, face: usize) -> usize {
        self.index[copy * self.faces + face]
    }

    /// Class counts by dimension, ideal vertices excluded.
    pub fn counts(&self) -> [usize; 5] {
        let mut out = [0; 5];
        for c in self.classes.iter().filter(|c| !c.ideal) {
            out[c.dim] += 1;
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkComplex {
    /// Dimension of the link; −1 for the empty link of a top cell.
    pub dim: i64,
    /// Number of top-dimensional pieces (one per member of the class).
    pub pieces: usize,
    /// Cell classes of the link by dimension.
    pub counts: [usize; 5],
    pub chi: i64,
    /// Codimension-one link cells lying on the boundary.
    pub boundary_faces: usize,
    pub closed: bool,
    /// Histogram of how many pieces meet along each codimension-one cell.
    pub facet_class_sizes: BTreeMap<usize, usize>,
    /// Histogram of how many pieces meet around each codimension-two cell.
    pub ridge_class_sizes: BTreeMap<usize, usize>,
    /// Adjacency of pieces across codimension-one cells.
    #[serde(skip)]
    pub dual_edges: BTreeMap<(usize, usize), usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkReport {
    pub class: usize,
    pub dim: usize,
    pub vertex_kind: Option<VertexKind>,
    pub parts: Vec<BoundaryPart>,
    pub cell: CellRef,
    pub link: LinkComplex,
    pub expected_chi: i64,
    pub ok: bool,
}

/// The link of a top or bottom vertex class.
#[derive(Clone, Debug, Serialize)]
pub struct Type1Link {
    pub tetrahedra: usize,
    pub chi: i64,
    pub triangles_in_two: bool,
    pub edges_in_three: bool,
    pub dual_graph_complete: bool,
}

impl Type1Link {
    fn of(l: &LinkComplex) -> Self {
        let n = l.pieces;
        let complete = l.dual_edges.len() == n * (n - 1) / 2 && l.dual_edges.values().all(|&k| k == 1);
        Type1Link {
            tetrahedra: n,
            chi: l.chi,
            triangles_in_two: l.closed,
            edges_in_three: l.ridge_class_sizes.keys().all(|&k| k == 3),
            dual_graph_complete: complete,
        }
    }

    pub fn ok(&self) -> bool {
        self.tetrahedra == 5 && self.chi == 0 && self.triangles_in_two && self.edges_in_three && self.dual_graph_complete
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkCensusRow {
    pub dim: usize,
    pub vertex_kind: Option<VertexKind>,
    pub parts: Vec<BoundaryPart>,
    pub classes: usize,
    pub pieces: Vec<usize>,
    pub chi: Vec<i64>,
    pub ok: bool,
}

fn link_census(links: &[LinkReport]) -> Vec<LinkCensusRow> {
    let mut rows: BTreeMap<(usize, Option<VertexKind>, Vec<BoundaryPart>), LinkCensusRow> = BTreeMap::new();
    for l in links {
        let row = rows.entry((l.dim, l.vertex_kind, l.parts.clone())).or_insert_with(|| LinkCensusRow {
            dim: l.dim,
            vertex_kind: l.vertex_kind,
            parts: l.parts.clone(),
            classes: 0,
            pieces: Vec::new(),
            chi: Vec::new(),
            ok: true,
        });
        row.classes += 1;
        if !row.pieces.contains(&l.link.pieces) {
            row.pieces.push(l.link.pieces);
        }
        if !row.chi.contains(&l.link.chi) {
            row.chi.push(l.link.chi);
        }
        row.ok &= l.ok;
    }
    rows.into_values().collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CuspReport {
    /// Facets at the ideal vertex of the first cube.
    pub vertex: Vec<FacetLabel>,
    pub cubes: usize,
    /// Number of cubes around the glued cycle, zero if the walk stays open.
    pub cycle_length: usize,
    pub closes: bool,
    pub monodromy: String,
    /// Action of the monodromy on the unglued faces of the first cube.
    pub monodromy_map: Vec<(FacetLabel, FacetLabel)>,
    pub preserves_parts: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrientationReport {
    pub orientable: bool,
    /// ±1 per copy when orientable.
    pub cocycle: Vec<i32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerReport {
    pub q_copies: usize,
    #[serde(serialize_with = "ser_rational")]
    pub orbifold: BigRational,
    /// Plain alternating count of non-ideal cell classes.
    pub cells: i64,
    /// The same count over open cells off the boundary.
    pub interior: i64,
    /// Count with boundary cells weighted by 1/2 per boundary part.
    #[serde(serialize_with = "ser_rational")]
    pub weighted: BigRational,
    pub agree: bool,
}

impl EulerReport {
    /// Hyperbolic volume over π², from Gauss–Bonnet in dimension four.
    pub fn volume_over_pi_squared(&self) -> BigRational {
        BigRational::new(BigInt::from(4), BigInt::from(3)) * &self.orbifold
    }
}

/// An isometry of a complex: copy x goes to copy `copy_map[x]` by the
/// symmetry `local[x]` of P.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobalIsometry {
    pub word: String,
    pub copy_map: Vec<usize>,
    pub local: Vec<usize>,
}

impl GlobalIsometry {
    pub fn apply_slot(&self, k: &GluedComplex<'_>, s: Slot) -> Slot {
        Slot::new(self.copy_map[s.copy], k.p.group.get(self.local[s.copy]).apply_label(s.facet))
    }

    /// `self ∘ other`.
    pub fn compose(&self, k: &GluedComplex<'_>, other: &GlobalIsometry) -> GlobalIsometry {
        let g = &k.p.group;
        GlobalIsometry {
            word: format!("{}*{}", self.word, other.word),
            copy_map: other.copy_map.iter().map(|&y| self.copy_map[y]).collect(),
            local: (0..other.copy_map.len())
                .map(|x| g.compose(self.local[other.copy_map[x]], other.local[x]))
                .collect(),
        }
    }

    pub fn is_identity(&self, k: &GluedComplex<'_>) -> bool {
        self.copy_map.iter().enumerate().all(|(x, &y)| x == y) && self.local.iter().all(|&s| s == k.p.group.identity())
    }

    pub fn is_involution(&self, k: &GluedComplex<'_>) -> bool {
        !self.is_identity(k) && self.compose(k, self).is_identity(k)
    }

    /// Same action on every copy (the words may differ).
    pub fn same_as(&self, other: &GlobalIsometry) -> bool {
        self.copy_map == other.copy_map && self.local == other.local
    }

    pub fn commutes_with(&self, k: &GluedComplex<'_>, other: &GlobalIsometry) -> bool {
        self.compose(k, other).same_as(&other.compose(k, self))
    }

    /// Orientation action relative to an orientation cocycle.
    pub fn orientation(&self, k: &GluedComplex<'_>, cocycle: &[i32]) -> Option<Sign> {
        let signs: BTreeSet<i32> = (0..self.copy_map.len())
            .map(|x| cocycle[self.copy_map[x]] * k.p.group.get(self.local[x]).orientation.to_i32() * cocycle[x])
            .collect();
        match signs.into_iter().collect::<Vec<_>>().as_slice() {
            [s] => Some(Sign::of_i32(*s)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedLocus {
    pub copy: usize,
    /// Dimension of the fixed subspace of R^{1,4}.
    pub dim: usize,
    /// (positive, negative, null) directions of the form restricted to it.
    pub signature: [usize; 3],
    pub is_line: bool,
    /// Incidence sets of the ideal vertices of P on the fixed subspace.
    pub ideal_endpoints: Vec<Vec<FacetLabel>>,
    pub misses_boundary: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeInvolutionReport {
    pub word: String,
    pub part: BoundaryPart,
    pub involution: bool,
    pub preserves_part: bool,
    /// Boundary cells of the part mapped to themselves.
    pub fixed_cells: Vec<CellRef>,
    pub fixed_loci: Vec<FixedLocus>,
    pub free: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifoldReport {
    pub copies: usize,
    pub pairings: usize,
    pub closed: bool,
    pub boundary_instances: BTreeMap<BoundaryPart, usize>,
    /// Connected components of each boundary part.
    pub boundary_components: BTreeMap<BoundaryPart, usize>,
    pub ridge_census: BTreeMap<String, usize>,
    /// Histogram of ridge cycle lengths.
    pub cycle_lengths: BTreeMap<usize, usize>,
    pub ridges_ok: bool,
    pub corners_bicoloured: bool,
    pub type1_links: Vec<Type1Link>,
    pub link_census: Vec<LinkCensusRow>,
    pub links_ok: bool,
    pub cusps: Vec<CuspReport>,
    pub orientation: OrientationReport,
    pub ok: bool,
    #[serde(skip)]
    pub ridges: Vec<RidgeClass>,
    #[serde(skip)]
    pub links: Vec<LinkReport>,
}

impl ManifoldReport {
    pub fn corner_classes(&self) -> Vec<&RidgeClass> {
        self.ridges.iter().filter(|r| r.verdict == RidgeVerdict::Corner).collect()
    }
}

/// Words of the four central-coset involutions used to close X.
pub const CLOSING_INVOLUTIONS: [&str; 4] = ["a", "a*r12", "a*r34", "a*r12*r34"];

/// Outcome of closing X with a pair of involutions.
#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub h: String,
    pub c: String,
    pub distinct: bool,
    pub commute: bool,
    pub h_free: FreeInvolutionReport,
    pub c_free: FreeInvolutionReport,
    pub manifold: Option<ManifoldReport>,
    pub euler: Option<EulerReport>,
    pub orientable: Option<bool>,
    pub h_orientation: Option<i32>,
    pub c_orientation: Option<i32>,
    pub error: Option<String>,
    pub ok: bool,
}

impl ClosureReport {
    /// Return maps and lengths of the cycles through former corners.
    pub fn corner_cycles(&self, x: &ManifoldReport) -> Vec<(usize, Option<bool>)> {
        let Some(m) = &self.manifold else { return Vec::new() };
        let corners: BTreeSet<(usize, usize)> = x.corner_classes().iter().map(|r| r.visits[0]).collect();
        m.ridges
            .iter()
            .filter(|r| r.visits.iter().any(|v| corners.contains(v)))
            .map(|r| (r.length, r.holonomy_trivial))
            .collect()
    }
}

/// Closes `x` with `h` on the half-height part and `c` on the central part,
/// after checking the preconditions.
pub fn close_x<'p>(
    x: &GluedComplex<'p>,
    h_word: &str,
    c_word: &str,
    q_orbifold_euler: &BigRational,
) -> Result<(ClosureReport, Option<GluedComplex<'p>>)> {
    let p = x.polytope();
    let h = x.induce_isometry(p.evaluate_word(h_word)?)?;
    let c = x.induce_isometry(p.evaluate_word(c_word)?)?;
    let h_free = x.verify_free_boundary_involution(&h, BoundaryPart::HalfHeight);
    let c_free = x.verify_free_boundary_involution(&c, BoundaryPart::Central);
    let distinct = !h.same_as(&c);
    let commute = h.commutes_with(x, &c);
    let x_orient = x.orientability();
    let orient = |g: &GlobalIsometry| {
        if x_orient.orientable {
            g.orientation(x, &x_orient.cocycle).map(|s| s.to_i32())
        } else {
            None
        }
    };
    let mut report = ClosureReport {
        h: h_word.to_string(),
        c: c_word.to_string(),
        distinct,
        commute,
        h_orientation: orient(&h),
        c_orientation: orient(&c),
        h_free,
        c_free,
        manifold: None,
        euler: None,
        orientable: None,
        error: None,
        ok: false,
    };
    if !(distinct && commute && report.h_free.free && report.c_free.free) {
        report.error = Some("preconditions on the involutions fail".into());
        return Ok((report, None));
    }
    match x.close_with(&h, &c) {
        Ok(m) => {
            let man = m.verify_manifold();
            let euler = m.euler_characteristic(q_orbifold_euler);
            report.orientable = Some(man.orientation.orientable);
            report.ok = man.ok && man.closed && euler.agree;
            report.manifold = Some(man);
            report.euler = Some(euler);
            Ok((report, Some(m)))
        }
        Err(e) => {
            report.error = Some(e.to_string());
            Ok((report, None))
        }
    }
}

/// All six unordered pairs of the closing involutions. Each pair is tried
/// with the first map on the half-height part, and swapped when that order
/// fails the freeness preconditions.
pub fn variant_manifolds(x: &GluedComplex<'_>, q_orbifold_euler: &BigRational) -> Result<Vec<ClosureReport>> {
    let mut out = Vec::new();
    for i in 0..CLOSING_INVOLUTIONS.len() {
        for j in i + 1..CLOSING_INVOLUTIONS.len() {
            let (first, second) = (CLOSING_INVOLUTIONS[i], CLOSING_INVOLUTIONS[j]);
            let (r, _) = close_x(x, first, second, q_orbifold_euler)?;
            if r.h_free.free && r.c_free.free {
                out.push(r);
                continue;
            }
            let (swapped, _) = close_x(x, second, first, q_orbifold_euler)?;
            out.push(if swapped.h_free.free && swapped.c_free.free { swapped } else { r });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_text() {
        let s: Slot = "3:E'2".parse().unwrap();
        assert_eq!(s, Slot::new(3, FacetLabel::e_prime(2)));
        assert_eq!(s.to_string(), "3:E'2");
        assert!("3E2".parse::<Slot>().is_err());
    }

    #[test]
    fn gluing_file_round_trip() {
        let rules = k5_rules();
        assert_eq!(rules.len(), 20);
        assert_eq!(parse_gluing(&format_gluing(&rules)).unwrap(), rules);
        assert!(parse_gluing("pair 0:E1 1:E1\n").is_err());
        assert!(parse_gluing("glue 0:E1 1:E1 id\n").is_err());
    }
}
