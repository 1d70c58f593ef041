//! Pipeline driver: loads the data directory, runs the verification stages
//! and collects their results into a certificate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coxeter::{diagram_from_vectors, CoxeterDiagram};
use crate::exactnum::{format_rational, parse_rational};
use crate::gluing::{
    close_x, parse_gluing, variant_manifolds, ClosureReport, GluedComplex, ManifoldReport, PairingRule,
};
use crate::lorentz::{gram_matrix, parse_vectors, reflection_in, NamedVector};
use crate::polytope::{enumerate_group, Family, FacetLabel, Meet, PolytopeP, VertexKind};
use crate::qforms::{
    congruent_diagonals, ramification_of_diagonal, ramification_set, separate_classes, ClassValue, PlaceSet,
    RationalQuadraticForm,
};
use crate::{Error, FieldElement, Result, Sign};

pub const VECTORS_FILE: &str = "vectors.txt";
pub const DIAGRAM_FILE: &str = "q.cox";
pub const GRAM_FILE: &str = "gram.txt";
pub const FORM_FILE: &str = "form.txt";
pub const GLUING_FILE: &str = "gluing.txt";
pub const REFERENCE_FILE: &str = "reference.toml";

/// The main closing pair: h on the half-height part, c on the central part.
pub const MAIN_PAIR: (&str, &str) = ("a*r12", "a*r34");

/// Directory holding the data files shipped with the crate.
pub fn default_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// Published Gram matrix, rows in the order given by its header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublishedGram {
    pub order: Vec<String>,
    pub entries: Vec<Vec<FieldElement>>,
}

impl PublishedGram {
    /// `order n1 n2 ...` followed by one row per name, entries separated by `|`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut order: Option<Vec<String>> = None;
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::parse("gram", lineno + 1, m);
            if let Some(rest) = line.strip_prefix("order") {
                order = Some(rest.split_whitespace().map(str::to_string).collect());
                continue;
            }
            let row = line
                .split('|')
                .map(|cell| {
                    let toks: Vec<&str> = cell.split_whitespace().collect();
                    FieldElement::from_tokens(&toks).map_err(err)
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push(row);
        }
        let order = order.ok_or_else(|| Error::parse("gram", 0, "missing `order` line"))?;
        if entries.len() != order.len() || entries.iter().any(|r| r.len() != order.len()) {
            return Err(Error::parse("gram", 0, format!("expected a {0}×{0} matrix", order.len())));
        }
        Ok(PublishedGram { order, entries })
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct Reference {
    pub q: QReference,
    pub form: FormReference,
    pub classes: BTreeMap<String, String>,
    pub p: PReference,
    pub m: MReference,
}

#[derive(Clone, Debug, Deserialize)]
pub struct QReference {
    pub orbifold_euler: String,
    pub vertex_group_order: usize,
    pub extended_group_order: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct FormReference {
    pub diagonal: Vec<String>,
    pub ramification: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct PReference {
    pub facets: usize,
    pub symmetry_order: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct MReference {
    pub euler: String,
    pub copies_of_q: usize,
    pub fixed_line_h: Vec<Vec<String>>,
    pub fixed_line_c: Vec<Vec<String>>,
}

/// Everything read from a data directory.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub vectors: Vec<NamedVector>,
    pub diagram: CoxeterDiagram,
    pub gram: PublishedGram,
    pub form: RationalQuadraticForm,
    pub rules: Vec<PairingRule>,
    pub reference: Reference,
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|source| Error::Io { path, source })
}

impl Inputs {
    pub fn load(dir: &Path) -> Result<Self> {
        let reference = toml::from_str(&read(dir, REFERENCE_FILE)?)
            .map_err(|e| Error::Data(format!("{REFERENCE_FILE}: {e}")))?;
        Ok(Inputs {
            vectors: parse_vectors(&read(dir, VECTORS_FILE)?)?,
            diagram: CoxeterDiagram::parse(&read(dir, DIAGRAM_FILE)?)?,
            gram: PublishedGram::parse(&read(dir, GRAM_FILE)?)?,
            form: RationalQuadraticForm::parse(&read(dir, FORM_FILE)?)?,
            rules: parse_gluing(&read(dir, GLUING_FILE)?)?,
            reference,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    QDiagram,
    QEuler,
    QArithmetic,
    PBuild,
    PSymmetry,
    PVertices,
    XBuild,
    XManifold,
    MBuild,
    MManifold,
    Variants,
}

impl Stage {
    pub const ALL: [Stage; 11] = [
        Stage::QDiagram,
        Stage::QEuler,
        Stage::QArithmetic,
        Stage::PBuild,
        Stage::PSymmetry,
        Stage::PVertices,
        Stage::XBuild,
        Stage::XManifold,
        Stage::MBuild,
        Stage::MManifold,
        Stage::Variants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::QDiagram => "q-diagram",
            Stage::QEuler => "q-euler",
            Stage::QArithmetic => "q-arithmetic",
            Stage::PBuild => "p-build",
            Stage::PSymmetry => "p-symmetry",
            Stage::PVertices => "p-vertices",
            Stage::XBuild => "x-build",
            Stage::XManifold => "x-manifold",
            Stage::MBuild => "m-build",
            Stage::MManifold => "m-manifold",
            Stage::Variants => "variants",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    VerifyQ,
    BuildP,
    BuildX,
    BuildM,
    Variants,
    All,
}

impl Command {
    /// Stages run by the command, in dependency order.
    pub fn stages(self) -> Vec<Stage> {
        use Stage::*;
        let p = [PBuild, PSymmetry, PVertices];
        let x = [XBuild, XManifold];
        match self {
            Command::VerifyQ => vec![QDiagram, QEuler, QArithmetic],
            Command::BuildP => p.to_vec(),
            Command::BuildX => [&p[..], &x[..]].concat(),
            Command::BuildM => [&p[..], &x[..], &[MBuild, MManifold]].concat(),
            Command::Variants => [&p[..], &x[..], &[Variants]].concat(),
            Command::All => Stage::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// Closing pair (h, c) replacing the main one; restricts `variants` to it.
    pub pair: Option<(String, String)>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StageResult {
    pub pass: bool,
    pub values: BTreeMap<String, Value>,
    pub notes: Vec<String>,
}

impl StageResult {
    fn set(&mut self, key: &str, v: impl Serialize) {
        self.values.insert(key.to_string(), serde_json::to_value(v).expect("stage values serialize"));
    }

    /// Records a named check; the stage passes only if every check does.
    fn check(&mut self, name: &str, ok: bool) {
        if !ok {
            self.notes.push(format!("failed: {name}"));
        }
    }

    fn finish(mut self) -> Self {
        self.pass = !self.notes.iter().any(|n| n.starts_with("failed") || n.starts_with("error"));
        self
    }

    fn error(e: impl fmt::Display) -> Self {
        StageResult {
            pass: false,
            values: BTreeMap::new(),
            notes: vec![format!("error: {e}")],
        }
    }

    fn blocked(on: Stage) -> Self {
        StageResult {
            pass: false,
            values: BTreeMap::new(),
            notes: vec![format!("failed: not run, {on} did not complete")],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub pass: bool,
    pub stages: BTreeMap<String, StageResult>,
}

impl Certificate {
    pub fn stage(&self, s: Stage) -> Option<&StageResult> {
        self.stages.get(s.name())
    }

    /// Pretty JSON with sorted keys.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("certificate serializes");
        serde_json::to_string_pretty(&v).expect("certificate serializes") + "\n"
    }

    /// One line per stage.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in Stage::ALL {
            let Some(r) = self.stage(s) else { continue };
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{verdict} {s}"));
            for key in HEADLINE_KEYS {
                if let Some(v) = r.values.get(*key) {
                    out.push_str(&format!("  {key}={}", compact(v)));
                }
            }
            out.push('\n');
            for n in &r.notes {
                out.push_str(&format!("     {n}\n"));
            }
        }
        out.push_str(if self.pass { "overall: PASS\n" } else { "overall: FAIL\n" });
        out
    }
}

const HEADLINE_KEYS: &[&str] = &[
    "orbifold_euler",
    "vertex_group_order",
    "extended_group_order",
    "ramification",
    "facets",
    "order",
    "vertex_counts",
    "pairings",
    "euler",
    "h",
    "c",
    "orientable",
    "orientable_count",
];

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn q(s: &str) -> Result<BigRational> {
    parse_rational(s).map_err(Error::Data)
}

fn abs(x: &FieldElement) -> FieldElement {
    if x.signum() == Sign::Negative {
        -x.clone()
    } else {
        x.clone()
    }
}

fn stage_q_diagram(inp: &Inputs) -> StageResult {
    let mut r = StageResult::default();
    match diagram_from_vectors(&inp.vectors) {
        Ok(derived) => {
            let diffs = derived.differences(&inp.diagram);
            r.set("derived", derived.to_text().lines().collect::<Vec<_>>());
            r.check("derived diagram equals the shipped diagram", diffs.is_empty());
            r.set("diagram_differences", diffs);
        }
        Err(e) => return StageResult::error(e),
    }
    let mut mismatches = Vec::new();
    let index: Option<Vec<usize>> = inp
        .gram
        .order
        .iter()
        .map(|n| inp.vectors.iter().position(|v| &v.name == n))
        .collect();
    let Some(index) = index else {
        r.check("published Gram names match the vectors", false);
        return r.finish();
    };
    let vs: Vec<_> = index.iter().map(|&k| inp.vectors[k].vector.clone()).collect();
    match gram_matrix(&vs) {
        Ok(g) => {
            let mut rows = Vec::new();
            for i in 0..vs.len() {
                let mut row = Vec::new();
                for j in 0..vs.len() {
                    let published = &inp.gram.entries[i][j];
                    match g[i][j].value() {
                        Some(v) => {
                            if abs(&v) != abs(published) {
                                mismatches.push(format!(
                                    "({}, {}): computed {} published {}",
                                    inp.gram.order[i],
                                    inp.gram.order[j],
                                    v.pretty(),
                                    published.pretty()
                                ));
                            }
                            row.push(v.pretty());
                        }
                        None => {
                            mismatches.push(format!(
                                "({}, {}): cosh² {} has no square root in the field",
                                inp.gram.order[i],
                                inp.gram.order[j],
                                g[i][j].squared.pretty()
                            ));
                            row.push(format!("sqrt({})", g[i][j].squared.pretty()));
                        }
                    }
                }
                rows.push(row.join(", "));
            }
            r.set("gram_order", &inp.gram.order);
            r.set("gram", rows);
        }
        Err(e) => return StageResult::error(e),
    }
    r.check("Gram matrix matches the published one in absolute value", mismatches.is_empty());
    r.set("gram_mismatches", mismatches);
    r.finish()
}

fn stage_q_euler(inp: &Inputs) -> StageResult {
    let mut r = StageResult::default();
    let chi = match inp.diagram.orbifold_euler_characteristic() {
        Ok(c) => c,
        Err(e) => return StageResult::error(e),
    };
    r.set("orbifold_euler", format_rational(&chi));
    match q(&inp.reference.q.orbifold_euler) {
        Ok(expected) => r.check("orbifold Euler characteristic", chi == expected),
        Err(e) => return StageResult::error(e),
    }
    let refl = |name: &str| {
        let v = inp
            .vectors
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::Data(format!("missing vector `{name}`")))?;
        reflection_in(&v.vector)
    };
    let groups = (|| -> Result<(usize, usize)> {
        let gens = [refl("i0")?, refl("i1")?, refl("i2")?];
        let small = enumerate_group(&gens, 1000)?.len();
        let mut ext = gens.to_vec();
        ext.push(refl("t")?);
        Ok((small, enumerate_group(&ext, 1000)?.len()))
    })();
    match groups {
        Ok((small, ext)) => {
            r.set("vertex_group_order", small);
            r.set("extended_group_order", ext);
            r.check("|<i0,i1,i2>|", small == inp.reference.q.vertex_group_order);
            r.check("|<i0,i1,i2,t>|", ext == inp.reference.q.extended_group_order);
        }
        Err(e) => r.notes.push(format!("error: {e}")),
    }
    r.finish()
}

fn stage_q_arithmetic(inp: &Inputs) -> StageResult {
    let mut r = StageResult::default();
    let mut run = || -> Result<()> {
        let form = &inp.form;
        let (pos, neg, zero) = form.signature();
        r.set("signature", [pos, neg, zero]);
        r.check("signature (4,1)", (pos, neg, zero) == (4, 1, 0));
        let diag = form.diagonalize();
        r.set("diagonal", diag.entries.iter().map(format_rational).collect::<Vec<_>>());
        let reference: Vec<BigRational> = inp.reference.form.diagonal.iter().map(|s| q(s)).collect::<Result<_>>()?;
        // the reference diagonal is for q(x) = ½ xᵀAx, A the shipped matrix
        let half = form.scaled(&BigRational::new(1.into(), 2.into())).diagonalize();
        r.set("half_form_diagonal", half.entries.iter().map(format_rational).collect::<Vec<_>>());
        r.set("matrix_congruent_to_reference", congruent_diagonals(&diag.entries, &reference)?);
        let congruent = congruent_diagonals(&half.entries, &reference)?;
        r.set("half_form_congruent_to_reference", congruent);
        r.check("½xᵀAx congruent to the reference diagonal", congruent);
        let ram = ramification_set(form)?;
        r.set("ramification", ram.to_string());
        let expected = PlaceSet::parse(&inp.reference.form.ramification).map_err(Error::Data)?;
        r.check("ramification set", ram == expected);
        let standard_form: Vec<BigRational> = [1i64, 1, 1, 1, -1].iter().map(|&k| BigRational::from_integer(k.into())).collect();
        let standard = ramification_of_diagonal(&standard_form)?;
        r.set("standard_form_ramification", standard.to_string());
        r.check("diag(1,1,1,1,-1) has empty ramification", standard.is_empty());
        let refs: Vec<(String, ClassValue)> = inp
            .reference
            .classes
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.parse::<ClassValue>().map_err(Error::Data)?)))
            .collect::<Result<_>>()?;
        let sep = separate_classes(&ram, &refs);
        r.check("all classes distinct", sep.all_distinct);
        r.set("separation", sep);
        Ok(())
    };
    if let Err(e) = run() {
        r.notes.push(format!("error: {e}"));
    }
    r.finish()
}

fn stage_p_build(p: &PolytopeP, inp: &Inputs) -> StageResult {
    let mut r = StageResult::default();
    r.set("facets", p.normals.len());
    r.check("facet count", p.normals.len() == inp.reference.p.facets);
    let sizes: Vec<usize> = p.orbits.iter().map(|o| o.orbit).collect();
    r.set("orbit_sizes", &sizes);
    r.check("orbit sizes (4,4,4,4,6)", sizes == [4, 4, 4, 4, 6]);
    r.set("orbits", &p.orbits);
    r.set("upper_wall", &p.upper_wall);
    r.set("flipped_walls", &p.flipped_walls);
    r.set("q_vertices", p.q_vertex_counts);

    let adj = p.facet_adjacency();
    let mut extremal_angles = BTreeSet::new();
    let mut intra_meets = Vec::new();
    let mut mixed_angles = BTreeSet::new();
    for pr in &adj {
        let (fa, fb) = (pr.a.family(), pr.b.family());
        if fa == fb {
            match fa {
                Family::E | Family::EPrime => {
                    if let Meet::Ridge { dihedral } = pr.meet {
                        extremal_angles.insert(dihedral.to_string());
                    } else {
                        extremal_angles.insert(format!("{:?}", pr.meet));
                    }
                }
                _ => {
                    if !pr.disjoint_in_h4() {
                        intra_meets.push(format!("{} {}", pr.a, pr.b));
                    }
                }
            }
        } else if let Meet::Ridge { dihedral } = pr.meet {
            mixed_angles.insert(dihedral.to_string());
        }
    }
    r.check("extremal facets meet at 2π/3", extremal_angles.iter().eq(["2/3"].iter()));
    r.check("half-height and central families pairwise disjoint", intra_meets.is_empty());
    r.check("mixed adjacencies right-angled", mixed_angles.iter().eq(["1/2"].iter()));
    r.set("extremal_dihedrals", extremal_angles);
    r.set("mixed_dihedrals", mixed_angles);
    r.set("meeting_within_family", intra_meets);
    r.finish()
}

fn stage_p_symmetry(p: &PolytopeP, inp: &Inputs) -> StageResult {
    let mut r = StageResult::default();
    let n = p.group.len();
    let preserving = p.group.elements.iter().filter(|s| s.orientation == Sign::Positive).count();
    r.set("order", n);
    r.set("orientation_preserving", preserving);
    r.check("symmetry group order", n == inp.reference.p.symmetry_order);
    r.check("orientation-preserving half", 2 * preserving == n);
    let a = p.antipodal_map();
    r.set("antipodal_word", &a.word);
    r.check("antipodal map is central", p.group.is_central(p.a));
    r.check("antipodal map is an involution", p.group.order_of(p.a) == 2);
    let mut pairs = Vec::new();
    for (i, j, k, l) in [(1, 2, 3, 4), (1, 3, 2, 4), (1, 4, 2, 3)] {
        let (x, y) = (FacetLabel::c(i, j), FacetLabel::c(k, l));
        let ok = a.apply_label(x) == y && a.apply_label(y) == x;
        r.check(&format!("a({x}) = {y}"), ok);
        pairs.push(format!("a({x}) = {}", a.apply_label(x)));
    }
    r.set("antipodal_on_central", pairs);
    r.set("g_i_order", p.g_i.len());
    r.check("G_I has 24 elements", p.g_i.len() == 24);
    r.finish()
}

fn stage_p_vertices(p: &PolytopeP) -> StageResult {
    let mut r = StageResult::default();
    let counts = p.vertex_counts();
    let named: BTreeMap<String, usize> = counts.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    r.set("vertex_counts", named);
    r.check("exactly two type-1 vertices", counts.get(&VertexKind::Type1) == Some(&2));
    let mut dims = [0usize; 5];
    for f in &p.faces {
        dims[f.dim] += 1;
    }
    r.set("faces_by_dim", dims);
    let w = p.ideal_hyperplane();
    r.check("ideal vertices orthogonal to a common spacelike vector", w.is_some());
    r.set("ideal_hyperplane", w.map(|w| w.coords().iter().map(FieldElement::pretty).collect::<Vec<_>>()));
    r.finish()
}

fn stage_x_build(x: &GluedComplex<'_>, inp: &Inputs) -> StageResult {
    let mut r = StageResult::default();
    r.set("copies", x.copies());
    r.set("rules", inp.rules.len());
    let pairings = x.pairings().len();
    r.set("pairings", pairings);
    r.check("20 pairings", pairings == 20);
    r.check("pairing is a fixed-point-free involution", x.pairing_is_involution());
    r.finish()
}

fn chi_checks(r: &mut StageResult, man: &ManifoldReport, x: &GluedComplex<'_>, expected: &BigRational) {
    let q_orb = BigRational::new(1.into(), 60.into());
    let e = x.euler_characteristic(&q_orb);
    r.set("euler", format_rational(&e.orbifold));
    r.set("euler_report", &e);
    r.set("volume_over_pi_squared", format_rational(&e.volume_over_pi_squared()));
    r.check("χ by orbifold count", &e.orbifold == expected);
    r.check("χ by weighted cell count", &e.weighted == expected);
    r.check("χ counts agree", e.agree);
    r.set("orientable", man.orientation.orientable);
    r.check("orientable", man.orientation.orientable);
}

fn stage_x_manifold(x: &GluedComplex<'_>) -> StageResult {
    let mut r = StageResult::default();
    let man = x.verify_manifold();
    r.check("ridge cycles", man.ridges_ok);
    r.check("corners separate half-height from central facets", man.corners_bicoloured);
    let corners = man.corner_classes().len();
    r.set("corner_classes", corners);
    r.check("there are corners", corners > 0);
    r.check("two type-1 link classes", man.type1_links.len() == 2);
    r.check("type-1 links are 5 tetrahedra with K5 dual graph", man.type1_links.iter().all(|l| l.ok()));
    r.check("vertex and cell links", man.links_ok);
    r.check("cusp monodromy preserves the boundary parts", man.cusps.iter().all(|c| c.closes && c.preserves_parts));
    chi_checks(&mut r, &man, x, &BigRational::from_integer(2.into()));
    r.set("manifold", &man);
    r.finish()
}

fn endpoint_sets(sets: &[Vec<FacetLabel>]) -> BTreeSet<BTreeSet<String>> {
    sets.iter().map(|s| s.iter().map(|l| l.to_string()).collect()).collect()
}

fn stage_m_build(report: &ClosureReport, inp: &Inputs) -> StageResult {
    let mut r = StageResult::default();
    r.set("h", &report.h);
    r.set("c", &report.c);
    r.check("h and c distinct", report.distinct);
    r.check("h and c commute", report.commute);
    r.check("h is a free involution of the half-height part", report.h_free.free);
    r.check("c is a free involution of the central part", report.c_free.free);
    r.set("h_orientation", report.h_orientation);
    r.set("c_orientation", report.c_orientation);
    for (name, free, expected) in [
        ("h", &report.h_free, &inp.reference.m.fixed_line_h),
        ("c", &report.c_free, &inp.reference.m.fixed_line_c),
    ] {
        let locus = free.fixed_loci.iter().find(|l| l.copy == 0);
        let got = locus.map(|l| endpoint_sets(&l.ideal_endpoints)).unwrap_or_default();
        let want: BTreeSet<BTreeSet<String>> =
            expected.iter().map(|s| s.iter().cloned().collect()).collect();
        r.check(
            &format!("fixed set of {name} in P is a line with the reference endpoints"),
            locus.is_some_and(|l| l.is_line && l.misses_boundary) && got == want,
        );
        r.set(&format!("{name}_fixed_loci"), &free.fixed_loci);
    }
    if let Some(e) = &report.error {
        r.notes.push(format!("error: {e}"));
    }
    r.finish()
}

fn stage_m_manifold(report: &ClosureReport, m: &GluedComplex<'_>, x_man: &ManifoldReport, inp: &Inputs) -> StageResult {
    let mut r = StageResult::default();
    let man = report.manifold.clone().unwrap_or_else(|| m.verify_manifold());
    let cycles = report.corner_cycles(x_man);
    let mut lengths: BTreeMap<usize, usize> = BTreeMap::new();
    for (len, _) in &cycles {
        *lengths.entry(*len).or_insert(0) += 1;
    }
    r.set("corner_cycle_lengths", &lengths);
    r.check("former corners present", !cycles.is_empty());
    r.check(
        "corner cycles have length 4 and trivial return map",
        cycles.iter().all(|&(len, triv)| len == 4 && triv == Some(true)),
    );
    r.set("boundary_empty", man.closed);
    r.check("boundary empty", man.closed);
    r.check("ridge cycles", man.ridges_ok);
    r.check("vertex and cell links", man.links_ok);
    let bad: Vec<String> = man
        .links
        .iter()
        .filter(|l| !l.ok)
        .map(|l| format!("{:?} link χ {} (expected {})", l.cell, l.link.chi, l.expected_chi))
        .collect();
    r.set("bad_links", bad);
    let expected = match q(&inp.reference.m.euler) {
        Ok(e) => e,
        Err(e) => return StageResult::error(e),
    };
    chi_checks(&mut r, &man, m, &expected);
    let q_copies = m.q_copies();
    r.set("q_copies", q_copies);
    r.check("tessellated by the reference number of Q-copies", q_copies == inp.reference.m.copies_of_q);
    let order = m.polytope().group.len();
    let induced = m.boundary().is_empty() && m.pairings().iter().all(|&(_, _, g)| g < order);
    r.set("covers_q_mod_isom_q", induced);
    r.check("every gluing map is a symmetry of P", induced);
    r.set("manifold", &man);
    r.finish()
}

fn stage_variants(reports: &[ClosureReport]) -> StageResult {
    let mut r = StageResult::default();
    let two = BigRational::from_integer(2.into());
    let mut rows = Vec::new();
    for rep in reports {
        let e = rep.euler.as_ref();
        let manifold = rep.ok;
        let chi_ok = e.is_some_and(|e| e.orbifold == two && e.agree);
        r.check(&format!("({}, {}) closes to a manifold with χ = 2", rep.h, rep.c), manifold && chi_ok);
        rows.push(json!({
            "h": rep.h,
            "c": rep.c,
            "distinct": rep.distinct,
            "commute": rep.commute,
            "h_free": rep.h_free.free,
            "c_free": rep.c_free.free,
            "manifold": manifold,
            "closed": rep.manifold.as_ref().map(|m| m.closed),
            "ridges_ok": rep.manifold.as_ref().map(|m| m.ridges_ok),
            "links_ok": rep.manifold.as_ref().map(|m| m.links_ok),
            "euler": e.map(|e| format_rational(&e.orbifold)),
            "euler_cells": e.map(|e| format_rational(&e.weighted)),
            "orientable": rep.orientable,
            "error": rep.error,
        }));
    }
    let orientable = reports.iter().filter(|r| r.orientable == Some(true)).count();
    r.set("table", rows);
    r.set("orientable_count", orientable);
    r.check("exactly one orientable outcome", orientable == 1);
    r.finish()
}

/// Runs the stages of `command` on `inputs`. Failures inside a stage are
/// recorded in the certificate rather than returned.
pub fn run(command: Command, inputs: &Inputs, options: &Options) -> Certificate {
    let wanted = command.stages();
    let mut out: BTreeMap<Stage, StageResult> = BTreeMap::new();
    let want = |s: Stage| wanted.contains(&s);

    if want(Stage::QDiagram) {
        out.insert(Stage::QDiagram, stage_q_diagram(inputs));
    }
    if want(Stage::QEuler) {
        out.insert(Stage::QEuler, stage_q_euler(inputs));
    }
    if want(Stage::QArithmetic) {
        out.insert(Stage::QArithmetic, stage_q_arithmetic(inputs));
    }

    let later: Vec<Stage> = wanted.iter().copied().filter(|s| *s >= Stage::PBuild).collect();
    if !later.is_empty() {
        run_geometry(inputs, options, &later, &mut out);
    }

    let stages: BTreeMap<String, StageResult> = out.into_iter().map(|(k, v)| (k.name().to_string(), v)).collect();
    Certificate {
        pass: stages.values().all(|s| s.pass),
        stages,
    }
}

fn run_geometry(inputs: &Inputs, options: &Options, wanted: &[Stage], out: &mut BTreeMap<Stage, StageResult>) {
    let block = |out: &mut BTreeMap<Stage, StageResult>, from: Stage, on: Stage| {
        for s in wanted.iter().filter(|s| **s >= from) {
            out.entry(*s).or_insert_with(|| StageResult::blocked(on));
        }
    };
    let p = match PolytopeP::build(&inputs.vectors) {
        Ok(p) => p,
        Err(e) => {
            out.insert(Stage::PBuild, StageResult::error(e));
            block(out, Stage::PBuild, Stage::PBuild);
            return;
        }
    };
    out.insert(Stage::PBuild, stage_p_build(&p, inputs));
    if wanted.contains(&Stage::PSymmetry) {
        out.insert(Stage::PSymmetry, stage_p_symmetry(&p, inputs));
    }
    if wanted.contains(&Stage::PVertices) {
        out.insert(Stage::PVertices, stage_p_vertices(&p));
    }
    if !wanted.iter().any(|s| *s >= Stage::XBuild) {
        return;
    }

    let x = match GluedComplex::from_rules(&p, 5, &inputs.rules) {
        Ok(x) => x,
        Err(e) => {
            out.insert(Stage::XBuild, StageResult::error(e));
            block(out, Stage::XManifold, Stage::XBuild);
            return;
        }
    };
    out.insert(Stage::XBuild, stage_x_build(&x, inputs));
    out.insert(Stage::XManifold, stage_x_manifold(&x));
    let x_man = x.verify_manifold();
    let q_orb = BigRational::new(1.into(), 60.into());

    if wanted.contains(&Stage::MBuild) {
        let (h, c) = options
            .pair
            .clone()
            .unwrap_or_else(|| (MAIN_PAIR.0.to_string(), MAIN_PAIR.1.to_string()));
        match close_x(&x, &h, &c, &q_orb) {
            Ok((report, m)) => {
                out.insert(Stage::MBuild, stage_m_build(&report, inputs));
                match m {
                    Some(m) => {
                        out.insert(Stage::MManifold, stage_m_manifold(&report, &m, &x_man, inputs));
                    }
                    None => {
                        out.insert(Stage::MManifold, StageResult::blocked(Stage::MBuild));
                    }
                }
            }
            Err(e) => {
                out.insert(Stage::MBuild, StageResult::error(e));
                out.insert(Stage::MManifold, StageResult::blocked(Stage::MBuild));
            }
        }
    }

    if wanted.contains(&Stage::Variants) {
        let reports = match &options.pair {
            Some((h, c)) => close_x(&x, h, c, &q_orb).map(|(r, _)| vec![r]),
            None => variant_manifolds(&x, &q_orb),
        };
        out.insert(
            Stage::Variants,
            match reports {
                Ok(rs) => {
                    let mut res = stage_variants(&rs);
                    if options.pair.is_some() {
                        // a single pair says nothing about the orientable count
                        res.notes.retain(|n| !n.contains("exactly one orientable"));
                        res = res.finish();
                    }
                    res
                }
                Err(e) => StageResult::error(e),
            },
        );
    }
}

/// One perturbed datum and whether the stage it feeds stopped passing.
#[derive(Clone, Debug, Serialize)]
pub struct ControlOutcome {
    pub name: String,
    pub stage: String,
    pub baseline_pass: bool,
    pub perturbed_pass: bool,
    /// The perturbation was caught: the stage passed before and fails after.
    pub caught: bool,
    pub notes: Vec<String>,
}

fn control(name: &str, stage: Stage, command: Command, baseline: &Inputs, perturbed: &Inputs) -> ControlOutcome {
    let opts = Options::default();
    let before = run(command, baseline, &opts);
    let after = run(command, perturbed, &opts);
    let b = before.stage(stage).is_some_and(|s| s.pass);
    let a = after.stage(stage).is_some_and(|s| s.pass);
    ControlOutcome {
        name: name.to_string(),
        stage: stage.name().to_string(),
        baseline_pass: b,
        perturbed_pass: a,
        caught: b && !a && !after.pass,
        notes: after.stage(stage).map(|s| s.notes.clone()).unwrap_or_default(),
    }
}

/// Perturbs one vector coordinate, one pairing, one form entry and one
/// diagram edge in turn and reruns the stage that consumes each.
pub fn negative_controls(inputs: &Inputs) -> Result<Vec<ControlOutcome>> {
    let mut out = Vec::new();

    let mut v = inputs.clone();
    let t = v
        .vectors
        .iter_mut()
        .find(|w| w.name == "t")
        .ok_or_else(|| Error::Data("missing vector `t`".into()))?;
    let mut coords = t.vector.coords().clone();
    coords[1] = coords[1].clone() + FieldElement::integer(1);
    t.vector = crate::Vector::new(coords);
    out.push(control("vector coordinate t[1] + 1", Stage::QDiagram, Command::VerifyQ, inputs, &v));

    let mut g = inputs.clone();
    let rule = g.rules.iter_mut().find(|r| r.word != "id").ok_or_else(|| Error::Data("no non-identity pairing".into()))?;
    rule.word = "id".into();
    out.push(control("pairing word replaced by id", Stage::XManifold, Command::BuildX, inputs, &g));

    let mut f = inputs.clone();
    let mut rows = f.form.matrix().to_rows();
    rows[0][0] += BigRational::one();
    f.form = RationalQuadraticForm::new(crate::RationalMatrix::from_rows(rows))?;
    out.push(control("form entry (0,0) + 1", Stage::QArithmetic, Command::VerifyQ, inputs, &f));

    let mut d = inputs.clone();
    let text: String = d
        .diagram
        .to_text()
        .lines()
        .filter(|l| !(l.starts_with("edge") && l.contains("i0") && l.contains("i1")))
        .map(|l| format!("{l}\n"))
        .collect();
    d.diagram = CoxeterDiagram::parse(&text)?;
    out.push(control("diagram edge i0-i1 removed", Stage::QDiagram, Command::VerifyQ, inputs, &d));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_parse() {
        let g = PublishedGram::parse("# c\norder x y\n1 0 0 0 | -1/2 0 0 0\n-1/2 0 0 0 | 1 0 0 0\n").unwrap();
        assert_eq!(g.order, ["x", "y"]);
        assert_eq!(g.entries[0][1], FieldElement::rational(BigRational::new((-1).into(), 2.into())));
        assert!(PublishedGram::parse("order x y\n1 0 0 0\n").is_err());
        assert!(PublishedGram::parse("1 0 0 0\n").is_err());
    }

    #[test]
    fn command_stage_order() {
        assert_eq!(Command::All.stages(), Stage::ALL.to_vec());
        assert_eq!(Command::VerifyQ.stages(), [Stage::QDiagram, Stage::QEuler, Stage::QArithmetic]);
        assert!(Command::BuildM.stages().contains(&Stage::XManifold));
    }

    #[test]
    fn shipped_inputs_load() {
        let inp = Inputs::load(&default_data_dir()).unwrap();
        assert_eq!(inp.vectors.len(), 8);
        assert_eq!(inp.rules.len(), 20);
        assert_eq!(inp.gram.order.len(), 8);
        assert_eq!(inp.reference.m.copies_of_q, 120);
    }
}
