use std::collections::BTreeMap;
use std::sync::OnceLock;

use hypglue::lorentz::{fixed_subspace, parse_vectors, reflection_in, restricted_signature};
use hypglue::polytope::{enumerate_group, Family, FacetLabel, Meet, PolytopeP, Side, VertexKind, FACETS};
use hypglue::{Scalar, Sign};
use num_rational::Ratio;

fn p() -> &'static PolytopeP {
    static P: OnceLock<PolytopeP> = OnceLock::new();
    P.get_or_init(|| PolytopeP::build(&parse_vectors(include_str!("../data/vectors.txt")).unwrap()).unwrap())
}

fn label(s: &str) -> FacetLabel {
    s.parse().unwrap()
}

#[test]
fn facet_families() {
    let p = p();
    let mut sizes = BTreeMap::new();
    for l in FacetLabel::all() {
        *sizes.entry(l.family()).or_insert(0) += 1;
    }
    assert_eq!(sizes[&Family::E], 4);
    assert_eq!(sizes[&Family::EPrime], 4);
    assert_eq!(sizes[&Family::H], 4);
    assert_eq!(sizes[&Family::HPrime], 4);
    assert_eq!(sizes[&Family::C], 6);
    assert_eq!(p.normals.len(), FACETS);
    for o in &p.orbits {
        assert_eq!(o.orbit * o.stabilizer, 24, "orbit of {}", o.wall);
    }
}

#[test]
fn antipodal_map() {
    let p = p();
    let a = p.antipodal_map();
    for l in FacetLabel::all() {
        assert_ne!(a.apply_label(l), l, "a fixes {l}");
    }
    for i in 1..=4 {
        assert_eq!(a.apply_label(FacetLabel::e(i)), FacetLabel::e_prime(i));
        assert_eq!(a.apply_label(FacetLabel::h(i)), FacetLabel::h_prime(i));
    }
    assert_eq!(a.apply_label(label("C12")), label("C34"));
    assert_eq!(a.apply_label(label("C13")), label("C24"));
    assert_eq!(p.group.compose(p.a, p.a), p.group.identity());
    assert!(p.group.is_central(p.a));
}

#[test]
fn symmetries_permute_oriented_facets() {
    let p = p();
    assert_eq!(p.group.len(), 48);
    let mut positive = 0;
    for s in &p.group.elements {
        for f in 0..FACETS {
            let image = s.matrix.apply(&p.normals[f]);
            assert_eq!(image.proportionality(&p.normals[s.apply_facet(f)]), Some(Sign::Positive));
        }
        if s.orientation == Sign::Positive {
            positive += 1;
        }
    }
    assert_eq!(positive, 24);
    let g_i: Vec<_> = p.g_i.iter().map(|&k| p.group.get(k)).collect();
    assert_eq!(g_i.len(), 24);
    assert!(g_i.iter().all(|s| !s.swaps_sides));
}

#[test]
fn words_evaluate_consistently() {
    let p = p();
    let r12 = p.evaluate_word("r12").unwrap();
    let r34 = p.evaluate_word("r34").unwrap();
    assert_eq!(p.group.compose(r12, r34), p.group.compose(r34, r12));
    assert_eq!(p.evaluate_word("r21").unwrap(), r12);
    assert_eq!(p.evaluate_word("a*a").unwrap(), p.group.identity());
    assert_eq!(p.group.order_of(p.evaluate_word("r12*r23").unwrap()), 3);
    assert!(p.evaluate_word("r11").is_err());
    assert!(p.evaluate_word("x").is_err());
    let s = p.group.get(r12);
    assert_eq!(s.apply_label(FacetLabel::e(1)), FacetLabel::e(2));
    assert_eq!(s.apply_label(label("C13")), label("C23"));
    assert_eq!(s.apply_label(label("C12")), label("C12"));
}

#[test]
fn vertex_census() {
    let p = p();
    let counts = p.vertex_counts();
    assert_eq!(counts[&VertexKind::Type1], 2);
    assert_eq!(counts[&VertexKind::Type2], 8);
    assert_eq!(counts[&VertexKind::Type3], 24);
    assert_eq!(counts[&VertexKind::Ideal], 12);
    let faces: Vec<usize> = (0..4).map(|d| p.faces_of_dim(d).len()).collect();
    assert_eq!(faces, vec![34, 116, 92, 22]);
    let total_vertices = p.vertices.len();
    assert_eq!(total_vertices, 46);
    assert_eq!(total_vertices as i64 - 116 + 92 - 22, 0);
}

/// Vertices of P recomputed in floating point by solving each 4-subset.
fn float_vertex_oracle(p: &PolytopeP) -> BTreeMap<(bool, u32), usize> {
    let n: Vec<[f64; 5]> = p
        .normals
        .iter()
        .map(|v| {
            let c = v.coords().each_ref().map(|x| x.to_f64());
            let s = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            c.map(|x| x / s)
        })
        .collect();
    let lower = |v: &[f64; 5]| [-v[0], v[1], v[2], v[3], v[4]];
    let dot = |a: &[f64; 5], b: &[f64; 5]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut found: BTreeMap<u32, bool> = BTreeMap::new();
    for a in 0..FACETS {
        for b in a + 1..FACETS {
            for c in b + 1..FACETS {
                for d in c + 1..FACETS {
                    let rows: Vec<[f64; 5]> = [a, b, c, d].iter().map(|&i| lower(&n[i])).collect();
                    let Some(w) = kernel_vector(&rows) else { continue };
                    let q = -w[0] * w[0] + w[1..].iter().map(|x| x * x).sum::<f64>();
                    if q > 1e-9 {
                        continue;
                    }
                    let w = if w[0] < 0.0 { w.map(|x| -x) } else { w };
                    let ips: Vec<f64> = n.iter().map(|m| dot(&lower(m), &w)).collect();
                    if ips.iter().any(|&x| x > 1e-9) {
                        continue;
                    }
                    let mask = (0..FACETS).filter(|&i| ips[i].abs() <= 1e-9).fold(0u32, |m, i| m | 1 << i);
                    found.insert(mask, q.abs() <= 1e-9);
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (mask, ideal) in found {
        *out.entry((ideal, mask.count_ones())).or_insert(0) += 1;
    }
    out
}

/// Unit vector spanning the kernel of a rank-4 4×5 system, if the rank is 4.
fn kernel_vector(rows: &[[f64; 5]]) -> Option<[f64; 5]> {
    let mut m: Vec<[f64; 5]> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..5 {
        let Some(best) = (r..4).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())) else { break };
        if m[best][c].abs() < 1e-9 {
            continue;
        }
        m.swap(r, best);
        let pv = m[r][c];
        m[r] = m[r].map(|x| x / pv);
        for i in 0..4 {
            if i != r {
                let f = m[i][c];
                for k in 0..5 {
                    m[i][k] -= f * m[r][k];
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == 4 {
            break;
        }
    }
    if pivots.len() != 4 {
        return None;
    }
    let free = (0..5).find(|c| !pivots.contains(c))?;
    let mut w = [0.0; 5];
    w[free] = 1.0;
    for (i, &c) in pivots.iter().enumerate() {
        w[c] = -m[i][free];
    }
    let s = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    Some(w.map(|x| x / s))
}

#[test]
fn vertex_census_matches_float_oracle() {
    let p = p();
    let oracle = float_vertex_oracle(p);
    let mut exact = BTreeMap::new();
    for v in &p.vertices {
        *exact.entry((v.is_ideal(), v.facets.count_ones())).or_insert(0) += 1;
    }
    assert_eq!(oracle, exact);
    assert_eq!(oracle[&(true, 6)], 12);
    assert_eq!(oracle[&(false, 4)], 34);
}

#[test]
fn census_is_symmetric() {
    let p = p();
    let masks: Vec<u32> = p.vertices.iter().map(|v| v.facets).collect();
    for s in &p.group.elements {
        for v in &p.vertices {
            let image = s.apply_facet_mask(v.facets);
            let k = masks.iter().position(|&m| m == image).expect("image is a vertex");
            assert_eq!(p.vertices[k].kind, v.kind);
        }
    }
    let a = p.antipodal_map();
    for v in p.vertices.iter().filter(|v| !v.is_ideal()) {
        let image = a.apply_facet_mask(v.facets);
        let w = p.vertices.iter().find(|w| w.facets == image).unwrap();
        assert_eq!(w.kind, v.kind);
        let flipped = match v.side.unwrap() {
            Side::Top => Side::Bottom,
            Side::Bottom => Side::Top,
        };
        assert_eq!(w.side, Some(flipped));
    }
}

#[test]
fn type_one_vertices_are_the_extremal_corners() {
    let p = p();
    let top = p.vertex_with_facets(&(1..=4).map(FacetLabel::e).collect::<Vec<_>>()).unwrap();
    let bottom = p.vertex_with_facets(&(1..=4).map(FacetLabel::e_prime).collect::<Vec<_>>()).unwrap();
    assert_eq!(p.vertices[top].kind, VertexKind::Type1);
    assert_eq!(p.vertices[bottom].kind, VertexKind::Type1);
    assert_eq!(p.vertices[top].side, Some(Side::Top));
}

#[test]
fn ideal_vertices_lie_on_a_hyperplane() {
    let p = p();
    let w = p.ideal_hyperplane().expect("spacelike normal");
    for v in p.vertices.iter().filter(|v| v.is_ideal()) {
        assert_eq!(v.point.inner(&w).sign(), Sign::Zero);
    }
}

#[test]
fn dihedral_angles() {
    let p = p();
    let e1 = FacetLabel::e(1).index();
    let e2 = FacetLabel::e(2).index();
    assert_eq!(p.dihedral(e1, e2), Some(Ratio::new(2, 3)));
    let adjacency = p.facet_adjacency();
    let meet = |x: &str, y: &str| {
        let (x, y) = (label(x), label(y));
        adjacency.iter().find(|q| (q.a, q.b) == (x, y) || (q.a, q.b) == (y, x)).unwrap().meet.clone()
    };
    assert_eq!(meet("E1", "E2"), Meet::Ridge { dihedral: Ratio::new(2, 3) });
    assert!(matches!(meet("H1", "H2"), Meet::Disjoint | Meet::IdealPoint));
    assert!(matches!(meet("C12", "C34"), Meet::Disjoint | Meet::IdealPoint));
    for pair in &adjacency {
        if let Meet::Ridge { dihedral } = &pair.meet {
            let same = pair.a.family() == pair.b.family();
            if !same {
                assert_eq!(*dihedral, Ratio::new(1, 2), "{} {}", pair.a, pair.b);
            }
        }
    }
}

#[test]
fn fixed_line_of_the_half_height_involution() {
    let p = p();
    let h = p.group.get(p.evaluate_word("a*r12").unwrap());
    let fixed = fixed_subspace(&h.matrix);
    assert_eq!(fixed.len(), 2);
    assert_eq!(restricted_signature(&fixed), (1, 1, 0));
    let expected: Vec<Vec<FacetLabel>> = [
        ["E1", "E'2", "H2", "H'1", "C13", "C14"],
        ["E2", "E'1", "H1", "H'2", "C23", "C24"],
    ]
    .iter()
    .map(|ls| ls.iter().map(|s| label(s)).collect())
    .collect();
    for labels in expected {
        let k = p.vertex_with_facets(&labels).expect("ideal vertex");
        let v = &p.vertices[k];
        assert!(v.is_ideal());
        assert_eq!(h.matrix.apply(&v.point).proportionality(&v.point), Some(Sign::Positive));
    }
}

#[test]
fn single_reflection_generates_order_two() {
    let walls = parse_vectors(include_str!("../data/vectors.txt")).unwrap();
    let i0 = walls.iter().find(|w| w.name == "i0").unwrap();
    let g = enumerate_group(&[reflection_in(&i0.vector).unwrap()], 10).unwrap();
    assert_eq!(g.len(), 2);
}
