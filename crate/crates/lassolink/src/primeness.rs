//! Two-point-curve enumeration and the primeness family of verdicts.
//!
//! A simple closed curve meeting the diagram in exactly two generic points
//! interior to edges decomposes into two chords across disk faces; it is
//! determined by the unordered pair of darts naming the sides from which one
//! arc approaches the two crossing points. Enumeration walks all such pairs,
//! and classification cuts the chord faces and flood-fills the fragments.

use crate::certificate::{
    Certificate, CurveCertificate, NugatoryCertificate, SideSummary,
};
use crate::surface_map::{BareComponent, CirclePlacement, Crossing, Dart, Edge, SurfaceDiagram};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrimenessError {
    #[error("faces must be disks to enumerate curves by their chords")]
    NotCellular,
    #[error("link-level promotion requires a fully alternating diagram")]
    NotAlternating,
    #[error("link-level promotion refused: diagram has a removable nugatory crossing")]
    HasRemovableNugatory,
    #[error("strand reference out of range")]
    BadStrandRef,
}

/// A two-point curve, canonically represented by the smaller of the two
/// equivalent dart pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoPointCurve {
    pub darts: (Dart, Dart),
}

impl TwoPointCurve {
    pub fn chord_a(&self) -> [Dart; 2] {
        [self.darts.0, self.darts.1]
    }
}

/// Classification of a two-point curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveClassification {
    pub separating: bool,
    /// Present when separating; sides are ordered by ascending fragment id.
    pub sides: Option<[SideSummary; 2]>,
}

/// Enumerate one representative per isotopy class of simple closed curves
/// meeting the diagram transversally in two points interior to edges.
pub fn enumerate_two_point_curves(
    d: &SurfaceDiagram,
) -> Result<Vec<TwoPointCurve>, PrimenessError> {
    if !d.is_cellularly_embedded() {
        return Err(PrimenessError::NotCellular);
    }
    let n = d.n_darts();
    let mut out = Vec::new();
    for a1 in 0..n {
        for a2 in a1..n {
            if a2 == d.theta(a1) {
                // Both arcs in one face approaching from opposite sides of a
                // single edge always forces the two chords to cross.
                continue;
            }
            if d.face_of(a1) != d.face_of(a2) {
                continue;
            }
            if d.face_of(d.theta(a1)) != d.face_of(d.theta(a2)) {
                continue;
            }
            // Dedupe against the mirror representation via the other sides.
            let mirror = sorted_pair(d.theta(a1), d.theta(a2));
            if (a1, a2) > mirror {
                continue;
            }
            let curve = TwoPointCurve { darts: (a1, a2) };
            if both_chords_embed(d, &curve) {
                out.push(curve);
            }
        }
    }
    out.sort_by_key(|c| curve_sort_key(d, c));
    Ok(out)
}

fn sorted_pair(a: Dart, b: Dart) -> (Dart, Dart) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn curve_sort_key(d: &SurfaceDiagram, c: &TwoPointCurve) -> (usize, usize, usize, usize, Dart, Dart) {
    let (a1, a2) = c.darts;
    let (e1, e2) = (d.edge_of(a1), d.edge_of(a2));
    let (elo, ehi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
    (elo, ehi, d.face_of(a1), d.face_of(d.theta(a1)), a1, a2)
}

/// Circle-position key on a face boundary walk: (walk position, offset).
/// Offsets are eighths of an edge visit; -1 sits in the corner just before
/// the visit.
pub(crate) type Key = (usize, i64);

fn in_open_cyclic_interval(a: Key, b: Key, x: Key) -> bool {
    if a < b {
        a < x && x < b
    } else {
        x > a || x < b
    }
}

/// Curve points on the two crossed edges, as parameters in eighths measured
/// from the canonical dart of each edge.
fn curve_points(d: &SurfaceDiagram, c: &TwoPointCurve) -> Vec<(usize, i64)> {
    let (a1, a2) = c.darts;
    if a1 == a2 {
        let e = d.edge_of(a1);
        vec![(e, 2), (e, 6)]
    } else {
        vec![(d.edge_of(a1), 4), (d.edge_of(a2), 4)]
    }
}

/// Visit-relative parameter of an edge point seen from dart `dart`.
fn visit_param(d: &SurfaceDiagram, dart: Dart, canonical_param: i64) -> i64 {
    if d.edge_canonical_dart(d.edge_of(dart)) == dart {
        canonical_param
    } else {
        8 - canonical_param
    }
}

/// Chord endpoint keys of the two chords of a curve: ((face_a, ka1, ka2),
/// (face_b, kb1, kb2)). Point 1 is on edge(a1), point 2 on edge(a2).
fn chord_keys(
    d: &SurfaceDiagram,
    c: &TwoPointCurve,
) -> ((usize, Key, Key), (usize, Key, Key)) {
    let (a1, a2) = c.darts;
    let (b1, b2) = (d.theta(a1), d.theta(a2));
    let (p1, p2) = if a1 == a2 { (2, 6) } else { (4, 4) };
    let key = |dart: Dart, p: i64| -> Key { (d.pos_in_face(dart), visit_param(d, dart, p)) };
    (
        (d.face_of(a1), key(a1, p1), key(a2, p2)),
        (d.face_of(b1), key(b1, p1), key(b2, p2)),
    )
}

/// Simplicity: when the two chords land in the same face they must not
/// interleave along the boundary circle.
fn both_chords_embed(d: &SurfaceDiagram, c: &TwoPointCurve) -> bool {
    let ((fa, ka1, ka2), (fb, kb1, kb2)) = chord_keys(d, c);
    if fa != fb {
        return true;
    }
    let inside1 = in_open_cyclic_interval(ka1, ka2, kb1);
    let inside2 = in_open_cyclic_interval(ka1, ka2, kb2);
    inside1 == inside2
}

/// One cut through the surface: chords plus edge subdivision points, with an
/// optional crossing the curve passes through (nugatory test curves).
pub(crate) struct CutSpec {
    /// (face, key, key) per chord.
    pub chords: Vec<(usize, Key, Key)>,
    /// canonical-direction subdivision params per edge.
    pub edge_points: BTreeMap<usize, Vec<i64>>,
    pub through_crossing: Option<usize>,
}

pub(crate) struct CutResult {
    pub n_classes: usize,
    /// For each union-find class in ascending-representative order:
    /// (crossing ids, segment count, fragment count).
    pub class_data: Vec<(Vec<u32>, usize, usize)>,
    /// class index per crossing of the component (by crossing index).
    pub class_of_crossing: BTreeMap<usize, usize>,
    /// class index per edge that the cut leaves whole.
    pub class_of_edge: BTreeMap<usize, usize>,
}

pub(crate) fn cut_and_flood(d: &SurfaceDiagram, spec: &CutSpec) -> CutResult {
    // Restrict to the surface component containing the cut.
    let comp = d.crossing_of(match spec.chords.first() {
        Some(&(f, _, _)) => d.faces()[f].walk[0],
        None => 0,
    });
    let comp = d.component_of_crossing(comp);

    // Fragment ids: chord faces get one per chord-side signature, others one.
    let mut fragment_of_item: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    let mut fragment_of_face: BTreeMap<usize, usize> = BTreeMap::new();
    let mut n_fragments = 0usize;
    let mut fragment_face: Vec<usize> = Vec::new();

    let mut chord_faces: BTreeMap<usize, Vec<(Key, Key)>> = BTreeMap::new();
    for &(f, k1, k2) in &spec.chords {
        chord_faces.entry(f).or_default().push((k1, k2));
    }

    for (f, face) in d.faces().iter().enumerate() {
        if d.component_of_crossing(d.crossing_of(face.walk[0])) != comp {
            continue;
        }
        match chord_faces.get(&f) {
            None => {
                fragment_of_face.insert(f, n_fragments);
                fragment_face.push(f);
                n_fragments += 1;
            }
            Some(chords) => {
                let mut sig_ids: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
                for (pos, &dart) in face.walk.iter().enumerate() {
                    let e = d.edge_of(dart);
                    let mut params: Vec<i64> = spec
                        .edge_points
                        .get(&e)
                        .map(|ps| ps.iter().map(|&p| visit_param(d, dart, p)).collect())
                        .unwrap_or_default();
                    params.sort_unstable();
                    let mut bounds = vec![0i64];
                    bounds.extend(params.iter().copied());
                    bounds.push(8);
                    for piece in 0..bounds.len() - 1 {
                        let mid = (pos, bounds[piece] + (bounds[piece + 1] - bounds[piece]) / 2);
                        let sig: Vec<bool> = chords
                            .iter()
                            .map(|&(k1, k2)| in_open_cyclic_interval(k1, k2, mid))
                            .collect();
                        let id = *sig_ids.entry(sig).or_insert_with(|| {
                            let id = n_fragments;
                            fragment_face.push(f);
                            n_fragments += 1;
                            id
                        });
                        fragment_of_item.insert((f, pos, piece), id);
                    }
                }
            }
        }
    }

    let fragment_at = |dart: Dart, canonical_param: i64| -> usize {
        let f = d.face_of(dart);
        match fragment_of_face.get(&f) {
            Some(&id) => id,
            None => {
                let e = d.edge_of(dart);
                let pos = d.pos_in_face(dart);
                let vp = visit_param(d, dart, canonical_param);
                let mut params: Vec<i64> = spec
                    .edge_points
                    .get(&e)
                    .map(|ps| ps.iter().map(|&p| visit_param(d, dart, p)).collect())
                    .unwrap_or_default();
                params.sort_unstable();
                let piece = params.iter().filter(|&&p| p < vp).count();
                fragment_of_item[&(f, pos, piece)]
            }
        }
    };

    // Union fragments across every edge segment of the component.
    let mut uf = UnionFind::new(n_fragments);
    let mut segments: Vec<(usize, Dart, i64)> = Vec::new();
    for (ei, e) in d.edges().iter().enumerate() {
        if d.component_of_crossing(e.tail / 4) != comp {
            continue;
        }
        let mut bounds = vec![0i64];
        if let Some(ps) = spec.edge_points.get(&ei) {
            let mut ps = ps.clone();
            ps.sort_unstable();
            bounds.extend(ps);
        }
        bounds.push(8);
        for w in bounds.windows(2) {
            let mid = w[0] + (w[1] - w[0]) / 2;
            let fa = fragment_at(e.tail, mid);
            let fb = fragment_at(e.head, mid);
            uf.union(fa, fb);
            segments.push((ei, e.tail, mid));
        }
    }

    // Collect classes in ascending representative order.
    let mut class_index: BTreeMap<usize, usize> = BTreeMap::new();
    for frag in 0..n_fragments {
        let root = uf.find(frag);
        let next = class_index.len();
        class_index.entry(root).or_insert(next);
    }
    let n_classes = class_index.len();
    let mut class_data: Vec<(Vec<u32>, usize, usize)> = vec![(Vec::new(), 0, 0); n_classes];
    for frag in 0..n_fragments {
        class_data[class_index[&uf.find(frag)]].2 += 1;
    }
    let mut class_of_edge: BTreeMap<usize, usize> = BTreeMap::new();
    for &(ei, tail, mid) in &segments {
        let cls = class_index[&uf.find(fragment_at(tail, mid))];
        class_data[cls].1 += 1;
        if !spec.edge_points.contains_key(&ei) {
            class_of_edge.insert(ei, cls);
        }
    }
    let mut class_of_crossing = BTreeMap::new();
    for c in 0..d.crossings().len() {
        if d.component_of_crossing(c) != comp {
            continue;
        }
        // The fragment touching the vertex end of the slot-0 dart; in
        // canonical edge coordinates that end sits at 0 or 8.
        let dart = 4 * c;
        let near = if d.edge_canonical_dart(d.edge_of(dart)) == dart {
            1
        } else {
            7
        };
        let cls = class_index[&uf.find(fragment_at(dart, near))];
        class_of_crossing.insert(c, cls);
        if Some(c) != spec.through_crossing {
            class_data[cls].0.push(d.crossings()[c].id);
        }
    }
    CutResult {
        n_classes,
        class_data,
        class_of_crossing,
        class_of_edge,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Raw flood-fill result for a two-point curve.
pub(crate) fn classify_curve_cut(d: &SurfaceDiagram, c: &TwoPointCurve) -> CutResult {
    let (chord_a, chord_b) = chord_keys(d, c);
    let mut edge_points: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    for (e, p) in curve_points(d, c) {
        edge_points.entry(e).or_default().push(p);
    }
    let spec = CutSpec {
        chords: vec![chord_a, chord_b],
        edge_points,
        through_crossing: None,
    };
    cut_and_flood(d, &spec)
}

/// Corner-to-corner cut through crossing `c`, joining the corners before
/// slots `j` and `j+2` when they share a face.
pub(crate) fn corner_cut(d: &SurfaceDiagram, c: usize, j: usize) -> Option<CutResult> {
    let d1 = 4 * c + j;
    let d2 = 4 * c + j + 2;
    if d.face_of(d1) != d.face_of(d2) {
        return None;
    }
    let key = |dart: Dart| -> Key { (d.pos_in_face(dart), -1) };
    let spec = CutSpec {
        chords: vec![(d.face_of(d1), key(d1), key(d2))],
        edge_points: BTreeMap::new(),
        through_crossing: Some(c),
    };
    Some(cut_and_flood(d, &spec))
}

/// Decide whether the curve separates its surface component; for separating
/// curves report per-side crossing counts and diskness. Diskness of a side
/// uses the Euler count of the closed side: crossings - segments + fragments.
pub fn classify_curve(d: &SurfaceDiagram, c: &TwoPointCurve) -> CurveClassification {
    let result = classify_curve_cut(d, c);
    if result.n_classes != 2 {
        return CurveClassification {
            separating: false,
            sides: None,
        };
    }
    let sides: Vec<SideSummary> = result
        .class_data
        .iter()
        .map(|(ids, segs, frags)| SideSummary {
            crossings: ids.len(),
            crossing_ids: ids.clone(),
            is_disk: ids.len() as i64 - *segs as i64 + *frags as i64 == 1,
        })
        .collect();
    CurveClassification {
        separating: true,
        sides: Some([sides[0].clone(), sides[1].clone()]),
    }
}

fn side_is_trivial(s: &SideSummary) -> bool {
    s.is_disk && s.crossings == 0
}

fn curve_certificate(
    d: &SurfaceDiagram,
    c: &TwoPointCurve,
    class: &CurveClassification,
) -> Certificate {
    let (a1, a2) = c.darts;
    let mut edges = vec![d.edge_of(a1), d.edge_of(a2)];
    edges.dedup();
    Certificate::TwoPointCurve {
        curve: CurveCertificate {
            edges,
            faces: vec![d.face_of(a1), d.face_of(d.theta(a1))],
            chords: [
                [a1, a2],
                [d.theta(a1), d.theta(a2)],
            ],
            separating: class.separating,
            sides: class.sides.clone(),
        },
    }
}

/// Shapes the paper singles out before any curve argument applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TrivialShape {
    /// Two crossingless circles on one sphere.
    OneSphereTwoCircles,
    /// One crossingless circle on each of two spheres.
    TwoSpheresTwoCircles,
}

fn trivial_shape(d: &SurfaceDiagram) -> Option<TrivialShape> {
    if !d.crossings().is_empty() || d.circles().len() != 2 {
        return None;
    }
    let on_bare: Vec<usize> = d
        .circles()
        .iter()
        .filter_map(|c| match c {
            CirclePlacement::OnBare(b) => Some(*b),
            CirclePlacement::InFace(_) => None,
        })
        .collect();
    if on_bare.len() != 2 || d.bare_components().iter().any(|b| b.genus != 0) {
        return None;
    }
    match d.bare_components().len() {
        1 => Some(TrivialShape::OneSphereTwoCircles),
        2 if on_bare[0] != on_bare[1] => Some(TrivialShape::TwoSpheresTwoCircles),
        _ => None,
    }
}

/// Verdict plus witness for the primeness family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub certificate: Option<Certificate>,
}

impl Verdict {
    fn yes() -> Verdict {
        Verdict {
            holds: true,
            certificate: None,
        }
    }

    fn no(cert: Certificate) -> Verdict {
        Verdict {
            holds: false,
            certificate: Some(cert),
        }
    }
}

fn split_certificate(d: &SurfaceDiagram) -> Certificate {
    Certificate::SplitPartition {
        components: d.component_summaries(),
    }
}

/// Pairwise primeness of the diagram: no nontrivial decomposition along a
/// separating two-point curve, with the paper's crossingless exceptions.
pub fn is_prime_diagram(d: &SurfaceDiagram) -> Verdict {
    if trivial_shape(d).is_some() {
        return Verdict::yes();
    }
    if !d.is_connected_diagram() {
        return Verdict::no(split_certificate(d));
    }
    let curves = enumerate_two_point_curves(d).expect("connected diagrams are cellular");
    for c in &curves {
        let class = classify_curve(d, c);
        if let Some(sides) = &class.sides {
            if !side_is_trivial(&sides[0]) && !side_is_trivial(&sides[1]) {
                return Verdict::no(curve_certificate(d, c, &class));
            }
        }
    }
    Verdict::yes()
}

/// Weak primeness: no sphere summand other than a trivial arc can be cut
/// off by a two-point curve whose disk side carries a crossing.
pub fn is_weakly_prime_diagram(d: &SurfaceDiagram) -> Verdict {
    if trivial_shape(d).is_some() {
        return Verdict::yes();
    }
    if !d.is_connected_diagram() {
        return Verdict::no(split_certificate(d));
    }
    let curves = enumerate_two_point_curves(d).expect("connected diagrams are cellular");
    for c in &curves {
        let class = classify_curve(d, c);
        if let Some(sides) = &class.sides {
            for (a, b) in [(0, 1), (1, 0)] {
                if sides[a].is_disk && sides[a].crossings >= 1 && !side_is_trivial(&sides[b]) {
                    return Verdict::no(curve_certificate(d, c, &class));
                }
            }
        }
    }
    Verdict::yes()
}

/// Ozawa's strong primeness: every two-point curve, separating or not,
/// bounds a crossingless disk.
pub fn is_strongly_prime_diagram(d: &SurfaceDiagram) -> Verdict {
    if trivial_shape(d) == Some(TrivialShape::OneSphereTwoCircles) {
        return Verdict::yes();
    }
    if !d.is_connected_diagram() {
        return Verdict::no(split_certificate(d));
    }
    let curves = enumerate_two_point_curves(d).expect("connected diagrams are cellular");
    for c in &curves {
        let class = classify_curve(d, c);
        match &class.sides {
            None => return Verdict::no(curve_certificate(d, c, &class)),
            Some(sides) => {
                if !side_is_trivial(&sides[0]) && !side_is_trivial(&sides[1]) {
                    return Verdict::no(curve_certificate(d, c, &class));
                }
            }
        }
    }
    Verdict::yes()
}

/// Nugatory crossings with removability, in crossing-id order.
pub fn find_nugatory(d: &SurfaceDiagram) -> Vec<NugatoryCertificate> {
    let mut out = Vec::new();
    for c in 0..d.crossings().len() {
        let faces: std::collections::BTreeSet<usize> =
            (0..4).map(|s| d.face_of(4 * c + s)).collect();
        if faces.len() >= 4 {
            continue;
        }
        out.push(NugatoryCertificate {
            crossing_id: d.crossings()[c].id,
            removable: is_removable(d, c),
        });
    }
    out
}

/// A nugatory crossing is removable when a disk boundary meets the diagram
/// in the crossing alone: a chord between two opposite corners of the
/// crossing, closed through the crossing point, separates off a disk.
fn is_removable(d: &SurfaceDiagram, c: usize) -> bool {
    for j in 0..2usize {
        // Corner just before the visit of dart (c, j) pairs with the corner
        // before dart (c, j+2).
        let result = match corner_cut(d, c, j) {
            Some(r) => r,
            None => continue,
        };
        if result.n_classes != 2 {
            continue;
        }
        for (ids, segs, frags) in &result.class_data {
            // Closed side: crossings + the vertex on the boundary, segments
            // + the chord arc; disk iff the Euler count is 1.
            let chi = ids.len() as i64 - *segs as i64 + *frags as i64;
            if chi == 1 {
                return true;
            }
        }
    }
    false
}

/// Reference to a strand of a diagram for connect sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrandRef {
    Edge(usize),
    Circle(usize),
}

/// Pairwise connect sum of two diagrams, joining the chosen strands. The two
/// freshly created edges (when both strands are edges) form the neck and are
/// returned for certificate cross-checks.
pub fn connect_sum(
    d1: &SurfaceDiagram,
    d2: &SurfaceDiagram,
    s1: StrandRef,
    s2: StrandRef,
) -> Result<(SurfaceDiagram, Option<(usize, usize)>), PrimenessError> {
    match (s1, s2) {
        (StrandRef::Edge(e1), StrandRef::Edge(e2)) => {
            if e1 >= d1.edges().len() || e2 >= d2.edges().len() {
                return Err(PrimenessError::BadStrandRef);
            }
            let offset_dart = d1.n_darts();
            let id_offset: u32 = d1.crossings().iter().map(|c| c.id).max().unwrap_or(0);
            let mut crossings: Vec<Crossing> = d1.crossings().to_vec();
            crossings.extend(d2.crossings().iter().map(|c| Crossing {
                id: c.id + id_offset,
                sign: c.sign,
            }));
            let mut edges: Vec<Edge> = Vec::new();
            for (i, e) in d1.edges().iter().enumerate() {
                if i != e1 {
                    edges.push(*e);
                }
            }
            for (i, e) in d2.edges().iter().enumerate() {
                if i != e2 {
                    edges.push(Edge {
                        tail: e.tail + offset_dart,
                        head: e.head + offset_dart,
                    });
                }
            }
            let a = d1.edges()[e1];
            let b = d2.edges()[e2];
            let neck1 = edges.len();
            edges.push(Edge {
                tail: a.tail,
                head: b.head + offset_dart,
            });
            let neck2 = edges.len();
            edges.push(Edge {
                tail: b.tail + offset_dart,
                head: a.head,
            });
            let bare_offset = d1.bare_components().len();
            let mut circles = d1.circles().to_vec();
            circles.extend(d2.circles().iter().map(|c| match c {
                CirclePlacement::OnBare(b) => CirclePlacement::OnBare(b + bare_offset),
                CirclePlacement::InFace(_) => {
                    // Face ids are rebuilt below; in-face circles cannot be
                    // carried through a sum soundly.
                    CirclePlacement::OnBare(usize::MAX)
                }
            }));
            if circles
                .iter()
                .any(|c| matches!(c, CirclePlacement::OnBare(b) if *b == usize::MAX))
            {
                return Err(PrimenessError::BadStrandRef);
            }
            let mut bare: Vec<BareComponent> = d1.bare_components().to_vec();
            bare.extend(d2.bare_components().iter().copied());
            let sum = SurfaceDiagram::from_parts(crossings, edges, circles, bare)
                .expect("sum of valid diagrams is valid");
            Ok((sum, Some((neck1, neck2))))
        }
        (StrandRef::Edge(_), StrandRef::Circle(ci)) => {
            if ci >= d2.circles().len() {
                return Err(PrimenessError::BadStrandRef);
            }
            // Absorbing a circle into an edge changes nothing on the other
            // side; the result is d1 together with whatever else d2 carries.
            let leftover = remove_circle(d2, ci);
            Ok((merge_disjoint(d1, &leftover), None))
        }
        (StrandRef::Circle(ci), StrandRef::Edge(_)) => {
            if ci >= d1.circles().len() {
                return Err(PrimenessError::BadStrandRef);
            }
            let leftover = remove_circle(d1, ci);
            Ok((merge_disjoint(d2, &leftover), None))
        }
        (StrandRef::Circle(c1), StrandRef::Circle(c2)) => {
            if c1 >= d1.circles().len() || c2 >= d2.circles().len() {
                return Err(PrimenessError::BadStrandRef);
            }
            let left = remove_circle(d1, c1);
            let right = remove_circle(d2, c2);
            let mut merged = merge_disjoint(&left, &right);
            // The two circles fuse into one circle on a fresh sphere.
            merged = add_sphere_circle(&merged);
            Ok((merged, None))
        }
    }
}

fn remove_circle(d: &SurfaceDiagram, ci: usize) -> SurfaceDiagram {
    let mut circles = Vec::new();
    let removed = d.circles()[ci];
    for (i, c) in d.circles().iter().enumerate() {
        if i != ci {
            circles.push(*c);
        }
    }
    // Drop the bare sphere if the removed circle was alone on it.
    let mut bare: Vec<BareComponent> = d.bare_components().to_vec();
    if let CirclePlacement::OnBare(b) = removed {
        let others = circles
            .iter()
            .filter(|c| matches!(c, CirclePlacement::OnBare(x) if *x == b))
            .count();
        if others == 0 && bare[b].genus == 0 {
            bare.remove(b);
            circles = circles
                .iter()
                .map(|c| match c {
                    CirclePlacement::OnBare(x) if *x > b => CirclePlacement::OnBare(x - 1),
                    other => *other,
                })
                .collect();
        }
    }
    SurfaceDiagram::from_parts(d.crossings().to_vec(), d.edges().to_vec(), circles, bare)
        .expect("removal keeps the map valid")
}

fn merge_disjoint(d1: &SurfaceDiagram, d2: &SurfaceDiagram) -> SurfaceDiagram {
    let offset_dart = d1.n_darts();
    let id_offset: u32 = d1.crossings().iter().map(|c| c.id).max().unwrap_or(0);
    let mut crossings = d1.crossings().to_vec();
    crossings.extend(d2.crossings().iter().map(|c| Crossing {
        id: c.id + id_offset,
        sign: c.sign,
    }));
    let mut edges = d1.edges().to_vec();
    edges.extend(d2.edges().iter().map(|e| Edge {
        tail: e.tail + offset_dart,
        head: e.head + offset_dart,
    }));
    let bare_offset = d1.bare_components().len();
    let mut circles = d1.circles().to_vec();
    circles.extend(d2.circles().iter().map(|c| match c {
        CirclePlacement::OnBare(b) => CirclePlacement::OnBare(b + bare_offset),
        CirclePlacement::InFace(f) => CirclePlacement::InFace(*f),
    }));
    let mut bare = d1.bare_components().to_vec();
    bare.extend(d2.bare_components().iter().copied());
    SurfaceDiagram::from_parts(crossings, edges, circles, bare).expect("disjoint merge is valid")
}

fn add_sphere_circle(d: &SurfaceDiagram) -> SurfaceDiagram {
    let mut circles = d.circles().to_vec();
    let mut bare = d.bare_components().to_vec();
    circles.push(CirclePlacement::OnBare(bare.len()));
    bare.push(BareComponent { genus: 0 });
    SurfaceDiagram::from_parts(d.crossings().to_vec(), d.edges().to_vec(), circles, bare)
        .expect("adding a sphere circle is valid")
}

/// Link-level verdicts for fully alternating diagrams: the diagram verdicts
/// promote to the represented link when no removable nugatory crossing is
/// present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkLevelReport {
    pub nonsplit: bool,
    pub prime: bool,
    pub weakly_prime: bool,
}

pub fn link_level_classify(d: &SurfaceDiagram) -> Result<LinkLevelReport, PrimenessError> {
    if !d.is_cellularly_embedded() {
        return Err(PrimenessError::NotCellular);
    }
    if !d.is_alternating() {
        return Err(PrimenessError::NotAlternating);
    }
    if find_nugatory(d).iter().any(|n| n.removable) {
        return Err(PrimenessError::HasRemovableNugatory);
    }
    Ok(LinkLevelReport {
        nonsplit: d.is_connected_diagram(),
        prime: is_prime_diagram(d).holds,
        weakly_prime: is_weakly_prime_diagram(d).holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::parse_gauss;
    use crate::surface_map::realize_gauss;

    fn diag(text: &str) -> SurfaceDiagram {
        realize_gauss(&parse_gauss(text).unwrap()).unwrap()
    }

    #[test]
    fn trefoil_curves_are_six_slivers() {
        let d = diag("O1+U2+O3+U1+O2+U3+");
        let curves = enumerate_two_point_curves(&d).unwrap();
        assert_eq!(curves.len(), 6);
        for c in &curves {
            assert_eq!(c.darts.0, c.darts.1);
            let class = classify_curve(&d, c);
            assert!(class.separating);
            let sides = class.sides.unwrap();
            assert!(side_is_trivial(&sides[0]) || side_is_trivial(&sides[1]));
            assert!(sides[0].is_disk && sides[1].is_disk);
            assert_eq!(sides[0].crossings + sides[1].crossings, 3);
        }
    }

    #[test]
    fn trefoil_is_prime_weakly_strongly() {
        let d = diag("O1+U2+O3+U1+O2+U3+");
        assert!(is_prime_diagram(&d).holds);
        assert!(is_weakly_prime_diagram(&d).holds);
        assert!(is_strongly_prime_diagram(&d).holds);
        assert!(find_nugatory(&d).is_empty());
    }

    #[test]
    fn virtual_trefoil_has_nonseparating_curve() {
        let d = diag("O1+O2+U1+U2+");
        let curves = enumerate_two_point_curves(&d).unwrap();
        assert!(curves.iter().any(|c| !classify_curve(&d, c).separating));
        assert!(is_prime_diagram(&d).holds);
        assert!(is_weakly_prime_diagram(&d).holds);
        let strong = is_strongly_prime_diagram(&d);
        assert!(!strong.holds);
    }

    #[test]
    fn zero_crossing_unknot_has_no_curves() {
        let d = diag("o");
        assert_eq!(enumerate_two_point_curves(&d).unwrap(), vec![]);
        assert!(is_strongly_prime_diagram(&d).holds);
        assert!(is_prime_diagram(&d).holds);
    }

    #[test]
    fn kink_curves_and_nugatory() {
        let d = diag("O1+U1+");
        let curves = enumerate_two_point_curves(&d).unwrap();
        assert_eq!(curves.len(), 2);
        assert!(is_prime_diagram(&d).holds);
        assert!(is_weakly_prime_diagram(&d).holds);
        let nug = find_nugatory(&d);
        assert_eq!(nug.len(), 1);
        assert_eq!(nug[0].crossing_id, 1);
        assert!(nug[0].removable);
    }

    #[test]
    fn virtual_hopf_nugatory_not_removable() {
        let d = diag("O1+;U1+");
        let nug = find_nugatory(&d);
        assert_eq!(nug.len(), 1);
        assert!(!nug[0].removable);
    }

    #[test]
    fn connect_sum_of_trefoils_detected() {
        let t = diag("O1+U2+O3+U1+O2+U3+");
        let (sum, neck) = connect_sum(&t, &t, StrandRef::Edge(0), StrandRef::Edge(0)).unwrap();
        assert_eq!(sum.genus(), vec![0]);
        assert_eq!(sum.crossings().len(), 6);
        let verdict = is_prime_diagram(&sum);
        assert!(!verdict.holds);
        match verdict.certificate {
            Some(Certificate::TwoPointCurve { curve }) => {
                let sides = curve.sides.unwrap();
                assert_eq!(sides[0].crossings, 3);
                assert_eq!(sides[1].crossings, 3);
            }
            other => panic!("expected curve certificate, got {:?}", other),
        }
        assert!(neck.is_some());
        assert!(!is_weakly_prime_diagram(&sum).holds);
    }

    #[test]
    fn sum_with_unknot_is_identity() {
        let t = diag("O1+U2+O3+U1+O2+U3+");
        let unknot = diag("o");
        let (sum, _) = connect_sum(&t, &unknot, StrandRef::Edge(0), StrandRef::Circle(0)).unwrap();
        assert_eq!(sum.canonical_signature(), t.canonical_signature());
    }

    #[test]
    fn trivial_two_circle_shapes_are_prime() {
        let two_spheres = diag("o;o");
        assert!(is_prime_diagram(&two_spheres).holds);
        // Two circles on one sphere.
        let one_sphere = SurfaceDiagram::from_parts(
            vec![],
            vec![],
            vec![CirclePlacement::OnBare(0), CirclePlacement::OnBare(0)],
            vec![BareComponent { genus: 0 }],
        )
        .unwrap();
        assert!(is_prime_diagram(&one_sphere).holds);
        // Three circles are not covered by the exceptions.
        let three = diag("o;o;o");
        assert!(!is_prime_diagram(&three).holds);
    }

    #[test]
    fn split_union_is_not_prime() {
        let d = diag("O1+U2+O3+U1+O2+U3+;O4+U5+O6+U4+O5+U6+");
        let v = is_prime_diagram(&d);
        assert!(!v.holds);
        assert!(matches!(v.certificate, Some(Certificate::SplitPartition { .. })));
    }

    #[test]
    fn implication_chain_on_connected_corpus() {
        for text in [
            "O1+U2+O3+U1+O2+U3+",
            "O1+O2+U1+U2+",
            "O1+U1+",
            "O1+U2+U1+O2+",
            "O1+U1+O2+U2+",
        ] {
            let d = diag(text);
            let strong = is_strongly_prime_diagram(&d).holds;
            let prime = is_prime_diagram(&d).holds;
            let weak = is_weakly_prime_diagram(&d).holds;
            assert!(!strong || prime, "strong => prime failed on {text}");
            assert!(!prime || weak, "prime => weak failed on {text}");
        }
    }

    #[test]
    fn link_level_trefoil() {
        let d = diag("O1+U2+O3+U1+O2+U3+");
        let report = link_level_classify(&d).unwrap();
        assert!(report.nonsplit && report.prime && report.weakly_prime);
    }

    #[test]
    fn link_level_refuses_kink() {
        let d = diag("O1+U1+");
        assert_eq!(
            link_level_classify(&d),
            Err(PrimenessError::HasRemovableNugatory)
        );
    }

    #[test]
    fn link_level_rejects_nonalternating() {
        let d = diag("O1+O2+U1+U2+");
        assert_eq!(link_level_classify(&d), Err(PrimenessError::NotAlternating));
    }
}
