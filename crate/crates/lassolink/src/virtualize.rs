//! Conversions between surface diagrams with acceptable lassos and planar
//! virtual diagrams, lassos for arbitrary virtual diagrams, and the planar
//! criteria for splitness, primeness and nugatory crossings.
//!
//! The forward construction copies the lasso interior verbatim into a disk
//! and routes the exterior arcs through the complementary disk as
//! semicircles over an axis carrying the boundary word; interleaved arcs
//! cross exactly once and those crossings are the virtual crossings.

use crate::codes::{ParseError, PdCode, PdVertex, PdVertexKind, Sign};
use crate::lasso::{boundary_word, is_acceptable, LassoError, SurfaceLasso};
use crate::primeness::{
    classify_curve_cut, corner_cut, enumerate_two_point_curves, find_nugatory,
    is_prime_diagram, is_weakly_prime_diagram, PrimenessError,
};
use crate::surface_map::{
    from_virtual, record_roles, Crossing, Dart, Edge, MapError, PdLabelEnd, SurfaceDiagram,
    VirtualResolution,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VirtualError {
    #[error("the lasso is not acceptable")]
    NotAcceptable,
    #[error("the classical part must be alternating")]
    NotAlternating,
    #[error("crossingless circle components are not supported here")]
    UnsupportedCircles,
    #[error("boundary word does not match the diagram: {0}")]
    BadLasso(&'static str),
    #[error("exterior arc routing degenerated; diagram too symmetric for the jitter budget")]
    Degenerate,
    #[error(transparent)]
    Lasso(#[from] LassoError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Primeness(#[from] PrimenessError),
}

/// One boundary crossing of a virtual lasso: the `index`-th crossing along
/// the named edge label, counted from the label's tail end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MarkRef {
    pub label: u32,
    pub index: usize,
}

/// A lasso for a virtual diagram: a disk containing every classical crossing
/// and no virtual one, encoded by the wholly interior labels and the cyclic
/// sequence of label crossings along its boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualLasso {
    pub classical_crossings: Vec<u32>,
    pub interior_labels: BTreeSet<u32>,
    pub boundary_word: Vec<MarkRef>,
}

/// The four acceptability conditions for a virtual lasso.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualAcceptability {
    pub core_connected: bool,
    pub no_parallel_crossingless_arc: bool,
    pub no_self_intersecting_arc: bool,
    pub no_double_intersection: bool,
}

impl VirtualAcceptability {
    pub fn acceptable(&self) -> bool {
        self.core_connected
            && self.no_parallel_crossingless_arc
            && self.no_self_intersecting_arc
            && self.no_double_intersection
    }
}

/// Exact fraction over i128 for semicircle intersection abscissas.
#[derive(Debug, Clone, Copy)]
struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    fn new(num: i128, den: i128) -> Frac {
        debug_assert!(den != 0);
        if den < 0 {
            Frac { num: -num, den: -den }
        } else {
            Frac { num, den }
        }
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Frac {}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Convert a surface diagram with an acceptable lasso into a planar PD code
/// and the corresponding acceptable virtual lasso. The classical tangle is
/// the lasso interior copied verbatim; exterior arcs become semicircular
/// chords over the boundary word, crossing once per interleaved pair.
pub fn to_virtual(
    d: &SurfaceDiagram,
    x: &SurfaceLasso,
) -> Result<(PdCode, VirtualLasso), VirtualError> {
    if d.crossings().is_empty() && d.circles().len() == 1 && d.bare_components().len() == 1 {
        let pd = PdCode {
            vertices: vec![],
            joins: vec![],
            circles: 1,
        };
        return Ok((
            pd,
            VirtualLasso {
                classical_crossings: vec![],
                interior_labels: BTreeSet::new(),
                boundary_word: vec![],
            },
        ));
    }
    if !is_acceptable(d, x)?.acceptable() {
        return Err(VirtualError::NotAcceptable);
    }
    let mut word = boundary_word(d, x)?;
    if let Some(min_pos) = word.iter().enumerate().min_by_key(|(_, &m)| m).map(|(i, _)| i) {
        word.rotate_left(min_pos);
    }
    let n = word.len();
    let exterior: Vec<usize> = {
        let interior = &x.interior_edges;
        (0..d.edges().len()).filter(|e| !interior.contains(e)).collect()
    };
    debug_assert_eq!(2 * exterior.len(), n);

    // Label assignment: interior edges first, then exterior segments.
    let mut label_of_interior: BTreeMap<usize, u32> = BTreeMap::new();
    let mut next_label = 1u32;
    for &e in x.interior_edges.iter() {
        label_of_interior.insert(e, next_label);
        next_label += 1;
    }

    if n == 0 {
        // Everything interior: a classical diagram.
        let vertices = classical_records(d, |dart| label_of_interior[&d.edge_of(dart)]);
        let pd = PdCode {
            vertices,
            joins: vec![],
            circles: 0,
        };
        pd.validate()?;
        let lasso = VirtualLasso {
            classical_crossings: d.crossings().iter().map(|c| c.id).collect(),
            interior_labels: label_of_interior.values().copied().collect(),
            boundary_word: vec![],
        };
        return Ok((pd, lasso));
    }

    // Axis coordinates: reversed word order so the outer disk glues with the
    // opposite boundary orientation.
    let word_pos_of_dart: BTreeMap<Dart, usize> =
        word.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let routed = route_exterior(d, &word, &exterior)?;

    // Chain data per exterior edge: virtual crossing ids in tail-to-head
    // order, plus segment labels.
    struct Chain {
        labels: Vec<u32>,
        crossings: Vec<usize>,
    }
    let mut chains: BTreeMap<usize, Chain> = BTreeMap::new();
    for &e in &exterior {
        let crossings = routed.chain_crossings[&e].clone();
        let mut labels = Vec::with_capacity(crossings.len() + 1);
        for _ in 0..=crossings.len() {
            labels.push(next_label);
            next_label += 1;
        }
        chains.insert(e, Chain { labels, crossings });
    }

    let label_at = |dart: Dart| -> u32 {
        let e = d.edge_of(dart);
        match label_of_interior.get(&e) {
            Some(&l) => l,
            None => {
                let chain = &chains[&e];
                if d.edges()[e].tail == dart {
                    chain.labels[0]
                } else {
                    *chain.labels.last().unwrap()
                }
            }
        }
    };

    let mut vertices = classical_records(d, label_at);
    for vc in &routed.crossings {
        // Four branch labels in counterclockwise order on the glued sphere.
        let seg = |e: usize, side: usize| -> u32 {
            let chain = &chains[&e];
            let pos = vc.chain_pos[&e];
            // side 0: toward +x; side 1: toward -x.
            let ascending = routed.chain_ascending[&e];
            let forward = (side == 0) == ascending;
            if forward {
                chain.labels[pos + 1]
            } else {
                chain.labels[pos]
            }
        };
        let (e1, e2) = (vc.small_center, vc.large_center);
        vertices.push(PdVertex {
            kind: PdVertexKind::Virtual,
            labels: [seg(e1, 0), seg(e2, 0), seg(e1, 1), seg(e2, 1)],
        });
    }
    let pd = PdCode {
        vertices,
        joins: vec![],
        circles: 0,
    };
    pd.validate()?;

    let mut boundary = Vec::with_capacity(n);
    for &m in &word {
        let e = d.edge_of(m);
        let chain = &chains[&e];
        if d.edges()[e].tail == m {
            boundary.push(MarkRef {
                label: chain.labels[0],
                index: 0,
            });
        } else {
            let last = *chain.labels.last().unwrap();
            // A chain with no virtual crossings carries both marks on one
            // label; the head-side mark is the second along it.
            let index = if chain.labels.len() == 1 { 1 } else { 0 };
            boundary.push(MarkRef { label: last, index });
        }
    }
    let _ = word_pos_of_dart;
    let lasso = VirtualLasso {
        classical_crossings: d.crossings().iter().map(|c| c.id).collect(),
        interior_labels: label_of_interior.values().copied().collect(),
        boundary_word: boundary,
    };
    Ok((pd, lasso))
}

fn classical_records(d: &SurfaceDiagram, label_at: impl Fn(Dart) -> u32) -> Vec<PdVertex> {
    (0..d.crossings().len())
        .map(|c| PdVertex {
            kind: PdVertexKind::Classical {
                sign: d.crossings()[c].sign,
                over_first: true,
            },
            labels: [
                label_at(4 * c),
                label_at(4 * c + 1),
                label_at(4 * c + 2),
                label_at(4 * c + 3),
            ],
        })
        .collect()
}

struct RoutedCrossing {
    /// Exterior edge whose semicircle has the smaller center.
    small_center: usize,
    large_center: usize,
    /// Position of this crossing along each chain, in tail-to-head order.
    chain_pos: BTreeMap<usize, usize>,
}

struct Routing {
    crossings: Vec<RoutedCrossing>,
    chain_crossings: BTreeMap<usize, Vec<usize>>,
    chain_ascending: BTreeMap<usize, bool>,
}

/// Route the exterior arcs as semicircles over integer axis positions,
/// retrying with jitter until no two crossings on a chord coincide.
fn route_exterior(
    d: &SurfaceDiagram,
    word: &[Dart],
    exterior: &[usize],
) -> Result<Routing, VirtualError> {
    let n = word.len();
    'attempt: for attempt in 0..64i128 {
        let coord: Vec<i128> = (0..n)
            .map(|w| {
                let base = (n - 1 - w) as i128 * 64;
                let jitter = (attempt * ((w * w + w + 1) as i128)).rem_euclid(53);
                base + jitter
            })
            .collect();
        let pos_of: BTreeMap<Dart, usize> =
            word.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        // Chord per exterior edge: (lo, hi) coordinates, and whether the
        // tail mark sits at the lower coordinate.
        let mut chord: BTreeMap<usize, (i128, i128, bool)> = BTreeMap::new();
        for &e in exterior {
            let t = coord[pos_of[&d.edges()[e].tail]];
            let h = coord[pos_of[&d.edges()[e].head]];
            chord.insert(e, (t.min(h), t.max(h), t < h));
        }
        // Crossings: interleaved chord pairs.
        struct Raw {
            x: Frac,
            small: usize,
            large: usize,
        }
        let mut raw: Vec<Raw> = Vec::new();
        for (i, &e1) in exterior.iter().enumerate() {
            for &e2 in exterior.iter().skip(i + 1) {
                let (a1, b1, _) = chord[&e1];
                let (a2, b2, _) = chord[&e2];
                let (lo, hi) = if a1 < a2 { (e1, e2) } else { (e2, e1) };
                let (la, lb, _) = chord[&lo];
                let (ha, hb, _) = chord[&hi];
                if !(la < ha && ha < lb && lb < hb) {
                    continue;
                }
                let x = Frac::new(la * lb - ha * hb, (la + lb) - (ha + hb));
                let (small, large) = if la + lb < ha + hb { (lo, hi) } else { (hi, lo) };
                raw.push(Raw { x, small, large });
            }
        }
        // Sort crossings along each chord by abscissa; coincident abscissas
        // on one chord mean a concurrency, so re-jitter.
        let mut per_chain: BTreeMap<usize, Vec<(Frac, usize)>> = BTreeMap::new();
        for (k, r) in raw.iter().enumerate() {
            per_chain.entry(r.small).or_default().push((r.x, k));
            per_chain.entry(r.large).or_default().push((r.x, k));
        }
        for list in per_chain.values_mut() {
            list.sort();
            for w in list.windows(2) {
                if w[0].0 == w[1].0 {
                    continue 'attempt;
                }
            }
        }
        let mut crossings: Vec<RoutedCrossing> = raw
            .iter()
            .map(|r| RoutedCrossing {
                small_center: r.small,
                large_center: r.large,
                chain_pos: BTreeMap::new(),
            })
            .collect();
        let mut chain_crossings: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut chain_ascending: BTreeMap<usize, bool> = BTreeMap::new();
        for &e in exterior {
            let ascending = chord[&e].2;
            chain_ascending.insert(e, ascending);
            let mut along: Vec<(Frac, usize)> = per_chain.remove(&e).unwrap_or_default();
            along.sort();
            if !ascending {
                along.reverse();
            }
            let ids: Vec<usize> = along.iter().map(|&(_, k)| k).collect();
            for (pos, &k) in ids.iter().enumerate() {
                crossings[k].chain_pos.insert(e, pos);
            }
            chain_crossings.insert(e, ids);
        }
        return Ok(Routing {
            crossings,
            chain_crossings,
            chain_ascending,
        });
    }
    Err(VirtualError::Degenerate)
}

/// The full planar map of a PD code: virtual vertices become 4-valent map
/// vertices with synthesized slot layouts, joins are smoothed away.
pub(crate) struct PlanarMap {
    pub map: SurfaceDiagram,
    /// Per map crossing: true when it came from a virtual PD vertex.
    pub is_virtual: Vec<bool>,
    /// Labels along each map edge in tail-to-head order.
    pub chain_of_edge: Vec<Vec<u32>>,
    pub circles: usize,
}

pub(crate) fn planar_map_of_pd(pd: &PdCode) -> Result<PlanarMap, VirtualError> {
    pd.validate()?;
    let res = VirtualResolution::analyze(pd)?;
    let n_cl = res.classical_index.len();
    let label_idx: BTreeMap<u32, usize> = res
        .labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i))
        .collect();
    let ends_of = |li: usize| res.ends[li];
    let is_tail_end = |li: usize, which: usize| -> bool { (which == 0) == res.orient[li] };

    // Slot layout for virtual vertices: rotate so slot 0 carries an
    // out-going end, and pick the sign matching the other strand.
    let mut crossings: Vec<Crossing> = res.crossings.clone();
    let mut is_virtual = vec![false; n_cl];
    let mut vslot: Vec<[usize; 4]> = Vec::new();
    for (vk, &vi) in res.virtual_index.iter().enumerate() {
        let v = &pd.vertices[vi];
        let out_at = |p: usize| -> bool {
            let li = label_idx[&v.labels[p]];
            let end = PdLabelEnd::Virtual { v: vk, position: p };
            let which = if ends_of(li)[0] == end { 0 } else { 1 };
            is_tail_end(li, which)
        };
        let r = (0..4)
            .find(|&p| out_at(p))
            .expect("oriented strands leave every vertex");
        let sign = if out_at((r + 1) % 4) {
            Sign::Positive
        } else {
            Sign::Negative
        };
        let mut slots = [0usize; 4];
        for (p, slot) in slots.iter_mut().enumerate() {
            *slot = (p + 4 - r) % 4;
        }
        vslot.push(slots);
        is_virtual.push(true);
        crossings.push(Crossing {
            id: (n_cl + vk + 1) as u32,
            sign,
        });
    }

    // Map a label end to (crossing index, slot).
    let end_to_dart = |end: PdLabelEnd| -> Option<Dart> {
        match end {
            PdLabelEnd::Classical { c, position } => {
                let vi = res.classical_index[c];
                let (sign, over_first) = match pd.vertices[vi].kind {
                    PdVertexKind::Classical { sign, over_first } => (sign, over_first),
                    PdVertexKind::Virtual => unreachable!(),
                };
                let slot = record_roles(sign, over_first)[position].canonical_slot(sign);
                Some(4 * c + slot)
            }
            PdLabelEnd::Virtual { v, position } => Some(4 * (n_cl + v) + vslot[v][position]),
            PdLabelEnd::Join { .. } => None,
        }
    };

    // Walk label chains through joins, from vertex ends to vertex ends.
    let nl = res.labels.len();
    let mut used = vec![false; nl];
    let mut edges: Vec<Edge> = Vec::new();
    let mut chain_of_edge: Vec<Vec<u32>> = Vec::new();
    for li in 0..nl {
        if used[li] {
            continue;
        }
        let tail_end = ends_of(li)[if res.orient[li] { 0 } else { 1 }];
        let tail_dart = match end_to_dart(tail_end) {
            Some(dart) => dart,
            None => continue,
        };
        let mut chain = Vec::new();
        let mut cur = li;
        let head_dart = loop {
            used[cur] = true;
            chain.push(res.labels[cur]);
            let head_end = ends_of(cur)[if res.orient[cur] { 1 } else { 0 }];
            match head_end {
                PdLabelEnd::Join { j, side } => {
                    let next_label = pd.joins[j][1 - side];
                    cur = label_idx[&next_label];
                }
                other => break end_to_dart(other).unwrap(),
            }
        };
        edges.push(Edge {
            tail: tail_dart,
            head: head_dart,
        });
        chain_of_edge.push(chain);
    }
    let mut circles = pd.circles;
    for li in 0..nl {
        if !used[li] {
            // Join-only cycle.
            let mut cur = li;
            loop {
                used[cur] = true;
                let head_end = ends_of(cur)[if res.orient[cur] { 1 } else { 0 }];
                match head_end {
                    PdLabelEnd::Join { j, side } => {
                        cur = label_idx[&pd.joins[j][1 - side]];
                    }
                    _ => unreachable!("chains with vertex ends were consumed"),
                }
                if cur == li {
                    break;
                }
            }
            circles += 1;
        }
    }
    let map = SurfaceDiagram::from_parts(crossings, edges, vec![], vec![])?;
    Ok(PlanarMap {
        map,
        is_virtual,
        chain_of_edge,
        circles,
    })
}

/// Interpretation of a virtual lasso against the planar map: mark counts and
/// inside/outside statuses.
struct LassoView {
    /// Marks per map edge, positioned along the chain (piece index).
    marks_per_edge: Vec<usize>,
    /// Whole map edges lying inside the disk.
    inside_whole: BTreeSet<usize>,
    /// Whole map edges lying outside the disk.
    outside_whole: BTreeSet<usize>,
    /// Word position of each mark, keyed by (edge, mark position along it).
    word_pos: BTreeMap<(usize, usize), usize>,
    n_marks: usize,
}

fn lasso_view(pm: &PlanarMap, x: &VirtualLasso) -> Result<LassoView, VirtualError> {
    let d = &pm.map;
    let mut label_marks: BTreeMap<u32, usize> = BTreeMap::new();
    for m in &x.boundary_word {
        *label_marks.entry(m.label).or_insert(0) += 1;
    }
    for m in &x.boundary_word {
        if m.index >= *label_marks.get(&m.label).unwrap_or(&0) {
            return Err(VirtualError::BadLasso("mark index out of range"));
        }
    }
    // Locate each label along its chain and each mark along its edge.
    let mut edge_of_label: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for (ei, chain) in pm.chain_of_edge.iter().enumerate() {
        let mut offset = 0usize;
        for &l in chain {
            edge_of_label.insert(l, (ei, offset));
            offset += *label_marks.get(&l).unwrap_or(&0);
        }
    }
    let mut marks_per_edge = vec![0usize; d.edges().len()];
    let mut word_pos = BTreeMap::new();
    for (w, m) in x.boundary_word.iter().enumerate() {
        let (ei, offset) = *edge_of_label
            .get(&m.label)
            .ok_or(VirtualError::BadLasso("unknown label in boundary word"))?;
        marks_per_edge[ei] += 1;
        word_pos.insert((ei, offset + m.index), w);
    }
    let endpoint_classical = |dart: Dart| -> bool { !pm.is_virtual[d.crossing_of(dart)] };
    let mut inside_whole = BTreeSet::new();
    let mut outside_whole = BTreeSet::new();
    for (ei, e) in d.edges().iter().enumerate() {
        let tail_cl = endpoint_classical(e.tail);
        let head_cl = endpoint_classical(e.head);
        let marks = marks_per_edge[ei];
        if (tail_cl == head_cl) != (marks % 2 == 0) {
            return Err(VirtualError::BadLasso(
                "mark parity contradicts the edge endpoints",
            ));
        }
        if marks == 0 {
            if tail_cl {
                inside_whole.insert(ei);
            } else {
                outside_whole.insert(ei);
            }
        }
    }
    Ok(LassoView {
        marks_per_edge,
        inside_whole,
        outside_whole,
        word_pos,
        n_marks: x.boundary_word.len(),
    })
}

/// Exterior arcs of the virtual part: maximal runs of outside pieces joined
/// through virtual crossings. Endpoints are word positions; closed runs have
/// none.
struct ExteriorArc {
    endpoints: Vec<usize>,
    /// Passages through virtual crossings as (crossing, strand) pairs; each
    /// crossing carries two transversal strands indexed by slot parity.
    virtuals: BTreeSet<(usize, usize)>,
}

fn exterior_arcs(pm: &PlanarMap, view: &LassoView) -> Vec<ExteriorArc> {
    let d = &pm.map;
    // Pieces of each edge: marks + 1 in tail-to-head order; statuses
    // alternate starting from the tail endpoint kind.
    // A piece is identified by (edge, piece index).
    let piece_outside = |ei: usize, k: usize| -> bool {
        let tail_cl = !pm.is_virtual[d.crossing_of(d.edges()[ei].tail)];
        let tail_inside = tail_cl;
        if k % 2 == 0 {
            !tail_inside
        } else {
            tail_inside
        }
    };
    // Continuation across a virtual crossing from an arriving dart: the
    // strand leaves through the opposite slot.
    let opposite = |dart: Dart| -> Dart { (dart & !3) + ((dart + 2) & 3) };
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut arcs = Vec::new();
    for ei in 0..d.edges().len() {
        let npieces = view.marks_per_edge[ei] + 1;
        for k in 0..npieces {
            if seen.contains(&(ei, k)) || !piece_outside(ei, k) {
                continue;
            }
            // Trace the arc in both directions from this piece.
            let mut endpoints = Vec::new();
            let mut virtuals: BTreeSet<(usize, usize)> = BTreeSet::new();
            let mut stack = vec![(ei, k)];
            seen.insert((ei, k));
            while let Some((e, piece)) = stack.pop() {
                let npc = view.marks_per_edge[e] + 1;
                // Tail side of the piece.
                for (at_end, dart) in [
                    (piece == 0, pm.map.edges()[e].tail),
                    (piece == npc - 1, pm.map.edges()[e].head),
                ] {
                    if at_end {
                        let c = pm.map.crossing_of(dart);
                        debug_assert!(pm.is_virtual[c]);
                        virtuals.insert((c, dart % 2));
                        let (oe, opiece) = piece_at_dart(pm, view, opposite(dart));
                        if seen.insert((oe, opiece)) {
                            stack.push((oe, opiece));
                        }
                    }
                }
                if piece > 0 {
                    endpoints.push(view.word_pos[&(e, piece - 1)]);
                }
                if piece < npc - 1 {
                    endpoints.push(view.word_pos[&(e, piece)]);
                }
            }
            arcs.push(ExteriorArc {
                endpoints,
                virtuals,
            });
        }
    }
    arcs
}

/// The piece of the edge at `dart` adjacent to `dart`'s vertex.
fn piece_at_dart(pm: &PlanarMap, view: &LassoView, dart: Dart) -> (usize, usize) {
    let ei = pm.map.edge_of(dart);
    if pm.map.edges()[ei].tail == dart {
        (ei, 0)
    } else {
        (ei, view.marks_per_edge[ei])
    }
}

/// Check the four virtual-lasso acceptability conditions.
pub fn is_acceptable_virtual(
    pd: &PdCode,
    x: &VirtualLasso,
) -> Result<VirtualAcceptability, VirtualError> {
    let pm = planar_map_of_pd(pd)?;
    if pm.circles > 0 {
        return Err(VirtualError::UnsupportedCircles);
    }
    let view = lasso_view(&pm, x)?;
    // Lasso containment: every classical crossing named, no virtual inside.
    let d = &pm.map;

    // Core connectivity: classical crossings joined by wholly interior edges.
    let n_classical = pm.is_virtual.iter().filter(|v| !**v).count();
    let mut uf: Vec<usize> = (0..d.crossings().len()).collect();
    fn find(uf: &mut Vec<usize>, a: usize) -> usize {
        let mut r = a;
        while uf[r] != r {
            r = uf[r];
        }
        uf[a] = r;
        r
    }
    for &e in &view.inside_whole {
        let a = find(&mut uf, d.edges()[e].tail / 4);
        let b = find(&mut uf, d.edges()[e].head / 4);
        if a != b {
            uf[a.max(b)] = a.min(b);
        }
    }
    let classical_roots: BTreeSet<usize> = (0..d.crossings().len())
        .filter(|&c| !pm.is_virtual[c])
        .map(|c| find(&mut uf, c))
        .collect();
    let core_connected = n_classical <= 1 || classical_roots.len() == 1;

    let arcs = exterior_arcs(&pm, &view);
    let mut no_parallel_crossingless_arc = true;
    let mut no_self_intersecting_arc = true;
    let mut no_double_intersection = true;
    for arc in &arcs {
        let crossings_hit: BTreeSet<usize> = arc.virtuals.iter().map(|&(c, _)| c).collect();
        if crossings_hit.len() != arc.virtuals.len() {
            no_self_intersecting_arc = false;
        }
        if arc.virtuals.is_empty() && arc.endpoints.len() == 2 {
            let (a, b) = (arc.endpoints[0], arc.endpoints[1]);
            let n = view.n_marks;
            if n >= 2 && ((a + 1) % n == b || (b + 1) % n == a) {
                no_parallel_crossingless_arc = false;
            }
        }
    }
    for (i, a) in arcs.iter().enumerate() {
        for b in arcs.iter().skip(i + 1) {
            let ca: BTreeSet<usize> = a.virtuals.iter().map(|&(c, _)| c).collect();
            let shared = b
                .virtuals
                .iter()
                .map(|&(c, _)| c)
                .filter(|c| ca.contains(c))
                .collect::<BTreeSet<_>>()
                .len();
            if shared > 1 {
                no_double_intersection = false;
            }
        }
    }
    Ok(VirtualAcceptability {
        core_connected,
        no_parallel_crossingless_arc,
        no_self_intersecting_arc,
        no_double_intersection,
    })
}

/// Build a lasso for an arbitrary virtual diagram from a spanning tree of
/// the auxiliary graph with one node per classical crossing and one per
/// planar face. The result contains all classical crossings and no virtual
/// ones but need not be acceptable.
pub fn gamma_lasso(pd: &PdCode) -> Result<VirtualLasso, VirtualError> {
    let pm = planar_map_of_pd(pd)?;
    let d = &pm.map;
    let n_classical = pm.is_virtual.iter().filter(|v| !**v).count();
    let classical_ids: Vec<u32> = (1..=n_classical as u32).collect();
    if n_classical == 0 || d.edges().is_empty() {
        return Ok(VirtualLasso {
            classical_crossings: classical_ids,
            interior_labels: BTreeSet::new(),
            boundary_word: vec![],
        });
    }

    // Gamma nodes: classical crossings, then faces. Rotations interleave
    // corner edges and through-edges as they appear around each node.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum GEdge {
        /// Corner before slot `slot` at classical crossing `c`, leading into
        /// the face there.
        Corner { c: usize, slot: usize },
        /// Through-edge across map edge `e`.
        Through { e: usize },
    }
    let n_faces = d.faces().len();
    let node_of_face = |f: usize| n_classical + f;
    let gedge_nodes = |g: GEdge| -> (usize, usize) {
        match g {
            GEdge::Corner { c, slot } => (c, node_of_face(d.face_of(4 * c + slot))),
            GEdge::Through { e } => (
                node_of_face(d.face_of(d.edges()[e].tail)),
                node_of_face(d.face_of(d.edges()[e].head)),
            ),
        }
    };
    // Rotation at classical crossings: [germ 0, corner 1, germ 1, corner 2,
    // germ 2, corner 3, germ 3, corner 0]; germs are not Gamma edges but are
    // emitted while sweeping.
    // Rotation at faces: per walk position, corner into the visited dart's
    // crossing (when classical), then the through-edge across that dart.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    enum Item {
        Germ { e: usize, dart: Dart },
        Edge(GEdge),
    }
    let mut rotation: Vec<Vec<Item>> = vec![Vec::new(); n_classical + n_faces];
    for c in 0..d.crossings().len() {
        if pm.is_virtual[c] {
            continue;
        }
        for s in 0..4 {
            let dart = 4 * c + s;
            rotation[c].push(Item::Germ {
                e: d.edge_of(dart),
                dart,
            });
            rotation[c].push(Item::Edge(GEdge::Corner {
                c,
                slot: (s + 1) % 4,
            }));
        }
    }
    for (f, face) in d.faces().iter().enumerate() {
        for &dart in &face.walk {
            let c = d.crossing_of(dart);
            if !pm.is_virtual[c] {
                rotation[node_of_face(f)].push(Item::Edge(GEdge::Corner { c, slot: dart % 4 }));
            }
            rotation[node_of_face(f)].push(Item::Edge(GEdge::Through {
                e: d.edge_of(dart),
            }));
        }
    }

    // Spanning tree over Gamma by breadth-first search from node 0.
    let mut adj: Vec<Vec<GEdge>> = vec![Vec::new(); n_classical + n_faces];
    let mut gedges: BTreeSet<GEdge> = BTreeSet::new();
    for items in &rotation {
        for item in items {
            if let Item::Edge(g) = item {
                gedges.insert(*g);
            }
        }
    }
    for &g in &gedges {
        let (a, b) = gedge_nodes(g);
        adj[a].push(g);
        adj[b].push(g);
    }
    let mut tree: BTreeSet<GEdge> = BTreeSet::new();
    let mut visited = vec![false; n_classical + n_faces];
    visited[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        for &g in &adj[node] {
            let (a, b) = gedge_nodes(g);
            let other = if a == node { b } else { a };
            if !visited[other] {
                visited[other] = true;
                tree.insert(g);
                queue.push_back(other);
            }
        }
    }
    if visited.iter().any(|v| !v) {
        return Err(VirtualError::BadLasso("auxiliary graph is disconnected"));
    }

    // Boundary walk of the tree neighborhood: Euler tour over directed tree
    // edges, sweeping rotations and recording germ and through crossings.
    let mut marks_so_far: BTreeMap<usize, usize> = BTreeMap::new();
    let mut raw_word: Vec<(usize, Dart, bool)> = Vec::new(); // (edge, dart-or-tail, is_germ)
    {
        // Start at node 0, just before its first rotation item.
        let start_node = 0usize;
        let mut stack_guard = 0usize;
        let mut pos_state: Vec<usize> = vec![0; n_classical + n_faces];
        let _ = &mut pos_state;
        // Recursive Euler tour via explicit traversal.
        fn tour(
            node: usize,
            enter_index: Option<usize>,
            rotation: &Vec<Vec<Item>>,
            tree: &BTreeSet<GEdge>,
            gedge_nodes: &dyn Fn(GEdge) -> (usize, usize),
            raw_word: &mut Vec<(usize, Dart, bool)>,
            guard: &mut usize,
        ) {
            *guard += 1;
            assert!(*guard < 1_000_000, "tour runaway");
            let items = &rotation[node];
            let len = items.len();
            let start = enter_index.map(|i| i + 1).unwrap_or(0);
            for k in 0..len {
                let idx = (start + k) % len;
                if enter_index == Some(idx) {
                    break;
                }
                match items[idx] {
                    Item::Germ { e, dart } => raw_word.push((e, dart, true)),
                    Item::Edge(g) => {
                        if tree.contains(&g) {
                            let (a, b) = gedge_nodes(g);
                            let other = if a == node { b } else { a };
                            if let GEdge::Through { e } = g {
                                raw_word.push((e, usize::MAX, false));
                            }
                            // Find the matching rotation index at the other
                            // node.
                            let other_idx = rotation[other]
                                .iter()
                                .position(|it| *it == Item::Edge(g))
                                .expect("tree edge present in rotation");
                            tour(
                                other,
                                Some(other_idx),
                                rotation,
                                tree,
                                gedge_nodes,
                                raw_word,
                                guard,
                            );
                            if let GEdge::Through { e } = g {
                                raw_word.push((e, usize::MAX, false));
                            }
                        }
                    }
                }
                if enter_index.is_none() && k == len - 1 {
                    break;
                }
            }
        }
        tour(
            start_node,
            None,
            &rotation,
            &tree,
            &|g| gedge_nodes(g),
            &mut raw_word,
            &mut stack_guard,
        );
    }

    // Convert the raw crossings into mark references along labels. Germ
    // crossings sit at the ends of the chain; through-crossings pair up in
    // the middle.
    // The crossing order along each edge: tail germ, through pair, head
    // germ. With one through-edge per map edge the positions are fixed.
    let mut word = Vec::with_capacity(raw_word.len());
    for &(e, dart, is_germ) in &raw_word {
        let chain = &pm.chain_of_edge[e];
        let tail_cl = !pm.is_virtual[d.crossing_of(d.edges()[e].tail)];
        let head_cl = !pm.is_virtual[d.crossing_of(d.edges()[e].head)];
        let through_here = tree.contains(&GEdge::Through { e });
        let mark_positions: usize =
            usize::from(tail_cl) + usize::from(head_cl) + if through_here { 2 } else { 0 };
        let _ = mark_positions;
        // Position along the edge.
        let pos = if is_germ {
            if dart == d.edges()[e].tail {
                0
            } else {
                usize::from(tail_cl) + if through_here { 2 } else { 0 }
            }
        } else {
            let k = marks_so_far.entry(e).or_insert(0);
            let through_index = usize::from(tail_cl) + *k;
            *k += 1;
            through_index
        };
        // The edge is a single chain label when the PD has no joins on it;
        // find the label and local index for the mark.
        let (label, index) = mark_on_chain(pd, chain, pos);
        word.push(MarkRef { label, index });
    }
    Ok(VirtualLasso {
        classical_crossings: classical_ids,
        interior_labels: BTreeSet::new(),
        boundary_word: word,
    })
}

/// Distribute `pos`-th mark of an edge onto the labels of its chain. Marks
/// are spread evenly: with joins present the exact label is immaterial as
/// long as the bookkeeping is consistent, so all marks go to the chain
/// labels in order.
fn mark_on_chain(_pd: &PdCode, chain: &[u32], pos: usize) -> (u32, usize) {
    // Place every mark on the chain by cycling through the labels: mark k
    // goes to label k % len at local index k / len. For join-free chains
    // (every PD this library emits) the chain has one label and the local
    // index equals pos.
    if chain.len() == 1 {
        return (chain[0], pos);
    }
    let l = chain[pos % chain.len()];
    (l, pos / chain.len())
}

/// Verdicts of the planar lasso criteria.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualClassification {
    pub prime: bool,
    pub weakly_prime: bool,
    /// Nugatory crossings of the virtual diagram, which by definition are
    /// the nugatory crossings of the corresponding surface diagram.
    pub nugatory: Vec<u32>,
    /// Crossings incident to fewer than four distinct planar regions. This
    /// can be strictly smaller than `nugatory`: an essential nugatory circle
    /// on the surface has no planar counterpart through the lasso.
    pub obviously_nugatory: Vec<u32>,
    /// Removable nugatory crossings, decided by the planar criterion: a
    /// disk inside the lasso whose boundary meets the diagram in the
    /// crossing alone.
    pub removable_nugatory: Vec<u32>,
    /// True when the diagram had no virtual crossing and the verdicts were
    /// delegated to the surface-level checks.
    pub used_fallback: bool,
}

/// Classify an alternating virtual diagram through its acceptable lasso by
/// the planar criteria: primeness from curves meeting the classical part
/// twice, weak primeness from disks inside the lasso, and nugatory
/// crossings from corner curves.
pub fn virtual_classify(
    pd: &PdCode,
    x: &VirtualLasso,
) -> Result<VirtualClassification, VirtualError> {
    let surface = from_virtual(pd)?;
    if !surface.is_alternating() {
        return Err(VirtualError::NotAlternating);
    }
    let surface_nuggets = find_nugatory(&surface);
    let nugatory: Vec<u32> = surface_nuggets.iter().map(|n| n.crossing_id).collect();
    if pd.virtual_count() == 0 {
        return Ok(VirtualClassification {
            prime: is_prime_diagram(&surface).holds,
            weakly_prime: is_weakly_prime_diagram(&surface).holds,
            obviously_nugatory: nugatory.clone(),
            nugatory,
            removable_nugatory: surface_nuggets
                .iter()
                .filter(|n| n.removable)
                .map(|n| n.crossing_id)
                .collect(),
            used_fallback: true,
        });
    }
    let acceptability = is_acceptable_virtual(pd, x)?;
    if !acceptability.acceptable() {
        return Err(VirtualError::NotAcceptable);
    }
    let pm = planar_map_of_pd(pd)?;
    if pm.circles > 0 {
        return Err(VirtualError::UnsupportedCircles);
    }
    let view = lasso_view(&pm, x)?;
    let d = &pm.map;
    let curves = enumerate_two_point_curves(d)?;

    let edge_has_x_portion = |e: usize| -> bool { !view.outside_whole.contains(&e) };
    let mut prime = true;
    let mut weakly_prime = true;
    for c in &curves {
        let (a1, a2) = c.darts;
        let (e1, e2) = (d.edge_of(a1), d.edge_of(a2));
        if !edge_has_x_portion(e1) || !edge_has_x_portion(e2) {
            continue;
        }
        let cut = classify_curve_cut(d, c);
        if cut.n_classes != 2 {
            continue;
        }
        let mut classical = [0usize; 2];
        let mut virtuals = [0usize; 2];
        for (&cr, &cls) in &cut.class_of_crossing {
            if pm.is_virtual[cr] {
                virtuals[cls] += 1;
            } else {
                classical[cls] += 1;
            }
        }
        if classical[0] >= 1 && classical[1] >= 1 {
            prime = false;
        }
        for side in 0..2 {
            if classical[side] == 0 || virtuals[side] > 0 {
                continue;
            }
            let side_inside = cut
                .class_of_edge
                .iter()
                .filter(|(_, &cls)| cls == side)
                .all(|(&e, _)| view.inside_whole.contains(&e));
            if side_inside {
                weakly_prime = false;
            }
        }
    }

    // Obviously nugatory: fewer than four distinct planar regions at the
    // crossing. Removability is decided by corner curves whose disk side
    // stays inside the lasso.
    let mut obviously_nugatory = Vec::new();
    let mut removable = Vec::new();
    for c in 0..d.crossings().len() {
        if pm.is_virtual[c] {
            continue;
        }
        let id = d.crossings()[c].id;
        let faces: BTreeSet<usize> = (0..4).map(|s| d.face_of(4 * c + s)).collect();
        if faces.len() < 4 {
            obviously_nugatory.push(id);
        }
        'corner: for j in 0..2usize {
            if let Some(cut) = corner_cut(d, c, j) {
                if cut.n_classes != 2 {
                    continue;
                }
                for side in 0..2 {
                    let (ids, segs, frags) = &cut.class_data[side];
                    let chi = ids.len() as i64 - *segs as i64 + *frags as i64;
                    if chi != 1 {
                        continue;
                    }
                    let has_virtual = cut
                        .class_of_crossing
                        .iter()
                        .any(|(&cr, &cls)| cls == side && cr != c && pm.is_virtual[cr]);
                    let side_inside = cut
                        .class_of_edge
                        .iter()
                        .filter(|(_, &cls)| cls == side)
                        .all(|(&e, _)| view.inside_whole.contains(&e));
                    if !has_virtual && side_inside {
                        removable.push(id);
                        break 'corner;
                    }
                }
            }
        }
    }
    Ok(VirtualClassification {
        prime,
        weakly_prime,
        nugatory,
        obviously_nugatory,
        removable_nugatory: removable,
        used_fallback: false,
    })
}

/// Splitness of a virtual diagram: the corresponding surface is
/// disconnected.
pub fn virtual_is_split(pd: &PdCode) -> Result<bool, VirtualError> {
    let surface = from_virtual(pd)?;
    Ok(surface.is_split_surface().0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::parse_gauss;
    use crate::lasso::{lasso_number_diagram, make_acceptable, spanning_tree_lasso};
    use crate::surface_map::realize_gauss;

    fn diag(text: &str) -> SurfaceDiagram {
        realize_gauss(&parse_gauss(text).unwrap()).unwrap()
    }

    fn acceptable_lasso(d: &SurfaceDiagram) -> SurfaceLasso {
        make_acceptable(d, &spanning_tree_lasso(d).unwrap()).unwrap()
    }

    #[test]
    fn trefoil_full_lasso_gives_classical_pd() {
        let d = diag("O1+U2+O3+U1+O2+U3+");
        let x = acceptable_lasso(&d);
        let (pd, lasso) = to_virtual(&d, &x).unwrap();
        assert_eq!(pd.virtual_count(), 0);
        assert_eq!(pd.classical_count(), 3);
        assert!(lasso.boundary_word.is_empty());
        let back = from_virtual(&pd).unwrap();
        assert_eq!(back.canonical_signature(), d.canonical_signature());
    }

    #[test]
    fn virtual_trefoil_efficient_lasso_round_trip() {
        let d = diag("O1+O2+U1+U2+");
        let x = lasso_number_diagram(&d, 20).unwrap().witness;
        let (pd, lasso) = to_virtual(&d, &x).unwrap();
        assert_eq!(pd.classical_count(), 2);
        assert!(pd.virtual_count() >= 1);
        let back = from_virtual(&pd).unwrap();
        assert_eq!(back.canonical_signature(), d.canonical_signature());
        let report = is_acceptable_virtual(&pd, &lasso).unwrap();
        assert!(report.acceptable(), "{report:?}");
    }

    #[test]
    fn kink_round_trip() {
        let d = diag("O1+U1+");
        let x = acceptable_lasso(&d);
        let (pd, _) = to_virtual(&d, &x).unwrap();
        assert_eq!(pd.virtual_count(), 0);
        let back = from_virtual(&pd).unwrap();
        assert_eq!(back.canonical_signature(), d.canonical_signature());
    }

    #[test]
    fn tree_lasso_round_trips_on_torus_diagrams() {
        for text in ["O1+O2+U1+U2+", "O1+;U1+"] {
            let d = diag(text);
            let x = acceptable_lasso(&d);
            let (pd, lasso) = to_virtual(&d, &x).unwrap();
            let back = from_virtual(&pd).unwrap();
            assert_eq!(
                back.canonical_signature(),
                d.canonical_signature(),
                "{text}"
            );
            assert!(is_acceptable_virtual(&pd, &lasso).unwrap().acceptable());
        }
    }

    #[test]
    fn gamma_lasso_on_classical_trefoil() {
        let (pd, _) = to_virtual(
            &diag("O1+U2+O3+U1+O2+U3+"),
            &acceptable_lasso(&diag("O1+U2+O3+U1+O2+U3+")),
        )
        .unwrap();
        let lasso = gamma_lasso(&pd).unwrap();
        assert_eq!(lasso.classical_crossings.len(), 3);
        // 4 germ crossings per crossing plus 2 per tree through-edge.
        assert!(lasso.boundary_word.len() >= 12);
        let view_ok = is_acceptable_virtual(&pd, &lasso);
        assert!(view_ok.is_ok());
    }

    #[test]
    fn gamma_lasso_no_classical() {
        let pd = crate::codes::parse_pd("V[1,3,2,4] P[1,3] P[2,4]").unwrap();
        let lasso = gamma_lasso(&pd).unwrap();
        assert!(lasso.classical_crossings.is_empty());
        assert!(lasso.boundary_word.is_empty());
    }

    #[test]
    fn virtual_classify_agrees_on_virtual_trefoil() {
        let d = diag("O1+O2+U1+U2+");
        let x = lasso_number_diagram(&d, 20).unwrap().witness;
        let (pd, lasso) = to_virtual(&d, &x).unwrap();
        // The virtual trefoil code is not alternating.
        assert_eq!(
            virtual_classify(&pd, &lasso),
            Err(VirtualError::NotAlternating)
        );
    }

    #[test]
    fn virtual_classify_agrees_on_alternating_genus_one() {
        // The virtual Hopf link: one crossing on the torus, alternating.
        let d = diag("O1+;U1+");
        assert!(d.is_alternating());
        let x = acceptable_lasso(&d);
        let (pd, lasso) = to_virtual(&d, &x).unwrap();
        assert!(pd.virtual_count() >= 1);
        let got = virtual_classify(&pd, &lasso).unwrap();
        assert!(!got.used_fallback);
        assert_eq!(got.prime, is_prime_diagram(&d).holds);
        assert_eq!(got.weakly_prime, is_weakly_prime_diagram(&d).holds);
        // The crossing is nugatory on the torus but its circle is essential,
        // so the planar diagram shows no obvious nugatory crossing and no
        // removable one.
        assert_eq!(got.nugatory, vec![1]);
        assert!(got.obviously_nugatory.is_empty());
        assert!(got.removable_nugatory.is_empty());
        assert!(find_nugatory(&d).iter().all(|n| !n.removable));
    }

    #[test]
    fn split_detection() {
        let d = diag("O1+U2+O3+U1+O2+U3+");
        let x = acceptable_lasso(&d);
        let (pd, _) = to_virtual(&d, &x).unwrap();
        assert!(!virtual_is_split(&pd).unwrap());
    }
}
