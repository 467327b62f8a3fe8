//! Combinatorial maps of link diagrams cellularly embedded in closed
//! orientable surfaces.
//!
//! A crossing owns four darts indexed by rotation slot 0..3 in
//! counterclockwise order. Slots (0,2) carry the over-strand and (1,3) the
//! under-strand. At a positive crossing the slots read (over-out, under-out,
//! over-in, under-in); a negative crossing swaps the roles of slots 1 and 3.
//! The edge pairing is a fixed-point-free involution on darts, and faces are
//! orbits of `sigma . theta` (next-corner rule), which are disks for every
//! diagram built by the capped ribbon construction.

use crate::codes::{GaussCode, ParseError, Pass, PdCode, PdVertexKind, Sign};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub type Dart = usize;

/// A classical crossing of the diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub id: u32,
    pub sign: Sign,
}

/// An edge of the diagram, directed along the strand orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    /// Dart at the out-slot where the strand leaves a crossing.
    pub tail: Dart,
    /// Dart at the in-slot where the strand enters the next crossing.
    pub head: Dart,
}

/// A face traced by the next-corner rule. `walk` lists the darts visited;
/// every dart of the map occurs in exactly one face walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub walk: Vec<Dart>,
}

impl Face {
    pub fn len(&self) -> usize {
        self.walk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walk.is_empty()
    }
}

/// Placement of a crossingless circle component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CirclePlacement {
    /// Embedded in a traced face of the crossing map, bounding a disk there.
    InFace(usize),
    /// Lying on bare component `0..bare.len()`, bounding a disk there.
    OnBare(usize),
}

/// A surface component carrying no crossings: a closed orientable surface of
/// the given genus, possibly decorated with crossingless circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BareComponent {
    pub genus: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("dart {0} is not paired consistently")]
    BadPairing(Dart),
    #[error("edge endpoints must join an out-slot to an in-slot (darts {0}, {1})")]
    BadSlots(Dart, Dart),
    #[error("circle placement refers to missing face or bare component")]
    BadPlacement,
    #[error("a face hosts more than one circle, which has no canonical nesting")]
    CrowdedFace,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Immutable combinatorial map of a diagram on a closed orientable surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceDiagram {
    crossings: Vec<Crossing>,
    theta: Vec<Dart>,
    edges: Vec<Edge>,
    edge_of_dart: Vec<usize>,
    faces: Vec<Face>,
    face_of_dart: Vec<usize>,
    pos_in_face: Vec<usize>,
    map_component_of_crossing: Vec<usize>,
    n_map_components: usize,
    circles: Vec<CirclePlacement>,
    bare: Vec<BareComponent>,
}

impl SurfaceDiagram {
    /// Build a diagram from crossings and directed edges. Validation covers
    /// the involution and slot-role invariants.
    pub fn from_parts(
        crossings: Vec<Crossing>,
        edges: Vec<Edge>,
        circles: Vec<CirclePlacement>,
        bare: Vec<BareComponent>,
    ) -> Result<SurfaceDiagram, MapError> {
        let n_darts = crossings.len() * 4;
        let mut theta = vec![usize::MAX; n_darts];
        let mut edge_of_dart = vec![usize::MAX; n_darts];
        for (ei, e) in edges.iter().enumerate() {
            for &d in [e.tail, e.head].iter() {
                if d >= n_darts || theta[d] != usize::MAX {
                    return Err(MapError::BadPairing(d));
                }
            }
            let tail_ok = is_out_slot(crossings[e.tail / 4].sign, e.tail % 4);
            let head_ok = is_in_slot(crossings[e.head / 4].sign, e.head % 4);
            if !tail_ok || !head_ok {
                return Err(MapError::BadSlots(e.tail, e.head));
            }
            theta[e.tail] = e.head;
            theta[e.head] = e.tail;
            edge_of_dart[e.tail] = ei;
            edge_of_dart[e.head] = ei;
        }
        if let Some(d) = theta.iter().position(|&t| t == usize::MAX) {
            return Err(MapError::BadPairing(d));
        }

        // Trace faces: orbits of sigma . theta, in ascending dart order.
        let mut faces: Vec<Face> = Vec::new();
        let mut face_of_dart = vec![usize::MAX; n_darts];
        let mut pos_in_face = vec![usize::MAX; n_darts];
        for start in 0..n_darts {
            if face_of_dart[start] != usize::MAX {
                continue;
            }
            let fi = faces.len();
            let mut walk = Vec::new();
            let mut d = start;
            while face_of_dart[d] == usize::MAX {
                face_of_dart[d] = fi;
                pos_in_face[d] = walk.len();
                walk.push(d);
                d = sigma_static(theta[d]);
            }
            faces.push(Face { walk });
        }

        // Map components over crossings connected by edges.
        let mut comp = vec![usize::MAX; crossings.len()];
        let mut n_map_components = 0usize;
        for c0 in 0..crossings.len() {
            if comp[c0] != usize::MAX {
                continue;
            }
            let mut stack = vec![c0];
            comp[c0] = n_map_components;
            while let Some(c) = stack.pop() {
                for s in 0..4 {
                    let other = theta[c * 4 + s] / 4;
                    if comp[other] == usize::MAX {
                        comp[other] = n_map_components;
                        stack.push(other);
                    }
                }
            }
            n_map_components += 1;
        }

        for placement in &circles {
            match *placement {
                CirclePlacement::InFace(f) if f >= faces.len() => {
                    return Err(MapError::BadPlacement)
                }
                CirclePlacement::OnBare(b) if b >= bare.len() => {
                    return Err(MapError::BadPlacement)
                }
                _ => {}
            }
        }
        let mut per_face: BTreeMap<usize, usize> = BTreeMap::new();
        for placement in &circles {
            if let CirclePlacement::InFace(f) = placement {
                let n = per_face.entry(*f).or_insert(0);
                *n += 1;
                if *n > 1 {
                    return Err(MapError::CrowdedFace);
                }
            }
        }

        Ok(SurfaceDiagram {
            crossings,
            theta,
            edges,
            edge_of_dart,
            faces,
            face_of_dart,
            pos_in_face,
            map_component_of_crossing: comp,
            n_map_components,
            circles,
            bare,
        })
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn circles(&self) -> &[CirclePlacement] {
        &self.circles
    }

    pub fn bare_components(&self) -> &[BareComponent] {
        &self.bare
    }

    pub fn n_darts(&self) -> usize {
        self.crossings.len() * 4
    }

    pub fn sigma(&self, d: Dart) -> Dart {
        sigma_static(d)
    }

    pub fn theta(&self, d: Dart) -> Dart {
        self.theta[d]
    }

    pub fn edge_of(&self, d: Dart) -> usize {
        self.edge_of_dart[d]
    }

    pub fn face_of(&self, d: Dart) -> usize {
        self.face_of_dart[d]
    }

    pub fn pos_in_face(&self, d: Dart) -> usize {
        self.pos_in_face[d]
    }

    pub fn crossing_of(&self, d: Dart) -> usize {
        d / 4
    }

    pub fn slot(&self, d: Dart) -> usize {
        d % 4
    }

    /// Smaller dart of an edge; traversal parameters run from this end.
    pub fn edge_canonical_dart(&self, e: usize) -> Dart {
        self.edges[e].tail.min(self.edges[e].head)
    }

    /// Number of surface components: map components plus bare components.
    pub fn n_surface_components(&self) -> usize {
        self.n_map_components + self.bare.len()
    }

    pub fn n_map_components(&self) -> usize {
        self.n_map_components
    }

    /// Surface component of a crossing.
    pub fn component_of_crossing(&self, c: usize) -> usize {
        self.map_component_of_crossing[c]
    }

    /// Surface component of a circle.
    pub fn component_of_circle(&self, ci: usize) -> usize {
        match self.circles[ci] {
            CirclePlacement::InFace(f) => {
                self.map_component_of_crossing[self.faces[f].walk[0] / 4]
            }
            CirclePlacement::OnBare(b) => self.n_map_components + b,
        }
    }

    fn component_of_face(&self, f: usize) -> usize {
        self.map_component_of_crossing[self.faces[f].walk[0] / 4]
    }

    /// Per-component census: (crossing ids, circle indices, face count,
    /// Euler characteristic, genus). Ordering: map components first in
    /// discovery order, then bare components.
    pub fn component_summaries(&self) -> Vec<ComponentSummary> {
        let n = self.n_surface_components();
        let mut out: Vec<ComponentSummary> = (0..n)
            .map(|_| ComponentSummary::default())
            .collect();
        for (c, cr) in self.crossings.iter().enumerate() {
            out[self.map_component_of_crossing[c]]
                .crossing_ids
                .push(cr.id);
        }
        for (ei, e) in self.edges.iter().enumerate() {
            let _ = ei;
            out[self.map_component_of_crossing[e.tail / 4]].n_edges += 1;
        }
        for f in 0..self.faces.len() {
            out[self.component_of_face(f)].n_faces += 1;
        }
        for ci in 0..self.circles.len() {
            let comp = self.component_of_circle(ci);
            out[comp].circle_indices.push(ci);
            // A circle bounding a disk splits one region in two.
            out[comp].n_faces += 1;
        }
        for (b, bc) in self.bare.iter().enumerate() {
            let comp = self.n_map_components + b;
            out[comp].bare_genus = Some(bc.genus);
            if out[comp].circle_indices.is_empty() {
                out[comp].n_faces = 1;
            } else {
                out[comp].n_faces += 1;
            }
        }
        for (idx, s) in out.iter_mut().enumerate() {
            if let Some(g) = s.bare_genus {
                s.euler = 2 - 2 * g as i64;
                s.genus = g as i64;
            } else {
                let v = s.crossing_ids.len() as i64;
                let e = s.n_edges as i64;
                // Traced faces only: circles in faces do not change chi.
                let f = s.n_faces as i64 - s.circle_indices.len() as i64;
                s.euler = v - e + f;
                s.genus = (2 - s.euler) / 2;
            }
            s.index = idx;
        }
        out
    }

    /// Euler characteristic per surface component.
    pub fn euler_characteristic(&self) -> Vec<i64> {
        self.component_summaries().iter().map(|s| s.euler).collect()
    }

    /// Genus per surface component.
    pub fn genus(&self) -> Vec<i64> {
        self.component_summaries().iter().map(|s| s.genus).collect()
    }

    /// Total number of faces of `Sigma \\ D`, counting regions cut off by
    /// crossingless circles.
    pub fn region_count(&self) -> usize {
        self.component_summaries().iter().map(|s| s.n_faces).sum()
    }

    /// True when the surface (not merely the diagram) is disconnected.
    /// The certificate is the component partition.
    pub fn is_split_surface(&self) -> (bool, Vec<ComponentSummary>) {
        let summaries = self.component_summaries();
        (summaries.len() > 1, summaries)
    }

    /// True when the underlying diagram (graph plus circles) is connected.
    pub fn is_connected_diagram(&self) -> bool {
        if self.bare.len() > 1 || (self.n_map_components > 0 && !self.bare.is_empty()) {
            return false;
        }
        if self.n_map_components > 1 {
            return false;
        }
        let mut pieces = 0usize;
        if self.n_map_components == 1 {
            pieces += 1;
        }
        pieces += self.circles.len();
        if self.bare.len() == 1 && self.circles.is_empty() {
            // An empty bare surface has no diagram at all.
            return false;
        }
        pieces <= 1
    }

    /// Link components as cyclic pass sequences; each entry lists
    /// (crossing index, pass) along the strand.
    pub fn link_components(&self) -> Vec<Vec<(usize, Pass)>> {
        let mut seen = vec![false; self.n_darts()];
        let mut out = Vec::new();
        for start in 0..self.n_darts() {
            if seen[start] || !is_out_slot(self.crossings[start / 4].sign, start % 4) {
                continue;
            }
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                if seen[d] {
                    break;
                }
                seen[d] = true;
                let arrive = self.theta[d];
                let c = arrive / 4;
                let pass = if arrive % 4 == 2 { Pass::Over } else { Pass::Under };
                walk.push((c, pass));
                d = exit_dart(self.crossings[c].sign, arrive);
            }
            out.push(walk);
        }
        out
    }

    /// True when over/under passes alternate along every strand cycle.
    pub fn is_alternating(&self) -> bool {
        for comp in self.link_components() {
            if comp.len() < 2 {
                continue;
            }
            for i in 0..comp.len() {
                if comp[i].1 == comp[(i + 1) % comp.len()].1 {
                    return false;
                }
            }
        }
        true
    }

    /// True when every face of `Sigma \\ D` is a disk and every surface
    /// component meets the diagram.
    pub fn is_cellularly_embedded(&self) -> bool {
        for c in &self.circles {
            if let CirclePlacement::InFace(_) = c {
                return false;
            }
        }
        for (b, bc) in self.bare.iter().enumerate() {
            let circles_here = self
                .circles
                .iter()
                .filter(|c| **c == CirclePlacement::OnBare(b))
                .count();
            if bc.genus != 0 || circles_here != 1 {
                return false;
            }
        }
        true
    }

    /// Proper 2-coloring of the regions of `Sigma \\ D`, regions sharing an
    /// edge getting opposite colors, when one exists.
    pub fn checkerboard_coloring(&self) -> Option<Vec<CheckerColor>> {
        // Region indexing: traced faces, then circle inner disks, then bare
        // outer regions.
        let nf = self.faces.len();
        let nc = self.circles.len();
        let n = nf + nc + self.bare.len();
        let mut color: Vec<Option<CheckerColor>> = vec![None; n];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for d in 0..self.n_darts() {
            let e = self.edge_of_dart[d];
            if self.edges[e].tail == d {
                let a = self.face_of_dart[d];
                let b = self.face_of_dart[self.theta[d]];
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for (ci, placement) in self.circles.iter().enumerate() {
            let inner = nf + ci;
            let outer = match placement {
                CirclePlacement::InFace(f) => *f,
                CirclePlacement::OnBare(b) => nf + nc + b,
            };
            adj[inner].push(outer);
            adj[outer].push(inner);
        }
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(CheckerColor::Black);
            let mut stack = vec![start];
            while let Some(r) = stack.pop() {
                let c = color[r].unwrap();
                for &s in &adj[r] {
                    match color[s] {
                        None => {
                            color[s] = Some(c.flip());
                            stack.push(s);
                        }
                        Some(cs) if cs == c => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.unwrap()).collect())
    }

    /// Stable JSON dump of the full combinatorial map.
    pub fn to_json(&self) -> String {
        let dump = SurfaceJson {
            format_version: 1,
            crossings: self.crossings.clone(),
            pairing: self.edges.iter().map(|e| [e.tail, e.head]).collect(),
            faces: self.faces.iter().map(|f| f.walk.clone()).collect(),
            circles: self.circles.clone(),
            bare_components: self.bare.clone(),
        };
        serde_json::to_string_pretty(&dump).expect("map serializes")
    }

    pub fn from_json(text: &str) -> Result<SurfaceDiagram, MapError> {
        let dump: SurfaceJson = serde_json::from_str(text).map_err(|_| MapError::BadPlacement)?;
        SurfaceDiagram::from_parts(
            dump.crossings,
            dump.pairing
                .iter()
                .map(|p| Edge {
                    tail: p[0],
                    head: p[1],
                })
                .collect(),
            dump.circles,
            dump.bare_components,
        )
    }

    /// Canonical signature of the map up to slot-preserving isomorphism.
    /// Two diagrams are isomorphic combinatorial maps exactly when their
    /// signatures agree.
    pub fn canonical_signature(&self) -> String {
        let ncr = self.crossings.len();
        let mut component_sigs: Vec<String> = Vec::new();
        let mut comp_seen = vec![false; self.n_map_components];
        for root in 0..ncr {
            let comp = self.map_component_of_crossing[root];
            if comp_seen[comp] {
                continue;
            }
            comp_seen[comp] = true;
            let mut best: Option<String> = None;
            for start in 0..ncr {
                if self.map_component_of_crossing[start] != comp {
                    continue;
                }
                let sig = self.signature_from(start);
                if best.as_ref().map_or(true, |b| sig < *b) {
                    best = Some(sig);
                }
            }
            component_sigs.push(best.unwrap());
        }
        component_sigs.sort();
        let mut extras: Vec<String> = Vec::new();
        for b in &self.bare {
            let circles_here = self
                .circles
                .iter()
                .filter(|c| matches!(c, CirclePlacement::OnBare(_)))
                .count();
            extras.push(format!("bare(g{},c{})", b.genus, circles_here));
        }
        let in_face = self
            .circles
            .iter()
            .filter(|c| matches!(c, CirclePlacement::InFace(_)))
            .count();
        if in_face > 0 {
            extras.push(format!("inface({})", in_face));
        }
        extras.sort();
        format!("{}|{}", component_sigs.join("#"), extras.join("#"))
    }

    fn signature_from(&self, root: usize) -> String {
        let ncr = self.crossings.len();
        let mut index = vec![usize::MAX; ncr];
        let mut order = Vec::with_capacity(ncr);
        index[root] = 0;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for s in 0..4 {
                let other = self.theta[c * 4 + s] / 4;
                if index[other] == usize::MAX {
                    index[other] = order.len();
                    order.push(other);
                }
            }
        }
        let mut sig = String::new();
        for &c in &order {
            sig.push(self.crossings[c].sign.symbol());
            for s in 0..4 {
                let t = self.theta[c * 4 + s];
                sig.push_str(&format!(",{}:{}", index[t / 4], t % 4));
            }
            sig.push(';');
        }
        sig
    }
}

/// Census of one surface component.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub index: usize,
    pub crossing_ids: Vec<u32>,
    pub circle_indices: Vec<usize>,
    pub n_edges: usize,
    pub n_faces: usize,
    pub euler: i64,
    pub genus: i64,
    pub bare_genus: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckerColor {
    Black,
    White,
}

impl CheckerColor {
    pub fn flip(self) -> CheckerColor {
        match self {
            CheckerColor::Black => CheckerColor::White,
            CheckerColor::White => CheckerColor::Black,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SurfaceJson {
    format_version: u32,
    crossings: Vec<Crossing>,
    pairing: Vec<[Dart; 2]>,
    faces: Vec<Vec<Dart>>,
    circles: Vec<CirclePlacement>,
    bare_components: Vec<BareComponent>,
}

fn sigma_static(d: Dart) -> Dart {
    (d & !3) + ((d + 1) & 3)
}

/// Slot of the over-strand entering the crossing.
pub const OVER_IN: usize = 2;
/// Slot of the over-strand leaving the crossing.
pub const OVER_OUT: usize = 0;

pub fn under_in_slot(sign: Sign) -> usize {
    match sign {
        Sign::Positive => 3,
        Sign::Negative => 1,
    }
}

pub fn under_out_slot(sign: Sign) -> usize {
    match sign {
        Sign::Positive => 1,
        Sign::Negative => 3,
    }
}

pub fn is_out_slot(sign: Sign, slot: usize) -> bool {
    slot == OVER_OUT || slot == under_out_slot(sign)
}

pub fn is_in_slot(sign: Sign, slot: usize) -> bool {
    slot == OVER_IN || slot == under_in_slot(sign)
}

/// Dart where the strand arriving at `in_dart` leaves the crossing.
pub fn exit_dart(sign: Sign, in_dart: Dart) -> Dart {
    let base = in_dart & !3;
    if in_dart % 4 == OVER_IN {
        base + OVER_OUT
    } else {
        debug_assert_eq!(in_dart % 4, under_in_slot(sign));
        base + under_out_slot(sign)
    }
}

/// Realize a Gauss code as a cellularly embedded diagram via the capped
/// ribbon construction. Crossingless `o` components become circles on their
/// own sphere components.
pub fn realize_gauss(code: &GaussCode) -> Result<SurfaceDiagram, MapError> {
    code.validate()?;
    let ids = code.crossing_ids();
    let index_of: BTreeMap<u32, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut sign_of: BTreeMap<u32, Sign> = BTreeMap::new();
    for sym in code.components.iter().flatten() {
        sign_of.insert(sym.id, sym.sign);
    }
    let crossings: Vec<Crossing> = ids
        .iter()
        .map(|&id| Crossing {
            id,
            sign: sign_of[&id],
        })
        .collect();
    let mut edges = Vec::new();
    for comp in &code.components {
        let n = comp.len();
        for i in 0..n {
            let cur = comp[i];
            let nxt = comp[(i + 1) % n];
            let ci = index_of[&cur.id];
            let cn = index_of[&nxt.id];
            let tail = ci * 4
                + match cur.pass {
                    Pass::Over => OVER_OUT,
                    Pass::Under => under_out_slot(cur.sign),
                };
            let head = cn * 4
                + match nxt.pass {
                    Pass::Over => OVER_IN,
                    Pass::Under => under_in_slot(nxt.sign),
                };
            edges.push(Edge { tail, head });
        }
    }
    let mut circles = Vec::new();
    let mut bare = Vec::new();
    for _ in 0..code.circles {
        circles.push(CirclePlacement::OnBare(bare.len()));
        bare.push(BareComponent { genus: 0 });
    }
    SurfaceDiagram::from_parts(crossings, edges, circles, bare)
}

/// Build the surface diagram corresponding to a planar PD code: thicken the
/// planar map, replace each virtual-crossing neighborhood by two disjoint
/// bands, and cap the boundary circles. Virtual crossings leave no vertex;
/// strand components with only virtual crossings become circles on their own
/// sphere components.
pub fn from_virtual(pd: &PdCode) -> Result<SurfaceDiagram, MapError> {
    pd.validate()?;
    let plan = VirtualResolution::analyze(pd)?;
    let mut edges = Vec::new();
    for (&(ci, slot), &(cj, slot2)) in &plan.classical_links {
        // Each link is recorded once, keyed by its tail.
        let tail = ci * 4 + slot;
        let head = cj * 4 + slot2;
        edges.push(Edge { tail, head });
    }
    let mut circles = Vec::new();
    let mut bare = Vec::new();
    for _ in 0..plan.circle_components + pd.circles {
        circles.push(CirclePlacement::OnBare(bare.len()));
        bare.push(BareComponent { genus: 0 });
    }
    SurfaceDiagram::from_parts(plan.crossings, edges, circles, bare)
}

/// Result of resolving the virtual crossings of a PD code: the classical
/// crossings in canonical slot layout and the strand links between them.
pub(crate) struct VirtualResolution {
    pub crossings: Vec<Crossing>,
    /// tail (crossing, slot) -> head (crossing, slot)
    pub classical_links: BTreeMap<(usize, usize), (usize, usize)>,
    pub circle_components: usize,
    /// All labels (join chains unsmoothed) in ascending order.
    pub labels: Vec<u32>,
    /// The two ends of each label, indexed like `labels`.
    pub ends: Vec<[PdLabelEnd; 2]>,
    /// orient[i]: ends[i][0] is the tail of the strand direction.
    pub orient: Vec<bool>,
    /// Classical PD-vertex index per crossing index.
    pub classical_index: Vec<usize>,
    /// Virtual PD-vertex indices.
    pub virtual_index: Vec<usize>,
}

/// One end of a PD edge label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PdLabelEnd {
    Classical { c: usize, position: usize },
    Virtual { v: usize, position: usize },
    Join { j: usize, side: usize },
}

/// Role of one record position at a classical PD vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SlotRole {
    OverOut,
    UnderOut,
    OverIn,
    UnderIn,
}

impl SlotRole {
    pub(crate) fn is_out(self) -> bool {
        matches!(self, SlotRole::OverOut | SlotRole::UnderOut)
    }

    /// Canonical slot index of this role for the given sign.
    pub(crate) fn canonical_slot(self, sign: Sign) -> usize {
        match self {
            SlotRole::OverOut => OVER_OUT,
            SlotRole::OverIn => OVER_IN,
            SlotRole::UnderOut => under_out_slot(sign),
            SlotRole::UnderIn => under_in_slot(sign),
        }
    }
}

/// Roles of record positions 0..3. Position 0 always holds an out-going
/// strand end; `over_first` picks which strand that is.
pub(crate) fn record_roles(sign: Sign, over_first: bool) -> [SlotRole; 4] {
    match (over_first, sign) {
        (true, Sign::Positive) => [
            SlotRole::OverOut,
            SlotRole::UnderOut,
            SlotRole::OverIn,
            SlotRole::UnderIn,
        ],
        (true, Sign::Negative) => [
            SlotRole::OverOut,
            SlotRole::UnderIn,
            SlotRole::OverIn,
            SlotRole::UnderOut,
        ],
        (false, Sign::Positive) => [
            SlotRole::UnderOut,
            SlotRole::OverIn,
            SlotRole::UnderIn,
            SlotRole::OverOut,
        ],
        (false, Sign::Negative) => [
            SlotRole::UnderOut,
            SlotRole::OverOut,
            SlotRole::UnderIn,
            SlotRole::OverIn,
        ],
    }
}

impl VirtualResolution {
    pub(crate) fn analyze(pd: &PdCode) -> Result<VirtualResolution, MapError> {
        use PdLabelEnd as End;
        let mut classical_index = Vec::new();
        let mut virtual_index = Vec::new();
        let mut crossings = Vec::new();
        for (vi, v) in pd.vertices.iter().enumerate() {
            match v.kind {
                PdVertexKind::Classical { sign, .. } => {
                    classical_index.push(vi);
                    crossings.push(Crossing {
                        id: classical_index.len() as u32,
                        sign,
                    });
                }
                PdVertexKind::Virtual => virtual_index.push(vi),
            }
        }
        let cl_of: BTreeMap<usize, usize> = classical_index
            .iter()
            .enumerate()
            .map(|(k, &vi)| (vi, k))
            .collect();
        let vt_of: BTreeMap<usize, usize> = virtual_index
            .iter()
            .enumerate()
            .map(|(k, &vi)| (vi, k))
            .collect();

        let mut ends: BTreeMap<u32, Vec<End>> = BTreeMap::new();
        for (vi, v) in pd.vertices.iter().enumerate() {
            for (position, &label) in v.labels.iter().enumerate() {
                let end = match v.kind {
                    PdVertexKind::Classical { .. } => End::Classical {
                        c: cl_of[&vi],
                        position,
                    },
                    PdVertexKind::Virtual => End::Virtual {
                        v: vt_of[&vi],
                        position,
                    },
                };
                ends.entry(label).or_default().push(end);
            }
        }
        for (ji, j) in pd.joins.iter().enumerate() {
            for (side, &label) in j.iter().enumerate() {
                ends.entry(label)
                    .or_default()
                    .push(End::Join { j: ji, side });
            }
        }
        let labels: Vec<u32> = ends.keys().copied().collect();
        let label_idx: BTreeMap<u32, usize> =
            labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();

        // Orient every label: orient[i] == true means the stored end order is
        // tail -> head. Classical ends force values; virtual vertices and
        // joins propagate them along strands.
        let nl = labels.len();
        let mut orient: Vec<Option<bool>> = vec![None; nl];
        let roles_of = |c: usize| -> [SlotRole; 4] {
            let vi = classical_index[c];
            match pd.vertices[vi].kind {
                PdVertexKind::Classical { sign, over_first } => record_roles(sign, over_first),
                PdVertexKind::Virtual => unreachable!(),
            }
        };
        // Continuity constraints between labels that meet at a virtual
        // vertex or join: the strand enters through one and leaves through
        // the other.
        struct Continuity {
            a: usize,
            a_end: usize,
            b: usize,
            b_end: usize,
        }
        let mut continuities: Vec<Continuity> = Vec::new();
        for (vk, &vi) in virtual_index.iter().enumerate() {
            let v = &pd.vertices[vi];
            for (p1, p2) in [(0usize, 2usize), (1, 3)] {
                let la = v.labels[p1];
                let lb = v.labels[p2];
                let a_end = ends[&la]
                    .iter()
                    .position(|e| *e == End::Virtual { v: vk, position: p1 })
                    .unwrap();
                let b_end = ends[&lb]
                    .iter()
                    .position(|e| *e == End::Virtual { v: vk, position: p2 })
                    .unwrap();
                continuities.push(Continuity {
                    a: label_idx[&la],
                    a_end,
                    b: label_idx[&lb],
                    b_end,
                });
            }
        }
        for (ji, j) in pd.joins.iter().enumerate() {
            let la = j[0];
            let lb = j[1];
            let a_end = ends[&la]
                .iter()
                .position(|e| *e == End::Join { j: ji, side: 0 })
                .unwrap();
            let b_end = ends[&lb]
                .iter()
                .position(|e| *e == End::Join { j: ji, side: 1 })
                .unwrap();
            continuities.push(Continuity {
                a: label_idx[&la],
                a_end,
                b: label_idx[&lb],
                b_end,
            });
        }
        for (li, label) in labels.iter().enumerate() {
            for (endpos, end) in ends[label].iter().enumerate() {
                if let End::Classical { c, position } = end {
                    let role = roles_of(*c)[*position];
                    // Out role: this end is the tail.
                    let val = if role.is_out() { endpos == 0 } else { endpos == 1 };
                    match orient[li] {
                        None => orient[li] = Some(val),
                        Some(v) if v != val => {
                            return Err(ParseError::InconsistentOrientation { label: *label }
                                .into())
                        }
                        _ => {}
                    }
                }
            }
        }
        // Propagate orientations along continuity constraints.
        // Constraint semantics: label a flows into the shared point at a_end
        // iff label b flows out of the shared point at b_end.
        //   a flows in at a_end:  orient(a) == (a_end == 1)
        //   b flows out at b_end: orient(b) == (b_end == 0)
        // so orient(b) = (orient(a) == (a_end == 1)) == (b_end == 0).
        let mut queue: Vec<usize> = (0..nl).filter(|&i| orient[i].is_some()).collect();
        let mut cont_by_label: Vec<Vec<usize>> = vec![Vec::new(); nl];
        for (ci, c) in continuities.iter().enumerate() {
            cont_by_label[c.a].push(ci);
            cont_by_label[c.b].push(ci);
        }
        let mut head = 0;
        loop {
            while head < queue.len() {
                let li = queue[head];
                head += 1;
                let cur = orient[li].unwrap();
                for &ci in &cont_by_label[li] {
                    let c = &continuities[ci];
                    let (other, other_val) = if c.a == li {
                        let flows_in = cur == (c.a_end == 1);
                        (c.b, flows_in == (c.b_end == 0))
                    } else {
                        let flows_out = cur == (c.b_end == 0);
                        (c.a, flows_out == (c.a_end == 1))
                    };
                    match orient[other] {
                        None => {
                            orient[other] = Some(other_val);
                            queue.push(other);
                        }
                        Some(v) if v != other_val => {
                            return Err(ParseError::InconsistentOrientation {
                                label: labels[other],
                            }
                            .into())
                        }
                        _ => {}
                    }
                }
            }
            // Orient any untouched purely-virtual cycles deterministically.
            match orient.iter().position(|o| o.is_none()) {
                Some(i) => {
                    orient[i] = Some(true);
                    queue.push(i);
                }
                None => break,
            }
        }
        let orient: Vec<bool> = orient.into_iter().map(|o| o.unwrap()).collect();

        // Trace strands from classical out-slots through virtual vertices and
        // joins to the next classical in-slot.
        let tail_end_of = |li: usize| -> End {
            let e = &ends[&labels[li]];
            if orient[li] {
                e[0]
            } else {
                e[1]
            }
        };
        let head_end_of = |li: usize| -> End {
            let e = &ends[&labels[li]];
            if orient[li] {
                e[1]
            } else {
                e[0]
            }
        };
        // For quick continuation lookup: at virtual vertex v, position p, the
        // opposite position.
        let mut classical_links = BTreeMap::new();
        let mut label_seen = vec![false; nl];
        for li in 0..nl {
            let tail = tail_end_of(li);
            let (c, position) = match tail {
                End::Classical { c, position } => (c, position),
                _ => continue,
            };
            let role = roles_of(c)[position];
            if !role.is_out() {
                return Err(ParseError::InconsistentOrientation { label: labels[li] }.into());
            }
            let sign = crossings[c].sign;
            let tail_slot = role.canonical_slot(sign);
            // Walk forward.
            let mut cur = li;
            label_seen[cur] = true;
            let (hc, hposition) = loop {
                match head_end_of(cur) {
                    End::Classical { c, position } => break (c, position),
                    End::Virtual { v, position } => {
                        let vv = &pd.vertices[virtual_index[v]];
                        let opp = (position + 2) % 4;
                        let next_label = vv.labels[opp];
                        cur = label_idx[&next_label];
                        label_seen[cur] = true;
                    }
                    End::Join { j, side } => {
                        let next_label = pd.joins[j][1 - side];
                        cur = label_idx[&next_label];
                        label_seen[cur] = true;
                    }
                }
            };
            let hrole = roles_of(hc)[hposition];
            if hrole.is_out() {
                return Err(ParseError::InconsistentOrientation { label: labels[cur] }.into());
            }
            let hsign = crossings[hc].sign;
            let head_slot = hrole.canonical_slot(hsign);
            classical_links.insert((c, tail_slot), (hc, head_slot));
        }
        // Remaining labels belong to purely virtual strand cycles: each cycle
        // is a crossingless circle after the bands are separated.
        let mut circle_components = 0usize;
        for li in 0..nl {
            if label_seen[li] {
                continue;
            }
            circle_components += 1;
            let mut cur = li;
            loop {
                label_seen[cur] = true;
                cur = match head_end_of(cur) {
                    End::Virtual { v, position } => {
                        let vv = &pd.vertices[virtual_index[v]];
                        label_idx[&vv.labels[(position + 2) % 4]]
                    }
                    End::Join { j, side } => label_idx[&pd.joins[j][1 - side]],
                    End::Classical { .. } => unreachable!(),
                };
                if cur == li {
                    break;
                }
            }
        }
        let ends_arr: Vec<[PdLabelEnd; 2]> = labels
            .iter()
            .map(|l| [ends[l][0], ends[l][1]])
            .collect();
        Ok(VirtualResolution {
            crossings,
            classical_links,
            circle_components,
            labels,
            ends: ends_arr,
            orient,
            classical_index,
            virtual_index,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{parse_gauss, parse_pd};

    fn census(d: &SurfaceDiagram) -> (usize, usize, usize, Vec<i64>) {
        (
            d.crossings().len(),
            d.edges().len(),
            d.faces().len(),
            d.genus(),
        )
    }

    #[test]
    fn trefoil_realizes_on_sphere() {
        let d = realize_gauss(&parse_gauss("O1+U2+O3+U1+O2+U3+").unwrap()).unwrap();
        assert_eq!(census(&d), (3, 6, 5, vec![0]));
        assert_eq!(d.euler_characteristic(), vec![2]);
        assert!(d.is_alternating());
        assert!(d.is_cellularly_embedded());
        assert!(!d.is_split_surface().0);
        assert!(d.checkerboard_coloring().is_some());
    }

    #[test]
    fn virtual_trefoil_realizes_on_torus() {
        let d = realize_gauss(&parse_gauss("O1+O2+U1+U2+").unwrap()).unwrap();
        assert_eq!(census(&d), (2, 4, 2, vec![1]));
        assert_eq!(d.euler_characteristic(), vec![0]);
        assert!(!d.is_alternating());
        assert!(d.is_cellularly_embedded());
    }

    #[test]
    fn kink_faces() {
        let d = realize_gauss(&parse_gauss("O1+U1+").unwrap()).unwrap();
        assert_eq!(census(&d), (1, 2, 3, vec![0]));
        assert!(d.is_alternating());
    }

    #[test]
    fn face_walks_double_count_edges() {
        for text in ["O1+U2+O3+U1+O2+U3+", "O1+O2+U1+U2+", "O1+U1+", "O1-U2-O3-U1-O2-U3-"] {
            let d = realize_gauss(&parse_gauss(text).unwrap()).unwrap();
            let total: usize = d.faces().iter().map(|f| f.len()).sum();
            assert_eq!(total, 2 * d.edges().len());
            for chi in d.euler_characteristic() {
                assert_eq!(chi.rem_euclid(2), 0);
            }
        }
    }

    #[test]
    fn disjoint_union_splits() {
        let d = realize_gauss(&parse_gauss("O1+U2+O3+U1+O2+U3+;O4+U5+O6+U4+O5+U6+").unwrap())
            .unwrap();
        assert_eq!(d.genus(), vec![0, 0]);
        let (split, partition) = d.is_split_surface();
        assert!(split);
        assert_eq!(partition.len(), 2);
        assert_eq!(partition[0].crossing_ids, vec![1, 2, 3]);
        assert_eq!(partition[1].crossing_ids, vec![4, 5, 6]);
    }

    #[test]
    fn circle_components_are_spheres() {
        let d = realize_gauss(&parse_gauss("o;o").unwrap()).unwrap();
        assert_eq!(d.n_surface_components(), 2);
        assert_eq!(d.genus(), vec![0, 0]);
        assert_eq!(d.region_count(), 4);
        assert!(d.is_cellularly_embedded());
        assert!(d.is_split_surface().0);
    }

    #[test]
    fn empty_torus_component_breaks_cellularity() {
        let base = realize_gauss(&parse_gauss("O1+U2+O3+U1+O2+U3+").unwrap()).unwrap();
        let d = SurfaceDiagram::from_parts(
            base.crossings().to_vec(),
            base.edges().to_vec(),
            vec![],
            vec![BareComponent { genus: 1 }],
        )
        .unwrap();
        assert!(!d.is_cellularly_embedded());
        assert_eq!(d.genus(), vec![0, 1]);
    }

    #[test]
    fn virtual_hopf_realizes_on_torus() {
        let d = realize_gauss(&parse_gauss("O1+;U1+").unwrap()).unwrap();
        assert_eq!(census(&d), (1, 2, 1, vec![1]));
        assert!(d.is_alternating());
        assert_eq!(d.link_components().len(), 2);
    }

    #[test]
    fn from_virtual_classical_trefoil_matches_realization() {
        let gauss = realize_gauss(&parse_gauss("O1+U2+O3+U1+O2+U3+").unwrap()).unwrap();
        let pd = parse_pd("X[1,4,6,3]+o X[5,2,4,1]+o X[3,6,2,5]+o").unwrap();
        let d = from_virtual(&pd).unwrap();
        assert_eq!(census(&d), (3, 6, 5, vec![0]));
        assert_eq!(d.canonical_signature(), gauss.canonical_signature());
    }

    #[test]
    fn from_virtual_single_virtual_crossing_is_circle_on_sphere() {
        let pd = parse_pd("V[1,3,2,4] P[1,3] P[2,4]").unwrap();
        let d = from_virtual(&pd).unwrap();
        assert_eq!(d.crossings().len(), 0);
        assert_eq!(d.circles().len(), 1);
        assert_eq!(d.genus(), vec![0]);
        assert!(d.is_cellularly_embedded());
    }

    #[test]
    fn json_round_trip() {
        let d = realize_gauss(&parse_gauss("O1+O2+U1+U2+").unwrap()).unwrap();
        let restored = SurfaceDiagram::from_json(&d.to_json()).unwrap();
        assert_eq!(d, restored);
    }

    #[test]
    fn signature_invariant_under_relabeling_and_rotation() {
        let a = realize_gauss(&parse_gauss("O1+U2+O3+U1+O2+U3+").unwrap()).unwrap();
        let b = realize_gauss(&parse_gauss("O3+U1+O2+U3+O1+U2+").unwrap()).unwrap();
        let c = realize_gauss(&parse_gauss("U3+O1+U2+O3+U1+O2+").unwrap()).unwrap();
        assert_eq!(a.canonical_signature(), b.canonical_signature());
        assert_eq!(a.canonical_signature(), c.canonical_signature());
        let kink = realize_gauss(&parse_gauss("O1+U1+").unwrap()).unwrap();
        assert_ne!(a.canonical_signature(), kink.canonical_signature());
    }
}
