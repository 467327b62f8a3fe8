//! Lassos: disks containing all crossings of a surface diagram, encoded as
//! the subcomplex they are a neighborhood of.
//!
//! A lasso is stored as the set of interior edges and wholly enclosed faces;
//! together with all vertices these form a subcomplex W with chi(W) = 1, so
//! that a regular neighborhood (with the enclosed faces filled in) is a
//! disk. The boundary crosses each exterior edge twice, so
//! |dX ∩ D| = 2 * (number of exterior edges).

use crate::certificate::LassoCertificate;
use crate::surface_map::{Dart, SurfaceDiagram};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LassoError {
    #[error("lasso operations need a connected diagram")]
    Disconnected,
    #[error("the part of the diagram inside the lasso is disconnected")]
    CoreDisconnected,
    #[error("lasso is not acceptable")]
    NotAcceptable,
    #[error("lasso operations need a cellularly embedded diagram")]
    NotCellular,
    #[error("lasso invariants violated: {0}")]
    Invalid(&'static str),
    #[error("face count {faces} exceeds the search budget {cap}")]
    TooManyFaces { faces: usize, cap: usize },
}

/// A lasso for a surface diagram: all crossings inside, plus the listed
/// interior edges and wholly enclosed faces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceLasso {
    pub interior_faces: BTreeSet<usize>,
    pub interior_edges: BTreeSet<usize>,
}

impl SurfaceLasso {
    pub fn boundary_intersections(&self, d: &SurfaceDiagram) -> usize {
        2 * (d.edges().len() - self.interior_edges.len())
    }

    pub fn certificate(&self, d: &SurfaceDiagram) -> LassoCertificate {
        LassoCertificate {
            interior_faces: self.interior_faces.iter().copied().collect(),
            interior_edges: self.interior_edges.iter().copied().collect(),
            boundary_intersections: self.boundary_intersections(d),
        }
    }
}

/// The two acceptability conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptabilityReport {
    pub connected_core: bool,
    pub no_parallel_arc: bool,
}

impl AcceptabilityReport {
    pub fn acceptable(&self) -> bool {
        self.connected_core && self.no_parallel_arc
    }
}

/// Diagrams the lasso machinery accepts: connected, cellular, with at least
/// one crossing. The single-circle sphere is handled by its own code paths.
fn require_plain(d: &SurfaceDiagram) -> Result<(), LassoError> {
    if !d.is_cellularly_embedded() {
        return Err(LassoError::NotCellular);
    }
    if !d.is_connected_diagram() || d.crossings().is_empty() {
        return Err(LassoError::Disconnected);
    }
    Ok(())
}

fn is_circle_sphere(d: &SurfaceDiagram) -> bool {
    d.crossings().is_empty() && d.circles().len() == 1 && d.bare_components().len() == 1
}

/// Validate the stored lasso invariants: enclosed faces have only interior
/// edges, the subcomplex is connected and has Euler characteristic 1.
pub fn check_lasso(d: &SurfaceDiagram, x: &SurfaceLasso) -> Result<(), LassoError> {
    for &f in &x.interior_faces {
        if f >= d.faces().len() {
            return Err(LassoError::Invalid("face id out of range"));
        }
        for &dart in &d.faces()[f].walk {
            if !x.interior_edges.contains(&d.edge_of(dart)) {
                return Err(LassoError::Invalid(
                    "enclosed face has an edge outside the lasso",
                ));
            }
        }
    }
    for &e in &x.interior_edges {
        if e >= d.edges().len() {
            return Err(LassoError::Invalid("edge id out of range"));
        }
    }
    let v = d.crossings().len() as i64;
    let chi = v - x.interior_edges.len() as i64 + x.interior_faces.len() as i64;
    if chi != 1 {
        return Err(LassoError::Invalid("subcomplex is not a disk (chi != 1)"));
    }
    // Connectivity of vertices + interior edges.
    let mut uf: Vec<usize> = (0..d.crossings().len()).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        let mut c = x;
        while uf[c] != r {
            let n = uf[c];
            uf[c] = r;
            c = n;
        }
        r
    }
    for &e in &x.interior_edges {
        let a = find(&mut uf, d.edges()[e].tail / 4);
        let b = find(&mut uf, d.edges()[e].head / 4);
        if a != b {
            uf[a] = b;
        }
    }
    let roots: BTreeSet<usize> = (0..d.crossings().len())
        .map(|c| find(&mut uf, c))
        .collect();
    if roots.len() > 1 {
        return Err(LassoError::Invalid("subcomplex is disconnected"));
    }
    Ok(())
}

/// Boundary word of the lasso: the darts of exterior edges in the cyclic
/// order their arcs leave the disk.
pub fn boundary_word(d: &SurfaceDiagram, x: &SurfaceLasso) -> Result<Vec<Dart>, LassoError> {
    check_lasso(d, x)?;
    let interior_dart =
        |dart: Dart| -> bool { x.interior_edges.contains(&d.edge_of(dart)) };
    // Next interior dart counterclockwise after `dart` at its vertex.
    let sigma_sub = |dart: Dart| -> Option<Dart> {
        let base = dart & !3;
        for k in 1..=4 {
            let cand = base + ((dart + k) & 3);
            if interior_dart(cand) {
                return Some(cand);
            }
        }
        None
    };

    // Boundary circles of the neighborhood of (vertices + interior edges):
    // orbits of sigma_sub . theta over interior darts, plus one circle per
    // isolated vertex.
    #[derive(Debug)]
    enum Circle {
        Orbit(Vec<Dart>),
        Isolated(usize),
    }
    let mut circles: Vec<Circle> = Vec::new();
    let mut seen = vec![false; d.n_darts()];
    for start in 0..d.n_darts() {
        if seen[start] || !interior_dart(start) {
            continue;
        }
        let mut orbit = Vec::new();
        let mut cur = start;
        while !seen[cur] {
            seen[cur] = true;
            orbit.push(cur);
            cur = sigma_sub(d.theta(cur)).expect("interior darts have interior successors");
        }
        circles.push(Circle::Orbit(orbit));
    }
    for c in 0..d.crossings().len() {
        if (0..4).all(|s| !interior_dart(4 * c + s)) {
            circles.push(Circle::Isolated(c));
        }
    }

    // Remove the circles capped by enclosed faces. An enclosed face's walk
    // is one of the orbits.
    let mut capped: BTreeSet<usize> = BTreeSet::new();
    for &f in &x.interior_faces {
        let walk: BTreeSet<Dart> = d.faces()[f].walk.iter().copied().collect();
        let hit = circles.iter().position(|c| match c {
            Circle::Orbit(o) => {
                o.len() == walk.len() && o.iter().all(|dart| walk.contains(dart))
            }
            Circle::Isolated(_) => false,
        });
        match hit {
            Some(i) if !capped.contains(&i) => {
                capped.insert(i);
            }
            _ => return Err(LassoError::Invalid("enclosed face does not cap a circle")),
        }
    }
    let uncapped: Vec<&Circle> = circles
        .iter()
        .enumerate()
        .filter(|(i, _)| !capped.contains(i))
        .map(|(_, c)| c)
        .collect();
    if uncapped.len() != 1 {
        return Err(LassoError::Invalid("lasso boundary is not a single circle"));
    }

    // Expand the remaining circle into the word of exterior darts passed.
    let mut word = Vec::new();
    match uncapped[0] {
        Circle::Isolated(c) => {
            for s in 0..4 {
                let dart = 4 * c + s;
                if !interior_dart(dart) {
                    word.push(dart);
                }
            }
        }
        Circle::Orbit(orbit) => {
            for (i, &h) in orbit.iter().enumerate() {
                let from = d.theta(h);
                let to = orbit[(i + 1) % orbit.len()];
                // Corner sweep at vertex(from), counterclockwise, emitting
                // exterior darts strictly between `from` and `to`.
                let base = from & !3;
                let mut k = 1;
                loop {
                    let cand = base + ((from + k) & 3);
                    if cand == to {
                        break;
                    }
                    if !interior_dart(cand) {
                        word.push(cand);
                    }
                    k += 1;
                    if k > 4 {
                        return Err(LassoError::Invalid("corner sweep did not close"));
                    }
                }
            }
        }
    }
    Ok(word)
}

/// Exterior edges whose two boundary marks are cyclically adjacent; the arc
/// of such an edge is parallel to the lasso boundary.
fn parallel_arcs(d: &SurfaceDiagram, word: &[Dart]) -> Vec<usize> {
    let n = word.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        let j = (i + 1) % n;
        if n >= 2 && d.edge_of(word[i]) == d.edge_of(word[j]) {
            out.insert(d.edge_of(word[i]));
        }
    }
    out.into_iter().collect()
}

fn core_connected(d: &SurfaceDiagram, x: &SurfaceLasso) -> bool {
    check_lasso(d, x).is_ok()
}

/// Check the two acceptability conditions for a lasso.
pub fn is_acceptable(
    d: &SurfaceDiagram,
    x: &SurfaceLasso,
) -> Result<AcceptabilityReport, LassoError> {
    if is_circle_sphere(d) {
        return Ok(AcceptabilityReport {
            connected_core: true,
            no_parallel_arc: true,
        });
    }
    require_plain(d)?;
    let connected_core = core_connected(d, x);
    if !connected_core {
        return Ok(AcceptabilityReport {
            connected_core,
            no_parallel_arc: false,
        });
    }
    let word = boundary_word(d, x)?;
    Ok(AcceptabilityReport {
        connected_core,
        no_parallel_arc: parallel_arcs(d, &word).is_empty(),
    })
}

/// Initial lasso from a spanning tree of the diagram graph.
pub fn spanning_tree_lasso(d: &SurfaceDiagram) -> Result<SurfaceLasso, LassoError> {
    require_plain(d)?;
    let mut uf: Vec<usize> = (0..d.crossings().len()).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        uf[x] = r;
        r
    }
    let mut tree = BTreeSet::new();
    for (ei, e) in d.edges().iter().enumerate() {
        let a = find(&mut uf, e.tail / 4);
        let b = find(&mut uf, e.head / 4);
        if a != b {
            uf[a.max(b)] = a.min(b);
            tree.insert(ei);
        }
    }
    let x = SurfaceLasso {
        interior_faces: BTreeSet::new(),
        interior_edges: tree,
    };
    check_lasso(d, &x)?;
    Ok(x)
}

/// Absorb boundary-parallel exterior arcs until the lasso is acceptable.
/// Absorbing an edge closes a cycle, so the enclosed strip face is capped to
/// keep the subcomplex a disk.
pub fn make_acceptable(
    d: &SurfaceDiagram,
    start: &SurfaceLasso,
) -> Result<SurfaceLasso, LassoError> {
    if is_circle_sphere(d) {
        return Ok(start.clone());
    }
    require_plain(d)?;
    if check_lasso(d, start).is_err() {
        return Err(LassoError::CoreDisconnected);
    }
    let mut x = start.clone();
    loop {
        let word = boundary_word(d, &x)?;
        let candidates = parallel_arcs(d, &word);
        if candidates.is_empty() {
            return Ok(x);
        }
        let mut absorbed = false;
        'cands: for &e in &candidates {
            let mut trial = x.clone();
            trial.interior_edges.insert(e);
            // Cap one newly enclosable face to restore chi = 1.
            for f in 0..d.faces().len() {
                if trial.interior_faces.contains(&f) {
                    continue;
                }
                if d.faces()[f]
                    .walk
                    .iter()
                    .any(|&dart| !trial.interior_edges.contains(&d.edge_of(dart)))
                {
                    continue;
                }
                let mut capped = trial.clone();
                capped.interior_faces.insert(f);
                if check_lasso(d, &capped).is_ok() && boundary_word(d, &capped).is_ok() {
                    x = capped;
                    absorbed = true;
                    break 'cands;
                }
            }
        }
        if !absorbed {
            return Err(LassoError::NotAcceptable);
        }
    }
}

/// A set of faces is feasible when every component of the subcomplex spanned
/// by all vertices and the closed chosen faces is contractible (chi = 1), so
/// that a forest of extra edges extends it to a disk lasso.
pub fn feasible_face_set(d: &SurfaceDiagram, faces: &BTreeSet<usize>) -> bool {
    let ncr = d.crossings().len();
    if ncr == 0 {
        // Only the single-circle sphere reaches here: any single face works.
        return faces.len() <= 1;
    }
    for &f in faces {
        if f >= d.faces().len() {
            return false;
        }
    }
    let mut closure_edges = BTreeSet::new();
    for &f in faces {
        for &dart in &d.faces()[f].walk {
            closure_edges.insert(d.edge_of(dart));
        }
    }
    let mut uf: Vec<usize> = (0..ncr).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        uf[x] = r;
        r
    }
    for &e in &closure_edges {
        let a = find(&mut uf, d.edges()[e].tail / 4);
        let b = find(&mut uf, d.edges()[e].head / 4);
        if a != b {
            uf[a.max(b)] = a.min(b);
        }
    }
    let mut v_per: BTreeMap<usize, i64> = BTreeMap::new();
    let mut e_per: BTreeMap<usize, i64> = BTreeMap::new();
    let mut f_per: BTreeMap<usize, i64> = BTreeMap::new();
    for c in 0..ncr {
        *v_per.entry(find(&mut uf, c)).or_insert(0) += 1;
    }
    for &e in &closure_edges {
        let r = find(&mut uf, d.edges()[e].tail / 4);
        *e_per.entry(r).or_insert(0) += 1;
    }
    for &f in faces {
        let r = find(&mut uf, d.faces()[f].walk[0] / 4);
        *f_per.entry(r).or_insert(0) += 1;
    }
    for (&root, &v) in &v_per {
        let chi = v - e_per.get(&root).unwrap_or(&0) + f_per.get(&root).unwrap_or(&0);
        if chi != 1 {
            return false;
        }
    }
    true
}

/// Result of the lasso-number computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoNumber {
    /// Maximum number of faces a disk lasso can enclose.
    pub n_max: usize,
    /// Half the minimal boundary intersection count: 2g - 1 + F - n_max.
    pub half_boundary: i64,
    pub witness: SurfaceLasso,
}

/// Compute the lasso number by exhaustive search over feasible face subsets,
/// descending by size, ties broken by lexicographic face-id order.
pub fn lasso_number_diagram(
    d: &SurfaceDiagram,
    max_faces: usize,
) -> Result<LassoNumber, LassoError> {
    if is_circle_sphere(d) {
        // A disk around the circle encloses one of the two regions.
        return Ok(LassoNumber {
            n_max: 1,
            half_boundary: 0,
            witness: SurfaceLasso {
                interior_faces: BTreeSet::new(),
                interior_edges: BTreeSet::new(),
            },
        });
    }
    require_plain(d)?;
    let nf = d.faces().len();
    if nf > max_faces {
        return Err(LassoError::TooManyFaces {
            faces: nf,
            cap: max_faces,
        });
    }
    let genus = d.genus()[0];
    let region_count = d.region_count() as i64;
    for k in (0..=nf).rev() {
        let mut found: Option<BTreeSet<usize>> = None;
        let mut comb: Vec<usize> = (0..k).collect();
        loop {
            let set: BTreeSet<usize> = comb.iter().copied().collect();
            if feasible_face_set(d, &set) {
                found = Some(set);
                break;
            }
            if !next_combination(&mut comb, nf) {
                break;
            }
        }
        if let Some(faces) = found {
            let witness = complete_to_lasso(d, &faces)?;
            let n_max = faces.len();
            let half_boundary = 2 * genus - 1 + region_count - n_max as i64;
            debug_assert_eq!(
                witness.boundary_intersections(d) as i64,
                2 * half_boundary
            );
            return Ok(LassoNumber {
                n_max,
                half_boundary,
                witness,
            });
        }
    }
    unreachable!("the empty face set is always feasible")
}

fn next_combination(comb: &mut Vec<usize>, n: usize) -> bool {
    let k = comb.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - (k - i) {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Extend a feasible face set to a full lasso by adding a connecting forest.
fn complete_to_lasso(
    d: &SurfaceDiagram,
    faces: &BTreeSet<usize>,
) -> Result<SurfaceLasso, LassoError> {
    let mut interior_edges = BTreeSet::new();
    for &f in faces {
        for &dart in &d.faces()[f].walk {
            interior_edges.insert(d.edge_of(dart));
        }
    }
    let ncr = d.crossings().len();
    let mut uf: Vec<usize> = (0..ncr).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        uf[x] = r;
        r
    }
    for &e in &interior_edges {
        let a = find(&mut uf, d.edges()[e].tail / 4);
        let b = find(&mut uf, d.edges()[e].head / 4);
        if a != b {
            uf[a.max(b)] = a.min(b);
        }
    }
    for (ei, e) in d.edges().iter().enumerate() {
        let a = find(&mut uf, e.tail / 4);
        let b = find(&mut uf, e.head / 4);
        if a != b {
            uf[a.max(b)] = a.min(b);
            interior_edges.insert(ei);
        }
    }
    let x = SurfaceLasso {
        interior_faces: faces.clone(),
        interior_edges,
    };
    check_lasso(d, &x)?;
    Ok(x)
}

/// Exact check of the collapse identity |dX ∩ D| / 2 = 2g - 1 + F - n for an
/// acceptable lasso.
pub fn verify_euler_formula(d: &SurfaceDiagram, x: &SurfaceLasso) -> Result<bool, LassoError> {
    if is_circle_sphere(d) {
        return Ok(true);
    }
    let report = is_acceptable(d, x)?;
    if !report.acceptable() {
        return Err(LassoError::NotAcceptable);
    }
    let genus = d.genus()[0];
    let regions = d.region_count() as i64;
    let n = x.interior_faces.len() as i64;
    let half = x.boundary_intersections(d) as i64 / 2;
    Ok(half == 2 * genus - 1 + regions - n)
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
    fn trefoil_tree_lasso() {
        let d = diag("O1+U2+O3+U1+O2+U3+");
        let x = spanning_tree_lasso(&d).unwrap();
        assert_eq!(x.interior_edges.len(), 2);
        assert_eq!(x.boundary_intersections(&d), 8);
    }

    #[test]
    fn kink_tree_lasso_is_vertex_disk() {
        let d = diag("O1+U1+");
        let x = spanning_tree_lasso(&d).unwrap();
        assert!(x.interior_edges.is_empty());
        assert_eq!(x.boundary_intersections(&d), 4);
        let report = is_acceptable(&d, &x).unwrap();
        assert!(report.connected_core);
        assert!(!report.no_parallel_arc);
    }

    #[test]
    fn virtual_trefoil_tree_lasso_already_acceptable() {
        let d = diag("O1+O2+U1+U2+");
        let x = spanning_tree_lasso(&d).unwrap();
        assert_eq!(x.interior_edges.len(), 1);
        assert_eq!(x.boundary_intersections(&d), 6);
        assert!(is_acceptable(&d, &x).unwrap().acceptable());
        let y = make_acceptable(&d, &x).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn make_acceptable_monotone_and_verified() {
        for text in ["O1+U2+O3+U1+O2+U3+", "O1+U1+", "O1+O2+U1+U2+", "O1+;U1+"] {
            let d = diag(text);
            let x = spanning_tree_lasso(&d).unwrap();
            let before = x.boundary_intersections(&d);
            let y = make_acceptable(&d, &x).unwrap();
            assert!(y.boundary_intersections(&d) <= before, "{text}");
            assert!(is_acceptable(&d, &y).unwrap().acceptable(), "{text}");
            assert!(verify_euler_formula(&d, &y).unwrap(), "{text}");
        }
    }

    #[test]
    fn kink_absorbs_to_zero_boundary() {
        let d = diag("O1+U1+");
        let x = make_acceptable(&d, &spanning_tree_lasso(&d).unwrap()).unwrap();
        assert_eq!(x.boundary_intersections(&d), 0);
        assert_eq!(x.interior_faces.len(), 2);
    }

    #[test]
    fn trefoil_feasible_sets() {
        let d = diag("O1+U2+O3+U1+O2+U3+");
        // Bigons plus one trigon: chi = 3 - 6 + 4 = 1.
        let all: BTreeSet<usize> = (0..5).collect();
        assert!(!feasible_face_set(&d, &all));
        assert!(feasible_face_set(&d, &BTreeSet::new()));
        let mut best = 0;
        let mut comb: BTreeSet<usize>;
        for mask in 0u32..32 {
            comb = (0..5).filter(|i| mask & (1 << i) != 0).collect();
            if feasible_face_set(&d, &comb) {
                best = best.max(comb.len());
            }
        }
        assert_eq!(best, 4);
    }

    #[test]
    fn lasso_numbers_match_spec_examples() {
        let trefoil = diag("O1+U2+O3+U1+O2+U3+");
        let r = lasso_number_diagram(&trefoil, 20).unwrap();
        assert_eq!((r.n_max, r.half_boundary), (4, 0));
        assert!(is_acceptable(&trefoil, &r.witness).unwrap().acceptable());
        assert!(verify_euler_formula(&trefoil, &r.witness).unwrap());

        let vt = diag("O1+O2+U1+U2+");
        let r = lasso_number_diagram(&vt, 20).unwrap();
        assert_eq!((r.n_max, r.half_boundary), (1, 2));
        assert_eq!(r.witness.boundary_intersections(&vt), 4);
        assert!(verify_euler_formula(&vt, &r.witness).unwrap());

        let kink = diag("O1+U1+");
        let r = lasso_number_diagram(&kink, 20).unwrap();
        assert_eq!((r.n_max, r.half_boundary), (2, 0));

        let circle = diag("o");
        let r = lasso_number_diagram(&circle, 20).unwrap();
        assert_eq!((r.n_max, r.half_boundary), (1, 0));
    }

    #[test]
    fn corrupted_lasso_detected() {
        let d = diag("O1+U2+O3+U1+O2+U3+");
        let r = lasso_number_diagram(&d, 20).unwrap();
        let mut bad = r.witness.clone();
        let &e = bad.interior_edges.iter().next().unwrap();
        bad.interior_edges.remove(&e);
        assert!(check_lasso(&d, &bad).is_err());
        assert!(verify_euler_formula(&d, &bad).is_err());
    }

    #[test]
    fn disconnected_rejected() {
        let d = diag("O1+U1+;O2+U2+");
        assert_eq!(spanning_tree_lasso(&d), Err(LassoError::Disconnected));
    }
}
