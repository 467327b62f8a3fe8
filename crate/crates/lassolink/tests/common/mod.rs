//! Independent oracles shared by the integration suites. These re-derive
//! face counts and curve enumerations from raw code data along different
//! paths than the library, so agreement is meaningful.

use lassolink::codes::{GaussCode, Pass, Sign};
use lassolink::surface_map::SurfaceDiagram;

/// Face census computed directly from a Gauss code: builds the rotation
/// system and pairing from scratch and counts orbits of the next-corner
/// permutation with plain array walking.
pub fn oracle_face_count(code: &GaussCode) -> (usize, usize, usize) {
    let mut ids: Vec<u32> = code.components.iter().flatten().map(|s| s.id).collect();
    ids.sort_unstable();
    ids.dedup();
    let idx = |id: u32| ids.binary_search(&id).unwrap();
    let mut sign = vec![Sign::Positive; ids.len()];
    for s in code.components.iter().flatten() {
        sign[idx(s.id)] = s.sign;
    }
    let n_darts = 4 * ids.len();
    let mut pair = vec![usize::MAX; n_darts];
    for comp in &code.components {
        let m = comp.len();
        for i in 0..m {
            let cur = comp[i];
            let nxt = comp[(i + 1) % m];
            let out = 4 * idx(cur.id)
                + match (cur.pass, sign[idx(cur.id)]) {
                    (Pass::Over, _) => 0,
                    (Pass::Under, Sign::Positive) => 1,
                    (Pass::Under, Sign::Negative) => 3,
                };
            let inn = 4 * idx(nxt.id)
                + match (nxt.pass, sign[idx(nxt.id)]) {
                    (Pass::Over, _) => 2,
                    (Pass::Under, Sign::Positive) => 3,
                    (Pass::Under, Sign::Negative) => 1,
                };
            pair[out] = inn;
            pair[inn] = out;
        }
    }
    let mut faces = 0usize;
    let mut seen = vec![false; n_darts];
    for start in 0..n_darts {
        if seen[start] {
            continue;
        }
        faces += 1;
        let mut d = start;
        while !seen[d] {
            seen[d] = true;
            let t = pair[d];
            d = (t & !3) + ((t + 1) & 3);
        }
    }
    (ids.len(), 2 * ids.len(), faces)
}

/// Genus of a connected code via the oracle face count.
pub fn oracle_genus(code: &GaussCode) -> i64 {
    let (v, e, f) = oracle_face_count(code);
    let chi = v as i64 - e as i64 + f as i64;
    (2 - chi) / 2
}

/// Exact rational point for the geometric curve oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pt {
    pub x: (i128, i128),
    pub y: (i128, i128),
}

fn sub(a: (i128, i128), b: (i128, i128)) -> (i128, i128) {
    (a.0 * b.1 - b.0 * a.1, a.1 * b.1)
}

fn cross_sign(o: Pt, a: Pt, b: Pt) -> i128 {
    let (ax, ay) = (sub(a.x, o.x), sub(a.y, o.y));
    let (bx, by) = (sub(b.x, o.x), sub(b.y, o.y));
    // Signs of the denominators are positive by construction.
    let lhs = ax.0 * by.0 * (ay.1 * bx.1);
    let rhs = ay.0 * bx.0 * (ax.1 * by.1);
    (lhs - rhs).signum()
}

/// Proper intersection test for closed segments with distinct endpoints.
pub fn segments_cross(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let d1 = cross_sign(c, d, a);
    let d2 = cross_sign(c, d, b);
    let d3 = cross_sign(a, b, c);
    let d4 = cross_sign(a, b, d);
    d1 * d2 < 0 && d3 * d4 < 0
}

/// Rational point on the unit circle at tangent parameter u = k.
fn circle_point(k: i128) -> Pt {
    Pt {
        x: (1 - k * k, 1 + k * k),
        y: (2 * k, 1 + k * k),
    }
}

/// Point at fraction t = tn/td along the straight segment between circle
/// parameters k and k+1 (one edge-visit of the face polygon).
fn visit_point(k: i128, tn: i128, td: i128) -> Pt {
    let a = circle_point(k);
    let b = circle_point(k + 1);
    let lerp = |p: (i128, i128), q: (i128, i128)| -> (i128, i128) {
        // p + t (q - p) over a common denominator.
        let num = p.0 * q.1 * (td - tn) + q.0 * p.1 * tn;
        let den = p.1 * q.1 * td;
        if den < 0 {
            (-num, -den)
        } else {
            (num, den)
        }
    };
    Pt {
        x: lerp(a.x, b.x),
        y: lerp(a.y, b.y),
    }
}

/// Geometric brute-force enumeration of two-point curves: every placement of
/// two chords with matching endpoints, with simplicity decided by exact
/// segment intersection inside convex polygon models of the faces.
/// Returns canonical dart pairs, sorted.
pub fn oracle_two_point_curves(d: &SurfaceDiagram) -> Vec<(usize, usize)> {
    let mut found = std::collections::BTreeSet::new();
    let n = d.n_darts();
    for a1 in 0..n {
        for a2 in a1..n {
            let b1 = d.theta(a1);
            let b2 = d.theta(a2);
            if a2 == b1 {
                continue;
            }
            if d.face_of(a1) != d.face_of(a2) || d.face_of(b1) != d.face_of(b2) {
                continue;
            }
            // Point parameters along each edge, measured from the smaller
            // dart: two points when the curve crosses one edge twice.
            let same_edge = a1 == a2;
            let (t1, t2): ((i128, i128), (i128, i128)) =
                if same_edge { ((1, 3), (2, 3)) } else { ((1, 2), (1, 2)) };
            // A chord endpoint living on the visit of `dart` at parameter t
            // measured from the canonical dart.
            let endpoint = |dart: usize, t: (i128, i128)| -> Pt {
                let canonical = d.edge_canonical_dart(d.edge_of(dart));
                let (tn, td) = if dart == canonical { t } else { (t.1 - t.0, t.1) };
                visit_point(d.pos_in_face(dart) as i128, tn, td)
            };
            let chords = [
                (d.face_of(a1), endpoint(a1, t1), endpoint(a2, t2)),
                (d.face_of(b1), endpoint(b1, t1), endpoint(b2, t2)),
            ];
            let crossing = chords[0].0 == chords[1].0
                && segments_cross(chords[0].1, chords[0].2, chords[1].1, chords[1].2);
            if crossing {
                continue;
            }
            let mirror = (b1.min(b2), b1.max(b2));
            let canon = if (a1, a2) <= mirror { (a1, a2) } else { mirror };
            found.insert(canon);
        }
    }
    found.into_iter().collect()
}
