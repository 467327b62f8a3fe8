//! Gauss codes and planar-diagram (PD) codes with virtual crossings.
//!
//! Text grammar for Gauss codes: `component (';' component)*`, where a
//! component is either a run of passes `(O|U)<id>(+|-)` or the literal `o`
//! for a crossingless unknot component.
//!
//! Text grammar for PD codes: whitespace-separated records.
//! `X[a,b,c,d]<sign><marker>` is a classical crossing whose four edge labels
//! are listed in counterclockwise rotation order starting at an out-going
//! strand end; `marker` is `o` when the strand on slots (0,2) is the
//! over-strand and `u` when it is the under-strand. `V[a,b,c,d]` is a virtual
//! crossing (cyclic rotation order, no decorations). `P[a,b]` joins labels
//! `a` and `b` into one crossingless arc, and `o` is a crossingless circle
//! component.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Over/under decoration of a single pass through a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pass {
    Over,
    Under,
}

impl Pass {
    pub fn flip(self) -> Pass {
        match self {
            Pass::Over => Pass::Under,
            Pass::Under => Pass::Over,
        }
    }
}

/// Crossing sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// One symbol of a Gauss code: a decorated pass through a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GaussSymbol {
    pub id: u32,
    pub pass: Pass,
    pub sign: Sign,
}

impl fmt::Display for GaussSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.pass {
            Pass::Over => 'O',
            Pass::Under => 'U',
        };
        write!(f, "{}{}{}", p, self.id, self.sign.symbol())
    }
}

/// A signed, over/under-decorated double-occurrence code, one cyclic word per
/// link component. Crossingless unknot components are tracked separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussCode {
    pub components: Vec<Vec<GaussSymbol>>,
    /// Number of crossingless unknot components (`o` in the text form).
    pub circles: usize,
}

/// Errors produced while parsing or validating codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {reason}")]
    SyntaxError { offset: usize, reason: String },
    #[error("crossing {id} does not occur exactly twice with one over and one under pass")]
    UnpairedCrossing { id: u32 },
    #[error("crossing {id} occurs with two different signs")]
    SignMismatch { id: u32 },
    #[error("edge label {label} occurs {count} times, expected 2")]
    EdgeLabelArity { label: u32, count: usize },
    #[error("rotation system is not planar: component has Euler characteristic {chi}")]
    NotPlanar { chi: i64 },
    #[error("strand orientations induced by the records are inconsistent at label {label}")]
    InconsistentOrientation { label: u32 },
    #[error("operation requires a single-component code")]
    MultiComponent,
    #[error("operation requires at least one crossing")]
    NoCrossings,
}

fn syntax(offset: usize, reason: impl Into<String>) -> ParseError {
    ParseError::SyntaxError {
        offset,
        reason: reason.into(),
    }
}

/// Parse a Gauss code from its text form.
pub fn parse_gauss(text: &str) -> Result<GaussCode, ParseError> {
    let bytes = text.as_bytes();
    let mut components: Vec<Vec<GaussSymbol>> = Vec::new();
    let mut circles = 0usize;
    let mut pos = 0usize;
    let mut current: Vec<GaussSymbol> = Vec::new();
    let mut current_is_circle = false;
    let mut saw_any = false;

    let flush = |components: &mut Vec<Vec<GaussSymbol>>,
                 circles: &mut usize,
                 current: &mut Vec<GaussSymbol>,
                 current_is_circle: &mut bool,
                 pos: usize|
     -> Result<(), ParseError> {
        if *current_is_circle {
            *circles += 1;
        } else if current.is_empty() {
            return Err(syntax(pos, "empty component"));
        } else {
            components.push(std::mem::take(current));
        }
        *current_is_circle = false;
        Ok(())
    };

    while pos < bytes.len() {
        match bytes[pos] {
            b' ' | b'\t' | b'\n' | b'\r' => pos += 1,
            b';' => {
                flush(&mut components, &mut circles, &mut current, &mut current_is_circle, pos)?;
                saw_any = true;
                pos += 1;
            }
            b'o' => {
                if !current.is_empty() || current_is_circle {
                    return Err(syntax(pos, "circle marker `o` must be a whole component"));
                }
                current_is_circle = true;
                saw_any = true;
                pos += 1;
            }
            b'O' | b'U' => {
                if current_is_circle {
                    return Err(syntax(pos, "passes after circle marker `o`"));
                }
                let pass = if bytes[pos] == b'O' { Pass::Over } else { Pass::Under };
                pos += 1;
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if start == pos {
                    return Err(syntax(start, "expected crossing id"));
                }
                let id: u32 = text[start..pos]
                    .parse()
                    .map_err(|_| syntax(start, "crossing id out of range"))?;
                if id == 0 {
                    return Err(syntax(start, "crossing ids are positive"));
                }
                let sign = match bytes.get(pos) {
                    Some(b'+') => Sign::Positive,
                    Some(b'-') => Sign::Negative,
                    _ => return Err(syntax(pos, "expected sign `+` or `-`")),
                };
                pos += 1;
                current.push(GaussSymbol { id, pass, sign });
                saw_any = true;
            }
            other => {
                return Err(syntax(pos, format!("unexpected byte {:?}", other as char)));
            }
        }
    }
    if !saw_any {
        return Err(syntax(0, "empty input"));
    }
    flush(&mut components, &mut circles, &mut current, &mut current_is_circle, pos)?;

    let code = GaussCode { components, circles };
    code.validate()?;
    Ok(code)
}

impl GaussCode {
    /// Check the double-occurrence and sign invariants.
    pub fn validate(&self) -> Result<(), ParseError> {
        let mut seen: BTreeMap<u32, (Vec<Pass>, Sign)> = BTreeMap::new();
        for sym in self.components.iter().flatten() {
            let entry = seen.entry(sym.id).or_insert_with(|| (Vec::new(), sym.sign));
            if entry.1 != sym.sign {
                return Err(ParseError::SignMismatch { id: sym.id });
            }
            entry.0.push(sym.pass);
        }
        for (id, (passes, _)) in &seen {
            if passes.len() != 2 || passes[0] == passes[1] {
                return Err(ParseError::UnpairedCrossing { id: *id });
            }
        }
        Ok(())
    }

    /// Crossing ids in ascending order.
    pub fn crossing_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.components.iter().flatten().map(|s| s.id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn crossing_count(&self) -> usize {
        self.crossing_ids().len()
    }

    /// Stable text form; `parse_gauss(serialize()) == self`.
    pub fn serialize(&self) -> String {
        let mut parts: Vec<String> = self
            .components
            .iter()
            .map(|c| c.iter().map(|s| s.to_string()).collect::<String>())
            .collect();
        for _ in 0..self.circles {
            parts.push("o".to_string());
        }
        parts.join(";")
    }

    /// Lexicographically least serialization over component rotations,
    /// component permutations, and crossing-id relabelings.
    pub fn canonical_form(&self) -> String {
        if self.components.is_empty() {
            return self.serialize();
        }
        let mut best: Option<String> = None;
        let orders = permutations(self.components.len());
        for order in &orders {
            // Cap blow-up on pathological many-component inputs.
            let rotation_sets: Vec<Vec<usize>> = order
                .iter()
                .map(|&ci| (0..self.components[ci].len()).collect())
                .collect();
            enumerate_rotations(&rotation_sets, &mut |rots| {
                let mut relabel: BTreeMap<u32, u32> = BTreeMap::new();
                let mut next = 1u32;
                let mut text = String::new();
                for (k, &ci) in order.iter().enumerate() {
                    if k > 0 {
                        text.push(';');
                    }
                    let comp = &self.components[ci];
                    let n = comp.len();
                    for i in 0..n {
                        let sym = comp[(rots[k] + i) % n];
                        let id = *relabel.entry(sym.id).or_insert_with(|| {
                            let v = next;
                            next += 1;
                            v
                        });
                        text.push_str(
                            &GaussSymbol { id, ..sym }.to_string(),
                        );
                    }
                }
                for _ in 0..self.circles {
                    text.push_str(";o");
                }
                if best.as_ref().map_or(true, |b| text < *b) {
                    best = Some(text);
                }
            });
        }
        best.unwrap()
    }

    /// Reverse the traversal direction of every component.
    pub fn reversed(&self) -> GaussCode {
        GaussCode {
            components: self
                .components
                .iter()
                .map(|c| c.iter().rev().copied().collect())
                .collect(),
            circles: self.circles,
        }
    }

    /// Rotate component `ci` by `k` symbols.
    pub fn rotated(&self, ci: usize, k: usize) -> GaussCode {
        let mut out = self.clone();
        let n = out.components[ci].len();
        out.components[ci].rotate_left(k % n.max(1));
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut out);
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

fn enumerate_rotations(sets: &[Vec<usize>], f: &mut impl FnMut(&[usize])) {
    let mut rots = vec![0usize; sets.len()];
    enumerate_rotations_inner(sets, 0, &mut rots, f);
}

fn enumerate_rotations_inner(
    sets: &[Vec<usize>],
    k: usize,
    rots: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if k == sets.len() {
        f(rots);
        return;
    }
    for &r in &sets[k] {
        rots[k] = r;
        enumerate_rotations_inner(sets, k + 1, rots, f);
    }
}

/// A cyclic split of a single-component Gauss code into two blocks with
/// disjoint crossing-id sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSplit {
    /// Rotation applied before splitting.
    pub rotation: usize,
    /// Length of the first block after rotation.
    pub split: usize,
}

/// Gauss-code interval criterion for non-primeness of knots: find a cyclic
/// permutation after which the code is a concatenation of two nonempty blocks
/// whose crossing-id sets are disjoint.
pub fn interval_nonprime(code: &GaussCode) -> Result<Option<IntervalSplit>, ParseError> {
    if code.components.len() != 1 || code.circles != 0 {
        return Err(ParseError::MultiComponent);
    }
    let word = &code.components[0];
    let n = word.len();
    if n == 0 {
        return Err(ParseError::NoCrossings);
    }
    for rotation in 0..n {
        'split: for split in 1..n {
            let mut first = std::collections::BTreeSet::new();
            for i in 0..split {
                first.insert(word[(rotation + i) % n].id);
            }
            for i in split..n {
                if first.contains(&word[(rotation + i) % n].id) {
                    continue 'split;
                }
            }
            return Ok(Some(IntervalSplit { rotation, split }));
        }
    }
    Ok(None)
}

/// Kind of a PD vertex record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PdVertexKind {
    /// Classical crossing: slot 0 is the out-going end of the strand named by
    /// `over_first`, see the grammar notes at the top of the module.
    Classical { sign: Sign, over_first: bool },
    Virtual,
}

/// One vertex record of a PD code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdVertex {
    pub kind: PdVertexKind,
    /// Edge labels in counterclockwise rotation order, slots 0..3.
    pub labels: [u32; 4],
}

/// A planar-diagram code: 4-valent vertex records plus crossingless arcs and
/// circles. The rotation system is required to embed in the sphere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdCode {
    pub vertices: Vec<PdVertex>,
    /// `P[a,b]` records: pairs of labels forming one crossingless arc.
    pub joins: Vec<[u32; 2]>,
    /// Crossingless circle components written as `o`.
    pub circles: usize,
}

/// Parse a PD code from its text form.
pub fn parse_pd(text: &str) -> Result<PdCode, ParseError> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let mut vertices = Vec::new();
    let mut joins = Vec::new();
    let mut circles = 0usize;
    let mut saw_any = false;

    while pos < bytes.len() {
        match bytes[pos] {
            b' ' | b'\t' | b'\n' | b'\r' | b',' | b';' => pos += 1,
            b'o' => {
                circles += 1;
                saw_any = true;
                pos += 1;
            }
            b'X' | b'V' | b'P' => {
                let kind_byte = bytes[pos];
                saw_any = true;
                pos += 1;
                if bytes.get(pos) != Some(&b'[') {
                    return Err(syntax(pos, "expected `[`"));
                }
                pos += 1;
                let mut labels: Vec<u32> = Vec::new();
                loop {
                    let start = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    if start == pos {
                        return Err(syntax(pos, "expected edge label"));
                    }
                    let label: u32 = text[start..pos]
                        .parse()
                        .map_err(|_| syntax(start, "edge label out of range"))?;
                    labels.push(label);
                    match bytes.get(pos) {
                        Some(b',') => pos += 1,
                        Some(b']') => {
                            pos += 1;
                            break;
                        }
                        _ => return Err(syntax(pos, "expected `,` or `]`")),
                    }
                }
                match kind_byte {
                    b'X' => {
                        if labels.len() != 4 {
                            return Err(syntax(pos, "X record needs 4 labels"));
                        }
                        let sign = match bytes.get(pos) {
                            Some(b'+') => Sign::Positive,
                            Some(b'-') => Sign::Negative,
                            _ => return Err(syntax(pos, "X record needs a sign suffix")),
                        };
                        pos += 1;
                        let over_first = match bytes.get(pos) {
                            Some(b'o') => true,
                            Some(b'u') => false,
                            _ => return Err(syntax(pos, "X record needs an over-strand marker")),
                        };
                        pos += 1;
                        vertices.push(PdVertex {
                            kind: PdVertexKind::Classical { sign, over_first },
                            labels: [labels[0], labels[1], labels[2], labels[3]],
                        });
                    }
                    b'V' => {
                        if labels.len() != 4 {
                            return Err(syntax(pos, "V record needs 4 labels"));
                        }
                        vertices.push(PdVertex {
                            kind: PdVertexKind::Virtual,
                            labels: [labels[0], labels[1], labels[2], labels[3]],
                        });
                    }
                    _ => {
                        if labels.len() != 2 {
                            return Err(syntax(pos, "P record needs 2 labels"));
                        }
                        joins.push([labels[0], labels[1]]);
                    }
                }
            }
            other => return Err(syntax(pos, format!("unexpected byte {:?}", other as char))),
        }
    }
    if !saw_any {
        return Err(syntax(0, "empty input"));
    }
    let code = PdCode {
        vertices,
        joins,
        circles,
    };
    code.validate()?;
    Ok(code)
}

/// Ends of edges in a PD code: (slot owner, slot index). Joins occupy two
/// pseudo-slots each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PdEnd {
    Vertex { vertex: usize, slot: usize },
    Join { join: usize, side: usize },
}

impl PdCode {
    /// Check label arity and sphere-embeddability of the rotation system.
    pub fn validate(&self) -> Result<(), ParseError> {
        let ends = self.label_ends()?;
        // Face-trace the 4-valent map (joins smoothed as 2-valent corners)
        // and require chi = 2 on each connected component.
        self.check_planar(&ends)
    }

    pub(crate) fn label_ends(&self) -> Result<BTreeMap<u32, Vec<PdEnd>>, ParseError> {
        let mut ends: BTreeMap<u32, Vec<PdEnd>> = BTreeMap::new();
        for (vi, v) in self.vertices.iter().enumerate() {
            for (slot, &label) in v.labels.iter().enumerate() {
                ends.entry(label).or_default().push(PdEnd::Vertex { vertex: vi, slot });
            }
        }
        for (ji, j) in self.joins.iter().enumerate() {
            for (side, &label) in j.iter().enumerate() {
                ends.entry(label).or_default().push(PdEnd::Join { join: ji, side });
            }
        }
        for (&label, e) in &ends {
            if e.len() != 2 {
                return Err(ParseError::EdgeLabelArity {
                    label,
                    count: e.len(),
                });
            }
        }
        Ok(ends)
    }

    /// Darts of the planar map: 4 per vertex plus 2 per join.
    fn dart_count(&self) -> usize {
        self.vertices.len() * 4 + self.joins.len() * 2
    }

    fn end_to_dart(&self, end: PdEnd) -> usize {
        match end {
            PdEnd::Vertex { vertex, slot } => vertex * 4 + slot,
            PdEnd::Join { join, side } => self.vertices.len() * 4 + join * 2 + side,
        }
    }

    /// Rotation successor (counterclockwise next dart at the same vertex).
    fn sigma(&self, dart: usize) -> usize {
        let nv = self.vertices.len() * 4;
        if dart < nv {
            (dart & !3) + ((dart + 1) & 3)
        } else {
            // 2-valent join vertex: the two pseudo-slots alternate.
            let base = nv + ((dart - nv) & !1);
            base + ((dart - nv + 1) & 1)
        }
    }

    /// Edge involution from the label pairing.
    pub(crate) fn theta(&self, ends: &BTreeMap<u32, Vec<PdEnd>>) -> Vec<usize> {
        let mut theta = vec![usize::MAX; self.dart_count()];
        for e in ends.values() {
            let a = self.end_to_dart(e[0]);
            let b = self.end_to_dart(e[1]);
            theta[a] = b;
            theta[b] = a;
        }
        theta
    }

    fn check_planar(&self, ends: &BTreeMap<u32, Vec<PdEnd>>) -> Result<(), ParseError> {
        let n = self.dart_count();
        if n == 0 {
            return Ok(());
        }
        // A label occurring twice on the same join slot pair or self-paired
        // dart cannot happen: ends are distinct by construction.
        let theta = self.theta(ends);
        for (d, &t) in theta.iter().enumerate() {
            if t == d {
                // Both ends of a label on the same dart is impossible; both
                // ends on the same join would make a free-floating circle.
                return Err(ParseError::EdgeLabelArity {
                    label: 0,
                    count: 1,
                });
            }
        }
        // Connected components over <sigma, theta>, counting V, E, F each.
        let mut comp = vec![usize::MAX; n];
        let mut ncomp = 0usize;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = ncomp;
            while let Some(d) = stack.pop() {
                for next in [self.sigma(d), theta[d]] {
                    if comp[next] == usize::MAX {
                        comp[next] = ncomp;
                        stack.push(next);
                    }
                }
            }
            ncomp += 1;
        }
        let mut verts = vec![0i64; ncomp];
        let nv = self.vertices.len() * 4;
        for (vi, _) in self.vertices.iter().enumerate() {
            verts[comp[vi * 4]] += 1;
        }
        for ji in 0..self.joins.len() {
            verts[comp[nv + ji * 2]] += 1;
        }
        let mut edges = vec![0i64; ncomp];
        for d in 0..n {
            if d < theta[d] {
                edges[comp[d]] += 1;
            }
        }
        // Faces: orbits of sigma . theta.
        let mut faces = vec![0i64; ncomp];
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            faces[comp[start]] += 1;
            let mut d = start;
            while !seen[d] {
                seen[d] = true;
                d = self.sigma(theta[d]);
            }
        }
        for c in 0..ncomp {
            let chi = verts[c] - edges[c] + faces[c];
            if chi != 2 {
                return Err(ParseError::NotPlanar { chi });
            }
        }
        Ok(())
    }

    pub fn classical_count(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| matches!(v.kind, PdVertexKind::Classical { .. }))
            .count()
    }

    pub fn virtual_count(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| v.kind == PdVertexKind::Virtual)
            .count()
    }

    /// Stable text form.
    pub fn serialize(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for v in &self.vertices {
            match v.kind {
                PdVertexKind::Classical { sign, over_first } => {
                    parts.push(format!(
                        "X[{},{},{},{}]{}{}",
                        v.labels[0],
                        v.labels[1],
                        v.labels[2],
                        v.labels[3],
                        sign.symbol(),
                        if over_first { 'o' } else { 'u' }
                    ));
                }
                PdVertexKind::Virtual => {
                    parts.push(format!(
                        "V[{},{},{},{}]",
                        v.labels[0], v.labels[1], v.labels[2], v.labels[3]
                    ));
                }
            }
        }
        for j in &self.joins {
            parts.push(format!("P[{},{}]", j[0], j[1]));
        }
        for _ in 0..self.circles {
            parts.push("o".to_string());
        }
        parts.join(" ")
    }
}

/// Versioned JSON wrapper for the code types.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeJson<T> {
    pub format_version: u32,
    #[serde(flatten)]
    pub code: T,
}

pub fn gauss_to_json(code: &GaussCode) -> String {
    serde_json::to_string_pretty(&CodeJson {
        format_version: 1,
        code: code.clone(),
    })
    .expect("gauss code serializes")
}

pub fn pd_to_json(code: &PdCode) -> String {
    serde_json::to_string_pretty(&CodeJson {
        format_version: 1,
        code: code.clone(),
    })
    .expect("pd code serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_trefoil() {
        let code = parse_gauss("O1+U2+O3+U1+O2+U3+").unwrap();
        assert_eq!(code.components.len(), 1);
        assert_eq!(code.crossing_count(), 3);
        assert!(code
            .components[0]
            .iter()
            .all(|s| s.sign == Sign::Positive));
        assert_eq!(code.serialize(), "O1+U2+O3+U1+O2+U3+");
    }

    #[test]
    fn parses_virtual_trefoil_shape() {
        let code = parse_gauss("O1+O2+U1+U2+").unwrap();
        assert_eq!(code.components.len(), 1);
        assert_eq!(code.crossing_count(), 2);
    }

    #[test]
    fn sign_mismatch_is_rejected() {
        assert_eq!(
            parse_gauss("O1+U1-"),
            Err(ParseError::SignMismatch { id: 1 })
        );
    }

    #[test]
    fn unpaired_crossing_is_rejected() {
        assert!(matches!(
            parse_gauss("O1+U2+O2+U2+"),
            Err(ParseError::UnpairedCrossing { .. })
        ));
        assert!(matches!(
            parse_gauss("O1+O1+"),
            Err(ParseError::UnpairedCrossing { id: 1 })
        ));
    }

    #[test]
    fn whitespace_and_circles() {
        let code = parse_gauss(" O1+U1+ ; o ;o").unwrap();
        assert_eq!(code.components.len(), 1);
        assert_eq!(code.circles, 2);
        assert_eq!(code.serialize(), "O1+U1+;o;o");
    }

    #[test]
    fn syntax_error_carries_offset() {
        match parse_gauss("O1+Q2+") {
            Err(ParseError::SyntaxError { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected syntax error, got {:?}", other),
        }
    }

    #[test]
    fn interval_finds_composite_block() {
        let code = parse_gauss("O1+U2+O3+U1+O2+U3+O4+U5+O6+U4+O5+U6+").unwrap();
        let split = interval_nonprime(&code).unwrap().expect("split exists");
        // The identity rotation already exposes the disjoint blocks.
        assert_eq!(split.rotation, 0);
        assert_eq!(split.split, 6);
    }

    #[test]
    fn interval_absent_for_trefoil_and_kink() {
        let trefoil = parse_gauss("O1+U2+O3+U1+O2+U3+").unwrap();
        assert_eq!(interval_nonprime(&trefoil).unwrap(), None);
        let kink = parse_gauss("O1+U1+").unwrap();
        assert_eq!(interval_nonprime(&kink).unwrap(), None);
    }

    #[test]
    fn interval_rejects_multicomponent() {
        let hopf = parse_gauss("O1+U2+;O2+U1+").unwrap();
        assert_eq!(interval_nonprime(&hopf), Err(ParseError::MultiComponent));
    }

    #[test]
    fn canonical_form_invariant_under_rotation_and_relabeling() {
        let code = parse_gauss("O1+U2+O3+U1+O2+U3+").unwrap();
        let rotated = code.rotated(0, 2);
        assert_eq!(code.canonical_form(), rotated.canonical_form());
        let relabeled = parse_gauss("O3+U1+O2+U3+O1+U2+").unwrap();
        assert_eq!(code.canonical_form(), relabeled.canonical_form());
    }

    #[test]
    fn pd_round_trip_and_planarity() {
        let pd = parse_pd("X[1,4,6,3]+o X[5,2,4,1]+o X[3,6,2,5]+o").unwrap();
        assert_eq!(pd.classical_count(), 3);
        assert_eq!(pd.virtual_count(), 0);
        assert_eq!(parse_pd(&pd.serialize()).unwrap(), pd);
    }

    #[test]
    fn pd_label_arity_checked() {
        assert!(matches!(
            parse_pd("X[1,2,3,4]+o"),
            Err(ParseError::EdgeLabelArity { .. })
        ));
    }

    #[test]
    fn pd_virtual_kink_with_joins_is_planar() {
        // One virtual crossing closed up by two crossingless arcs into a
        // planar figure-eight: the arcs join adjacent strand ends.
        let pd = parse_pd("V[1,3,2,4] P[1,3] P[2,4]").unwrap();
        assert_eq!(pd.virtual_count(), 1);
        // Joining the two ends of each strand instead forces two circles
        // through one transverse point, which needs a torus.
        assert!(matches!(
            parse_pd("V[1,3,2,4] P[1,2] P[3,4]"),
            Err(ParseError::NotPlanar { chi: 0 })
        ));
    }

    #[test]
    fn pd_toroidal_rotation_rejected() {
        // The virtual-trefoil surface map written as PD records traces chi = 0.
        assert!(matches!(
            parse_pd("X[1,3,4,2]+o X[2,4,1,3]+o"),
            Err(ParseError::NotPlanar { chi: 0 })
        ));
        assert!(matches!(
            parse_pd("V[1,2,1,2]"),
            Err(ParseError::NotPlanar { chi: 0 })
        ));
    }
}
