//! Tagged witnesses for verdicts, serialized as JSON and re-checkable
//! against the diagram they were produced from.

use crate::surface_map::{ComponentSummary, Dart};
use serde::{Deserialize, Serialize};

/// Summary of one side of a separating curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideSummary {
    pub crossings: usize,
    pub crossing_ids: Vec<u32>,
    pub is_disk: bool,
}

/// A simple closed curve meeting the diagram in two points interior to
/// edges, encoded by its two chords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveCertificate {
    /// Indices of the (one or two) edges the curve crosses.
    pub edges: Vec<usize>,
    /// Faces carrying the two chords.
    pub faces: Vec<usize>,
    /// Chords as dart pairs; the chord through `faces[i]` approaches its
    /// crossing points from the sides named by `chords[i]`.
    pub chords: [[Dart; 2]; 2],
    pub separating: bool,
    pub sides: Option<[SideSummary; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NugatoryCertificate {
    pub crossing_id: u32,
    pub removable: bool,
}

/// Witness lasso: interior faces and edges plus the realized boundary count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoCertificate {
    pub interior_faces: Vec<usize>,
    pub interior_edges: Vec<usize>,
    pub boundary_intersections: usize,
}

/// Tagged witness for any verdict the library emits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    TwoPointCurve { curve: CurveCertificate },
    SplitPartition { components: Vec<ComponentSummary> },
    Nugatory { witness: NugatoryCertificate },
    EfficientLasso { lasso: LassoCertificate },
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}
