//! `lassolink` represents virtual link diagrams and link diagrams on closed
//! orientable surfaces combinatorially, converts between the two, and decides
//! splitness, primeness (pairwise, weak, strong), nugatory crossings, and
//! lasso numbers, emitting a verifiable certificate for every verdict.

pub mod certificate;
pub mod codes;
pub mod corpus;
pub mod lasso;
pub mod primeness;
pub mod surface_map;
pub mod virtualize;

pub use certificate::Certificate;
pub use codes::{parse_gauss, parse_pd, GaussCode, ParseError, PdCode};
pub use surface_map::{from_virtual, realize_gauss, SurfaceDiagram};
