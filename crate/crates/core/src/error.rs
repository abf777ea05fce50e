use thiserror::Error;

use crate::schema::{SchemaViolation, SimplexId};
use crate::sheaf::SheafViolation;
use crate::value::Key;

fn list<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemaError {
    #[error("datatype `{0}` is declared twice")]
    DuplicateDataType(String),
    #[error("invalid datatype: {0}")]
    InvalidDataType(String),
    #[error("datatype `{0}` has conflicting declarations")]
    ConflictingDataType(String),
    #[error("unknown datatype `{0}`")]
    UnknownDataType(String),
    #[error("unknown simplex `{0}`")]
    UnknownSimplex(SimplexId),
    #[error("simplex id `{0}` is used twice")]
    DuplicateSimplex(SimplexId),
    #[error("a representable needs at least one label")]
    EmptyLabels,
    #[error("cannot glue `{left}` (dimension {left_dim}) to `{right}` (dimension {right_dim})")]
    DimensionMismatch {
        left: SimplexId,
        left_dim: usize,
        right: SimplexId,
        right_dim: usize,
    },
    #[error("slot {slot}: label `{left}` does not match `{right}`")]
    LabelMismatch { slot: usize, left: String, right: String },
    #[error("invalid slot matching: {0}")]
    BadMatching(String),
    #[error("slot matching cannot be realized by re-indexing: {0}")]
    MatchingNotRealizable(String),
    #[error("`{face}` is not a face of `{simplex}`")]
    BadFaceMap { simplex: SimplexId, face: String },
    #[error("schema is invalid: {}", list(.0))]
    Invalid(Vec<SchemaViolation>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SheafError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("row `{key}` of `{simplex}` does not conform: {detail}")]
    NonConforming { simplex: SimplexId, key: Key, detail: String },
    #[error("key `{key}` appears twice in the table of `{simplex}`")]
    DuplicateKey { simplex: SimplexId, key: Key },
    #[error("face table of `{simplex}` at face {face} is not the projection image")]
    FaceMismatch { simplex: SimplexId, face: usize },
    #[error("key map of `{simplex}` at face {face} breaks commutation at key `{key}`")]
    Commuting { simplex: SimplexId, face: usize, key: Key },
    #[error("key map of `{simplex}` at face {face} is not total (missing `{key}`)")]
    NotTotal { simplex: SimplexId, face: usize, key: Key },
    #[error("no table over `{simplex}` at face {face} to map into")]
    MissingFaceTable { simplex: SimplexId, face: usize },
    #[error("no row of face {face} of `{simplex}` matches row `{key}`")]
    NoFaceRow { simplex: SimplexId, face: usize, key: Key },
    #[error("row `{key}` of `{simplex}` matches several rows of face {face}")]
    AmbiguousFaceRow { simplex: SimplexId, face: usize, key: Key },
    #[error("table over `{0}` is virtual; a concrete table is required")]
    NotConcrete(SimplexId),
    #[error("tables live over different simplices (`{0}` and `{1}`)")]
    SimplexMismatch(SimplexId, SimplexId),
    #[error("face index {index} is out of range for `{simplex}`")]
    FaceIndex { simplex: SimplexId, index: usize },
    #[error("completion over `{simplex}` is not enumerable: {detail}")]
    NotEnumerable { simplex: SimplexId, detail: String },
    #[error("table over `{0}` is referenced by coface key maps and cannot be replaced")]
    TableInUse(SimplexId),
    #[error("invalid virtual table: {0}")]
    BadBuiltin(String),
    #[error("sheaf is invalid: {}", list(.0))]
    Invalid(Vec<SheafViolation>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error("`{0}` and `{1}` are not face-incident")]
    NotIncident(SimplexId, SimplexId),
    #[error("a zigzag needs at least one simplex")]
    EmptySequence,
    #[error("step {step}: {detail}")]
    BadStep { step: usize, detail: String },
    #[error("no table over `{0}`")]
    MissingTable(SimplexId),
    #[error("selection is over `{selection}` but the zigzag starts at `{zigzag}`")]
    SelectionMismatch { selection: SimplexId, zigzag: SimplexId },
    #[error("zigzags do not share endpoints: {0}")]
    EndpointMismatch(String),
    #[error("key `{key}` is not a row of `{simplex}`")]
    UnknownKey { simplex: SimplexId, key: Key },
    #[error("`{value}` is not in the table over `{simplex}`")]
    NotInTable { simplex: SimplexId, value: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("dimension must be non-negative, got {0}")]
    NegativeDimension(i64),
    #[error("barycentric coordinates {0:?} are not in the standard simplex")]
    NotBarycentric(Vec<f64>),
    #[error("a polyline needs at least one point")]
    EmptyPolyline,
    #[error("polyline contains a non-finite coordinate")]
    NonFinite,
    #[error("the curve {0} lies outside the schema")]
    OutsideStart(&'static str),
    #[error("the curve leaves the schema for {length:.4} (guard {guard:.4}) near ({x:.4}, {y:.4})")]
    Gap { length: f64, guard: f64, x: f64, y: f64 },
    #[error("the curve jumps from `{0}` to `{1}`, which are not incident")]
    NotIncident(SimplexId, SimplexId),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServiceError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("malformed document: {0}")]
    Document(String),
    #[error("unsupported document version {0}")]
    Version(u64),
    #[error("unknown virtual builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid provenance: {0}")]
    Provenance(String),
    #[error("tile is malformed: {0}")]
    BadTile(String),
    #[error("both glued tables are concrete; choose intersect, union_all or union_dedup")]
    PolicyRequired,
    #[error("unknown tile `{0}`")]
    UnknownTile(String),
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        ServiceError::Document(e.to_string())
    }
}
