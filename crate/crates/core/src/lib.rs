//! Simplicial databases: schemas are semi-simplicial sets with labeled
//! vertices, data is a sheaf of tables, queries are zigzags of projections
//! and fiber products.

pub mod document;
pub mod error;
pub mod merge;
pub mod query;
pub mod realization;
pub mod schema;
pub mod sheaf;
pub mod table;
pub mod tile;
pub mod value;
pub mod workspace;

pub use document::validate_document;
pub use error::{LayoutError, QueryError, SchemaError, ServiceError, SheafError};
pub use schema::{find_isomorphism, is_isomorphic, FaceMap, Glued, Schema, Simplex, SimplexId, SlotMatching};
pub use sheaf::{gamma, project_table, KeyMap, KeyMaps, Sheaf, SheafViolation};
pub use table::{fiber_product, union, Builtin, ConcreteTable, Table, UnionMode, VirtualTable};
pub use value::{DataType, Key, Registry, Tuple, TypeKind, Value};
pub use merge::{disjoint_sheaves, glue_sheaves, glue_within_sheaf, Policy};
pub use query::{
    evaluate, graph_table, queries_equal, zigzag_from_sequence, zigzag_from_sequence_with, Comparison, Direction,
    FaceIndex, QueryResult, Selection, WireStep, Witness, Zigzag, ZigzagStep,
};
pub use realization::{
    curve_to_zigzag, layout_document, layout_schema, locate_point, Barycentric, Layout, LayoutDocument, Point,
    Realization, StandardSimplex,
};
pub use tile::{
    addition_tile, difference_tile, export_tile, import_tile, list_tiles, todays_date_tile, Provenance, Tile,
    TileDocument, TileFilter, TileSummary, TileTable,
};
pub use workspace::{
    Attachment, LogEntry, QueryInput, QueryRequest, QueryResponse, SelectRequest, SelectionSpec, TableView, Workspace,
    WorkspaceDocument,
};
