//! Workspaces: a sheaf assembled from dropped tiles, its layout, the
//! provenance of each dropped tile and the log that rebuilds it.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::document::{
    check_version, concrete_to_doc, schema_from_docs, schema_to_docs, sheaf_from_docs, sheaf_to_docs,
    to_canonical_json, tuple_from_json, tuple_to_json, DataTypeDoc, KeyMapDoc, SimplexDoc, TableDoc, VERSION,
};
use crate::error::{SchemaError, ServiceError};
use crate::merge::{disjoint_sheaves, glue_sheaves, glue_within_sheaf, Policy};
use crate::query::{evaluate, QueryResult, Selection, WireStep, Zigzag};
use crate::realization::{curve_to_zigzag, layout_document, layout_schema, Layout, LayoutDocument, Point};
use crate::schema::{Schema, SimplexId, SlotMatching};
use crate::sheaf::Sheaf;
use crate::table::Table;
use crate::tile::{Provenance, Tile, TileDocument};
use crate::value::{Key, Registry, Tuple};

/// Where a tile is attached: a workspace simplex, a simplex of the tile, and
/// the slot matching between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub workspace: SimplexId,
    pub tile: SimplexId,
    pub matching: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LogEntry {
    Drop {
        namespace: String,
        tile: TileDocument,
        #[serde(default)]
        attachment: Option<Attachment>,
        #[serde(default)]
        policy: Option<Policy>,
    },
    Glue {
        x1: SimplexId,
        x2: SimplexId,
        matching: Vec<usize>,
        #[serde(default)]
        policy: Option<Policy>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Workspace {
    sheaf: Sheaf,
    layout: Layout,
    provenance: BTreeMap<String, Provenance>,
    log: Vec<LogEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceDocument {
    pub version: u64,
    pub datatypes: Vec<DataTypeDoc>,
    pub simplices: Vec<SimplexDoc>,
    pub tables: Vec<TableDoc>,
    pub keymaps: Vec<KeyMapDoc>,
    pub layout: Layout,
    pub provenance: BTreeMap<String, Provenance>,
    pub log: Vec<LogEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QueryInput {
    Zigzag(Zigzag),
    Polyline(Vec<Point>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SelectionSpec {
    Keys(Vec<Key>),
    Values(Vec<Tuple>),
    All,
}

/// Query body of the service. With neither `keys` nor `values` the whole
/// start table is selected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zigzag: Option<Vec<WireStep>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polyline: Option<Vec<Point>>,
    #[serde(default)]
    pub select: SelectRequest,
    #[serde(default)]
    pub dedup: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keys: Option<Vec<Key>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Vec<serde_json::Value>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub zigzag: Vec<WireStep>,
    pub start: SimplexId,
    pub end: SimplexId,
    pub graph: TableDoc,
}

/// What a click on a simplex shows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableView {
    pub simplex: SimplexId,
    pub dim: usize,
    pub columns: Vec<SimplexId>,
    pub labels: Vec<String>,
    #[serde(rename = "virtual")]
    pub is_virtual: bool,
    pub description: Option<String>,
    pub keys: Vec<Key>,
    pub rows: Vec<Vec<serde_json::Value>>,
    pub verified: bool,
    pub provenance: Option<Provenance>,
    pub age_seconds: Option<i64>,
}

/// Simplices above this dimension are drawn as their 1-skeleton.
pub const MAX_DRAWN_DIM: usize = 3;

impl Workspace {
    pub fn new(seed: u64) -> Workspace {
        Workspace {
            sheaf: Sheaf::new(Schema::new(Registry::new())),
            layout: Layout::from_points(seed, []),
            provenance: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    pub fn sheaf(&self) -> &Sheaf {
        &self.sheaf
    }

    pub fn schema(&self) -> &Schema {
        self.sheaf.schema()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn seed(&self) -> u64 {
        self.layout.seed
    }

    pub fn provenance(&self) -> &BTreeMap<String, Provenance> {
        &self.provenance
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    /// Provenance of the tile a simplex came from.
    pub fn origin(&self, simplex: &SimplexId) -> Option<&Provenance> {
        let (ns, _) = simplex.as_str().split_once('.')?;
        self.provenance.get(ns)
    }

    /// Notes about simplices too large to draw faithfully.
    pub fn warnings(&self) -> Vec<String> {
        self.schema()
            .simplices()
            .filter(|s| s.dim > MAX_DRAWN_DIM)
            .map(|s| format!("`{}` has dimension {} and is drawn as its 1-skeleton", s.id, s.dim))
            .collect()
    }

    /// A namespace derived from `name` that no simplex or tile uses yet.
    pub fn fresh_namespace(&self, name: &str) -> String {
        let mut base: String =
            name.chars().map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
        if base.is_empty() {
            base = "tile".into();
        }
        let taken = |ns: &str| {
            self.provenance.contains_key(ns) || self.schema().ids().any(|id| id.as_str().starts_with(&format!("{ns}.")))
        };
        let mut candidate = base.clone();
        let mut n = 2;
        while taken(&candidate) {
            candidate = format!("{base}_{n}");
            n += 1;
        }
        candidate
    }

    /// Adds a tile. Without an attachment it is placed beside the current
    /// schema. A policy must be given when the whole tile lands on a simplex
    /// and both tables are concrete; otherwise it defaults to
    /// [`Policy::Universal`].
    pub fn drop_tile(
        &self,
        tile: &Tile,
        attachment: Option<Attachment>,
        policy: Option<Policy>,
    ) -> Result<Workspace, ServiceError> {
        let namespace = self.fresh_namespace(tile.name());
        self.apply(&LogEntry::Drop { namespace, tile: TileDocument::from_tile(tile), attachment, policy })
    }

    /// Identifies two simplices of the workspace.
    pub fn glue(
        &self,
        x1: &SimplexId,
        x2: &SimplexId,
        matching: &SlotMatching,
        policy: Option<Policy>,
    ) -> Result<Workspace, ServiceError> {
        self.apply(&LogEntry::Glue { x1: x1.clone(), x2: x2.clone(), matching: matching.0.clone(), policy })
    }

    pub fn apply(&self, entry: &LogEntry) -> Result<Workspace, ServiceError> {
        let mut provenance = self.provenance.clone();
        let sheaf = match entry {
            LogEntry::Drop { namespace, tile, attachment, policy } => {
                if namespace.is_empty() || namespace.contains('.') || provenance.contains_key(namespace) {
                    return Err(ServiceError::BadTile(format!("namespace `{namespace}` is unusable")));
                }
                let tile = tile.to_tile()?;
                let local = tile.namespaced(namespace)?;
                let tile_sheaf = local.sheaf()?;
                provenance.insert(namespace.clone(), tile.provenance().clone());
                match attachment {
                    None => disjoint_sheaves(&self.sheaf, &tile_sheaf)?.0,
                    Some(a) => {
                        let x2 = SimplexId::new(format!("{namespace}.{}", a.tile));
                        if !local.schema().contains(&x2) {
                            return Err(SchemaError::UnknownSimplex(a.tile.clone()).into());
                        }
                        let both_concrete = matches!(self.sheaf.table(&a.workspace), Some(Table::Concrete(_)))
                            && !tile.is_virtual();
                        let policy = match policy {
                            Some(p) => *p,
                            None if both_concrete && &x2 == local.top() => return Err(ServiceError::PolicyRequired),
                            None => Policy::Universal,
                        };
                        let m = SlotMatching(a.matching.clone());
                        glue_sheaves(&self.sheaf, &a.workspace, &tile_sheaf, &x2, &m, policy)?.0
                    }
                }
            }
            LogEntry::Glue { x1, x2, matching, policy } => {
                let m = SlotMatching(matching.clone());
                glue_within_sheaf(&self.sheaf, x1, x2, &m, policy.unwrap_or(Policy::Universal))?.0
            }
        };
        let report = sheaf.validate();
        if !report.is_empty() {
            return Err(crate::error::SheafError::Invalid(report).into());
        }
        let layout = layout_schema(sheaf.schema(), self.seed());
        let mut log = self.log.clone();
        log.push(entry.clone());
        Ok(Workspace { sheaf, layout, provenance, log })
    }

    /// Rebuilds a workspace from an empty one.
    pub fn replay(seed: u64, log: &[LogEntry]) -> Result<Workspace, ServiceError> {
        log.iter().try_fold(Workspace::new(seed), |ws, entry| ws.apply(entry))
    }

    pub fn to_zigzag(&self, input: &QueryInput) -> Result<Zigzag, ServiceError> {
        match input {
            QueryInput::Zigzag(z) => {
                z.validate(self.schema())?;
                Ok(z.clone())
            }
            QueryInput::Polyline(p) => Ok(curve_to_zigzag(self.schema(), &self.layout, p)?),
        }
    }

    pub fn run_query(&self, input: &QueryInput, selection: &SelectionSpec) -> Result<QueryResult, ServiceError> {
        let z = self.to_zigzag(input)?;
        let sel = match selection {
            SelectionSpec::Keys(k) => Selection::from_keys(&self.sheaf, &z.start, k)?,
            SelectionSpec::Values(v) => Selection::from_values(&self.sheaf, &z.start, v)?,
            SelectionSpec::All => Selection::all(&self.sheaf, &z.start)?,
        };
        Ok(evaluate(&self.sheaf, &z, &sel)?)
    }

    pub fn query_request(&self, req: &QueryRequest) -> Result<QueryResponse, ServiceError> {
        let input = match (&req.zigzag, &req.polyline) {
            (Some(w), None) => QueryInput::Zigzag(Zigzag::from_wire(self.schema(), w)?),
            (None, Some(p)) => QueryInput::Polyline(p.clone()),
            _ => return Err(ServiceError::Document("give exactly one of `zigzag` and `polyline`".into())),
        };
        let z = self.to_zigzag(&input)?;
        let selection = match (&req.select.keys, &req.select.values) {
            (Some(k), None) => SelectionSpec::Keys(k.clone()),
            (None, Some(rows)) => SelectionSpec::Values(
                rows.iter().map(|r| tuple_from_json(self.schema(), &z.start, r)).collect::<Result<_, _>>()?,
            ),
            (None, None) => SelectionSpec::All,
            (Some(_), Some(_)) => {
                return Err(ServiceError::Document("select by `keys` or by `values`, not both".into()))
            }
        };
        let result = self.run_query(&QueryInput::Zigzag(z.clone()), &selection)?;
        Ok(QueryResponse {
            zigzag: z.to_wire(),
            start: z.start.clone(),
            end: z.end().clone(),
            graph: concrete_to_doc(&result.graph_table(req.dedup)),
        })
    }

    /// The table over `simplex`: all rows when concrete, a description and
    /// `samples` members when virtual.
    pub fn table_view(&self, simplex: &SimplexId, samples: usize, now: DateTime<Utc>) -> Result<TableView, ServiceError> {
        let schema = self.schema();
        let s = schema.get(simplex)?;
        let origin = self.origin(simplex);
        let (is_virtual, description, keys, rows) = match self.sheaf.table(simplex) {
            Some(Table::Concrete(c)) => (false, None, c.keys().cloned().collect(), c.tuples().map(tuple_to_json).collect()),
            other => {
                let v = match other {
                    Some(Table::Virtual(v)) => v.clone(),
                    _ => self.sheaf.gamma(simplex)?,
                };
                (true, Some(v.description()), Vec::new(), v.samples(samples).iter().map(tuple_to_json).collect())
            }
        };
        Ok(TableView {
            simplex: simplex.clone(),
            dim: s.dim,
            columns: schema.vertex_slots(simplex)?,
            labels: schema.slot_labels(simplex)?,
            is_virtual,
            description,
            keys,
            rows,
            verified: origin.is_some_and(|p| p.verified),
            provenance: origin.cloned(),
            age_seconds: origin.map(|p| p.age(now).num_seconds()),
        })
    }

    pub fn layout_document(&self) -> Result<LayoutDocument, ServiceError> {
        Ok(layout_document(self.schema(), &self.layout)?)
    }

    pub fn to_document(&self) -> WorkspaceDocument {
        let (datatypes, simplices) = schema_to_docs(self.schema());
        let (tables, keymaps) = sheaf_to_docs(&self.sheaf);
        WorkspaceDocument {
            version: VERSION,
            datatypes,
            simplices,
            tables,
            keymaps,
            layout: self.layout.clone(),
            provenance: self.provenance.clone(),
            log: self.log.clone(),
        }
    }

    pub fn from_document(doc: &WorkspaceDocument) -> Result<Workspace, ServiceError> {
        check_version(doc.version)?;
        let schema = schema_from_docs(&doc.datatypes, &doc.simplices)?;
        let sheaf = sheaf_from_docs(schema, &doc.tables, &doc.keymaps)?;
        let vertices: Vec<&SimplexId> = sheaf.schema().vertices().map(|v| &v.id).collect();
        if vertices.len() != doc.layout.points.len() || vertices.iter().any(|v| !doc.layout.points.contains_key(*v)) {
            return Err(ServiceError::Document("layout must place every vertex exactly once".into()));
        }
        if doc.layout.points.values().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(ServiceError::Document("layout has a non-finite coordinate".into()));
        }
        for p in doc.provenance.values() {
            p.check()?;
        }
        Ok(Workspace {
            sheaf,
            layout: doc.layout.clone(),
            provenance: doc.provenance.clone(),
            log: doc.log.clone(),
        })
    }

    /// Canonical document text.
    pub fn save(&self) -> String {
        to_canonical_json(&self.to_document())
    }

    pub fn load(text: &str) -> Result<Workspace, ServiceError> {
        let doc: WorkspaceDocument = serde_json::from_str(text)?;
        Workspace::from_document(&doc)
    }

    /// Whether replaying the log reproduces this workspace.
    pub fn log_reproduces(&self) -> Result<bool, ServiceError> {
        Ok(&Workspace::replay(self.seed(), &self.log)? == self)
    }
}
