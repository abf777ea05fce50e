//! Tiles: one simplex with its closure, a table on top, and provenance.

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::document::{
    check_version, schema_from_docs, schema_to_docs, table_from_doc, table_to_doc, to_canonical_json, DataTypeDoc,
    SimplexDoc, TableDoc, VERSION,
};
use crate::error::{ServiceError, SheafError};
use crate::schema::{Schema, Simplex, SimplexId};
use crate::sheaf::Sheaf;
use crate::table::{Builtin, Table};
use crate::value::{DataType, Key, Registry, Tuple, Value};

/// Where a tile came from. `freshness` is the last data refresh.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub created_at: DateTime<Utc>,
    pub verified: bool,
    pub freshness: DateTime<Utc>,
    #[serde(default)]
    pub trademark: Option<String>,
}

impl Provenance {
    pub fn new(source: impl Into<String>, created_at: DateTime<Utc>, verified: bool) -> Self {
        Provenance { source: source.into(), created_at, verified, freshness: created_at, trademark: None }
    }

    pub fn check(&self) -> Result<(), ServiceError> {
        if self.created_at > self.freshness {
            return Err(ServiceError::Provenance(format!(
                "freshness {} precedes creation {}",
                self.freshness, self.created_at
            )));
        }
        Ok(())
    }

    /// Time since the last refresh; never stored.
    pub fn age(&self, now: DateTime<Utc>) -> chrono::Duration {
        now - self.freshness
    }
}

/// The table a tile carries on its top simplex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TileTable {
    Concrete(Vec<(Key, Tuple)>),
    Virtual(Builtin),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    name: String,
    schema: Schema,
    top: SimplexId,
    table: TileTable,
    provenance: Provenance,
}

impl Tile {
    /// Checks that `schema` is the closure of `top` and that the table fits.
    pub fn new(
        name: impl Into<String>,
        schema: Schema,
        top: SimplexId,
        table: TileTable,
        provenance: Provenance,
    ) -> Result<Tile, ServiceError> {
        let name = name.into();
        if name.is_empty() {
            return Err(ServiceError::BadTile("empty name".into()));
        }
        provenance.check()?;
        let report = schema.validate();
        if !report.is_empty() {
            return Err(crate::error::SchemaError::Invalid(report).into());
        }
        let closure = schema.closure(&top)?;
        if let Some(extra) = schema.ids().find(|id| !closure.contains(*id)) {
            return Err(ServiceError::BadTile(format!("`{extra}` is not in the closure of `{top}`")));
        }
        let tile = Tile { name, schema, top, table, provenance };
        tile.sheaf()?;
        Ok(tile)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn top(&self) -> &SimplexId {
        &self.top
    }

    pub fn table(&self) -> &TileTable {
        &self.table
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_virtual(&self) -> bool {
        matches!(self.table, TileTable::Virtual(_))
    }

    /// Concrete tops project onto derived face tables; virtual tops leave
    /// the faces universal.
    pub fn sheaf(&self) -> Result<Sheaf, SheafError> {
        let empty = Sheaf::new(self.schema.clone());
        match &self.table {
            TileTable::Concrete(rows) => empty.set_table(&self.top, rows.clone(), crate::sheaf::KeyMaps::Derive),
            TileTable::Virtual(b) => empty.set_virtual(&self.top, b.clone()),
        }
    }

    /// The tile with every simplex id prefixed by `{namespace}.`.
    pub fn namespaced(&self, namespace: &str) -> Result<Tile, ServiceError> {
        let rename = |id: &SimplexId| SimplexId::new(format!("{namespace}.{id}"));
        let simplices = self
            .schema
            .simplices()
            .map(|s| Simplex::raw(rename(&s.id), s.dim, s.faces.iter().map(rename).collect(), s.label.clone()));
        let schema = Schema::from_parts(self.schema.registry().clone(), simplices)?;
        Ok(Tile { schema, top: rename(&self.top), ..self.clone() })
    }
}

/// Adds `c = a + b` over three integer vertices `a`, `b`, `c` labeled `label`.
/// The summands edge is `ab`.
pub fn addition_tile(label: &str, provenance: Provenance) -> Result<Tile, ServiceError> {
    let reg = Registry::new().with(DataType::integer(label))?;
    let schema = Schema::representable_named(&reg, &[("a", label), ("b", label), ("c", label)])?;
    Tile::new("addition", schema, "abc".into(), TileTable::Virtual(Builtin::addition()), provenance)
}

/// `t - s = d` on an edge `st` between integer vertices labeled `label`.
pub fn difference_tile(label: &str, d: i64, provenance: Provenance) -> Result<Tile, ServiceError> {
    let reg = Registry::new().with(DataType::integer(label))?;
    let schema = Schema::representable_named(&reg, &[("s", label), ("t", label)])?;
    Tile::new(format!("difference {d}"), schema, "st".into(), TileTable::Virtual(Builtin::difference(d)), provenance)
}

/// A single date vertex holding one row.
pub fn todays_date_tile(label: &str, today: NaiveDate, provenance: Provenance) -> Result<Tile, ServiceError> {
    let reg = Registry::new().with(DataType::date(label))?;
    let schema = Schema::representable_named(&reg, &[("today", label)])?;
    let rows = vec![(Key::seq(0), Tuple(vec![Value::Date(today)]))];
    Tile::new("today's date", schema, "today".into(), TileTable::Concrete(rows), provenance)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileDocument {
    pub version: u64,
    pub name: String,
    pub top: SimplexId,
    pub datatypes: Vec<DataTypeDoc>,
    pub simplices: Vec<SimplexDoc>,
    pub tables: Vec<TableDoc>,
    pub provenance: Provenance,
}

impl TileDocument {
    pub fn from_tile(tile: &Tile) -> TileDocument {
        let (datatypes, simplices) = schema_to_docs(&tile.schema);
        let table = match &tile.table {
            TileTable::Concrete(rows) => Table::Concrete(
                crate::table::ConcreteTable::new(tile.top.clone(), rows.clone()).expect("checked at construction"),
            ),
            TileTable::Virtual(b) => Table::Virtual(
                crate::table::VirtualTable::new(
                    tile.top.clone(),
                    b.clone(),
                    tile.schema.slot_types(&tile.top).expect("checked at construction"),
                )
                .expect("checked at construction"),
            ),
        };
        TileDocument {
            version: VERSION,
            name: tile.name.clone(),
            top: tile.top.clone(),
            datatypes,
            simplices,
            tables: vec![table_to_doc(&table)],
            provenance: tile.provenance.clone(),
        }
    }

    pub fn to_tile(&self) -> Result<Tile, ServiceError> {
        check_version(self.version)?;
        let schema = schema_from_docs(&self.datatypes, &self.simplices)?;
        let [doc] = self.tables.as_slice() else {
            return Err(ServiceError::BadTile(format!("a tile has one table, found {}", self.tables.len())));
        };
        if doc.simplex != self.top {
            return Err(ServiceError::BadTile(format!("the table is over `{}`, not the top", doc.simplex)));
        }
        let table = match table_from_doc(&schema, doc)? {
            Table::Concrete(c) => TileTable::Concrete(c.rows().to_vec()),
            Table::Virtual(v) => TileTable::Virtual(v.builtin().clone()),
        };
        Tile::new(self.name.clone(), schema, self.top.clone(), table, self.provenance.clone())
    }
}

pub fn export_tile(tile: &Tile) -> String {
    to_canonical_json(&TileDocument::from_tile(tile))
}

pub fn import_tile(text: &str) -> Result<Tile, ServiceError> {
    let doc: TileDocument = serde_json::from_str(text)?;
    doc.to_tile()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileFilter {
    #[serde(default)]
    pub verified: Option<bool>,
    #[serde(default)]
    pub name_contains: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileSummary {
    pub name: String,
    pub top: SimplexId,
    pub dim: usize,
    pub labels: Vec<String>,
    #[serde(rename = "virtual")]
    pub is_virtual: bool,
    pub description: Option<String>,
    pub rows: Option<usize>,
    pub verified: bool,
    pub source: String,
    pub trademark: Option<String>,
    pub created_at: DateTime<Utc>,
    pub freshness: DateTime<Utc>,
    pub age_seconds: i64,
}

pub fn summarize(tile: &Tile, now: DateTime<Utc>) -> TileSummary {
    let p = &tile.provenance;
    let (description, rows) = match &tile.table {
        TileTable::Virtual(b) => (
            crate::table::VirtualTable::new(tile.top.clone(), b.clone(), tile.schema.slot_types(&tile.top).unwrap_or_default())
                .ok()
                .map(|v| v.description()),
            None,
        ),
        TileTable::Concrete(r) => (None, Some(r.len())),
    };
    TileSummary {
        name: tile.name.clone(),
        top: tile.top.clone(),
        dim: tile.schema.get(&tile.top).map(|s| s.dim).unwrap_or(0),
        labels: tile.schema.slot_labels(&tile.top).unwrap_or_default(),
        is_virtual: tile.is_virtual(),
        description,
        rows,
        verified: p.verified,
        source: p.source.clone(),
        trademark: p.trademark.clone(),
        created_at: p.created_at,
        freshness: p.freshness,
        age_seconds: p.age(now).num_seconds(),
    }
}

pub fn list_tiles(library: &[Tile], filter: &TileFilter, now: DateTime<Utc>) -> Vec<TileSummary> {
    library
        .iter()
        .filter(|t| filter.verified.is_none_or(|v| t.provenance.verified == v))
        .filter(|t| filter.name_contains.as_deref().is_none_or(|s| t.name.contains(s)))
        .map(|t| summarize(t, now))
        .collect()
}
