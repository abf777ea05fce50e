//! JSON documents for schemas, sheaves, tiles and workspaces.
//!
//! Field order is fixed by the struct definitions and every map is a
//! `BTreeMap`, so serializing the same value twice yields the same bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{SchemaError, ServiceError, SheafError};
use crate::schema::{Schema, Simplex, SimplexId};
use crate::sheaf::{KeyMap, Sheaf};
use crate::table::{Builtin, ConcreteTable, Table, VirtualTable};
use crate::value::{DataType, Key, Registry, Tuple, TypeKind, Value};

pub const VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataTypeDoc {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexDoc {
    pub id: SimplexId,
    pub dim: usize,
    pub faces: Vec<SimplexId>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualDoc {
    pub builtin: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

/// A concrete table (`keys` and `rows`) or a virtual one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableDoc {
    pub simplex: SimplexId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keys: Option<Vec<Key>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<serde_json::Value>>>,
    #[serde(default, rename = "virtual", skip_serializing_if = "Option::is_none")]
    pub virtual_table: Option<VirtualDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyMapDoc {
    pub simplex: SimplexId,
    pub face: usize,
    pub map: BTreeMap<Key, Key>,
}

fn bad(msg: impl Into<String>) -> ServiceError {
    ServiceError::Document(msg.into())
}

pub fn datatype_to_doc(dt: &DataType) -> DataTypeDoc {
    let (kind, values) = match dt.kind() {
        TypeKind::Enumerated(vs) => ("enumerated", Some(vs.clone())),
        TypeKind::Integer => ("integer", None),
        TypeKind::Text => ("text", None),
        TypeKind::Date => ("date", None),
    };
    DataTypeDoc { name: dt.name().to_owned(), kind: kind.to_owned(), values }
}

pub fn datatype_from_doc(doc: &DataTypeDoc) -> Result<DataType, ServiceError> {
    let kind = match (doc.kind.as_str(), &doc.values) {
        ("enumerated", Some(vs)) => TypeKind::Enumerated(vs.clone()),
        ("enumerated", None) => return Err(bad(format!("enumerated type `{}` lists no values", doc.name))),
        ("integer", None) => TypeKind::Integer,
        ("text", None) => TypeKind::Text,
        ("date", None) => TypeKind::Date,
        (k, Some(_)) if matches!(k, "integer" | "text" | "date") => {
            return Err(bad(format!("type `{}` of kind {k} cannot list values", doc.name)))
        }
        (k, _) => return Err(bad(format!("unknown datatype kind `{k}`"))),
    };
    Ok(DataType::new(doc.name.clone(), kind))
}

pub fn schema_to_docs(schema: &Schema) -> (Vec<DataTypeDoc>, Vec<SimplexDoc>) {
    let types = schema.registry().iter().map(datatype_to_doc).collect();
    let simplices = schema
        .simplices()
        .map(|s| SimplexDoc { id: s.id.clone(), dim: s.dim, faces: s.faces.clone(), label: s.label.clone() })
        .collect();
    (types, simplices)
}

/// Builds and validates a schema.
pub fn schema_from_docs(types: &[DataTypeDoc], simplices: &[SimplexDoc]) -> Result<Schema, ServiceError> {
    let mut registry = Registry::new();
    for t in types {
        registry.insert(datatype_from_doc(t)?)?;
    }
    let parts = simplices.iter().map(|s| Simplex::raw(s.id.clone(), s.dim, s.faces.clone(), s.label.clone()));
    let schema = Schema::from_parts(registry, parts)?;
    let report = schema.validate();
    if !report.is_empty() {
        return Err(SchemaError::Invalid(report).into());
    }
    Ok(schema)
}

pub fn builtin_to_doc(b: &Builtin) -> VirtualDoc {
    let mut params = BTreeMap::new();
    match b {
        Builtin::Gamma => {}
        Builtin::Addition { summands, sum } => {
            params.insert("summands".to_owned(), serde_json::json!(summands));
            params.insert("sum".to_owned(), serde_json::json!(sum));
        }
        Builtin::Difference { d, source, target } => {
            params.insert("d".to_owned(), serde_json::json!(d));
            params.insert("source".to_owned(), serde_json::json!(source));
            params.insert("target".to_owned(), serde_json::json!(target));
        }
    }
    VirtualDoc { builtin: b.name().to_owned(), params }
}

pub fn builtin_from_doc(doc: &VirtualDoc) -> Result<Builtin, ServiceError> {
    fn param<T: serde::de::DeserializeOwned>(doc: &VirtualDoc, name: &str, default: T) -> Result<T, ServiceError> {
        match doc.params.get(name) {
            None => Ok(default),
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| bad(format!("parameter `{name}` of `{}`: {e}", doc.builtin))),
        }
    }
    match doc.builtin.as_str() {
        "gamma" => Ok(Builtin::Gamma),
        "addition" => Ok(Builtin::Addition {
            summands: param(doc, "summands", [0, 1])?,
            sum: param(doc, "sum", 2)?,
        }),
        "difference" => Ok(Builtin::Difference {
            d: doc.params.get("d").and_then(|v| v.as_i64()).ok_or_else(|| bad("`difference` needs an integer `d`"))?,
            source: param(doc, "source", 0)?,
            target: param(doc, "target", 1)?,
        }),
        other => Err(ServiceError::UnknownBuiltin(other.to_owned())),
    }
}

pub fn tuple_to_json(t: &Tuple) -> Vec<serde_json::Value> {
    t.values().iter().map(Value::to_json).collect()
}

/// Reads a JSON row against the slot types of `simplex`.
pub fn tuple_from_json(schema: &Schema, simplex: &SimplexId, row: &[serde_json::Value]) -> Result<Tuple, ServiceError> {
    let types = schema.slot_types(simplex)?;
    if row.len() != types.len() {
        return Err(bad(format!("row {row:?} over `{simplex}` needs {} values", types.len())));
    }
    let values = types
        .iter()
        .zip(row)
        .map(|(t, v)| t.parse_json(v).map_err(|e| bad(format!("over `{simplex}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Tuple(values))
}

pub fn concrete_to_doc(t: &ConcreteTable) -> TableDoc {
    TableDoc {
        simplex: t.simplex().clone(),
        keys: Some(t.keys().cloned().collect()),
        rows: Some(t.tuples().map(tuple_to_json).collect()),
        virtual_table: None,
    }
}

pub fn table_to_doc(t: &Table) -> TableDoc {
    match t {
        Table::Concrete(c) => concrete_to_doc(c),
        Table::Virtual(v) => TableDoc {
            simplex: v.simplex().clone(),
            keys: None,
            rows: None,
            virtual_table: Some(builtin_to_doc(v.builtin())),
        },
    }
}

/// Keys default to `0`, `1`, ... when omitted.
pub fn table_from_doc(schema: &Schema, doc: &TableDoc) -> Result<Table, ServiceError> {
    match (&doc.virtual_table, &doc.rows) {
        (Some(v), None) => {
            if doc.keys.is_some() {
                return Err(bad(format!("virtual table over `{}` cannot list keys", doc.simplex)));
            }
            let types = schema.slot_types(&doc.simplex)?;
            Ok(Table::Virtual(VirtualTable::new(doc.simplex.clone(), builtin_from_doc(v)?, types)?))
        }
        (None, Some(rows)) => {
            let keys: Vec<Key> = match &doc.keys {
                Some(k) if k.len() == rows.len() => k.clone(),
                Some(k) => {
                    return Err(bad(format!(
                        "table over `{}` has {} keys for {} rows",
                        doc.simplex,
                        k.len(),
                        rows.len()
                    )))
                }
                None => (0..rows.len()).map(Key::seq).collect(),
            };
            let tuples = rows
                .iter()
                .map(|r| tuple_from_json(schema, &doc.simplex, r))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Table::Concrete(ConcreteTable::new(doc.simplex.clone(), keys.into_iter().zip(tuples).collect())?))
        }
        _ => Err(bad(format!("table over `{}` needs either rows or a virtual builtin", doc.simplex))),
    }
}

pub fn sheaf_to_docs(sheaf: &Sheaf) -> (Vec<TableDoc>, Vec<KeyMapDoc>) {
    let tables = sheaf.tables().values().map(table_to_doc).collect();
    let maps = sheaf
        .key_maps()
        .iter()
        .map(|((s, i), m)| KeyMapDoc { simplex: s.clone(), face: *i, map: m.0.clone() })
        .collect();
    (tables, maps)
}

/// Builds and validates a sheaf over `schema`.
pub fn sheaf_from_docs(schema: Schema, tables: &[TableDoc], maps: &[KeyMapDoc]) -> Result<Sheaf, ServiceError> {
    let mut ts = BTreeMap::new();
    for doc in tables {
        if ts.insert(doc.simplex.clone(), table_from_doc(&schema, doc)?).is_some() {
            return Err(bad(format!("two tables over `{}`", doc.simplex)));
        }
    }
    let mut ms = BTreeMap::new();
    for doc in maps {
        if ms.insert((doc.simplex.clone(), doc.face), KeyMap(doc.map.clone())).is_some() {
            return Err(bad(format!("two key maps for face {} of `{}`", doc.face, doc.simplex)));
        }
    }
    let sheaf = Sheaf::from_parts(schema, ts, ms);
    let report = sheaf.validate();
    if !report.is_empty() {
        return Err(SheafError::Invalid(report).into());
    }
    Ok(sheaf)
}

/// Pretty JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

pub(crate) fn check_version(v: u64) -> Result<(), ServiceError> {
    if v == VERSION {
        Ok(())
    } else {
        Err(ServiceError::Version(v))
    }
}

/// Problems with any document this crate reads: a workspace, a tile, or a
/// bare schema (`datatypes` and `simplices`, optionally `tables` and
/// `keymaps`). An empty list means the document is valid.
pub fn validate_document(text: &str) -> Vec<String> {
    let json: serde_json::Value = match serde_json::from_str(text) {
        Ok(j) => j,
        Err(e) => return vec![format!("malformed document: {e}")],
    };
    let result = if json.get("top").is_some() {
        crate::tile::import_tile(text).map(|_| ())
    } else if json.get("log").is_some() {
        crate::workspace::Workspace::load(text).map(|_| ())
    } else {
        (|| {
            #[derive(Deserialize)]
            struct Bare {
                #[serde(default = "one")]
                version: u64,
                datatypes: Vec<DataTypeDoc>,
                simplices: Vec<SimplexDoc>,
                #[serde(default)]
                tables: Vec<TableDoc>,
                #[serde(default)]
                keymaps: Vec<KeyMapDoc>,
            }
            fn one() -> u64 {
                VERSION
            }
            let doc: Bare = serde_json::from_value(json)?;
            check_version(doc.version)?;
            let schema = schema_from_docs(&doc.datatypes, &doc.simplices)?;
            sheaf_from_docs(schema, &doc.tables, &doc.keymaps).map(|_| ())
        })()
    };
    match result {
        Ok(()) => Vec::new(),
        Err(ServiceError::Schema(SchemaError::Invalid(vs))) => vs.iter().map(|v| v.to_string()).collect(),
        Err(ServiceError::Sheaf(SheafError::Invalid(vs))) => vs.iter().map(|v| v.to_string()).collect(),
        Err(e) => vec![e.to_string()],
    }
}
