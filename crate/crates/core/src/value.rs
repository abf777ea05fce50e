//! Scalars, tuples and row keys.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::SchemaError;

/// The kind of values a vertex label admits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum TypeKind {
    Enumerated(Vec<String>),
    Integer,
    Text,
    Date,
}

/// A named datatype. Vertices of a schema are labeled by these.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataType {
    name: String,
    kind: TypeKind,
}

impl DataType {
    pub fn new(name: impl Into<String>, kind: TypeKind) -> Self {
        DataType { name: name.into(), kind }
    }

    pub fn integer(name: impl Into<String>) -> Self {
        Self::new(name, TypeKind::Integer)
    }

    pub fn text(name: impl Into<String>) -> Self {
        Self::new(name, TypeKind::Text)
    }

    pub fn date(name: impl Into<String>) -> Self {
        Self::new(name, TypeKind::Date)
    }

    pub fn enumerated<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Self::new(name, TypeKind::Enumerated(values.into_iter().map(Into::into).collect()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &TypeKind {
        &self.kind
    }

    pub fn is_enumerated(&self) -> bool {
        matches!(self.kind, TypeKind::Enumerated(_))
    }

    /// All values of an enumerated type, in declaration order.
    pub fn values(&self) -> Option<Vec<Value>> {
        match &self.kind {
            TypeKind::Enumerated(vs) => Some(vs.iter().cloned().map(Value::Sym).collect()),
            _ => None,
        }
    }

    pub fn conforms(&self, value: &Value) -> bool {
        match (&self.kind, value) {
            (TypeKind::Enumerated(vs), Value::Sym(s)) => vs.iter().any(|v| v == s),
            (TypeKind::Integer, Value::Int(_)) => true,
            (TypeKind::Text, Value::Text(_)) => true,
            (TypeKind::Date, Value::Date(_)) => true,
            _ => false,
        }
    }

    /// Problems with the declaration itself (empty or repeated enumerations).
    pub fn declaration_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let TypeKind::Enumerated(vs) = &self.kind {
            if vs.is_empty() {
                out.push(format!("enumerated type `{}` has no values", self.name));
            }
            let mut seen = std::collections::BTreeSet::new();
            for v in vs {
                if !seen.insert(v) {
                    out.push(format!("enumerated type `{}` repeats value `{v}`", self.name));
                }
            }
        }
        out
    }

    /// Reads a JSON scalar as a value of this type.
    pub fn parse_json(&self, json: &serde_json::Value) -> Result<Value, String> {
        let value = match (&self.kind, json) {
            (TypeKind::Integer, serde_json::Value::Number(n)) => {
                Value::Int(n.as_i64().ok_or_else(|| format!("`{n}` is not a 64-bit integer"))?)
            }
            (TypeKind::Text, serde_json::Value::String(s)) => Value::Text(s.clone()),
            (TypeKind::Enumerated(_), serde_json::Value::String(s)) => Value::Sym(s.clone()),
            (TypeKind::Date, serde_json::Value::String(s)) => Value::Date(
                NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("bad date `{s}`: {e}"))?,
            ),
            _ => return Err(format!("`{json}` is not a value of type `{}`", self.name)),
        };
        if self.conforms(&value) {
            Ok(value)
        } else {
            Err(format!("`{value}` is not a value of type `{}`", self.name))
        }
    }
}

/// Datatypes by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    types: BTreeMap<String, DataType>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, datatype: DataType) -> Result<Self, SchemaError> {
        self.insert(datatype)?;
        Ok(self)
    }

    pub fn insert(&mut self, datatype: DataType) -> Result<(), SchemaError> {
        if let Some(problem) = datatype.declaration_problems().into_iter().next() {
            return Err(SchemaError::InvalidDataType(problem));
        }
        if self.types.contains_key(datatype.name()) {
            return Err(SchemaError::DuplicateDataType(datatype.name().to_owned()));
        }
        self.types.insert(datatype.name().to_owned(), datatype);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&DataType> {
        self.types.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DataType> {
        self.types.values()
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Union of two registries; a shared name must denote the same type.
    pub fn merged(&self, other: &Registry) -> Result<Registry, SchemaError> {
        let mut out = self.clone();
        for dt in other.iter() {
            match out.types.get(dt.name()) {
                Some(existing) if existing != dt => {
                    return Err(SchemaError::ConflictingDataType(dt.name().to_owned()))
                }
                Some(_) => {}
                None => {
                    out.types.insert(dt.name().to_owned(), dt.clone());
                }
            }
        }
        Ok(out)
    }
}

/// A typed scalar.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Text(String),
    Date(NaiveDate),
    Sym(String),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => serde_json::Value::from(*i),
            Value::Text(s) | Value::Sym(s) => serde_json::Value::from(s.clone()),
            Value::Date(d) => serde_json::Value::from(d.format("%Y-%m-%d").to_string()),
        }
    }

    pub fn date(s: &str) -> Value {
        Value::Date(NaiveDate::parse_from_str(s, "%Y-%m-%d").expect("ISO date"))
    }

    pub fn sym(s: &str) -> Value {
        Value::Sym(s.to_owned())
    }

    pub fn text(s: &str) -> Value {
        Value::Text(s.to_owned())
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Text(s) | Value::Sym(s) => write!(f, "{s}"),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

/// One value per vertex slot of a simplex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tuple(pub Vec<Value>);

impl Tuple {
    pub fn new(values: Vec<Value>) -> Self {
        Tuple(values)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, slot: usize) -> Option<&Value> {
        self.0.get(slot)
    }

    /// The tuple with one slot deleted.
    pub fn without(&self, slot: usize) -> Tuple {
        let mut v = self.0.clone();
        v.remove(slot);
        Tuple(v)
    }

    /// The tuple with the given (ascending, distinct) slots deleted.
    pub fn without_slots(&self, slots: &[usize]) -> Tuple {
        Tuple(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| !slots.contains(i))
                .map(|(_, v)| v.clone())
                .collect(),
        )
    }

    /// Reorders slots: new slot `a` holds old slot `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Tuple {
        Tuple(perm.iter().map(|&p| self.0[p].clone()).collect())
    }

    pub fn concat(&self, other: &Tuple) -> Tuple {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Tuple(v)
    }
}

impl From<Vec<Value>> for Tuple {
    fn from(v: Vec<Value>) -> Self {
        Tuple(v)
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Builds a tuple from anything convertible to values: `tuple![10, 13]`.
#[macro_export]
macro_rules! tuple {
    ($($v:expr),* $(,)?) => {
        $crate::value::Tuple(vec![$($crate::value::Value::from($v)),*])
    };
}

impl From<&str> for Value {
    /// Strings become enumerated symbols; use [`Value::text`] for free text.
    fn from(s: &str) -> Self {
        Value::Sym(s.to_owned())
    }
}

impl From<i32> for Value {
    fn from(i: i32) -> Self {
        Value::Int(i64::from(i))
    }
}

/// Opaque row key. Keys are unique within a table; attributes need not be.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Key(pub String);

impl Key {
    pub fn new(s: impl Into<String>) -> Self {
        Key(s.into())
    }

    /// Sequential key used for projections, unions and rebuilt tables.
    pub fn seq(n: usize) -> Self {
        Key(n.to_string())
    }

    /// Pair encoding used for fiber products.
    pub fn pair(a: &Key, b: &Key) -> Self {
        Key(format!("({},{})", a.0, b.0))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Key {
    fn from(s: &str) -> Self {
        Key(s.to_owned())
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
