//! Zigzag queries: paths through the category of simplices, evaluated by
//! projecting (descending to a face) and fiber products (ascending to a
//! coface).

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::QueryError;
use crate::schema::{FaceMap, Schema, SimplexId};
use crate::sheaf::{KeyMap, Sheaf};
use crate::table::{ConcreteTable, Table};
use crate::value::{Key, Tuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// From a simplex to one of its faces.
    Descend,
    /// From a face to a simplex containing it.
    Ascend,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigzagStep {
    pub direction: Direction,
    /// Face map relating the two simplices, always read on the larger one.
    pub face: FaceMap,
    pub target: SimplexId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zigzag {
    pub start: SimplexId,
    pub steps: Vec<ZigzagStep>,
}

impl Zigzag {
    pub fn constant(start: SimplexId) -> Self {
        Zigzag { start, steps: Vec::new() }
    }

    pub fn end(&self) -> &SimplexId {
        self.steps.last().map(|s| &s.target).unwrap_or(&self.start)
    }

    pub fn simplices(&self) -> Vec<SimplexId> {
        std::iter::once(self.start.clone()).chain(self.steps.iter().map(|s| s.target.clone())).collect()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.steps.iter().map(|s| s.direction).collect()
    }

    /// Checks every step against the schema.
    pub fn validate(&self, schema: &Schema) -> Result<(), QueryError> {
        schema.get(&self.start)?;
        let mut prev = self.start.clone();
        for (n, step) in self.steps.iter().enumerate() {
            schema.get(&step.target)?;
            let (big, small) = match step.direction {
                Direction::Descend => (&prev, &step.target),
                Direction::Ascend => (&step.target, &prev),
            };
            let bad = |detail: String| QueryError::BadStep { step: n, detail };
            let big_dim = schema.get(big)?.dim;
            let small_dim = schema.get(small)?.dim;
            if step.face.codim() == 0
                || step.face.codim() != big_dim.saturating_sub(small_dim)
                || step.face.deleted().iter().any(|&s| s > big_dim)
            {
                return Err(bad(format!("face {} does not relate `{big}` and `{small}`", step.face)));
            }
            if &schema.face_of(big, &step.face)? != small {
                return Err(bad(format!("face {} of `{big}` is not `{small}`", step.face)));
            }
            prev = step.target.clone();
        }
        Ok(())
    }

    /// Runs `self` then `other`.
    pub fn concat(&self, other: &Zigzag) -> Result<Zigzag, QueryError> {
        if self.end() != &other.start {
            return Err(QueryError::EndpointMismatch(format!(
                "`{}` ends at `{}`, the next starts at `{}`",
                self.start,
                self.end(),
                other.start
            )));
        }
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Ok(Zigzag { start: self.start.clone(), steps })
    }

    pub fn to_wire(&self) -> Vec<WireStep> {
        std::iter::once(WireStep { simplex: self.start.clone(), direction: None, face_index: None })
            .chain(self.steps.iter().map(|s| WireStep {
                simplex: s.target.clone(),
                direction: Some(s.direction),
                face_index: Some(FaceIndex::from(&s.face)),
            }))
            .collect()
    }

    /// Reads the wire form. Steps without direction or face index are inferred
    /// as in [`zigzag_from_sequence`].
    pub fn from_wire(schema: &Schema, wire: &[WireStep]) -> Result<Zigzag, QueryError> {
        let first = wire.first().ok_or(QueryError::EmptySequence)?;
        let mut z = Zigzag::constant(first.simplex.clone());
        let mut prev = first.simplex.clone();
        for (n, w) in wire.iter().enumerate().skip(1) {
            let face = w.face_index.as_ref().map(FaceIndex::to_face_map);
            let step = match (w.direction, face) {
                (Some(direction), Some(face)) => ZigzagStep { direction, face, target: w.simplex.clone() },
                (direction, face) => {
                    let mut step = infer_step(schema, &prev, &w.simplex, face)?;
                    if let Some(d) = direction {
                        if d != step.direction {
                            return Err(QueryError::BadStep {
                                step: n - 1,
                                detail: format!("`{prev}` to `{}` is not {d:?}", w.simplex),
                            });
                        }
                        step.direction = d;
                    }
                    step
                }
            };
            prev = w.simplex.clone();
            z.steps.push(step);
        }
        z.validate(schema)?;
        Ok(z)
    }
}

impl fmt::Display for Zigzag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for s in &self.steps {
            let arrow = match s.direction {
                Direction::Ascend => "^",
                Direction::Descend => "v",
            };
            write!(f, " {arrow}{} {}", s.face, s.target)?;
        }
        Ok(())
    }
}

/// Face index on the wire: one slot or a list of deleted slots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FaceIndex {
    One(usize),
    Many(Vec<usize>),
}

impl FaceIndex {
    pub fn to_face_map(&self) -> FaceMap {
        match self {
            FaceIndex::One(i) => FaceMap::single(*i),
            FaceIndex::Many(v) => FaceMap::new(v.clone()),
        }
    }
}

impl From<&FaceMap> for FaceIndex {
    fn from(f: &FaceMap) -> Self {
        match f.deleted() {
            [one] => FaceIndex::One(*one),
            many => FaceIndex::Many(many.to_vec()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireStep {
    pub simplex: SimplexId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_index: Option<FaceIndex>,
}

fn infer_step(
    schema: &Schema,
    from: &SimplexId,
    to: &SimplexId,
    face: Option<FaceMap>,
) -> Result<ZigzagStep, QueryError> {
    let down = schema.face_maps_between(from, to)?;
    let up = schema.face_maps_between(to, from)?;
    let (direction, options) = if !down.is_empty() {
        (Direction::Descend, down)
    } else if !up.is_empty() {
        (Direction::Ascend, up)
    } else {
        return Err(QueryError::NotIncident(from.clone(), to.clone()));
    };
    let face = match face {
        Some(f) if options.contains(&f) => f,
        Some(f) => {
            return Err(QueryError::BadStep {
                step: 0,
                detail: format!("face {f} does not relate `{from}` and `{to}`"),
            })
        }
        None => options[0].clone(),
    };
    Ok(ZigzagStep { direction, face, target: to.clone() })
}

/// Builds a zigzag from the simplices it visits. Each consecutive pair must be
/// related by a face map; when several relate them the lowest is used.
pub fn zigzag_from_sequence(schema: &Schema, ids: &[SimplexId]) -> Result<Zigzag, QueryError> {
    zigzag_from_sequence_with(schema, ids, &[])
}

/// As [`zigzag_from_sequence`], with `overrides[n]` fixing the face map of
/// step `n` (needed to go around loops).
pub fn zigzag_from_sequence_with(
    schema: &Schema,
    ids: &[SimplexId],
    overrides: &[Option<FaceMap>],
) -> Result<Zigzag, QueryError> {
    let first = ids.first().ok_or(QueryError::EmptySequence)?;
    schema.get(first)?;
    let mut z = Zigzag::constant(first.clone());
    for (n, pair) in ids.windows(2).enumerate() {
        let face = overrides.get(n).cloned().flatten();
        let step = infer_step(schema, &pair[0], &pair[1], face).map_err(|e| match e {
            QueryError::BadStep { detail, .. } => QueryError::BadStep { step: n, detail },
            other => other,
        })?;
        z.steps.push(step);
    }
    Ok(z)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRow {
    pub key: Key,
    /// Row of the sheaf's table at the base that this row maps to, when that
    /// table is concrete.
    pub anchor: Option<Key>,
    pub tuple: Tuple,
}

/// The starting table of a query, with its map into the base table.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    base: SimplexId,
    rows: Vec<SelectionRow>,
}

impl Selection {
    /// The rows of the base table with the given keys.
    pub fn from_keys(sheaf: &Sheaf, base: &SimplexId, keys: &[Key]) -> Result<Selection, QueryError> {
        let table = sheaf
            .concrete(base)
            .ok_or_else(|| QueryError::MissingTable(base.clone()))?;
        let mut rows = Vec::new();
        for k in keys {
            let t = table
                .get(k)
                .ok_or_else(|| QueryError::UnknownKey { simplex: base.clone(), key: k.clone() })?;
            rows.push(SelectionRow { key: k.clone(), anchor: Some(k.clone()), tuple: t.clone() });
        }
        Ok(Selection { base: base.clone(), rows })
    }

    /// Rows by value. Over a concrete table: every row carrying one of the
    /// values. Over a virtual table: a fresh row per value, which must be a
    /// member.
    pub fn from_values(sheaf: &Sheaf, base: &SimplexId, values: &[Tuple]) -> Result<Selection, QueryError> {
        let gamma;
        let table = match sheaf.table(base) {
            Some(t) => t,
            None => {
                gamma = Table::Virtual(sheaf.gamma(base)?);
                &gamma
            }
        };
        match table {
            Table::Concrete(t) => {
                for v in values {
                    if t.keys_with(v).is_empty() {
                        return Err(QueryError::NotInTable { simplex: base.clone(), value: v.to_string() });
                    }
                }
                let rows = t
                    .rows()
                    .iter()
                    .filter(|(_, tup)| values.contains(tup))
                    .map(|(k, tup)| SelectionRow { key: k.clone(), anchor: Some(k.clone()), tuple: tup.clone() })
                    .collect();
                Ok(Selection { base: base.clone(), rows })
            }
            Table::Virtual(v) => {
                let mut rows = Vec::new();
                for (n, t) in values.iter().enumerate() {
                    if !v.contains(t) {
                        return Err(QueryError::NotInTable { simplex: base.clone(), value: t.to_string() });
                    }
                    rows.push(SelectionRow { key: Key::seq(n), anchor: None, tuple: t.clone() });
                }
                Ok(Selection { base: base.clone(), rows })
            }
        }
    }

    /// A fresh table with an explicit key map into the base table.
    pub fn with_key_map(
        sheaf: &Sheaf,
        base: &SimplexId,
        rows: Vec<(Key, Tuple)>,
        map: &KeyMap,
    ) -> Result<Selection, QueryError> {
        let table = sheaf
            .concrete(base)
            .ok_or_else(|| QueryError::MissingTable(base.clone()))?;
        ConcreteTable::new(base.clone(), rows.clone()).map_err(QueryError::Sheaf)?;
        let mut out = Vec::new();
        for (k, t) in rows {
            let target = map
                .get(&k)
                .ok_or_else(|| QueryError::UnknownKey { simplex: base.clone(), key: k.clone() })?;
            match table.get(target) {
                Some(bt) if *bt == t => {}
                Some(_) => {
                    return Err(QueryError::NotInTable { simplex: base.clone(), value: t.to_string() })
                }
                None => return Err(QueryError::UnknownKey { simplex: base.clone(), key: target.clone() }),
            }
            out.push(SelectionRow { key: k, anchor: Some(target.clone()), tuple: t });
        }
        Ok(Selection { base: base.clone(), rows: out })
    }

    /// The whole base table.
    pub fn all(sheaf: &Sheaf, base: &SimplexId) -> Result<Selection, QueryError> {
        let table = sheaf
            .concrete(base)
            .ok_or_else(|| QueryError::MissingTable(base.clone()))?;
        let keys: Vec<Key> = table.keys().cloned().collect();
        Selection::from_keys(sheaf, base, &keys)
    }

    pub fn base(&self) -> &SimplexId {
        &self.base
    }

    pub fn rows(&self) -> &[SelectionRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, key: &Key) -> Option<&Tuple> {
        self.rows.iter().find(|r| &r.key == key).map(|r| &r.tuple)
    }

    pub fn table(&self) -> ConcreteTable {
        ConcreteTable::new(self.base.clone(), self.rows.iter().map(|r| (r.key.clone(), r.tuple.clone())).collect())
            .expect("selection keys are distinct")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub start: SimplexId,
    pub end: SimplexId,
    pub selection: Selection,
    pub end_table: ConcreteTable,
    /// Each end row's originating selection row.
    pub back_map: KeyMap,
    /// Start values beside end values, one row per end row.
    pub graph: ConcreteTable,
}

impl QueryResult {
    /// The graph table; with `dedup`, one row per distinct value.
    pub fn graph_table(&self, dedup: bool) -> ConcreteTable {
        graph_table(self, dedup)
    }
}

pub fn graph_table(result: &QueryResult, dedup: bool) -> ConcreteTable {
    if !dedup {
        return result.graph.clone();
    }
    let mut seen = std::collections::BTreeSet::new();
    let tuples: Vec<Tuple> = result.graph.tuples().filter(|t| seen.insert((*t).clone())).cloned().collect();
    ConcreteTable::from_tuples(result.graph.simplex().clone(), tuples)
}

/// Id used for the graph table's simplex.
pub fn graph_simplex(start: &SimplexId, end: &SimplexId) -> SimplexId {
    SimplexId::new(format!("{start}|{end}"))
}

struct Frontier {
    key: Key,
    back: Key,
    anchor: Option<Key>,
    tuple: Tuple,
}

/// Runs the zigzag on the selection.
pub fn evaluate(sheaf: &Sheaf, zigzag: &Zigzag, selection: &Selection) -> Result<QueryResult, QueryError> {
    let schema = sheaf.schema();
    zigzag.validate(schema)?;
    if selection.base() != &zigzag.start {
        return Err(QueryError::SelectionMismatch {
            selection: selection.base().clone(),
            zigzag: zigzag.start.clone(),
        });
    }
    // a simplex without a table carries the universal one
    let table_at = |s: &SimplexId| -> Result<Cow<'_, Table>, QueryError> {
        match sheaf.table(s) {
            Some(t) => Ok(Cow::Borrowed(t)),
            None => Ok(Cow::Owned(Table::Virtual(sheaf.gamma(s)?))),
        }
    };

    let mut frontier: Vec<Frontier> = selection
        .rows()
        .iter()
        .map(|r| Frontier { key: r.key.clone(), back: r.key.clone(), anchor: r.anchor.clone(), tuple: r.tuple.clone() })
        .collect();
    let mut cur = zigzag.start.clone();

    for (n, step) in zigzag.steps.iter().enumerate() {
        let next = &step.target;
        let here = table_at(&cur)?;
        let there = table_at(next)?;
        let (here, there) = (here.as_ref(), there.as_ref());
        let mut out = Vec::new();
        match step.direction {
            Direction::Descend => {
                for f in frontier {
                    let tuple = f.tuple.without_slots(step.face.deleted());
                    match (there, &f.anchor, here) {
                        (Table::Concrete(_), Some(a), Table::Concrete(_)) => {
                            let anchor = sheaf.compose_key(&cur, &step.face, a).ok_or_else(|| QueryError::BadStep {
                                step: n,
                                detail: format!("no key map image for `{a}` along face {}", step.face),
                            })?;
                            out.push(Frontier { anchor: Some(anchor), tuple, ..f });
                        }
                        (Table::Concrete(t), _, _) => {
                            for k in t.keys_with(&tuple) {
                                out.push(Frontier {
                                    key: Key::pair(&f.key, k),
                                    back: f.back.clone(),
                                    anchor: Some(k.clone()),
                                    tuple: tuple.clone(),
                                });
                            }
                        }
                        (Table::Virtual(v), _, _) => {
                            if v.contains(&tuple) {
                                out.push(Frontier { anchor: None, tuple, ..f });
                            }
                        }
                    }
                }
            }
            Direction::Ascend => match there {
                Table::Concrete(t) => {
                    let by_anchor = matches!(here, Table::Concrete(_));
                    let mut index: BTreeMap<Key, Vec<&Key>> = BTreeMap::new();
                    let mut by_value: BTreeMap<Tuple, Vec<&Key>> = BTreeMap::new();
                    for (k, tup) in t.rows() {
                        if by_anchor {
                            if let Some(img) = sheaf.compose_key(next, &step.face, k) {
                                index.entry(img).or_default().push(k);
                            }
                        }
                        by_value.entry(tup.without_slots(step.face.deleted())).or_default().push(k);
                    }
                    for f in frontier {
                        let hits = match (&f.anchor, by_anchor) {
                            (Some(a), true) => index.get(a),
                            _ => by_value.get(&f.tuple),
                        };
                        for k in hits.into_iter().flatten() {
                            out.push(Frontier {
                                key: Key::pair(&f.key, k),
                                back: f.back.clone(),
                                anchor: Some((*k).clone()),
                                tuple: t.get(k).expect("row").clone(),
                            });
                        }
                    }
                }
                Table::Virtual(_) => {
                    for f in frontier {
                        for (j, c) in sheaf.completions(next, &step.face, &f.tuple)?.into_iter().enumerate() {
                            out.push(Frontier {
                                key: Key::pair(&f.key, &Key::seq(j)),
                                back: f.back.clone(),
                                anchor: None,
                                tuple: c,
                            });
                        }
                    }
                }
            },
        }
        frontier = out;
        cur = next.clone();
    }

    let end_table = ConcreteTable::new(
        cur.clone(),
        frontier.iter().map(|f| (f.key.clone(), f.tuple.clone())).collect(),
    )?;
    let back_map: KeyMap = frontier.iter().map(|f| (f.key.clone(), f.back.clone())).collect();
    let graph = ConcreteTable::new(
        graph_simplex(&zigzag.start, &cur),
        frontier
            .iter()
            .map(|f| {
                let start = selection.get(&f.back).expect("back key");
                (f.key.clone(), start.concat(&f.tuple))
            })
            .collect(),
    )?;
    Ok(QueryResult {
        start: zigzag.start.clone(),
        end: cur,
        selection: selection.clone(),
        end_table,
        back_map,
        graph,
    })
}

/// Outcome of comparing two queries on data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub equal: bool,
    /// A graph value whose multiplicity differs, when not equal.
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub tuple: Tuple,
    pub left_count: usize,
    pub right_count: usize,
}

/// Compares the graph tables of two zigzags as multisets of values.
pub fn queries_equal(
    sheaf: &Sheaf,
    z1: &Zigzag,
    z2: &Zigzag,
    selection: &Selection,
) -> Result<Comparison, QueryError> {
    if z1.start != z2.start || z1.end() != z2.end() {
        return Err(QueryError::EndpointMismatch(format!(
            "`{}`..`{}` versus `{}`..`{}`",
            z1.start,
            z1.end(),
            z2.start,
            z2.end()
        )));
    }
    let a = evaluate(sheaf, z1, selection)?.graph.value_counts();
    let b = evaluate(sheaf, z2, selection)?.graph.value_counts();
    let witness = a
        .keys()
        .chain(b.keys())
        .find(|t| a.get(*t) != b.get(*t))
        .map(|t| Witness {
            tuple: t.clone(),
            left_count: a.get(t).copied().unwrap_or(0),
            right_count: b.get(t).copied().unwrap_or(0),
        });
    Ok(Comparison { equal: witness.is_none(), witness })
}
