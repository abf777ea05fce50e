//! Sheaves of tables: a table per simplex and key maps along face inclusions.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::SheafError;
use crate::schema::{FaceMap, Schema, SimplexId};
use crate::table::{Builtin, ConcreteTable, Table, VirtualTable};
use crate::value::{Key, Tuple, Value};

/// Map from the keys of a table to the keys of one of its face tables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyMap(pub BTreeMap<Key, Key>);

impl KeyMap {
    pub fn get(&self, k: &Key) -> Option<&Key> {
        self.0.get(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Key)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Key, Key)> for KeyMap {
    fn from_iter<I: IntoIterator<Item = (Key, Key)>>(iter: I) -> Self {
        KeyMap(iter.into_iter().collect())
    }
}

/// How `set_table` connects the new rows to the face tables.
#[derive(Clone, Debug, PartialEq)]
pub enum KeyMaps {
    /// Missing face tables are derived as projection images. Existing ones
    /// must equal the image and be duplicate-free.
    Derive,
    /// Like `Derive`, but existing face tables may be larger; each row must
    /// match exactly one face row.
    ByValue,
    /// Caller-supplied maps per face index; other faces behave like `ByValue`.
    Explicit(BTreeMap<usize, KeyMap>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SheafViolation {
    UnknownSimplex(SimplexId),
    Arity { simplex: SimplexId, key: Key, expected: usize, found: usize },
    NonConforming { simplex: SimplexId, key: Key, slot: usize, value: Value },
    MissingKeyMap { simplex: SimplexId, face: usize },
    KeyMapNotTotal { simplex: SimplexId, face: usize, key: Key },
    DanglingTarget { simplex: SimplexId, face: usize, key: Key, target: Key },
    Commuting { simplex: SimplexId, face: usize, key: Key },
    Composition { simplex: SimplexId, i: usize, j: usize, key: Key },
    VirtualFaceMembership { simplex: SimplexId, face: usize, key: Key },
    StrayKeyMap { simplex: SimplexId, face: usize },
}

impl fmt::Display for SheafViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SheafViolation::UnknownSimplex(s) => write!(f, "table over unknown simplex `{s}`"),
            SheafViolation::Arity { simplex, key, expected, found } => {
                write!(f, "row `{key}` of `{simplex}` has {found} values, expected {expected}")
            }
            SheafViolation::NonConforming { simplex, key, slot, value } => {
                write!(f, "row `{key}` of `{simplex}`: `{value}` does not conform at slot {slot}")
            }
            SheafViolation::MissingKeyMap { simplex, face } => {
                write!(f, "no key map for face {face} of `{simplex}`")
            }
            SheafViolation::KeyMapNotTotal { simplex, face, key } => {
                write!(f, "key map for face {face} of `{simplex}` misses `{key}`")
            }
            SheafViolation::DanglingTarget { simplex, face, key, target } => write!(
                f,
                "key map for face {face} of `{simplex}` sends `{key}` to missing key `{target}`"
            ),
            SheafViolation::Commuting { simplex, face, key } => write!(
                f,
                "row `{key}` of `{simplex}` disagrees with its image under face {face}"
            ),
            SheafViolation::Composition { simplex, i, j, key } => write!(
                f,
                "key maps of `{simplex}` do not compose for faces {i} < {j} at `{key}`"
            ),
            SheafViolation::VirtualFaceMembership { simplex, face, key } => write!(
                f,
                "row `{key}` of `{simplex}` projects outside the virtual table of face {face}"
            ),
            SheafViolation::StrayKeyMap { simplex, face } => {
                write!(f, "key map for face {face} of `{simplex}` has no concrete endpoints")
            }
        }
    }
}

/// The universal table of a simplex: every conforming tuple.
pub fn gamma(schema: &Schema, simplex: &SimplexId) -> Result<VirtualTable, SheafError> {
    let types = schema.slot_types(simplex)?;
    VirtualTable::new(simplex.clone(), Builtin::Gamma, types)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sheaf {
    schema: Schema,
    tables: BTreeMap<SimplexId, Table>,
    key_maps: BTreeMap<(SimplexId, usize), KeyMap>,
}

impl Sheaf {
    pub fn new(schema: Schema) -> Self {
        Sheaf { schema, tables: BTreeMap::new(), key_maps: BTreeMap::new() }
    }

    /// Assembles a sheaf without checks; see [`Sheaf::validate`].
    pub fn from_parts(
        schema: Schema,
        tables: BTreeMap<SimplexId, Table>,
        key_maps: BTreeMap<(SimplexId, usize), KeyMap>,
    ) -> Self {
        Sheaf { schema, tables, key_maps }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn table(&self, simplex: &SimplexId) -> Option<&Table> {
        self.tables.get(simplex)
    }

    pub fn concrete(&self, simplex: &SimplexId) -> Option<&ConcreteTable> {
        self.tables.get(simplex).and_then(Table::as_concrete)
    }

    pub fn tables(&self) -> &BTreeMap<SimplexId, Table> {
        &self.tables
    }

    pub fn key_map(&self, simplex: &SimplexId, face: usize) -> Option<&KeyMap> {
        self.key_maps.get(&(simplex.clone(), face))
    }

    pub fn key_maps(&self) -> &BTreeMap<(SimplexId, usize), KeyMap> {
        &self.key_maps
    }

    /// Follows a composite face map through the key maps.
    pub fn compose_key(&self, simplex: &SimplexId, face: &FaceMap, key: &Key) -> Option<Key> {
        let mut cur = simplex.clone();
        let mut k = key.clone();
        for &slot in face.deleted().iter().rev() {
            k = self.key_map(&cur, slot)?.get(&k)?.clone();
            cur = self.schema.get(&cur).ok()?.faces.get(slot)?.clone();
        }
        Some(k)
    }

    pub fn gamma(&self, simplex: &SimplexId) -> Result<VirtualTable, SheafError> {
        gamma(&self.schema, simplex)
    }

    /// Rows with keys `0`, `1`, ... and derived face tables.
    pub fn set_tuples(&self, simplex: &SimplexId, tuples: Vec<Tuple>) -> Result<Sheaf, SheafError> {
        let rows = tuples.into_iter().enumerate().map(|(i, t)| (Key::seq(i), t)).collect();
        self.set_table(simplex, rows, KeyMaps::Derive)
    }

    /// Stores a concrete table over `simplex` and connects it to its faces.
    pub fn set_table(
        &self,
        simplex: &SimplexId,
        rows: Vec<(Key, Tuple)>,
        maps: KeyMaps,
    ) -> Result<Sheaf, SheafError> {
        let table = ConcreteTable::new(simplex.clone(), rows)?;
        self.check_conforms(&table)?;
        let mut out = self.replaceable(simplex)?;
        out.tables.insert(simplex.clone(), Table::Concrete(table));
        match maps {
            KeyMaps::Derive => out.connect_faces(simplex, true, &BTreeMap::new())?,
            KeyMaps::ByValue => out.connect_faces(simplex, false, &BTreeMap::new())?,
            KeyMaps::Explicit(given) => out.connect_faces(simplex, false, &given)?,
        }
        let report = out.validate();
        if report.is_empty() {
            Ok(out)
        } else {
            Err(SheafError::Invalid(report))
        }
    }

    /// Stores a builtin relation over `simplex`.
    pub fn set_virtual(&self, simplex: &SimplexId, builtin: Builtin) -> Result<Sheaf, SheafError> {
        let types = self.schema.slot_types(simplex)?;
        let table = VirtualTable::new(simplex.clone(), builtin, types)?;
        let mut out = self.replaceable(simplex)?;
        out.tables.insert(simplex.clone(), Table::Virtual(table));
        let report = out.validate();
        if report.is_empty() {
            Ok(out)
        } else {
            Err(SheafError::Invalid(report))
        }
    }

    /// A copy with the table over `simplex` (and its outgoing key maps) removed,
    /// unless some coface still maps into it.
    fn replaceable(&self, simplex: &SimplexId) -> Result<Sheaf, SheafError> {
        let cofaces = self.schema.cofaces(simplex)?;
        if cofaces.iter().any(|(z, i)| self.key_maps.contains_key(&(z.clone(), *i))) {
            return Err(SheafError::TableInUse(simplex.clone()));
        }
        let mut out = self.clone();
        out.tables.remove(simplex);
        out.key_maps.retain(|(s, _), _| s != simplex);
        Ok(out)
    }

    fn check_conforms(&self, table: &ConcreteTable) -> Result<(), SheafError> {
        let types = self.schema.slot_types(table.simplex())?;
        for (k, t) in table.rows() {
            if t.arity() != types.len() {
                return Err(SheafError::NonConforming {
                    simplex: table.simplex().clone(),
                    key: k.clone(),
                    detail: format!("{} values for {} slots", t.arity(), types.len()),
                });
            }
            for (slot, (v, ty)) in t.values().iter().zip(&types).enumerate() {
                if !ty.conforms(v) {
                    return Err(SheafError::NonConforming {
                        simplex: table.simplex().clone(),
                        key: k.clone(),
                        detail: format!("`{v}` at slot {slot} is not a `{}`", ty.name()),
                    });
                }
            }
        }
        Ok(())
    }

    fn connect_faces(
        &mut self,
        simplex: &SimplexId,
        strict: bool,
        given: &BTreeMap<usize, KeyMap>,
    ) -> Result<(), SheafError> {
        let s = self.schema.get(simplex)?.clone();
        if let Some(&bad) = given.keys().find(|&&i| i >= s.faces.len()) {
            return Err(SheafError::FaceIndex { simplex: simplex.clone(), index: bad });
        }
        if s.dim == 0 {
            return Ok(());
        }
        let table = self.concrete(simplex).expect("just stored").clone();

        // face id -> face indices landing on it, in index order
        let mut by_face: Vec<(SimplexId, Vec<usize>)> = Vec::new();
        for (i, f) in s.faces.iter().enumerate() {
            match by_face.iter_mut().find(|(g, _)| g == f) {
                Some((_, idx)) => idx.push(i),
                None => by_face.push((f.clone(), vec![i])),
            }
        }

        for (face, idxs) in by_face {
            let auto: Vec<usize> = idxs.iter().copied().filter(|i| !given.contains_key(i)).collect();
            for &i in idxs.iter().filter(|i| given.contains_key(i)) {
                let ft = self
                    .concrete(&face)
                    .ok_or(SheafError::MissingFaceTable { simplex: simplex.clone(), face: i })?;
                let map = &given[&i];
                for (k, t) in table.rows() {
                    let target = map
                        .get(k)
                        .ok_or_else(|| SheafError::NotTotal { simplex: simplex.clone(), face: i, key: k.clone() })?;
                    match ft.get(target) {
                        None => {
                            return Err(SheafError::NoFaceRow { simplex: simplex.clone(), face: i, key: k.clone() })
                        }
                        Some(ftup) if *ftup != t.without(i) => {
                            return Err(SheafError::Commuting { simplex: simplex.clone(), face: i, key: k.clone() })
                        }
                        Some(_) => {}
                    }
                }
                self.key_maps.insert((simplex.clone(), i), map.clone());
            }
            if auto.is_empty() {
                continue;
            }
            let mut image: Vec<Tuple> = Vec::new();
            for &i in &auto {
                for t in table.tuples() {
                    let p = t.without(i);
                    if !image.contains(&p) {
                        image.push(p);
                    }
                }
            }
            match self.tables.get(&face) {
                None => {
                    let derived = ConcreteTable::from_tuples(face.clone(), image.clone());
                    self.tables.insert(face.clone(), Table::Concrete(derived));
                    self.connect_faces(&face, strict, &BTreeMap::new())?;
                }
                Some(Table::Virtual(v)) => {
                    for &i in &auto {
                        for (k, t) in table.rows() {
                            if !v.contains(&t.without(i)) {
                                return Err(SheafError::NonConforming {
                                    simplex: simplex.clone(),
                                    key: k.clone(),
                                    detail: format!("face {i} projects outside `{}`", v.description()),
                                });
                            }
                        }
                    }
                    continue;
                }
                Some(Table::Concrete(ft)) => {
                    if strict {
                        let mut have: Vec<&Tuple> = ft.tuples().collect();
                        have.sort();
                        let mut want: Vec<&Tuple> = image.iter().collect();
                        want.sort();
                        if have != want {
                            return Err(SheafError::FaceMismatch { simplex: simplex.clone(), face: auto[0] });
                        }
                    }
                }
            }
            let ft = self.concrete(&face).expect("concrete face").clone();
            for &i in &auto {
                let mut map = BTreeMap::new();
                for (k, t) in table.rows() {
                    let hits = ft.keys_with(&t.without(i));
                    match hits.as_slice() {
                        [one] => {
                            map.insert(k.clone(), (*one).clone());
                        }
                        [] => {
                            return Err(SheafError::NoFaceRow { simplex: simplex.clone(), face: i, key: k.clone() })
                        }
                        _ => {
                            return Err(SheafError::AmbiguousFaceRow {
                                simplex: simplex.clone(),
                                face: i,
                                key: k.clone(),
                            })
                        }
                    }
                }
                self.key_maps.insert((simplex.clone(), i), KeyMap(map));
            }
        }
        Ok(())
    }

    /// Column projection along face `i`: same keys, slot `i` removed.
    pub fn project_table(
        &self,
        coface: &SimplexId,
        i: usize,
        table: &ConcreteTable,
    ) -> Result<ConcreteTable, SheafError> {
        project_table(&self.schema, coface, i, table)
    }

    /// The fiber product of `table` (over face `i` of `coface`) with the
    /// virtual table of `coface`, or with its universal table when it has none.
    pub fn pushforward_universal(
        &self,
        coface: &SimplexId,
        i: usize,
        table: &ConcreteTable,
    ) -> Result<ConcreteTable, SheafError> {
        let s = self.schema.get(coface)?;
        if i >= s.faces.len() {
            return Err(SheafError::FaceIndex { simplex: coface.clone(), index: i });
        }
        if table.simplex() != &s.faces[i] {
            return Err(SheafError::SimplexMismatch(table.simplex().clone(), s.faces[i].clone()));
        }
        let fm = FaceMap::single(i);
        let mut rows = Vec::new();
        for (k, t) in table.rows() {
            for (j, c) in self.completions(coface, &fm, t)?.into_iter().enumerate() {
                rows.push((Key::pair(k, &Key::seq(j)), c));
            }
        }
        ConcreteTable::new(coface.clone(), rows)
    }

    /// Tuples over `coface` that project to `t` along `face`, drawn from the
    /// coface's virtual table or its universal table.
    pub fn completions(&self, coface: &SimplexId, face: &FaceMap, t: &Tuple) -> Result<Vec<Tuple>, SheafError> {
        let v = match self.tables.get(coface) {
            Some(Table::Virtual(v)) => v.clone(),
            _ => self.gamma(coface)?,
        };
        let dim = v.arity() - 1;
        let retained = face.retained(dim);
        if retained.len() != t.arity() {
            return Err(SheafError::BadBuiltin(format!(
                "tuple {t} does not fit face {face} of `{coface}`"
            )));
        }
        let mut partial = vec![None; v.arity()];
        for (slot, val) in retained.iter().zip(t.values()) {
            partial[*slot] = Some(val.clone());
        }
        v.complete(&partial)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Checks conformance, key-map totality, commuting and composition.
    pub fn validate(&self) -> Vec<SheafViolation> {
        let mut out = Vec::new();
        for (id, table) in &self.tables {
            let Ok(types) = self.schema.slot_types(id) else {
                out.push(SheafViolation::UnknownSimplex(id.clone()));
                continue;
            };
            match table {
                Table::Concrete(t) => {
                    for (k, tup) in t.rows() {
                        if tup.arity() != types.len() {
                            out.push(SheafViolation::Arity {
                                simplex: id.clone(),
                                key: k.clone(),
                                expected: types.len(),
                                found: tup.arity(),
                            });
                            continue;
                        }
                        for (slot, (v, ty)) in tup.values().iter().zip(&types).enumerate() {
                            if !ty.conforms(v) {
                                out.push(SheafViolation::NonConforming {
                                    simplex: id.clone(),
                                    key: k.clone(),
                                    slot,
                                    value: v.clone(),
                                });
                            }
                        }
                    }
                }
                Table::Virtual(v) => {
                    if v.arity() != types.len() {
                        out.push(SheafViolation::Arity {
                            simplex: id.clone(),
                            key: Key::new("*"),
                            expected: types.len(),
                            found: v.arity(),
                        });
                    }
                }
            }
        }
        for ((id, i), _) in &self.key_maps {
            let ok = self.concrete(id).is_some()
                && self
                    .schema
                    .get(id)
                    .ok()
                    .and_then(|s| s.faces.get(*i))
                    .is_some_and(|f| self.concrete(f).is_some());
            if !ok {
                out.push(SheafViolation::StrayKeyMap { simplex: id.clone(), face: *i });
            }
        }
        for (id, table) in &self.tables {
            let Table::Concrete(t) = table else { continue };
            let Ok(s) = self.schema.get(id) else { continue };
            for (i, f) in s.faces.iter().enumerate() {
                match self.tables.get(f) {
                    None => {}
                    Some(Table::Virtual(v)) => {
                        for (k, tup) in t.rows() {
                            if tup.arity() == s.dim + 1 && !v.contains(&tup.without(i)) {
                                out.push(SheafViolation::VirtualFaceMembership {
                                    simplex: id.clone(),
                                    face: i,
                                    key: k.clone(),
                                });
                            }
                        }
                    }
                    Some(Table::Concrete(ft)) => {
                        let Some(map) = self.key_map(id, i) else {
                            out.push(SheafViolation::MissingKeyMap { simplex: id.clone(), face: i });
                            continue;
                        };
                        for (k, tup) in t.rows() {
                            let Some(target) = map.get(k) else {
                                out.push(SheafViolation::KeyMapNotTotal {
                                    simplex: id.clone(),
                                    face: i,
                                    key: k.clone(),
                                });
                                continue;
                            };
                            match ft.get(target) {
                                None => out.push(SheafViolation::DanglingTarget {
                                    simplex: id.clone(),
                                    face: i,
                                    key: k.clone(),
                                    target: target.clone(),
                                }),
                                Some(ftup) => {
                                    if tup.arity() == s.dim + 1 && *ftup != tup.without(i) {
                                        out.push(SheafViolation::Commuting {
                                            simplex: id.clone(),
                                            face: i,
                                            key: k.clone(),
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
            // r_i(face_j) . r_j = r_{j-1}(face_i) . r_i
            if s.dim < 2 {
                continue;
            }
            for j in 1..=s.dim {
                for i in 0..j {
                    for (k, _) in t.rows() {
                        let lhs = self
                            .key_map(id, j)
                            .and_then(|m| m.get(k))
                            .and_then(|kj| self.key_map(&s.faces[j], i).and_then(|m| m.get(kj)));
                        let rhs = self
                            .key_map(id, i)
                            .and_then(|m| m.get(k))
                            .and_then(|ki| self.key_map(&s.faces[i], j - 1).and_then(|m| m.get(ki)));
                        if let (Some(a), Some(b)) = (lhs, rhs) {
                            if a != b {
                                out.push(SheafViolation::Composition {
                                    simplex: id.clone(),
                                    i,
                                    j,
                                    key: k.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub(crate) fn ensure_valid(&self) -> Result<(), SheafError> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(SheafError::Invalid(report))
        }
    }
}

/// Column projection along face `i` of `coface`: same keys, slot `i` removed.
pub fn project_table(
    schema: &Schema,
    coface: &SimplexId,
    i: usize,
    table: &ConcreteTable,
) -> Result<ConcreteTable, SheafError> {
    let s = schema.get(coface)?;
    if i >= s.faces.len() {
        return Err(SheafError::FaceIndex { simplex: coface.clone(), index: i });
    }
    if table.simplex() != coface {
        return Err(SheafError::SimplexMismatch(table.simplex().clone(), coface.clone()));
    }
    Ok(table.map_tuples(|t| t.without(i)).with_simplex(s.faces[i].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Simplex;
    use crate::tuple;
    use crate::value::{DataType, Registry};

    fn sid(s: &str) -> SimplexId {
        SimplexId::from(s)
    }

    fn int_edge() -> Schema {
        let r = Registry::new().with(DataType::integer("int")).unwrap();
        Schema::representable_named(&r, &[("s", "int"), ("t", "int")]).unwrap()
    }

    #[test]
    fn derived_face_tables() {
        let sh = Sheaf::new(int_edge()).set_tuples(&sid("st"), vec![tuple![10, 13]]).unwrap();
        assert_eq!(sh.concrete(&sid("s")).unwrap().tuples().cloned().collect::<Vec<_>>(), vec![tuple![10]]);
        assert_eq!(sh.concrete(&sid("t")).unwrap().tuples().cloned().collect::<Vec<_>>(), vec![tuple![13]]);
        assert!(sh.validate().is_empty());

        let r = Registry::new().with(DataType::text("name")).unwrap();
        let tri = Schema::representable_named(&r, &[("F", "name"), ("L", "name"), ("S", "name")]).unwrap();
        let empty = Sheaf::new(tri).set_tuples(&sid("FLS"), vec![]).unwrap();
        for f in ["FL", "FS", "LS", "F", "L", "S"] {
            assert!(empty.concrete(&sid(f)).unwrap().is_empty());
        }
    }

    #[test]
    fn explicit_key_maps_must_commute() {
        let sh = Sheaf::new(int_edge())
            .set_tuples(&sid("s"), vec![tuple![10]])
            .unwrap()
            .set_tuples(&sid("t"), vec![tuple![13], tuple![14]])
            .unwrap();
        let rows = vec![(Key::new("a"), tuple![10, 13]), (Key::new("b"), tuple![10, 13])];
        let to_t = |t: &str| {
            KeyMap::from_iter([(Key::new("a"), Key::new("0")), (Key::new("b"), Key::new(t))])
        };
        let ok = sh.set_table(&sid("st"), rows.clone(), KeyMaps::Explicit(BTreeMap::from([(0, to_t("0"))])));
        assert!(ok.is_ok());
        let bad = sh.set_table(&sid("st"), rows, KeyMaps::Explicit(BTreeMap::from([(0, to_t("1"))])));
        assert!(matches!(bad, Err(SheafError::Commuting { .. })));
    }

    #[test]
    fn derive_rejects_mismatched_faces_and_by_value_accepts_supertables() {
        let sh = Sheaf::new(int_edge()).set_tuples(&sid("s"), vec![tuple![10], tuple![11]]).unwrap();
        assert!(matches!(
            sh.set_tuples(&sid("st"), vec![tuple![10, 13]]),
            Err(SheafError::FaceMismatch { .. })
        ));
        let rows = vec![(Key::seq(0), tuple![10, 13])];
        assert!(sh.set_table(&sid("st"), rows, KeyMaps::ByValue).is_ok());
    }

    #[test]
    fn injected_defects_are_reported() {
        let sh = Sheaf::new(int_edge()).set_tuples(&sid("st"), vec![tuple![10, 13], tuple![11, 13]]).unwrap();
        let mut maps = sh.key_maps.clone();
        maps.get_mut(&(sid("st"), 0)).unwrap().0.insert(Key::seq(0), Key::seq(5));
        let broken = Sheaf::from_parts(sh.schema.clone(), sh.tables.clone(), maps);
        assert!(matches!(broken.validate().as_slice(), [SheafViolation::DanglingTarget { .. }]));

        let mut tables = sh.tables.clone();
        tables.insert(
            sid("st"),
            Table::Concrete(ConcreteTable::from_tuples(sid("st"), vec![tuple![10, 14], tuple![11, 13]])),
        );
        let broken = Sheaf::from_parts(sh.schema.clone(), tables, sh.key_maps.clone());
        assert_eq!(
            broken.validate(),
            vec![SheafViolation::Commuting { simplex: sid("st"), face: 0, key: Key::seq(0) }]
        );

        let mut tables = sh.tables.clone();
        tables.insert(sid("s"), Table::Concrete(ConcreteTable::from_tuples(sid("s"), vec![tuple!["x"], tuple![11]])));
        let broken = Sheaf::from_parts(sh.schema.clone(), tables, sh.key_maps.clone());
        let report = broken.validate();
        assert!(report.iter().any(|v| matches!(v, SheafViolation::NonConforming { .. })));
    }

    #[test]
    fn non_conforming_rows_are_rejected() {
        let err = Sheaf::new(int_edge()).set_tuples(&sid("st"), vec![tuple!["x", 1]]);
        assert!(matches!(err, Err(SheafError::NonConforming { .. })));
    }

    #[test]
    fn projection_and_pushforward() {
        let sh = Sheaf::new(int_edge()).set_virtual(&sid("st"), Builtin::difference(3)).unwrap();
        let t = ConcreteTable::from_tuples(sid("s"), vec![tuple![10]]);
        // face 1 of st deletes t, leaving s
        let up = sh.pushforward_universal(&sid("st"), 1, &t).unwrap();
        assert_eq!(up.tuples().cloned().collect::<Vec<_>>(), vec![tuple![10, 13]]);
        let down = sh.project_table(&sid("st"), 1, &up).unwrap();
        assert_eq!(down.simplex(), &sid("s"));
        assert_eq!(down.tuples().cloned().collect::<Vec<_>>(), vec![tuple![10]]);
        let none = sh.pushforward_universal(&sid("st"), 1, &ConcreteTable::empty(sid("s"))).unwrap();
        assert!(none.is_empty());
        assert!(matches!(sh.project_table(&sid("st"), 2, &up), Err(SheafError::FaceIndex { .. })));

        let plain = Sheaf::new(int_edge());
        assert!(matches!(
            plain.pushforward_universal(&sid("st"), 1, &t),
            Err(SheafError::NotEnumerable { .. })
        ));
    }

    #[test]
    fn addition_summands_pushforward() {
        let r = Registry::new().with(DataType::integer("int")).unwrap();
        let tri = Schema::representable_named(&r, &[("a", "int"), ("b", "int"), ("c", "int")]).unwrap();
        let sh = Sheaf::new(tri).set_virtual(&sid("abc"), Builtin::addition()).unwrap();
        let t = ConcreteTable::from_tuples(sid("ab"), vec![tuple![2, 3]]);
        let up = sh.pushforward_universal(&sid("abc"), 2, &t).unwrap();
        assert_eq!(up.tuples().cloned().collect::<Vec<_>>(), vec![tuple![2, 3, 5]]);
    }

    #[test]
    fn gamma_tables() {
        let r = Registry::new().with(DataType::enumerated("yn", ["yes", "no"])).unwrap();
        let e = Schema::representable_named(&r, &[("p", "yn"), ("q", "yn")]).unwrap();
        assert_eq!(gamma(&e, &sid("p")).unwrap().enumerate().unwrap().len(), 2);
        assert_eq!(gamma(&e, &sid("pq")).unwrap().enumerate().unwrap().len(), 4);
        assert!(gamma(&e, &sid("zz")).is_err());
    }

    #[test]
    fn loop_edges_derive_one_vertex_table() {
        let r = Registry::new().with(DataType::enumerated("people", ["a", "b", "c"])).unwrap();
        let s = Schema::from_parts(r, vec![Simplex::vertex("P", "people"), Simplex::with_faces("E", ["P", "P"])])
            .unwrap();
        let sh = Sheaf::new(s)
            .set_tuples(&sid("E"), vec![tuple!["a", "b"], tuple!["b", "a"], tuple!["b", "c"], tuple!["c", "b"]])
            .unwrap();
        assert_eq!(sh.concrete(&sid("P")).unwrap().len(), 3);
        assert!(sh.validate().is_empty());
        assert!(matches!(
            sh.set_tuples(&sid("P"), vec![tuple!["a"]]),
            Err(SheafError::TableInUse(_))
        ));
    }
}
